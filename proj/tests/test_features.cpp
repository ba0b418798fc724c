#include <doctest.h>

#include "rbmfeat/features.hpp"
#include "test_util.hpp"

using namespace rbmf;
using namespace rbmf::testutil;

TEST_CASE("stack_context") {
    SUBCASE("single frame, C=3, replicate fills every slot with the frame") {
        Mat frames(1, 2);
        frames << 1.5, -2.0;
        StackSpec spec{3, Layout::Flat, EdgePolicy::Replicate};
        const Mat out = stack_context(frames, spec);
        REQUIRE(out.rows() == 1);
        REQUIRE(out.cols() == 6);
        for (int c = 0; c < 3; ++c) {
            CHECK(out(0, c * 2 + 0) == 1.5);
            CHECK(out(0, c * 2 + 1) == -2.0);
        }
    }
    SUBCASE("hand-traced block layout, T=3, D=2, C=3") {
        Mat frames(3, 2);
        frames << 11, 21, 12, 22, 13, 23;  // f_t[d] = d*10 + t
        StackSpec spec{3, Layout::Block, EdgePolicy::Replicate};
        const Mat out = stack_context(frames, spec);
        REQUIRE(out.rows() == 3);
        REQUIRE(out.cols() == 6);
        // middle frame: unit 1 = (f1[1], f2[1], f3[1]), unit 2 likewise
        CHECK(out(1, 0) == 11);
        CHECK(out(1, 1) == 12);
        CHECK(out(1, 2) == 13);
        CHECK(out(1, 3) == 21);
        CHECK(out(1, 4) == 22);
        CHECK(out(1, 5) == 23);
    }
    SUBCASE("paper-scale shapes: D=39, C=9 gives 351 flat dims") {
        Rng rng(1);
        Mat frames = Mat::NullaryExpr(20, 39, [&] {
            return std::uniform_real_distribution<double>(-1, 1)(rng);
        });
        StackSpec flat{9, Layout::Flat, EdgePolicy::Replicate};
        StackSpec block{9, Layout::Block, EdgePolicy::Replicate};
        CHECK(stack_context(frames, flat).cols() == 351);
        CHECK(stack_context(frames, block).cols() == 351);  // 39 units x 9
    }
    SUBCASE("block layout is a fixed permutation of flat layout") {
        Rng rng(3);
        Mat frames = Mat::NullaryExpr(7, 4, [&] {
            return std::uniform_real_distribution<double>(-1, 1)(rng);
        });
        const int c = 3, d = 4;
        StackSpec flat{c, Layout::Flat, EdgePolicy::Replicate};
        StackSpec block{c, Layout::Block, EdgePolicy::Replicate};
        const Mat a = stack_context(frames, flat);
        const Mat b = stack_context(frames, block);
        for (int w = 0; w < c; ++w) {
            for (int j = 0; j < d; ++j) {
                CHECK((a.col(w * d + j) - b.col(j * c + w)).norm() == 0.0);
            }
        }
    }
    SUBCASE("interior frames identical across edge policies") {
        Rng rng(5);
        Mat frames = Mat::NullaryExpr(9, 2, [&] {
            return std::uniform_real_distribution<double>(-1, 1)(rng);
        });
        StackSpec rep{5, Layout::Flat, EdgePolicy::Replicate};
        StackSpec zp{5, Layout::Flat, EdgePolicy::ZeroPad};
        StackSpec drop{5, Layout::Flat, EdgePolicy::Drop};
        const Mat a = stack_context(frames, rep);
        const Mat b = stack_context(frames, zp);
        const Mat c = stack_context(frames, drop);
        REQUIRE(c.rows() == 5);  // frames 2..6
        for (int t = 0; t < 5; ++t) {
            CHECK((a.row(t + 2) - c.row(t)).norm() == 0.0);
            CHECK((b.row(t + 2) - c.row(t)).norm() == 0.0);
        }
    }
    SUBCASE("drop with too few frames is an error") {
        Mat frames(2, 3);
        frames.setZero();
        StackSpec spec{5, Layout::Flat, EdgePolicy::Drop};
        CHECK_THROWS_AS(stack_context(frames, spec), std::invalid_argument);
    }
    SUBCASE("even context is rejected") {
        Mat frames(4, 2);
        frames.setZero();
        StackSpec spec{4, Layout::Flat, EdgePolicy::Replicate};
        CHECK_THROWS_AS(stack_context(frames, spec), std::invalid_argument);
    }
}

TEST_CASE("normalizer") {
    Rng rng(7);
    Mat data = Mat::NullaryExpr(500, 4, [&] {
        return std::normal_distribution<double>(2.0, 3.0)(rng);
    });
    SUBCASE("fit-apply-refit is the identity up to tolerance") {
        const NormStats stats = fit_normalizer(data);
        const Mat normalized = apply_normalizer(stats, data);
        const NormStats refit = fit_normalizer(normalized);
        CHECK(refit.mean.lpNorm<Eigen::Infinity>() <= 1e-10);
        CHECK((refit.stddev.array() - 1.0).abs().maxCoeff() <= 1e-8);
    }
    SUBCASE("constant dimension hits the floor and maps to zero") {
        data.col(2).setConstant(5.0);
        const NormStats stats = fit_normalizer(data);
        CHECK(stats.stddev[2] == 1e-8);
        const Mat normalized = apply_normalizer(stats, data);
        CHECK(normalized.col(2).lpNorm<Eigen::Infinity>() == 0.0);
    }
    SUBCASE("empty dataset is rejected") {
        CHECK_THROWS_AS(fit_normalizer(Mat(0, 3)), std::invalid_argument);
    }
}

TEST_CASE("extract") {
    Rng rng(9);
    SUBCASE("zero-parameter model maps everything to 0.5") {
        const GrbmParams g{Mat::Zero(4, 3), Vec::Zero(4), Vec::Zero(3),
                           Vec::Ones(4)};
        Mat data = Mat::NullaryExpr(10, 4, [&] {
            return std::uniform_real_distribution<double>(-1, 1)(rng);
        });
        const Mat f = extract(ModelParams{g}, data);
        CHECK((f.array() == 0.5).all());
    }
    SUBCASE("rows equal per-vector hidden posteriors, permutation-equivariant") {
        const ModelParams m = random_grbm(4, 3, rng);
        Mat data = Mat::NullaryExpr(6, 4, [&] {
            return std::uniform_real_distribution<double>(-1, 1)(rng);
        });
        const Mat f = extract(m, data);
        for (int t = 0; t < 6; ++t) {
            CHECK((f.row(t).transpose() -
                   hidden_posterior(m, data.row(t).transpose()))
                      .lpNorm<Eigen::Infinity>() <= 1e-14);
        }
        Mat reversed = data.colwise().reverse();
        const Mat fr = extract(m, reversed);
        CHECK((fr - f.colwise().reverse()).norm() == 0.0);
    }
    SUBCASE("dimension mismatch is an error") {
        const ModelParams m = random_grbm(4, 3, rng);
        CHECK_THROWS_AS(extract(m, Mat::Zero(5, 7)), std::invalid_argument);
    }
}

TEST_CASE("pca") {
    Rng rng(11);
    SUBCASE("rank-1 data: one component covers everything") {
        const Vec direction = random_real(5, rng).normalized();
        Mat data(200, 5);
        for (int r = 0; r < 200; ++r) {
            const double t = std::normal_distribution<double>(0, 2)(rng);
            data.row(r) = t * direction.transpose();
            for (int c = 0; c < 5; ++c) {
                data(r, c) += 1e-8 * std::normal_distribution<double>()(rng);
            }
        }
        const PcaModel pca = pca_fit(data, 1);
        CHECK(pca.coverage >= 0.999999);
    }
    SUBCASE("orthonormal components and descending spectrum") {
        Mat data = Mat::NullaryExpr(300, 6, [&] {
            return std::normal_distribution<double>()(rng);
        });
        const PcaModel pca = pca_fit(data, 4);
        const Mat gram = pca.components.transpose() * pca.components;
        CHECK((gram - Mat::Identity(4, 4)).lpNorm<Eigen::Infinity>() <= 1e-10);
        for (int k = 1; k < pca.eigenvalues.size(); ++k) {
            CHECK(pca.eigenvalues[k] <= pca.eigenvalues[k - 1] + 1e-12);
        }
        CHECK(pca.eigenvalues.minCoeff() >= 0.0);
        CHECK(pca.coverage >= 0.0);
        CHECK(pca.coverage <= 1.0);
    }
    SUBCASE("full-dimensional projection reconstructs the input") {
        Mat data = Mat::NullaryExpr(100, 4, [&] {
            return std::normal_distribution<double>()(rng);
        });
        const PcaModel pca = pca_fit(data, 4);
        const Mat reduced = pca_apply(pca, data);
        const Mat recon =
            (reduced * pca.components.transpose()).rowwise() +
            pca.mean.transpose();
        CHECK((recon - data).lpNorm<Eigen::Infinity>() <= 1e-8);
    }
    SUBCASE("projected column variances match the eigenvalues") {
        // anisotropic synthetic data with known axis variances 4, 1, 0.25
        Mat data(100000, 3);
        for (int r = 0; r < data.rows(); ++r) {
            data(r, 0) = 2.0 * std::normal_distribution<double>()(rng);
            data(r, 1) = std::normal_distribution<double>()(rng);
            data(r, 2) = 0.5 * std::normal_distribution<double>()(rng);
        }
        const PcaModel pca = pca_fit(data, 3);
        const Mat reduced = pca_apply(pca, data);
        for (int k = 0; k < 3; ++k) {
            const double mean = reduced.col(k).mean();
            const double var = (reduced.col(k).array() - mean).square().mean();
            CHECK(std::abs(var - pca.eigenvalues[k]) <=
                  0.02 * pca.eigenvalues[k]);
        }
    }
    SUBCASE("out_dim larger than input_dim is rejected") {
        CHECK_THROWS_AS(pca_fit(Mat::Zero(10, 3), 4), std::invalid_argument);
    }
    SUBCASE("sign convention is deterministic") {
        Mat data = Mat::NullaryExpr(50, 3, [&] {
            return std::normal_distribution<double>()(rng);
        });
        const PcaModel a = pca_fit(data, 2);
        const PcaModel b = pca_fit(data, 2);
        CHECK((a.components - b.components).norm() == 0.0);
        for (int k = 0; k < 2; ++k) {
            Eigen::Index imax;
            a.components.col(k).cwiseAbs().maxCoeff(&imax);
            CHECK(a.components(imax, k) > 0.0);
        }
    }
}
