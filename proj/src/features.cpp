#include "rbmfeat/features.hpp"

#include <stdexcept>

namespace rbmf {

Mat stack_context(const Mat& frames, const StackSpec& spec) {
    const int t_count = static_cast<int>(frames.rows());
    const int dim = static_cast<int>(frames.cols());
    const int c = spec.context;
    if (c < 1 || c % 2 == 0) {
        throw std::invalid_argument("context length must be odd and positive");
    }
    if (t_count < 1 || dim < 1) {
        throw std::invalid_argument("empty frame matrix");
    }
    const int half = (c - 1) / 2;

    int first = 0;
    int last = t_count;  // exclusive
    if (spec.edge == EdgePolicy::Drop) {
        first = half;
        last = t_count - half;
        if (first >= last) {
            throw std::invalid_argument(
                "drop edge policy leaves no frames with a full window");
        }
    }

    Mat out(last - first, dim * c);
    for (int t = first; t < last; ++t) {
        for (int w = 0; w < c; ++w) {
            int src = t + w - half;
            bool zero = false;
            if (src < 0 || src >= t_count) {
                if (spec.edge == EdgePolicy::Replicate) {
                    src = std::clamp(src, 0, t_count - 1);
                } else {  // ZeroPad
                    zero = true;
                }
            }
            for (int j = 0; j < dim; ++j) {
                const double val = zero ? 0.0 : frames(src, j);
                const int slot =
                    spec.layout == Layout::Flat ? w * dim + j : j * c + w;
                out(t - first, slot) = val;
            }
        }
    }
    return out;
}

NormStats fit_normalizer(const Mat& data) {
    if (data.rows() == 0) throw std::invalid_argument("empty dataset");
    NormStats s;
    s.mean = data.colwise().mean();
    const Mat centered = data.rowwise() - s.mean.transpose();
    // population standard deviation
    Vec var = centered.array().square().colwise().mean();
    s.stddev = var.array().sqrt().max(1e-8);
    return s;
}

Mat apply_normalizer(const NormStats& stats, const Mat& data) {
    if (data.cols() != stats.mean.size()) {
        throw std::invalid_argument("normalizer dimension mismatch");
    }
    return (data.rowwise() - stats.mean.transpose()).array().rowwise() /
           stats.stddev.transpose().array();
}

Mat extract(const ModelParams& m, const Mat& stacked) {
    if (stacked.cols() != visible_dim(m)) {
        throw std::invalid_argument(
            "stacked feature dimension does not match model visible layer");
    }
    return hidden_posterior_batch(m, stacked);
}

PcaModel pca_fit(const Mat& features, int out_dim) {
    const int input_dim = static_cast<int>(features.cols());
    if (out_dim < 1 || out_dim > input_dim) {
        throw std::invalid_argument("pca out_dim out of range");
    }
    if (features.rows() < 2) {
        throw std::invalid_argument("pca needs at least 2 samples");
    }
    PcaModel pca;
    pca.mean = features.colwise().mean();
    const Mat centered = features.rowwise() - pca.mean.transpose();
    const Mat cov =
        centered.transpose() * centered / static_cast<double>(features.rows());
    Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
    if (eig.info() != Eigen::Success) {
        throw std::runtime_error("pca eigendecomposition failed");
    }
    // ascending from Eigen; store descending with negatives clamped to zero
    pca.eigenvalues = eig.eigenvalues().reverse();
    pca.eigenvalues = pca.eigenvalues.array().max(0.0);
    pca.components = eig.eigenvectors().rowwise().reverse().leftCols(out_dim);
    // sign convention: largest-magnitude entry of each component positive
    for (int k = 0; k < out_dim; ++k) {
        Eigen::Index imax;
        pca.components.col(k).cwiseAbs().maxCoeff(&imax);
        if (pca.components(imax, k) < 0.0) pca.components.col(k) *= -1.0;
    }
    const double total = pca.eigenvalues.sum();
    pca.coverage =
        total > 0.0 ? pca.eigenvalues.head(out_dim).sum() / total : 1.0;
    return pca;
}

Mat pca_apply(const PcaModel& pca, const Mat& features) {
    if (features.cols() != pca.mean.size()) {
        throw std::invalid_argument("pca input dimension mismatch");
    }
    return (features.rowwise() - pca.mean.transpose()) * pca.components;
}

}  // namespace rbmf
