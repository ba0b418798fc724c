#include "rbmfeat/models.hpp"

#include <sstream>
#include <stdexcept>

namespace rbmf {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

void check_shapes(const ModelParams& m, const Vec& v, const Vec& h) {
    require(v.size() == visible_dim(m), "visible state size mismatch");
    require(h.size() == hidden_dim(m), "hidden state size mismatch");
}

// Stack the per-unit products B_i W_i into an (nv*d) x nh matrix so the
// hidden pre-activation reduces to b + Wf' v_flat.
Mat mgrbm_flat_weights(const MgrbmParams& p) {
    Mat wf(p.nv * p.d, p.nh);
    for (int i = 0; i < p.nv; ++i) {
        wf.middleRows(i * p.d, p.d).noalias() = p.B[i] * p.W[i];
    }
    return wf;
}

}  // namespace

int visible_dim(const ModelParams& m) {
    return std::visit(
        [](const auto& p) -> int {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, MgrbmParams>) {
                return p.nv * p.d;
            } else {
                return p.nv();
            }
        },
        m);
}

int hidden_dim(const ModelParams& m) {
    return std::visit(
        [](const auto& p) -> int {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, MgrbmParams>) {
                return p.nh;
            } else {
                return p.nh();
            }
        },
        m);
}

const char* model_kind(const ModelParams& m) {
    switch (m.index()) {
        case 0: return "rbm";
        case 1: return "grbm";
        default: return "mgrbm";
    }
}

void validate(const ModelParams& m, double det_floor) {
    if (const auto* p = std::get_if<RbmParams>(&m)) {
        require(p->W.rows() == p->a.size() && p->W.cols() == p->b.size(),
                "rbm: W shape inconsistent with biases");
        require(p->W.allFinite() && p->a.allFinite() && p->b.allFinite(),
                "rbm: non-finite parameter");
    } else if (const auto* g = std::get_if<GrbmParams>(&m)) {
        require(g->W.rows() == g->a.size() && g->W.cols() == g->b.size(),
                "grbm: W shape inconsistent with biases");
        require(g->sigma.size() == g->a.size(), "grbm: sigma size mismatch");
        require(g->W.allFinite() && g->a.allFinite() && g->b.allFinite() &&
                    g->sigma.allFinite(),
                "grbm: non-finite parameter");
        require((g->sigma.array() > 0.0).all(), "grbm: sigma must be positive");
    } else {
        const auto& p = std::get<MgrbmParams>(m);
        require(p.nv >= 1 && p.d >= 1 && p.nh >= 1, "mgrbm: empty shape");
        require(static_cast<int>(p.mu.size()) == p.nv &&
                    static_cast<int>(p.B.size()) == p.nv &&
                    static_cast<int>(p.W.size()) == p.nv,
                "mgrbm: per-unit list length mismatch");
        require(p.b.size() == p.nh, "mgrbm: b size mismatch");
        require(p.b.allFinite(), "mgrbm: non-finite b");
        for (int i = 0; i < p.nv; ++i) {
            require(p.mu[i].size() == p.d, "mgrbm: mu dimension mismatch");
            require(p.B[i].rows() == p.d && p.B[i].cols() == p.d,
                    "mgrbm: B dimension mismatch");
            require(p.W[i].rows() == p.d && p.W[i].cols() == p.nh,
                    "mgrbm: W dimension mismatch");
            require(p.mu[i].allFinite() && p.B[i].allFinite() &&
                        p.W[i].allFinite(),
                    "mgrbm: non-finite parameter");
            const double det = p.B[i].determinant();
            if (std::abs(det) < det_floor) {
                std::ostringstream os;
                os << "mgrbm: |det B_" << i << "| = " << std::abs(det)
                   << " below floor " << det_floor;
                throw std::invalid_argument(os.str());
            }
        }
    }
}

double energy(const ModelParams& m, const Vec& v, const Vec& h) {
    check_shapes(m, v, h);
    require(v.allFinite() && h.allFinite(), "non-finite state");
    if (const auto* p = std::get_if<RbmParams>(&m)) {
        return -p->a.dot(v) - p->b.dot(h) - v.dot(p->W * h);
    }
    if (const auto* g = std::get_if<GrbmParams>(&m)) {
        const Vec diff = v - g->a;
        const Vec vs = v.array() / g->sigma.array();
        return 0.5 * (diff.array() / g->sigma.array()).square().sum() -
               vs.dot(g->W * h) - g->b.dot(h);
    }
    const auto& p = std::get<MgrbmParams>(m);
    double e = -p.b.dot(h);
    for (int i = 0; i < p.nv; ++i) {
        const Vec vi = v.segment(i * p.d, p.d);
        const Vec r = p.B[i].transpose() * (vi - p.mu[i]);
        e += 0.5 * r.squaredNorm();
        e -= vi.dot(p.B[i] * (p.W[i] * h));
    }
    return e;
}

Vec hidden_preactivation(const ModelParams& m, const Vec& v) {
    require(v.size() == visible_dim(m), "visible state size mismatch");
    if (const auto* p = std::get_if<RbmParams>(&m)) {
        return p->b + p->W.transpose() * v;
    }
    if (const auto* g = std::get_if<GrbmParams>(&m)) {
        const Vec vs = v.array() / g->sigma.array();
        return g->b + g->W.transpose() * vs;
    }
    const auto& p = std::get<MgrbmParams>(m);
    Vec pre = p.b;
    for (int i = 0; i < p.nv; ++i) {
        pre.noalias() +=
            p.W[i].transpose() * (p.B[i].transpose() * v.segment(i * p.d, p.d));
    }
    return pre;
}

Vec hidden_posterior(const ModelParams& m, const Vec& v) {
    Vec pre = hidden_preactivation(m, v);
    for (Eigen::Index j = 0; j < pre.size(); ++j) pre[j] = sigmoid(pre[j]);
    return pre;
}

VisibleConditional visible_conditional(const ModelParams& m, const Vec& h) {
    require(h.size() == hidden_dim(m), "hidden state size mismatch");
    if (const auto* p = std::get_if<RbmParams>(&m)) {
        Vec pre = p->a + p->W * h;
        for (Eigen::Index i = 0; i < pre.size(); ++i) pre[i] = sigmoid(pre[i]);
        return BernoulliVisible{std::move(pre)};
    }
    if (const auto* g = std::get_if<GrbmParams>(&m)) {
        Vec mean = g->a.array() + g->sigma.array() * (g->W * h).array();
        Vec var = g->sigma.array().square();
        return DiagGaussianVisible{std::move(mean), std::move(var)};
    }
    const auto& p = std::get<MgrbmParams>(m);
    BlockGaussianVisible out;
    out.mean.resize(p.nv);
    out.cov.resize(p.nv);
    for (int i = 0; i < p.nv; ++i) {
        Eigen::PartialPivLU<Mat> lu(p.B[i].transpose());
        if (std::abs(p.B[i].determinant()) < 1e-300) {
            throw std::invalid_argument("mgrbm: singular B");
        }
        out.mean[i] = p.mu[i] + lu.solve(p.W[i] * h);
        const Mat binv_t = lu.inverse();  // (B')^{-1}
        out.cov[i] = binv_t * binv_t.transpose();
    }
    return out;
}

HiddenState sample_hidden(const ModelParams& m, const Vec& v, Rng& rng) {
    const Vec p = hidden_posterior(m, v);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vec h(p.size());
    for (Eigen::Index j = 0; j < p.size(); ++j) {
        h[j] = unif(rng) < p[j] ? 1.0 : 0.0;
    }
    return h;
}

VisibleState sample_visible(const ModelParams& m, const Vec& h, Rng& rng) {
    const VisibleConditional c = visible_conditional(m, h);
    if (const auto* bern = std::get_if<BernoulliVisible>(&c)) {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        Vec v(bern->prob.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            v[i] = unif(rng) < bern->prob[i] ? 1.0 : 0.0;
        }
        return v;
    }
    if (const auto* diag = std::get_if<DiagGaussianVisible>(&c)) {
        std::normal_distribution<double> normal(0.0, 1.0);
        Vec v(diag->mean.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            v[i] = diag->mean[i] + std::sqrt(diag->var[i]) * normal(rng);
        }
        return v;
    }
    // MGRBM: v_i = mean_i + (B_i')^{-1} z, exact since cov = (B')^{-1} B^{-1}.
    const auto& p = std::get<MgrbmParams>(m);
    const auto& block = std::get<BlockGaussianVisible>(c);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec v(p.nv * p.d);
    for (int i = 0; i < p.nv; ++i) {
        Vec z(p.d);
        for (int k = 0; k < p.d; ++k) z[k] = normal(rng);
        v.segment(i * p.d, p.d) =
            block.mean[i] + p.B[i].transpose().partialPivLu().solve(z);
    }
    return v;
}

std::pair<HiddenState, VisibleState> gibbs_sweep(const ModelParams& m,
                                                 const Vec& v, Rng& rng) {
    HiddenState h = sample_hidden(m, v, rng);
    VisibleState vp = sample_visible(m, h, rng);
    return {std::move(h), std::move(vp)};
}

double free_energy(const ModelParams& m, const Vec& v) {
    require(v.size() == visible_dim(m), "visible state size mismatch");
    const Vec pre = hidden_preactivation(m, v);
    double soft = 0.0;
    for (Eigen::Index j = 0; j < pre.size(); ++j) soft += softplus(pre[j]);
    if (const auto* p = std::get_if<RbmParams>(&m)) {
        return -p->a.dot(v) - soft;
    }
    if (const auto* g = std::get_if<GrbmParams>(&m)) {
        const Vec diff = v - g->a;
        return 0.5 * (diff.array() / g->sigma.array()).square().sum() - soft;
    }
    const auto& p = std::get<MgrbmParams>(m);
    double quad = 0.0;
    for (int i = 0; i < p.nv; ++i) {
        const Vec r = p.B[i].transpose() * (v.segment(i * p.d, p.d) - p.mu[i]);
        quad += 0.5 * r.squaredNorm();
    }
    return quad - soft;
}

MgrbmParams mgrbm_from_grbm(const GrbmParams& g) {
    MgrbmParams p;
    p.nv = g.nv();
    p.d = 1;
    p.nh = g.nh();
    p.b = g.b;
    p.mu.resize(p.nv);
    p.B.resize(p.nv);
    p.W.resize(p.nv);
    for (int i = 0; i < p.nv; ++i) {
        p.mu[i] = Vec::Constant(1, g.a[i]);
        p.B[i] = Mat::Constant(1, 1, 1.0 / g.sigma[i]);
        p.W[i] = g.W.row(i);
    }
    return p;
}

Mat hidden_preactivation_batch(const ModelParams& m, const Mat& V) {
    require(V.cols() == visible_dim(m), "batch visible dimension mismatch");
    if (const auto* p = std::get_if<RbmParams>(&m)) {
        return (V * p->W).rowwise() + p->b.transpose();
    }
    if (const auto* g = std::get_if<GrbmParams>(&m)) {
        const Mat vs = V.array().rowwise() / g->sigma.transpose().array();
        return (vs * g->W).rowwise() + g->b.transpose();
    }
    const auto& p = std::get<MgrbmParams>(m);
    const Mat wf = mgrbm_flat_weights(p);
    return (V * wf).rowwise() + p.b.transpose();
}

Mat hidden_posterior_batch(const ModelParams& m, const Mat& V) {
    Mat pre = hidden_preactivation_batch(m, V);
    return pre.unaryExpr([](double x) { return sigmoid(x); });
}

Mat visible_mean_batch(const ModelParams& m, const Mat& H) {
    require(H.cols() == hidden_dim(m), "batch hidden dimension mismatch");
    if (const auto* p = std::get_if<RbmParams>(&m)) {
        Mat pre = (H * p->W.transpose()).rowwise() + p->a.transpose();
        return pre.unaryExpr([](double x) { return sigmoid(x); });
    }
    if (const auto* g = std::get_if<GrbmParams>(&m)) {
        Mat mean = (H * g->W.transpose()).array().rowwise() *
                   g->sigma.transpose().array();
        return mean.rowwise() + g->a.transpose();
    }
    const auto& p = std::get<MgrbmParams>(m);
    Mat mean(H.rows(), p.nv * p.d);
    for (int i = 0; i < p.nv; ++i) {
        const Mat mi = p.B[i].transpose().partialPivLu().solve(p.W[i]);
        mean.middleCols(i * p.d, p.d) =
            (H * mi.transpose()).rowwise() + p.mu[i].transpose();
    }
    return mean;
}

Mat sample_bernoulli(const Mat& P, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Mat out(P.rows(), P.cols());
    for (Eigen::Index r = 0; r < P.rows(); ++r) {
        for (Eigen::Index c = 0; c < P.cols(); ++c) {
            out(r, c) = unif(rng) < P(r, c) ? 1.0 : 0.0;
        }
    }
    return out;
}

Mat sample_visible_batch(const ModelParams& m, const Mat& H, Rng& rng) {
    if (std::holds_alternative<RbmParams>(m)) {
        return sample_bernoulli(visible_mean_batch(m, H), rng);
    }
    Mat mean = visible_mean_batch(m, H);
    std::normal_distribution<double> normal(0.0, 1.0);
    if (const auto* g = std::get_if<GrbmParams>(&m)) {
        for (Eigen::Index r = 0; r < mean.rows(); ++r) {
            for (Eigen::Index c = 0; c < mean.cols(); ++c) {
                mean(r, c) += g->sigma[c] * normal(rng);
            }
        }
        return mean;
    }
    const auto& p = std::get<MgrbmParams>(m);
    std::vector<Eigen::PartialPivLU<Mat>> lus;
    lus.reserve(p.nv);
    for (int i = 0; i < p.nv; ++i) {
        lus.emplace_back(p.B[i].transpose());
    }
    for (Eigen::Index r = 0; r < mean.rows(); ++r) {
        for (int i = 0; i < p.nv; ++i) {
            Vec z(p.d);
            for (int k = 0; k < p.d; ++k) z[k] = normal(rng);
            mean.row(r).segment(i * p.d, p.d) += lus[i].solve(z).transpose();
        }
    }
    return mean;
}

Mat gibbs_sweep_batch(const ModelParams& m, Mat& V, Rng& rng) {
    Mat P = hidden_posterior_batch(m, V);
    Mat H = sample_bernoulli(P, rng);
    V = sample_visible_batch(m, H, rng);
    return P;
}

}  // namespace rbmf
