#include "rbmfeat/oracle.hpp"

#include <sstream>
#include <stdexcept>

namespace rbmf {
namespace oracle {

namespace {

void check_enumerable(int bits, const char* what) {
    if (bits > kMaxEnumerationBits) {
        std::ostringstream os;
        os << what << ": " << bits << " units exceeds the 2^"
           << kMaxEnumerationBits << " enumeration cap";
        throw std::invalid_argument(os.str());
    }
}

Vec bits_to_vec(std::uint32_t bits, int n) {
    Vec v(n);
    for (int j = 0; j < n; ++j) v[j] = (bits >> j) & 1u ? 1.0 : 0.0;
    return v;
}

// log of the unnormalized weight of hidden configuration h after integrating
// (or summing) out the visible layer.
struct HiddenMarginal {
    // per-h callable pieces precomputed per model kind
    std::vector<double> log_w;  // indexed by h bits
    double log_z = 0.0;         // log sum of weights
};

HiddenMarginal hidden_marginal(const ModelParams& m) {
    const int nh = hidden_dim(m);
    check_enumerable(nh, "hidden enumeration");
    const std::uint32_t count = 1u << nh;
    HiddenMarginal hm;
    hm.log_w.resize(count);

    if (const auto* p = std::get_if<RbmParams>(&m)) {
        for (std::uint32_t bits = 0; bits < count; ++bits) {
            const Vec h = bits_to_vec(bits, nh);
            const Vec pre = p->a + p->W * h;
            double lw = p->b.dot(h);
            for (Eigen::Index i = 0; i < pre.size(); ++i) {
                lw += softplus(pre[i]);
            }
            hm.log_w[bits] = lw;
        }
    } else if (const auto* g = std::get_if<GrbmParams>(&m)) {
        double base = 0.0;
        for (Eigen::Index i = 0; i < g->sigma.size(); ++i) {
            base += std::log(g->sigma[i]) + 0.5 * std::log(2.0 * M_PI);
        }
        for (std::uint32_t bits = 0; bits < count; ++bits) {
            const Vec h = bits_to_vec(bits, nh);
            const Vec c = g->W * h;
            const double lin = (g->a.array() * c.array() / g->sigma.array()).sum();
            hm.log_w[bits] = base + g->b.dot(h) + lin + 0.5 * c.squaredNorm();
        }
    } else {
        const auto& p = std::get<MgrbmParams>(m);
        // Gaussian integral per unit:
        //   (d/2) log 2pi - log|det B_i| + mu_i' B_i W_i h + 0.5 ||W_i h||^2
        // The quadratic term uses B'(BB')^{-1}B = I.
        double base = 0.0;
        Vec lin = Vec::Zero(p.nh);
        Mat quad = Mat::Zero(p.nh, p.nh);
        for (int i = 0; i < p.nv; ++i) {
            const double det = p.B[i].determinant();
            if (std::abs(det) < 1e-300) {
                throw std::invalid_argument("mgrbm: singular B");
            }
            base += 0.5 * p.d * std::log(2.0 * M_PI) - std::log(std::abs(det));
            lin.noalias() += p.W[i].transpose() * (p.B[i].transpose() * p.mu[i]);
            quad.noalias() += p.W[i].transpose() * p.W[i];
        }
        for (std::uint32_t bits = 0; bits < count; ++bits) {
            const Vec h = bits_to_vec(bits, nh);
            hm.log_w[bits] =
                base + p.b.dot(h) + lin.dot(h) + 0.5 * h.dot(quad * h);
        }
    }
    hm.log_z = log_sum_exp(hm.log_w);
    return hm;
}

}  // namespace

double exact_log_partition(const ModelParams& m) {
    validate(m);
    if (const auto* p = std::get_if<RbmParams>(&m)) {
        // Enumerate whichever layer is smaller; both give the same Z.
        if (p->nv() < p->nh()) {
            check_enumerable(p->nv(), "visible enumeration");
            const std::uint32_t count = 1u << p->nv();
            std::vector<double> lw(count);
            for (std::uint32_t bits = 0; bits < count; ++bits) {
                lw[bits] = -free_energy(m, bits_to_vec(bits, p->nv()));
            }
            return log_sum_exp(lw);
        }
    }
    return hidden_marginal(m).log_z;
}

double exact_loglik(const ModelParams& m, const Mat& dataset) {
    if (dataset.rows() == 0) throw std::invalid_argument("empty dataset");
    const double log_z = exact_log_partition(m);
    double sum = 0.0;
    for (Eigen::Index r = 0; r < dataset.rows(); ++r) {
        sum -= free_energy(m, dataset.row(r).transpose());
    }
    return sum / static_cast<double>(dataset.rows()) - log_z;
}

SufficientStats exact_model_stats(const ModelParams& m) {
    validate(m);
    const int nh = hidden_dim(m);
    const HiddenMarginal hm = hidden_marginal(m);
    const std::uint32_t count = 1u << nh;

    SufficientStats s;
    if (const auto* p = std::get_if<RbmParams>(&m)) {
        s.w = Mat::Zero(p->nv(), p->nh());
        s.vis = Vec::Zero(p->nv());
        s.hid = Vec::Zero(p->nh());
        for (std::uint32_t bits = 0; bits < count; ++bits) {
            const double prob = std::exp(hm.log_w[bits] - hm.log_z);
            const Vec h = bits_to_vec(bits, nh);
            Vec ev = p->a + p->W * h;
            for (Eigen::Index i = 0; i < ev.size(); ++i) ev[i] = sigmoid(ev[i]);
            s.vis += prob * ev;
            s.hid += prob * h;
            s.w += prob * ev * h.transpose();
        }
    } else if (const auto* g = std::get_if<GrbmParams>(&m)) {
        s.w = Mat::Zero(g->nv(), g->nh());
        s.vis = Vec::Zero(g->nv());
        s.hid = Vec::Zero(g->nh());
        for (std::uint32_t bits = 0; bits < count; ++bits) {
            const double prob = std::exp(hm.log_w[bits] - hm.log_z);
            const Vec h = bits_to_vec(bits, nh);
            const Vec c = g->W * h;  // E[v|h] = a + sigma .* c
            s.vis += prob * (c.array() / g->sigma.array()).matrix();
            s.hid += prob * h;
            const Vec ev_scaled = g->a.array() / g->sigma.array() + c.array();
            s.w += prob * ev_scaled * h.transpose();
        }
    } else {
        const auto& p = std::get<MgrbmParams>(m);
        s.hid = Vec::Zero(p.nh);
        s.mu.assign(p.nv, Vec::Zero(p.d));
        s.wi.assign(p.nv, Mat::Zero(p.d, p.nh));
        s.bfac.assign(p.nv, Mat::Zero(p.d, p.d));
        std::vector<Mat> prec_inv(p.nv);
        std::vector<Eigen::PartialPivLU<Mat>> lu_bt;
        lu_bt.reserve(p.nv);
        for (int i = 0; i < p.nv; ++i) {
            const Mat prec = p.B[i] * p.B[i].transpose();
            prec_inv[i] = prec.inverse();
            lu_bt.emplace_back(p.B[i].transpose());
        }
        for (std::uint32_t bits = 0; bits < count; ++bits) {
            const double prob = std::exp(hm.log_w[bits] - hm.log_z);
            const Vec h = bits_to_vec(bits, nh);
            s.hid += prob * h;
            for (int i = 0; i < p.nv; ++i) {
                const Vec delta = lu_bt[i].solve(p.W[i] * h);
                const Vec mean = p.mu[i] + delta;
                s.mu[i] += prob * (p.B[i] * (p.W[i] * h));
                s.wi[i] += prob * (p.B[i].transpose() * mean) * h.transpose();
                const Mat second = prec_inv[i] + delta * delta.transpose();
                s.bfac[i] += prob * (-second * p.B[i] +
                                     mean * (h.transpose() * p.W[i].transpose()));
            }
        }
    }
    return s;
}

ParamDelta finite_diff_grad(const ModelParams& m, const Mat& dataset,
                            double step) {
    if (step <= 0.0) throw std::invalid_argument("fd step must be positive");
    auto fd = [&](ModelParams& probe, double* slot) {
        const double saved = *slot;
        *slot = saved + step;
        const double up = exact_loglik(probe, dataset);
        *slot = saved - step;
        const double down = exact_loglik(probe, dataset);
        *slot = saved;
        return (up - down) / (2.0 * step);
    };

    ParamDelta d;
    if (std::holds_alternative<RbmParams>(m) ||
        std::holds_alternative<GrbmParams>(m)) {
        ModelParams probe = m;
        Mat* W;
        Vec* a;
        Vec* b;
        if (auto* p = std::get_if<RbmParams>(&probe)) {
            W = &p->W;
            a = &p->a;
            b = &p->b;
        } else {
            auto* g = std::get_if<GrbmParams>(&probe);
            W = &g->W;
            a = &g->a;
            b = &g->b;
        }
        d.w = Mat::Zero(W->rows(), W->cols());
        d.vis = Vec::Zero(a->size());
        d.hid = Vec::Zero(b->size());
        for (Eigen::Index i = 0; i < W->size(); ++i) {
            d.w(i) = fd(probe, W->data() + i);
        }
        for (Eigen::Index i = 0; i < a->size(); ++i) {
            d.vis(i) = fd(probe, a->data() + i);
        }
        for (Eigen::Index i = 0; i < b->size(); ++i) {
            d.hid(i) = fd(probe, b->data() + i);
        }
    } else {
        ModelParams probe = m;
        auto& p = std::get<MgrbmParams>(probe);
        d.hid = Vec::Zero(p.nh);
        d.mu.assign(p.nv, Vec::Zero(p.d));
        d.wi.assign(p.nv, Mat::Zero(p.d, p.nh));
        d.bfac.assign(p.nv, Mat::Zero(p.d, p.d));
        for (int j = 0; j < p.nh; ++j) d.hid[j] = fd(probe, p.b.data() + j);
        for (int i = 0; i < p.nv; ++i) {
            for (int k = 0; k < p.d; ++k) {
                d.mu[i][k] = fd(probe, p.mu[i].data() + k);
            }
            for (Eigen::Index k = 0; k < p.W[i].size(); ++k) {
                d.wi[i](k) = fd(probe, p.W[i].data() + k);
            }
            for (Eigen::Index k = 0; k < p.B[i].size(); ++k) {
                d.bfac[i](k) = fd(probe, p.B[i].data() + k);
            }
        }
    }
    return d;
}

JointTable enumerate_joint(const RbmParams& p) {
    const int nv = p.nv();
    const int nh = p.nh();
    check_enumerable(nv + nh, "joint enumeration");
    const ModelParams m = p;
    JointTable table;
    table.nv = nv;
    table.nh = nh;
    const std::uint32_t vcount = 1u << nv;
    const std::uint32_t hcount = 1u << nh;
    std::vector<double> neg_e;
    neg_e.reserve(static_cast<std::size_t>(vcount) * hcount);
    for (std::uint32_t vb = 0; vb < vcount; ++vb) {
        const Vec v = bits_to_vec(vb, nv);
        for (std::uint32_t hb = 0; hb < hcount; ++hb) {
            neg_e.push_back(-energy(m, v, bits_to_vec(hb, nh)));
        }
    }
    const double log_z = log_sum_exp(neg_e);
    table.entries.reserve(neg_e.size());
    std::size_t idx = 0;
    for (std::uint32_t vb = 0; vb < vcount; ++vb) {
        for (std::uint32_t hb = 0; hb < hcount; ++hb) {
            table.entries.push_back({vb, hb, std::exp(neg_e[idx++] - log_z)});
        }
    }
    return table;
}

Mat sample_dataset(const ModelParams& m, int n, int burn_in, int thin,
                   Rng& rng) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (thin < 1) throw std::invalid_argument("thin must be >= 1");
    validate(m);
    const Vec h0 = Vec::Zero(hidden_dim(m));
    Vec v = sample_visible(m, h0, rng);
    for (int i = 0; i < burn_in; ++i) {
        v = gibbs_sweep(m, v, rng).second;
    }
    Mat out(n, visible_dim(m));
    for (int i = 0; i < n; ++i) {
        for (int t = 0; t < thin; ++t) {
            v = gibbs_sweep(m, v, rng).second;
        }
        out.row(i) = v.transpose();
    }
    return out;
}

}  // namespace oracle
}  // namespace rbmf
