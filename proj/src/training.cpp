#include "rbmfeat/training.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace rbmf {

namespace {

SufficientStats zero_stats_like(const ModelParams& m) {
    SufficientStats s;
    if (const auto* p = std::get_if<RbmParams>(&m)) {
        s.w = Mat::Zero(p->nv(), p->nh());
        s.vis = Vec::Zero(p->nv());
        s.hid = Vec::Zero(p->nh());
    } else if (const auto* g = std::get_if<GrbmParams>(&m)) {
        s.w = Mat::Zero(g->nv(), g->nh());
        s.vis = Vec::Zero(g->nv());
        s.hid = Vec::Zero(g->nh());
    } else {
        const auto& p = std::get<MgrbmParams>(m);
        s.hid = Vec::Zero(p.nh);
        s.mu.assign(p.nv, Vec::Zero(p.d));
        s.wi.assign(p.nv, Mat::Zero(p.d, p.nh));
        s.bfac.assign(p.nv, Mat::Zero(p.d, p.d));
    }
    return s;
}

// Statistics from visible states V (rows) and mean-field hidden probs P.
SufficientStats stats_from(const ModelParams& m, const Mat& V, const Mat& P) {
    const double n = static_cast<double>(V.rows());
    SufficientStats s;
    if (const auto* p = std::get_if<RbmParams>(&m)) {
        s.w = V.transpose() * P / n;
        s.vis = V.colwise().mean();
        s.hid = P.colwise().mean();
        (void)p;
    } else if (const auto* g = std::get_if<GrbmParams>(&m)) {
        const Mat vs = V.array().rowwise() / g->sigma.transpose().array();
        s.w = vs.transpose() * P / n;
        const Vec mean_v = V.colwise().mean();
        s.vis = (mean_v - g->a).array() / g->sigma.array().square();
        s.hid = P.colwise().mean();
    } else {
        const auto& p = std::get<MgrbmParams>(m);
        s.hid = P.colwise().mean();
        s.mu.resize(p.nv);
        s.wi.resize(p.nv);
        s.bfac.resize(p.nv);
        for (int i = 0; i < p.nv; ++i) {
            const Mat vi = V.middleCols(i * p.d, p.d);
            const Vec mean_vi = vi.colwise().mean();
            s.mu[i] = p.B[i] * (p.B[i].transpose() * (mean_vi - p.mu[i]));
            const Mat vih = vi.transpose() * P / n;  // <v_i h'>, d x nh
            s.wi[i] = p.B[i].transpose() * vih;
            const Mat centered = vi.rowwise() - p.mu[i].transpose();
            const Mat scatter = centered.transpose() * centered / n;
            s.bfac[i] = -scatter * p.B[i] + vih * p.W[i].transpose();
        }
    }
    return s;
}

double frob(const Mat& m) { return m.norm(); }

struct GroupNorms {
    double weights = 0.0;
    double biases = 0.0;
    double b_factors = 0.0;
};

GroupNorms delta_norms(const ParamDelta& d) {
    GroupNorms n;
    double w2 = 0.0, b2 = 0.0, f2 = 0.0;
    if (d.w.size() > 0) w2 += d.w.squaredNorm();
    for (const auto& wi : d.wi) w2 += wi.squaredNorm();
    if (d.vis.size() > 0) b2 += d.vis.squaredNorm();
    if (d.hid.size() > 0) b2 += d.hid.squaredNorm();
    for (const auto& mu : d.mu) b2 += mu.squaredNorm();
    for (const auto& bf : d.bfac) f2 += bf.squaredNorm();
    n.weights = std::sqrt(w2);
    n.biases = std::sqrt(b2);
    n.b_factors = std::sqrt(f2);
    return n;
}

void check_finite_group(bool ok, const char* group) {
    if (!ok) {
        throw std::runtime_error(std::string("non-finite update in parameter group '") +
                                 group + "'");
    }
}

}  // namespace

void TrainConfig::check() const {
    auto bad = [](const std::string& msg) {
        throw std::invalid_argument("train config: " + msg);
    };
    if (cd_k < 1) bad("cd_k must be >= 1");
    if (batch_size < 1) bad("batch_size must be >= 1");
    if (epochs < 0) bad("epochs must be >= 0");
    if (lr_weights <= 0 || lr_biases <= 0 || lr_b_factors <= 0) {
        bad("learning rates must be positive");
    }
    if (momentum < 0.0 || momentum >= 1.0) bad("momentum must be in [0,1)");
    if (particle_count < 0) bad("particle_count must be >= 0");
}

SufficientStats positive_stats(const ModelParams& m, const Mat& batch) {
    if (batch.rows() == 0) throw std::invalid_argument("empty batch");
    return stats_from(m, batch, hidden_posterior_batch(m, batch));
}

SufficientStats cd_negative_stats(const ModelParams& m, const Mat& batch,
                                  int k, Rng& rng) {
    if (batch.rows() == 0) throw std::invalid_argument("empty batch");
    if (k < 1) throw std::invalid_argument("cd_k must be >= 1");
    Mat V = batch;
    for (int step = 0; step < k; ++step) {
        gibbs_sweep_batch(m, V, rng);
    }
    return stats_from(m, V, hidden_posterior_batch(m, V));
}

SufficientStats pcd_negative_stats(const ModelParams& m, ParticleSet& particles,
                                   Rng& rng) {
    if (particles.v.rows() == 0) {
        throw std::invalid_argument("empty particle set");
    }
    gibbs_sweep_batch(m, particles.v, rng);
    return stats_from(m, particles.v, hidden_posterior_batch(m, particles.v));
}

ParamDelta gradient(const SufficientStats& pos, const SufficientStats& neg,
                    bool legacy_b_sign) {
    ParamDelta d;
    auto diff_mat = [](const Mat& a, const Mat& b) -> Mat {
        if (a.rows() != b.rows() || a.cols() != b.cols()) {
            throw std::invalid_argument("stats shape mismatch");
        }
        return a - b;
    };
    if (pos.w.size() > 0 || neg.w.size() > 0) d.w = diff_mat(pos.w, neg.w);
    if (pos.vis.size() > 0 || neg.vis.size() > 0) {
        d.vis = diff_mat(pos.vis, neg.vis);
    }
    d.hid = diff_mat(pos.hid, neg.hid);
    if (pos.mu.size() != neg.mu.size() || pos.wi.size() != neg.wi.size() ||
        pos.bfac.size() != neg.bfac.size()) {
        throw std::invalid_argument("stats shape mismatch");
    }
    d.mu.resize(pos.mu.size());
    d.wi.resize(pos.wi.size());
    d.bfac.resize(pos.bfac.size());
    for (std::size_t i = 0; i < pos.mu.size(); ++i) {
        d.mu[i] = diff_mat(pos.mu[i], neg.mu[i]);
        d.wi[i] = diff_mat(pos.wi[i], neg.wi[i]);
        d.bfac[i] = diff_mat(pos.bfac[i], neg.bfac[i]);
        if (legacy_b_sign) d.bfac[i] = -d.bfac[i];
    }
    return d;
}

void normalize_b_factors(MgrbmParams& p, BNorm mode) {
    if (mode == BNorm::Off) return;
    for (int i = 0; i < p.nv; ++i) {
        const double tr = p.B[i].trace();
        if (std::abs(tr) < 1e-12) {
            std::ostringstream os;
            os << "trace normalization: |trace(B_" << i << ")| = "
               << std::abs(tr) << " too small";
            throw std::runtime_error(os.str());
        }
        const double scale = mode == BNorm::TraceD ? p.d / tr : 1.0 / tr;
        p.B[i] *= scale;
    }
}

void apply_update(ModelParams& m, const ParamDelta& delta,
                  const TrainConfig& cfg, MomentumState& state) {
    if (!state.initialized) {
        state.velocity = zero_stats_like(m);
        state.initialized = true;
    }
    ParamDelta& v = state.velocity;
    const double mom = cfg.momentum;
    if (auto* p = std::get_if<RbmParams>(&m)) {
        v.w = mom * v.w + cfg.lr_weights * delta.w;
        v.vis = mom * v.vis + cfg.lr_biases * delta.vis;
        v.hid = mom * v.hid + cfg.lr_biases * delta.hid;
        p->W += v.w;
        p->a += v.vis;
        p->b += v.hid;
        check_finite_group(p->W.allFinite(), "W");
        check_finite_group(p->a.allFinite() && p->b.allFinite(), "biases");
    } else if (auto* g = std::get_if<GrbmParams>(&m)) {
        v.w = mom * v.w + cfg.lr_weights * delta.w;
        v.vis = mom * v.vis + cfg.lr_biases * delta.vis;
        v.hid = mom * v.hid + cfg.lr_biases * delta.hid;
        g->W += v.w;
        g->a += v.vis;
        g->b += v.hid;
        check_finite_group(g->W.allFinite(), "W");
        check_finite_group(g->a.allFinite() && g->b.allFinite(), "biases");
    } else {
        auto& p = std::get<MgrbmParams>(m);
        v.hid = mom * v.hid + cfg.lr_biases * delta.hid;
        p.b += v.hid;
        check_finite_group(p.b.allFinite(), "b");
        for (int i = 0; i < p.nv; ++i) {
            v.mu[i] = mom * v.mu[i] + cfg.lr_biases * delta.mu[i];
            v.wi[i] = mom * v.wi[i] + cfg.lr_weights * delta.wi[i];
            v.bfac[i] = mom * v.bfac[i] + cfg.lr_b_factors * delta.bfac[i];
            p.mu[i] += v.mu[i];
            p.W[i] += v.wi[i];
            p.B[i] += v.bfac[i];
            check_finite_group(p.mu[i].allFinite(), "mu");
            check_finite_group(p.W[i].allFinite(), "W");
            check_finite_group(p.B[i].allFinite(), "B");
        }
        normalize_b_factors(p, cfg.b_normalization);
        validate(m);  // det floor enforced after every update
    }
}

TrainHistory train(ModelParams& m, const Mat& dataset, const TrainConfig& cfg,
                   Rng& rng, const OracleHook& hook) {
    cfg.check();
    validate(m);
    if (dataset.rows() == 0) throw std::invalid_argument("empty dataset");
    if (dataset.cols() != visible_dim(m)) {
        throw std::invalid_argument("dataset dimension does not match model");
    }

    const int n = static_cast<int>(dataset.rows());
    const int particle_count =
        cfg.particle_count > 0 ? cfg.particle_count : cfg.batch_size;

    ParticleSet particles;
    if (cfg.algorithm == Algo::PCD) {
        particles.v.resize(particle_count, dataset.cols());
        for (int i = 0; i < particle_count; ++i) {
            particles.v.row(i) = dataset.row(i % n);
        }
    }

    MomentumState momentum;
    TrainHistory history;
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double recon_sum = 0.0;
        long recon_count = 0;
        GroupNorms norms_acc;
        int batches = 0;
        double max_trace_dev = 0.0;

        for (int start = 0; start < n; start += cfg.batch_size) {
            const int len = std::min(cfg.batch_size, n - start);
            Mat batch(len, dataset.cols());
            for (int r = 0; r < len; ++r) {
                batch.row(r) = dataset.row(order[start + r]);
            }

            const SufficientStats pos = positive_stats(m, batch);
            const SufficientStats neg =
                cfg.algorithm == Algo::CD
                    ? cd_negative_stats(m, batch, cfg.cd_k, rng)
                    : pcd_negative_stats(m, particles, rng);
            const ParamDelta delta = gradient(pos, neg, cfg.legacy_b_sign);

            try {
                apply_update(m, delta, cfg, momentum);
            } catch (const std::exception& e) {
                std::ostringstream os;
                os << "training diverged at epoch " << epoch << ", batch "
                   << batches << ": " << e.what();
                throw std::runtime_error(os.str());
            }

            // Mean-field reconstruction error, for monitoring only.
            const Mat probs = hidden_posterior_batch(m, batch);
            const Mat recon = visible_mean_batch(m, probs);
            recon_sum += (batch - recon).squaredNorm();
            recon_count += batch.size();

            const GroupNorms gn = delta_norms(delta);
            norms_acc.weights += gn.weights;
            norms_acc.biases += gn.biases;
            norms_acc.b_factors += gn.b_factors;
            ++batches;

            if (const auto* p = std::get_if<MgrbmParams>(&m);
                p != nullptr && cfg.b_normalization != BNorm::Off) {
                const double target =
                    cfg.b_normalization == BNorm::TraceD ? p->d : 1.0;
                for (int i = 0; i < p->nv; ++i) {
                    max_trace_dev = std::max(
                        max_trace_dev, std::abs(p->B[i].trace() - target));
                }
            }
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.recon_error = recon_sum / static_cast<double>(recon_count);
        rec.grad_norm_weights = norms_acc.weights / batches;
        rec.grad_norm_biases = norms_acc.biases / batches;
        rec.grad_norm_b_factors = norms_acc.b_factors / batches;
        rec.max_trace_deviation = max_trace_dev;
        if (hook) rec.exact_loglik = hook(m);
        history.epochs.push_back(std::move(rec));
    }
    return history;
}

}  // namespace rbmf
