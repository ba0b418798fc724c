#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rbmfeat/models.hpp"

namespace rbmf {

enum class Algo { CD, PCD };
enum class BNorm { TraceD, TraceOne, Off };

struct TrainConfig {
    Algo algorithm = Algo::PCD;
    int cd_k = 1;
    int batch_size = 128;
    int epochs = 400;
    double lr_weights = 1e-3;
    double lr_biases = 1e-3;
    double lr_b_factors = 1e-4;  // MGRBM B_i matrices
    double momentum = 0.0;
    int particle_count = 0;  // 0 means batch_size
    std::uint64_t seed = 0;
    BNorm b_normalization = BNorm::TraceD;
    // Use the sign of the B_i update as printed in the source derivation
    // rather than the energy-derived log-likelihood gradient. Study only.
    bool legacy_b_sign = false;

    void check() const;  // throws std::invalid_argument on bad ranges
};

// Batch averages of the per-parameter statistics d(-E)/d(theta).
// RBM:   w = <v h'>, vis = <v>, hid = <h>
// GRBM:  w = <(v/sigma) h'>, vis = <(v-a)/sigma^2>, hid = <h>
// MGRBM: mu[i] = <B_i B_i' (v_i - mu_i)>, hid = <h>,
//        wi[i] = <B_i' v_i h'>,
//        bfac[i] = <-(v_i-mu_i)(v_i-mu_i)' B_i + v_i h' W_i'>
struct SufficientStats {
    Mat w;
    Vec vis;
    Vec hid;
    std::vector<Vec> mu;
    std::vector<Mat> wi;
    std::vector<Mat> bfac;
};

using ParamDelta = SufficientStats;

struct ParticleSet {
    Mat v;  // rows are persistent chain states
};

struct EpochRecord {
    int epoch = 0;
    double recon_error = 0.0;  // mean squared reconstruction error
    double grad_norm_weights = 0.0;
    double grad_norm_biases = 0.0;
    double grad_norm_b_factors = 0.0;
    double max_trace_deviation = 0.0;  // MGRBM: max_i |trace(B_i) - target|
    std::optional<double> exact_loglik;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
};

SufficientStats positive_stats(const ModelParams& m, const Mat& batch);
SufficientStats cd_negative_stats(const ModelParams& m, const Mat& batch,
                                  int k, Rng& rng);
// One Gibbs sweep per particle; particles are updated in place.
SufficientStats pcd_negative_stats(const ModelParams& m, ParticleSet& particles,
                                   Rng& rng);

// pos - neg per component, oriented as ascent on the log-likelihood.
ParamDelta gradient(const SufficientStats& pos, const SufficientStats& neg,
                    bool legacy_b_sign = false);

struct MomentumState {
    ParamDelta velocity;
    bool initialized = false;
};

// velocity <- momentum*velocity + lr_group*delta; params += velocity.
// MGRBM models are re-normalized per config.b_normalization afterwards.
void apply_update(ModelParams& m, const ParamDelta& delta,
                  const TrainConfig& cfg, MomentumState& state);

// trace_1: B_i <- B_i / trace(B_i); trace_d: B_i <- B_i * d / trace(B_i).
void normalize_b_factors(MgrbmParams& p, BNorm mode);

using OracleHook = std::function<double(const ModelParams&)>;

TrainHistory train(ModelParams& m, const Mat& dataset, const TrainConfig& cfg,
                   Rng& rng, const OracleHook& hook = nullptr);

}  // namespace rbmf
