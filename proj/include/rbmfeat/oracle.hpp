#pragma once

#include <cstdint>

#include "rbmfeat/models.hpp"
#include "rbmfeat/training.hpp"

namespace rbmf {
namespace oracle {

// Exact inference by enumeration over the 2^Nh hidden configurations, with
// closed-form Gaussian marginalization of the visible layer for GRBM/MGRBM.
// Desk scale only: enumeration refuses beyond 2^max_bits configurations.

inline constexpr int kMaxEnumerationBits = 20;

struct JointEntry {
    std::uint32_t v_bits = 0;
    std::uint32_t h_bits = 0;
    double prob = 0.0;
};

struct JointTable {
    int nv = 0;
    int nh = 0;
    std::vector<JointEntry> entries;  // all 2^(nv+nh) states
};

double exact_log_partition(const ModelParams& m);

// Mean log-likelihood per example; rows of dataset are visible states.
double exact_loglik(const ModelParams& m, const Mat& dataset);

// Expectations of the sufficient statistics under p(v,h).
SufficientStats exact_model_stats(const ModelParams& m);

// Central finite differences of exact_loglik with respect to every scalar
// parameter (GRBM sigma excluded; it is not a trained parameter).
ParamDelta finite_diff_grad(const ModelParams& m, const Mat& dataset,
                            double step);

JointTable enumerate_joint(const RbmParams& p);

// Gibbs chain from a model-conditioned random start; discards burn_in sweeps
// then keeps every thin-th visible state. Rows of the result are samples.
Mat sample_dataset(const ModelParams& m, int n, int burn_in, int thin,
                   Rng& rng);

}  // namespace oracle
}  // namespace rbmf
