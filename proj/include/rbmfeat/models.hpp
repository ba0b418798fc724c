#pragma once

#include <utility>
#include <variant>
#include <vector>

#include "rbmfeat/linalg.hpp"

namespace rbmf {

// Binary-binary RBM: E(v,h) = -a'v - b'h - v'Wh, with W of size Nv x Nh.
struct RbmParams {
    Mat W;
    Vec a;
    Vec b;

    int nv() const { return static_cast<int>(a.size()); }
    int nh() const { return static_cast<int>(b.size()); }
};

// Gaussian-Bernoulli RBM with per-unit standard deviations.
// E(v,h) = sum_i (v_i-a_i)^2/(2 sigma_i^2) - sum_ij W_ij (v_i/sigma_i) h_j - b'h
struct GrbmParams {
    Mat W;
    Vec a;
    Vec b;
    Vec sigma;  // strictly positive, conventionally fixed at 1

    int nv() const { return static_cast<int>(a.size()); }
    int nh() const { return static_cast<int>(b.size()); }
};

// Multivariate-Gaussian RBM: each visible unit is a d-dimensional Gaussian
// with precision B_i B_i'.
// E(v,h) = 1/2 sum_i (v_i-mu_i)' B_i B_i' (v_i-mu_i)
//          - sum_i v_i' B_i W_i h - b'h
// B_i is kept as a general invertible d x d matrix (not triangular).
struct MgrbmParams {
    int nv = 0;
    int d = 0;
    int nh = 0;
    std::vector<Vec> mu;  // nv vectors of length d
    std::vector<Mat> B;   // nv matrices d x d
    std::vector<Mat> W;   // nv matrices d x nh
    Vec b;                // nh
};

using ModelParams = std::variant<RbmParams, GrbmParams, MgrbmParams>;

// Flattened visible dimension (MGRBM: nv*d, unit i occupies [i*d, (i+1)*d)).
int visible_dim(const ModelParams& m);
int hidden_dim(const ModelParams& m);
const char* model_kind(const ModelParams& m);

// Throws std::invalid_argument on inconsistent shapes, non-finite entries,
// non-positive sigma, or |det B_i| below det_floor.
void validate(const ModelParams& m, double det_floor = 1e-12);

// Visible states are flattened column vectors; hidden states hold 0/1.
using VisibleState = Vec;
using HiddenState = Vec;

struct BernoulliVisible {
    Vec prob;
};
struct DiagGaussianVisible {
    Vec mean;
    Vec var;
};
struct BlockGaussianVisible {
    std::vector<Vec> mean;
    std::vector<Mat> cov;
};
using VisibleConditional =
    std::variant<BernoulliVisible, DiagGaussianVisible, BlockGaussianVisible>;

double energy(const ModelParams& m, const Vec& v, const Vec& h);

// Pre-activation of the hidden units, i.e. the coefficient of h_j in -E.
Vec hidden_preactivation(const ModelParams& m, const Vec& v);
Vec hidden_posterior(const ModelParams& m, const Vec& v);

VisibleConditional visible_conditional(const ModelParams& m, const Vec& h);

HiddenState sample_hidden(const ModelParams& m, const Vec& v, Rng& rng);
VisibleState sample_visible(const ModelParams& m, const Vec& h, Rng& rng);

// One full alternating update: h ~ p(h|v), then v' ~ p(v|h).
std::pair<HiddenState, VisibleState> gibbs_sweep(const ModelParams& m,
                                                 const Vec& v, Rng& rng);

// F(v) = -log sum_h exp(-E(v,h)); exp(-F(v))/Z is the visible marginal.
double free_energy(const ModelParams& m, const Vec& v);

// d=1 embedding: mu_i=a_i, B_i=[1/sigma_i], W_i = row i of W. Energy and
// hidden posteriors coincide with the GRBM for all states.
MgrbmParams mgrbm_from_grbm(const GrbmParams& g);

// Batched variants; rows are samples. Used by the training loop.
Mat hidden_preactivation_batch(const ModelParams& m, const Mat& V);
Mat hidden_posterior_batch(const ModelParams& m, const Mat& V);
Mat visible_mean_batch(const ModelParams& m, const Mat& H);
Mat sample_bernoulli(const Mat& P, Rng& rng);
Mat sample_visible_batch(const ModelParams& m, const Mat& H, Rng& rng);
// In-place sweep over all rows; returns the mean-field hidden probabilities
// computed from the input V (before the visible update).
Mat gibbs_sweep_batch(const ModelParams& m, Mat& V, Rng& rng);

}  // namespace rbmf
