#pragma once

#include <optional>
#include <string>

#include "rbmfeat/models.hpp"

namespace rbmf {

struct FrameMatrix {
    Mat data;  // T x D, one acoustic frame per row
    std::optional<double> frame_period;  // seconds, if known
    std::string source;
};

enum class Layout { Flat, Block };
enum class EdgePolicy { Replicate, ZeroPad, Drop };

struct StackSpec {
    int context = 9;  // odd, window centered on the target frame
    Layout layout = Layout::Flat;
    EdgePolicy edge = EdgePolicy::Replicate;
};

// One stacked row per frame (per interior frame under Drop).
// Flat layout is frame-major: slot c*D+j holds coefficient j of window
// frame c. Block layout groups by coefficient: slot j*C+c holds the same
// value, matching a model whose unit j spans the C context frames.
Mat stack_context(const Mat& frames, const StackSpec& spec);

struct NormStats {
    Vec mean;
    Vec stddev;  // floored at 1e-8
};

NormStats fit_normalizer(const Mat& data);
Mat apply_normalizer(const NormStats& stats, const Mat& data);

// Row t = hidden posterior of the t-th stacked vector.
Mat extract(const ModelParams& m, const Mat& stacked);

struct PcaModel {
    Vec mean;
    Mat components;   // input_dim x out_dim, orthonormal columns
    Vec eigenvalues;  // all input_dim of them, descending, clamped >= 0
    double coverage = 0.0;  // top out_dim eigenvalue mass / total mass
};

PcaModel pca_fit(const Mat& features, int out_dim);
Mat pca_apply(const PcaModel& pca, const Mat& features);

}  // namespace rbmf
