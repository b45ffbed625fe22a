#pragma once

#include <vector>

#include "stereodiff/image.hpp"

namespace stereodiff {

struct DepthSequence {
    std::vector<DepthMap> frames;
    bool normalized = false;
};

struct NormalizeResult {
    DepthSequence sequence;
    /// Set when max - min < 1e-12; every output sample is then `lo`.
    bool degenerate_range = false;
};

/// Affine map of the sequence-global [min, max] onto [lo, hi].
NormalizeResult normalize_depth(const DepthSequence& seq, float lo = 1.0f, float hi = 10.0f);

/// Reciprocates every sample, for estimators that emit inverse depth.
DepthSequence reciprocate_depth(const DepthSequence& seq);

struct SmoothOptions {
    int window = 5;
    float sigma = 1.0f;
    /// Forward-backward round-trip error bound, in pixels.
    float consistency_px = 1.0f;
};

/// Flow-aligned temporal Gaussian smoothing.
///
/// flows_fwd[i] maps frame i to i+1 and flows_bwd[i] maps frame i+1 to i. For every pixel the
/// neighbouring frames within the window are reached by chaining flow displacements; a neighbour
/// contributes only while every hop stays in bounds and passes the round-trip check. Weights are
/// renormalized over the contributing samples.
DepthSequence smooth_depth(const DepthSequence& seq, const std::vector<FlowField>& flows_fwd,
                           const std::vector<FlowField>& flows_bwd, const SmoothOptions& options = {});

/// Bilinear sample with border clamping. (x, y) must lie inside [0, w-1] x [0, h-1].
float sample_bilinear(const DepthMap& map, float x, float y) noexcept;

}  // namespace stereodiff
