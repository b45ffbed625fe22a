#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "stereodiff/depth_prep.hpp"
#include "stereodiff/frame_matrix.hpp"
#include "stereodiff/image.hpp"
#include "stereodiff/pipeline.hpp"

namespace stereodiff::testing {

/// Textured far background plus a near rectangle sliding right by one pixel per frame.
struct SyntheticScene {
    int width = 0;
    int height = 0;
    std::vector<FrameBuffer> rgb;
    /// Raw depth: about 8 on the background, 2 on the rectangle, with per-frame flicker.
    DepthSequence depth;
    FlowSequence flows;
};

SyntheticScene make_scene(int width, int height, int frames, std::uint64_t seed = 7);

/// Analytic background colour, defined for any real coordinate.
float background(double x, double y, int channel) noexcept;

/// rgb/f###.png (16-bit), depth/d###.pfm, flow/fwd###.flo and flow/bwd###.flo under `dir`.
void write_scene(const SyntheticScene& scene, const std::filesystem::path& dir);

/// Clean matrix for the oracle: known pixels keep the warped colour, disoccluded pixels get the
/// background seen through the hole.
FrameMatrix plant_targets(const FrameMatrix& warped);

/// Uniform [0,1) image from a seeded generator.
FrameBuffer random_image(int width, int height, int channels, std::uint64_t seed);
DisocclusionMask random_mask(int width, int height, double p_known, std::uint64_t seed);

}  // namespace stereodiff::testing
