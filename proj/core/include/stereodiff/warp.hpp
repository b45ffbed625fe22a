#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "stereodiff/image.hpp"

namespace stereodiff {

/// Pure-translation camera displacement relative to the reference view.
struct CameraOffset {
    /// Metres along the stereo baseline, positive to the right.
    double baseline_offset = 0.0;
    /// Metres along the vertical axis, positive downward. Only spiral trajectories use it.
    double vertical_offset = 0.0;
    double focal_px = 512.0;

    bool is_identity() const noexcept { return baseline_offset == 0.0 && vertical_offset == 0.0; }

    friend bool operator==(const CameraOffset&, const CameraOffset&) = default;
};

/// How 3x3 mask convolutions treat taps that fall outside the image.
enum class BorderMode {
    /// Out-of-image taps are dropped and the kernel is renormalized over the in-bounds taps.
    Renormalize,
    /// Out-of-image taps read as 0.
    Zero,
};

using Kernel3x3 = std::array<float, 9>;

inline constexpr Kernel3x3 kBoxKernel = {1.f / 9, 1.f / 9, 1.f / 9, 1.f / 9, 1.f / 9,
                                          1.f / 9, 1.f / 9, 1.f / 9, 1.f / 9};
/// Binomial approximation of a 3x3 Gaussian. Any straight hole edge scores 0.25 under it.
inline constexpr Kernel3x3 kBinomialKernel = {1.f / 16, 2.f / 16, 1.f / 16, 2.f / 16, 4.f / 16,
                                              2.f / 16, 1.f / 16, 2.f / 16, 1.f / 16};

/// Normalized 3x3 sampled Gaussian.
Kernel3x3 gaussian_kernel(float sigma);

/// Default crack-kernel sigma. A straight hole edge scores about 0.17, below the crack threshold,
/// so only thin gaps and corners are filled and large holes keep their extent.
inline constexpr float kCrackSigma = 0.6f;

struct WarpOptions {
    int n_planes = 4;
    float depth_lo = 1.0f;
    float depth_hi = 10.0f;
    double max_baseline = 0.20;
    float isolation_threshold = 0.5f;
    float crack_threshold = 0.2f;
    Kernel3x3 isolation_kernel = kBoxKernel;
    Kernel3x3 crack_kernel = gaussian_kernel(kCrackSigma);
    BorderMode border = BorderMode::Renormalize;
};

struct Plane {
    FrameBuffer image;
    DisocclusionMask mask;
    /// Splatted depth per target pixel; meaningful only where mask is 1.
    DepthMap depth;
    float near = 0.0f;
    float far = 0.0f;
};

/// Planes ordered near (index 0) to far.
struct MultiPlaneStack {
    std::vector<Plane> planes;
    int width() const noexcept { return planes.empty() ? 0 : planes.front().mask.width(); }
    int height() const noexcept { return planes.empty() ? 0 : planes.front().mask.height(); }
};

/// n_planes + 1 depth boundaries from lo to hi, uniform in inverse depth.
std::vector<float> plane_boundaries(int n_planes, float lo, float hi);

/// Index of the plane whose [near, far) range holds `depth`; the far bound of the last plane is closed.
int plane_index(const std::vector<float>& boundaries, float depth) noexcept;

/// Horizontal disparity in pixels, f * b / z.
inline double disparity_px(double focal_px, double offset, double depth) noexcept
{
    return focal_px * offset / depth;
}

/// Round-to-nearest used for splat targets (ties toward +infinity).
inline int round_target(double coord) noexcept
{
    return int(std::floor(coord + 0.5));
}

MultiPlaneStack splat_to_planes(const FrameBuffer& rgb, const DepthMap& depth, const CameraOffset& cam,
                                const WarpOptions& options = {});

/// 3x3 convolution of a binary mask; used by both cleanup passes.
std::vector<double> convolve_mask(const DisocclusionMask& mask, const Kernel3x3& kernel, BorderMode border);

/// Clears pixels whose isolation-kernel response is below the threshold.
MultiPlaneStack remove_isolated(MultiPlaneStack stack, const WarpOptions& options = {});

/// Fills unset pixels whose crack-kernel response exceeds the threshold by mask-weighted
/// interpolation of their set 3x3 neighbours.
MultiPlaneStack fill_cracks(MultiPlaneStack stack, const WarpOptions& options = {});

struct WarpedFrame {
    FrameBuffer image;
    DisocclusionMask mask;
};

/// Back-to-front composite: I = I * (1 - M_i) + I_i * M_i for i from the farthest plane to the nearest.
WarpedFrame blend_planes(const MultiPlaneStack& stack);

/// splat -> remove_isolated -> fill_cracks -> blend for one frame.
WarpedFrame warp_frame(const FrameBuffer& rgb, const DepthMap& depth, const CameraOffset& cam,
                       const WarpOptions& options = {});

struct WarpedVideo {
    std::vector<FrameBuffer> frames;
    std::vector<DisocclusionMask> masks;
};

WarpedVideo warp_video(const std::vector<FrameBuffer>& rgb, const std::vector<DepthMap>& depth,
                       const CameraOffset& cam, const WarpOptions& options = {});

/// Throws BaselineOutOfRange when |offset| exceeds the configured maximum.
void validate_camera(const CameraOffset& cam, const WarpOptions& options);

}  // namespace stereodiff
