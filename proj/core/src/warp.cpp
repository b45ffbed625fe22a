#include "stereodiff/warp.hpp"

#include <algorithm>
#include <string>

#include "stereodiff/error.hpp"

namespace stereodiff {

namespace {

constexpr int kDx[9] = {-1, 0, 1, -1, 0, 1, -1, 0, 1};
constexpr int kDy[9] = {-1, -1, -1, 0, 0, 0, 1, 1, 1};

void check_stack(const MultiPlaneStack& stack)
{
    if (stack.planes.empty()) throw Error(ErrorCode::InvalidArgument, "multi-plane stack has no planes");
}

}  // namespace

std::vector<float> plane_boundaries(int n_planes, float lo, float hi)
{
    if (n_planes < 1) throw Error(ErrorCode::InvalidArgument, "need at least one plane");
    if (!(hi > lo && lo > 0.0f)) throw Error(ErrorCode::InvalidArgument, "plane depth range needs hi > lo > 0");
    std::vector<float> bounds(std::size_t(n_planes) + 1);
    const double inv_lo = 1.0 / lo;
    const double inv_hi = 1.0 / hi;
    for (int k = 0; k <= n_planes; ++k) bounds[k] = float(1.0 / (inv_lo - (inv_lo - inv_hi) * k / n_planes));
    bounds.front() = lo;
    bounds.back() = hi;
    return bounds;
}

int plane_index(const std::vector<float>& boundaries, float depth) noexcept
{
    const int n = int(boundaries.size()) - 1;
    // First boundary strictly greater than depth closes the containing range.
    const auto it = std::upper_bound(boundaries.begin() + 1, boundaries.end() - 1, depth);
    return std::clamp(int(it - boundaries.begin()) - 1, 0, n - 1);
}

void validate_camera(const CameraOffset& cam, const WarpOptions& options)
{
    if (std::abs(cam.baseline_offset) > options.max_baseline + 1e-12)
        throw Error(ErrorCode::BaselineOutOfRange, "baseline offset " + std::to_string(cam.baseline_offset) +
                                                        " exceeds the maximum " + std::to_string(options.max_baseline));
    if (std::abs(cam.vertical_offset) > options.max_baseline + 1e-12)
        throw Error(ErrorCode::BaselineOutOfRange, "vertical offset " + std::to_string(cam.vertical_offset) +
                                                        " exceeds the maximum " + std::to_string(options.max_baseline));
    if (!(cam.focal_px > 0.0)) throw Error(ErrorCode::InvalidArgument, "focal length must be positive");
}

MultiPlaneStack splat_to_planes(const FrameBuffer& rgb, const DepthMap& depth, const CameraOffset& cam,
                                const WarpOptions& options)
{
    validate_camera(cam, options);
    if (rgb.width() != depth.width() || rgb.height() != depth.height())
        throw Error(ErrorCode::DimensionMismatch, "RGB and depth sizes differ");

    const float tol = 1e-4f * options.depth_hi;
    for (float d : depth.data()) {
        if (!(d >= options.depth_lo - tol && d <= options.depth_hi + tol))
            throw Error(ErrorCode::UnnormalizedDepth, "depth " + std::to_string(d) + " outside [" +
                                                          std::to_string(options.depth_lo) + ", " +
                                                          std::to_string(options.depth_hi) + "]");
    }

    const int w = rgb.width();
    const int h = rgb.height();
    const int c = rgb.channels();
    const auto bounds = plane_boundaries(options.n_planes, options.depth_lo, options.depth_hi);

    MultiPlaneStack stack;
    stack.planes.reserve(std::size_t(options.n_planes));
    for (int i = 0; i < options.n_planes; ++i) {
        stack.planes.push_back(Plane{FrameBuffer(w, h, c), DisocclusionMask(w, h), DepthMap(w, h), bounds[i],
                                     bounds[i + 1]});
    }

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const float z = depth.at(x, y);
            const int tx = round_target(double(x) - disparity_px(cam.focal_px, cam.baseline_offset, z));
            const int ty = round_target(double(y) - disparity_px(cam.focal_px, cam.vertical_offset, z));
            if (tx < 0 || tx >= w || ty < 0 || ty >= h) continue;
            auto& plane = stack.planes[plane_index(bounds, z)];
            if (plane.mask.at(tx, ty) && !(z < plane.depth.at(tx, ty))) continue;
            plane.mask.at(tx, ty) = 1;
            plane.depth.at(tx, ty) = z;
            for (int ch = 0; ch < c; ++ch) plane.image.at(tx, ty, ch) = rgb.at(x, y, ch);
        }
    }
    return stack;
}

Kernel3x3 gaussian_kernel(float sigma)
{
    if (!(sigma > 0.0f)) throw Error(ErrorCode::InvalidArgument, "Gaussian sigma must be positive");
    Kernel3x3 k{};
    double sum = 0.0;
    for (int i = 0; i < 9; ++i) {
        const double d2 = double(kDx[i] * kDx[i] + kDy[i] * kDy[i]);
        sum += std::exp(-d2 / (2.0 * double(sigma) * sigma));
    }
    for (int i = 0; i < 9; ++i) {
        const double d2 = double(kDx[i] * kDx[i] + kDy[i] * kDy[i]);
        k[i] = float(std::exp(-d2 / (2.0 * double(sigma) * sigma)) / sum);
    }
    return k;
}

std::vector<double> convolve_mask(const DisocclusionMask& mask, const Kernel3x3& kernel, BorderMode border)
{
    // Sums of at most nine float weights are exact in double, so the response does not depend on
    // tap order and equals the ratio of the exact sums.
    const int w = mask.width();
    const int h = mask.height();
    std::vector<double> out(std::size_t(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            double norm = 0.0;
            for (int k = 0; k < 9; ++k) {
                const int nx = x + kDx[k];
                const int ny = y + kDy[k];
                if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                norm += kernel[k];
                if (mask.at(nx, ny)) acc += kernel[k];
            }
            out[std::size_t(y) * w + x] = (border == BorderMode::Renormalize && norm > 0.0) ? acc / norm : acc;
        }
    }
    return out;
}

MultiPlaneStack remove_isolated(MultiPlaneStack stack, const WarpOptions& options)
{
    check_stack(stack);
    for (auto& plane : stack.planes) {
        const auto response = convolve_mask(plane.mask, options.isolation_kernel, options.border);
        const int w = plane.mask.width();
        for (int y = 0; y < plane.mask.height(); ++y) {
            for (int x = 0; x < w; ++x) {
                if (!plane.mask.at(x, y) || response[std::size_t(y) * w + x] >= options.isolation_threshold) continue;
                plane.mask.at(x, y) = 0;
                plane.depth.at(x, y) = 0.0f;
                for (int ch = 0; ch < plane.image.channels(); ++ch) plane.image.at(x, y, ch) = 0.0f;
            }
        }
    }
    return stack;
}

MultiPlaneStack fill_cracks(MultiPlaneStack stack, const WarpOptions& options)
{
    check_stack(stack);
    for (auto& plane : stack.planes) {
        const auto response = convolve_mask(plane.mask, options.crack_kernel, options.border);
        const Plane before = plane;
        const int w = plane.mask.width();
        const int h = plane.mask.height();
        const int c = plane.image.channels();
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (before.mask.at(x, y) || !(response[std::size_t(y) * w + x] > options.crack_threshold)) continue;
                double weight = 0.0;
                double d = 0.0;
                double color[3] = {0.0, 0.0, 0.0};
                for (int k = 0; k < 9; ++k) {
                    const int nx = x + kDx[k];
                    const int ny = y + kDy[k];
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h || !before.mask.at(nx, ny)) continue;
                    const double kw = options.crack_kernel[k];
                    weight += kw;
                    d += kw * before.depth.at(nx, ny);
                    for (int ch = 0; ch < c; ++ch) color[ch] += kw * before.image.at(nx, ny, ch);
                }
                if (!(weight > 0.0)) continue;
                plane.mask.at(x, y) = 1;
                plane.depth.at(x, y) = float(d / weight);
                for (int ch = 0; ch < c; ++ch) plane.image.at(x, y, ch) = float(color[ch] / weight);
            }
        }
    }
    return stack;
}

WarpedFrame blend_planes(const MultiPlaneStack& stack)
{
    check_stack(stack);
    const auto& first = stack.planes.front();
    WarpedFrame out{FrameBuffer(first.image.width(), first.image.height(), first.image.channels()),
                    DisocclusionMask(first.mask.width(), first.mask.height())};
    const int c = first.image.channels();
    for (auto it = stack.planes.rbegin(); it != stack.planes.rend(); ++it) {
        const auto& plane = *it;
        for (int y = 0; y < plane.mask.height(); ++y) {
            for (int x = 0; x < plane.mask.width(); ++x) {
                if (!plane.mask.at(x, y)) continue;
                out.mask.at(x, y) = 1;
                for (int ch = 0; ch < c; ++ch) out.image.at(x, y, ch) = plane.image.at(x, y, ch);
            }
        }
    }
    return out;
}

WarpedFrame warp_frame(const FrameBuffer& rgb, const DepthMap& depth, const CameraOffset& cam,
                       const WarpOptions& options)
{
    validate_camera(cam, options);
    if (cam.is_identity()) {
        if (rgb.width() != depth.width() || rgb.height() != depth.height())
            throw Error(ErrorCode::DimensionMismatch, "RGB and depth sizes differ");
        return {rgb, DisocclusionMask(rgb.width(), rgb.height(), 1)};
    }
    auto stack = splat_to_planes(rgb, depth, cam, options);
    stack = remove_isolated(std::move(stack), options);
    stack = fill_cracks(std::move(stack), options);
    return blend_planes(stack);
}

WarpedVideo warp_video(const std::vector<FrameBuffer>& rgb, const std::vector<DepthMap>& depth,
                       const CameraOffset& cam, const WarpOptions& options)
{
    if (rgb.size() != depth.size())
        throw Error(ErrorCode::DimensionMismatch, "RGB and depth sequences differ in length");
    WarpedVideo out;
    out.frames.reserve(rgb.size());
    out.masks.reserve(rgb.size());
    for (std::size_t i = 0; i < rgb.size(); ++i) {
        auto warped = warp_frame(rgb[i], depth[i], cam, options);
        out.frames.push_back(std::move(warped.image));
        out.masks.push_back(std::move(warped.mask));
    }
    return out;
}

}  // namespace stereodiff
