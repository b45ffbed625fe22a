#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stereodiff/depth_prep.hpp"
#include "stereodiff/image.hpp"
#include "stereodiff/warp.hpp"

namespace stereodiff {

enum class TrajectoryKind { LinearBaseline, Spiral };

struct Trajectory {
    TrajectoryKind kind = TrajectoryKind::LinearBaseline;
    /// views[0] is the reference camera and always has zero offset.
    std::vector<CameraOffset> views;

    std::size_t size() const noexcept { return views.size(); }
    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Evenly spaced cameras from the reference (offset 0) to the full baseline, both ends included.
Trajectory build_linear_trajectory(double baseline, int n_views, double focal_px);

/// Closed-loop spiral: view k sits at (b sin(2 pi k/K) a_x, b (1 - cos(2 pi k/K)) a_y) with K = n_views.
Trajectory build_spiral_trajectory(double baseline, int n_views, double focal_px, double amplitude_x = 1.0,
                                   double amplitude_y = 0.5);

/// (S+1) x (V+1) grid: row s holds time s seen from every camera, column v is camera v's video.
struct FrameMatrix {
    Grid<FrameBuffer> frames;
    Grid<DisocclusionMask> masks;
    Trajectory trajectory;
    std::string prompt;

    std::size_t n_frames() const noexcept { return frames.rows(); }
    std::size_t n_views() const noexcept { return frames.cols(); }
    int width() const noexcept { return frames.size() ? frames(0, 0).width() : 0; }
    int height() const noexcept { return frames.size() ? frames(0, 0).height() : 0; }
    int channels() const noexcept { return frames.size() ? frames(0, 0).channels() : 0; }

    /// Disoccluded pixel count summed over one column.
    std::size_t unknown_pixels(std::size_t view) const;
};

/// Column 0 is the input video with all-ones masks; column v is the input warped to views[v].
FrameMatrix build_frame_matrix(const std::vector<FrameBuffer>& rgb, const DepthSequence& depth,
                               const Trajectory& trajectory, const WarpOptions& options = {},
                               std::string prompt = {});

/// Writes v{v:02}/f{s:03}.png, v{v:02}/m{s:03}.png and manifest.json under `dir`.
void save_frame_matrix(const FrameMatrix& matrix, const std::filesystem::path& dir, int bit_depth = 16);
FrameMatrix load_frame_matrix(const std::filesystem::path& dir);

std::string frame_path_name(std::size_t view, std::size_t frame);
std::string mask_path_name(std::size_t view, std::size_t frame);

}  // namespace stereodiff
