#include "stereodiff/frame_matrix.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json_io.hpp"
#include "stereodiff/error.hpp"
#include "stereodiff/io.hpp"

namespace stereodiff {

namespace fs = std::filesystem;

Trajectory build_linear_trajectory(double baseline, int n_views, double focal_px)
{
    if (n_views < 2) throw Error(ErrorCode::InvalidViewCount, "a linear trajectory needs at least 2 views");
    Trajectory t{TrajectoryKind::LinearBaseline, {}};
    t.views.reserve(std::size_t(n_views));
    for (int k = 0; k < n_views; ++k) {
        const double offset = k == n_views - 1 ? baseline : baseline * k / (n_views - 1);
        t.views.push_back(CameraOffset{offset, 0.0, focal_px});
    }
    return t;
}

Trajectory build_spiral_trajectory(double baseline, int n_views, double focal_px, double amplitude_x,
                                   double amplitude_y)
{
    if (n_views < 2) throw Error(ErrorCode::InvalidViewCount, "a spiral trajectory needs at least 2 views");
    Trajectory t{TrajectoryKind::Spiral, {}};
    for (int k = 0; k < n_views; ++k) {
        const double phase = 2.0 * std::numbers::pi * k / n_views;
        t.views.push_back(CameraOffset{baseline * std::sin(phase) * amplitude_x,
                                       baseline * (1.0 - std::cos(phase)) * amplitude_y, focal_px});
    }
    t.views.front() = CameraOffset{0.0, 0.0, focal_px};
    return t;
}

std::size_t FrameMatrix::unknown_pixels(std::size_t view) const
{
    std::size_t total = 0;
    for (const auto& m : masks.col(view)) total += m.count_unknown();
    return total;
}

FrameMatrix build_frame_matrix(const std::vector<FrameBuffer>& rgb, const DepthSequence& depth,
                               const Trajectory& trajectory, const WarpOptions& options, std::string prompt)
{
    if (trajectory.views.empty()) throw Error(ErrorCode::InvalidViewCount, "trajectory has no views");
    if (!trajectory.views.front().is_identity())
        throw Error(ErrorCode::InvalidArgument, "view 0 of the trajectory must be the reference camera");
    if (rgb.empty()) throw Error(ErrorCode::InvalidArgument, "empty input video");
    if (rgb.size() != depth.frames.size())
        throw Error(ErrorCode::DimensionMismatch, "RGB and depth sequences differ in length");
    if (!depth.normalized) throw Error(ErrorCode::UnnormalizedDepth, "frame matrix needs normalized depth");

    const std::size_t rows = rgb.size();
    const std::size_t cols = trajectory.views.size();
    FrameMatrix fm{Grid<FrameBuffer>(rows, cols), Grid<DisocclusionMask>(rows, cols), trajectory, std::move(prompt)};

    for (std::size_t s = 0; s < rows; ++s) {
        fm.frames(s, 0) = rgb[s];
        fm.masks(s, 0) = DisocclusionMask(rgb[s].width(), rgb[s].height(), 1);
    }
    for (std::size_t v = 1; v < cols; ++v) {
        auto warped = warp_video(rgb, depth.frames, trajectory.views[v], options);
        for (std::size_t s = 0; s < rows; ++s) {
            fm.frames(s, v) = std::move(warped.frames[s]);
            fm.masks(s, v) = std::move(warped.masks[s]);
        }
    }
    return fm;
}

std::string frame_path_name(std::size_t view, std::size_t frame)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "v%02zu/f%03zu.png", view, frame);
    return buf;
}

std::string mask_path_name(std::size_t view, std::size_t frame)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "v%02zu/m%03zu.png", view, frame);
    return buf;
}

void save_frame_matrix(const FrameMatrix& matrix, const fs::path& dir, int bit_depth)
{
    fs::create_directories(dir);
    for (std::size_t v = 0; v < matrix.n_views(); ++v) {
        for (std::size_t s = 0; s < matrix.n_frames(); ++s) {
            write_png(dir / frame_path_name(v, s), matrix.frames(s, v), bit_depth);
            write_mask_png(dir / mask_path_name(v, s), matrix.masks(s, v));
        }
    }
    const nlohmann::json manifest = {
        {"format", "stereodiff-frame-matrix"},
        {"version", 1},
        {"frames", matrix.n_frames()},
        {"views", matrix.n_views()},
        {"width", matrix.width()},
        {"height", matrix.height()},
        {"channels", matrix.channels()},
        {"bit_depth", bit_depth},
        {"prompt", matrix.prompt},
        {"trajectory", matrix.trajectory},
    };
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    if (!out) throw Error(ErrorCode::FileAccess, "cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
}

FrameMatrix load_frame_matrix(const fs::path& dir)
{
    std::ifstream in(dir / "manifest.json");
    if (!in) throw Error(ErrorCode::FileAccess, "missing frame-matrix manifest in " + dir.string());
    std::stringstream text;
    text << in.rdbuf();
    const auto manifest = parse_json(text.str(), (dir / "manifest.json").string());

    FrameMatrix fm;
    std::size_t rows = 0, cols = 0;
    int width = 0, height = 0;
    try {
        if (manifest.at("format") != "stereodiff-frame-matrix")
            throw Error(ErrorCode::UnsupportedFormat, "not a frame-matrix manifest");
        rows = manifest.at("frames").get<std::size_t>();
        cols = manifest.at("views").get<std::size_t>();
        width = manifest.at("width").get<int>();
        height = manifest.at("height").get<int>();
        fm.prompt = manifest.value("prompt", std::string{});
        fm.trajectory = manifest.at("trajectory").get<Trajectory>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::UnsupportedFormat, std::string("frame-matrix manifest: ") + e.what());
    }
    if (fm.trajectory.views.size() != cols)
        throw Error(ErrorCode::UnsupportedFormat, "manifest trajectory length differs from view count");

    fm.frames = Grid<FrameBuffer>(rows, cols);
    fm.masks = Grid<DisocclusionMask>(rows, cols);
    for (std::size_t v = 0; v < cols; ++v) {
        for (std::size_t s = 0; s < rows; ++s) {
            auto frame = read_png(dir / frame_path_name(v, s));
            auto mask = read_mask_png(dir / mask_path_name(v, s));
            if (frame.width() != width || frame.height() != height || mask.width() != width ||
                mask.height() != height)
                throw Error(ErrorCode::DimensionMismatch, "frame-matrix cell size differs from manifest");
            fm.frames(s, v) = std::move(frame);
            fm.masks(s, v) = std::move(mask);
        }
    }
    return fm;
}

}  // namespace stereodiff
