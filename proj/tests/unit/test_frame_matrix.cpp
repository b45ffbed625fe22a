#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "scene.hpp"
#include "stereodiff/error.hpp"
#include "stereodiff/frame_matrix.hpp"

using namespace stereodiff;
namespace st = stereodiff::testing;
namespace fs = std::filesystem;

namespace {

DepthSequence normalized(const st::SyntheticScene& scene)
{
    return normalize_depth(scene.depth).sequence;
}

}  // namespace

TEST(Trajectory, LinearOffsets)
{
    const auto t = build_linear_trajectory(0.08, 8, 512.0);
    ASSERT_EQ(t.size(), 8u);
    for (int k = 0; k < 8; ++k) {
        EXPECT_NEAR(t.views[k].baseline_offset, 0.08 * k / 7.0, 1e-15);
        EXPECT_EQ(t.views[k].vertical_offset, 0.0);
        EXPECT_EQ(t.views[k].focal_px, 512.0);
    }
    EXPECT_EQ(t.views.back().baseline_offset, 0.08);

    const auto pair = build_linear_trajectory(0.08, 2, 512.0);
    EXPECT_EQ(pair.views[0].baseline_offset, 0.0);
    EXPECT_EQ(pair.views[1].baseline_offset, 0.08);

    for (const auto& v : build_linear_trajectory(0.0, 5, 512.0).views) EXPECT_TRUE(v.is_identity());
    EXPECT_THROW(build_linear_trajectory(0.08, 1, 512.0), Error);
}

TEST(Trajectory, SpiralIsClosedAndStartsAtReference)
{
    const auto t = build_spiral_trajectory(0.08, 8, 100.0);
    ASSERT_EQ(t.size(), 8u);
    EXPECT_TRUE(t.views[0].is_identity());
    for (int k = 0; k < 8; ++k) {
        const double phase = 2.0 * std::numbers::pi * k / 8.0;
        EXPECT_NEAR(t.views[k].baseline_offset, 0.08 * std::sin(phase), 1e-12);
        EXPECT_NEAR(t.views[k].vertical_offset, 0.04 * (1.0 - std::cos(phase)), 1e-12);
    }
    EXPECT_EQ(t.kind, TrajectoryKind::Spiral);
}

TEST(Matrix, ShapeAndColumns)
{
    const auto scene = st::make_scene(32, 16, 16);
    const auto depth = normalized(scene);
    const auto traj = build_linear_trajectory(0.08, 8, 32.0);
    const auto fm = build_frame_matrix(scene.rgb, depth, traj, {}, "a prompt");
    EXPECT_EQ(fm.n_frames(), 16u);
    EXPECT_EQ(fm.n_views(), 8u);
    EXPECT_EQ(fm.prompt, "a prompt");
    for (std::size_t s = 0; s < 16; ++s) {
        EXPECT_EQ(fm.frames(s, 0), scene.rgb[s]);
        EXPECT_TRUE(fm.masks(s, 0).all_known());
    }
    const auto right = warp_video(scene.rgb, depth.frames, traj.views.back());
    for (std::size_t s = 0; s < 16; ++s) {
        EXPECT_EQ(fm.frames(s, 7), right.frames[s]);
        EXPECT_EQ(fm.masks(s, 7), right.masks[s]);
    }
    EXPECT_EQ(fm.unknown_pixels(0), 0u);
    EXPECT_GT(fm.unknown_pixels(7), fm.unknown_pixels(1));
}

TEST(Matrix, SingleViewIsTheInputVideo)
{
    const auto scene = st::make_scene(16, 8, 3);
    Trajectory t{TrajectoryKind::LinearBaseline, {CameraOffset{0.0, 0.0, 16.0}}};
    const auto fm = build_frame_matrix(scene.rgb, normalized(scene), t);
    ASSERT_EQ(fm.n_views(), 1u);
    EXPECT_EQ(fm.frames.col(0).to_vector(), scene.rgb);
}

TEST(Matrix, Preconditions)
{
    const auto scene = st::make_scene(16, 8, 3);
    const auto traj = build_linear_trajectory(0.08, 3, 16.0);
    EXPECT_THROW(build_frame_matrix(scene.rgb, scene.depth, traj), Error);
    auto depth = normalized(scene);
    depth.frames.pop_back();
    EXPECT_THROW(build_frame_matrix(scene.rgb, depth, traj), Error);
    Trajectory bad = traj;
    std::swap(bad.views[0], bad.views[1]);
    EXPECT_THROW(build_frame_matrix(scene.rgb, normalized(scene), bad), Error);
}

TEST(Matrix, SaveLoadRoundTrip)
{
    const auto scene = st::make_scene(24, 16, 2);
    const auto fm = build_frame_matrix(scene.rgb, normalized(scene), build_spiral_trajectory(0.05, 3, 24.0), {},
                                       "p");
    const fs::path dir = fs::temp_directory_path() / "stereodiff_fm_roundtrip";
    fs::remove_all(dir);
    save_frame_matrix(fm, dir, 16);
    EXPECT_TRUE(fs::exists(dir / frame_path_name(2, 1)));
    EXPECT_EQ(frame_path_name(2, 1), "v02/f001.png");
    const auto back = load_frame_matrix(dir);
    EXPECT_EQ(back.masks, fm.masks);
    EXPECT_EQ(back.trajectory, fm.trajectory);
    EXPECT_EQ(back.prompt, "p");
    for (std::size_t i = 0; i < fm.frames.size(); ++i) {
        const auto a = fm.frames.cells()[i].data();
        const auto b = back.frames.cells()[i].data();
        for (std::size_t j = 0; j < a.size(); ++j) ASSERT_NEAR(a[j], b[j], 0.5 / 65535.0 + 1e-7);
    }
    EXPECT_THROW(load_frame_matrix(dir / "missing"), Error);
}
