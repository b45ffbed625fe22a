#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "scene.hpp"
#include "stereodiff/error.hpp"
#include "stereodiff/warp.hpp"

using namespace stereodiff;
namespace st = stereodiff::testing;

namespace {

Plane make_plane(const DisocclusionMask& mask, const FrameBuffer& image)
{
    return Plane{image, mask, DepthMap(mask.width(), mask.height(), 5.0f), 1.0f, 10.0f};
}

MultiPlaneStack single(const DisocclusionMask& mask, const FrameBuffer& image)
{
    MultiPlaneStack s;
    s.planes.push_back(make_plane(mask, image));
    return s;
}

DepthMap random_depth(int w, int h, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(1.0f, 10.0f);
    DepthMap d(w, h);
    for (float& v : d.data()) v = u(rng);
    return d;
}

}  // namespace

TEST(Planes, UniformInInverseDepth)
{
    const auto b = plane_boundaries(4, 1.0f, 10.0f);
    ASSERT_EQ(b.size(), 5u);
    for (int k = 0; k <= 4; ++k) EXPECT_NEAR(1.0 / b[k], 1.0 - 0.9 * k / 4.0, 1e-6);
    EXPECT_EQ(plane_index(b, 1.0f), 0);
    EXPECT_EQ(plane_index(b, 10.0f), 3);
    EXPECT_EQ(plane_index(b, b[2]), 2);
    EXPECT_THROW(plane_boundaries(0, 1.0f, 10.0f), Error);
}

TEST(Splat, TargetColumnMatchesProjection)
{
    const FrameBuffer rgb = st::random_image(64, 4, 3, 1);
    const DepthMap depth(64, 4, 2.0f);
    const CameraOffset cam{0.08, 0.0, 512.0};
    const auto stack = splat_to_planes(rgb, depth, cam);
    EXPECT_NEAR(disparity_px(512.0, 0.08, 2.0), 20.48, 1e-12);
    for (int x = 0; x < 64; ++x) {
        const int tx = int(std::lround(x - 20.48));
        if (tx < 0) continue;
        const int p = plane_index(plane_boundaries(4, 1.0f, 10.0f), 2.0f);
        EXPECT_EQ(stack.planes[p].mask.at(tx, 0), 1);
        EXPECT_EQ(stack.planes[p].image.at(tx, 0, 1), rgb.at(x, 0, 1));
    }
}

TEST(Splat, ZeroOffsetReproducesSource)
{
    const FrameBuffer rgb = st::random_image(16, 8, 3, 2);
    const DepthMap depth = random_depth(16, 8, 3);
    const auto out = blend_planes(splat_to_planes(rgb, depth, CameraOffset{0.0, 0.0, 16.0}));
    EXPECT_EQ(out.image, rgb);
    EXPECT_TRUE(out.mask.all_known());
}

TEST(Splat, FarPlaneGetsUniformShift)
{
    const FrameBuffer rgb = st::random_image(40, 6, 3, 4);
    const DepthMap depth(40, 6, 10.0f);
    const CameraOffset cam{0.1, 0.0, 400.0};  // delta = 4
    const auto stack = splat_to_planes(rgb, depth, cam);
    for (int p = 0; p < 3; ++p) EXPECT_EQ(stack.planes[p].mask.count_known(), 0u);
    const auto oracle = st::project_oracle(rgb, depth, 400.0, 0.1);
    EXPECT_EQ(stack.planes[3].mask, oracle.mask);
    EXPECT_EQ(stack.planes[3].image, oracle.image);
}

TEST(Splat, ZBufferMatchesOracleOnRandomDepth)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const FrameBuffer rgb = st::random_image(48, 12, 3, seed);
        const DepthMap depth = random_depth(48, 12, seed + 100);
        WarpOptions opt;
        opt.n_planes = 1;
        const auto out = blend_planes(splat_to_planes(rgb, depth, CameraOffset{0.05, 0.0, 60.0}, opt));
        const auto oracle = st::project_oracle(rgb, depth, 60.0, 0.05);
        EXPECT_EQ(out.mask, oracle.mask);
        EXPECT_EQ(out.image, oracle.image);
    }
}

TEST(Splat, Preconditions)
{
    const FrameBuffer rgb(4, 4, 3);
    EXPECT_THROW(splat_to_planes(rgb, DepthMap(4, 4, 0.5f), CameraOffset{0.05}), Error);
    EXPECT_THROW(splat_to_planes(rgb, DepthMap(4, 3, 2.0f), CameraOffset{0.05}), Error);
    try {
        splat_to_planes(rgb, DepthMap(4, 4, 2.0f), CameraOffset{0.5});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BaselineOutOfRange);
    }
}

TEST(Isolation, LonePixelIsRemoved)
{
    DisocclusionMask m(5, 5);
    m.at(2, 2) = 1;
    const auto resp = convolve_mask(m, kBoxKernel, BorderMode::Zero);
    EXPECT_NEAR(resp[2 * 5 + 2], 1.0 / 9.0, 1e-7);
    const auto out = remove_isolated(single(m, FrameBuffer(5, 5, 3, 1.0f)));
    EXPECT_EQ(out.planes[0].mask.count_known(), 0u);
    EXPECT_EQ(out.planes[0].image.at(2, 2, 0), 0.0f);
}

TEST(Isolation, FullInteriorAndHalfNeighbourhoodKept)
{
    DisocclusionMask full(5, 5, 1);
    EXPECT_EQ(remove_isolated(single(full, FrameBuffer(5, 5, 1))).planes[0].mask, full);

    DisocclusionMask m(5, 5);
    m.at(2, 2) = 1;
    m.at(1, 1) = m.at(3, 1) = m.at(1, 3) = m.at(3, 3) = 1;
    EXPECT_NEAR(convolve_mask(m, kBoxKernel, BorderMode::Zero)[12], 5.0 / 9.0, 1e-7);
    EXPECT_EQ(remove_isolated(single(m, FrameBuffer(5, 5, 1))).planes[0].mask.at(2, 2), 1);
}

TEST(Isolation, MatchesNeighbourCountOracle)
{
    for (BorderMode border : {BorderMode::Renormalize, BorderMode::Zero}) {
        WarpOptions opt;
        opt.border = border;
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            const auto m = st::random_mask(13, 9, 0.55, seed);
            const auto out = remove_isolated(single(m, FrameBuffer(13, 9, 1)), opt);
            EXPECT_EQ(out.planes[0].mask, st::isolation_oracle(m, border == BorderMode::Zero)) << seed;
        }
    }
}

TEST(Isolation, ZeroPaddingErodesCorners)
{
    DisocclusionMask full(4, 4, 1);
    WarpOptions opt;
    opt.border = BorderMode::Zero;
    const auto out = remove_isolated(single(full, FrameBuffer(4, 4, 1)), opt).planes[0].mask;
    EXPECT_EQ(out.at(0, 0), 0);
    EXPECT_EQ(out.at(1, 0), 1);
    EXPECT_EQ(remove_isolated(single(full, FrameBuffer(4, 4, 1))).planes[0].mask, full);
}

TEST(Cracks, BinomialKernelFillsSurroundedHole)
{
    DisocclusionMask m(3, 3, 1);
    m.at(1, 1) = 0;
    FrameBuffer img(3, 3, 1);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x) img.at(x, y) = float(x + 3 * y) / 8.0f;
    img.at(1, 1) = 0.0f;
    const auto resp = convolve_mask(m, kBinomialKernel, BorderMode::Zero);
    EXPECT_NEAR(resp[4], 12.0 / 16.0, 1e-7);
    WarpOptions opt;
    opt.crack_kernel = kBinomialKernel;
    const auto out = fill_cracks(single(m, img), opt).planes[0];
    EXPECT_EQ(out.mask.at(1, 1), 1);
    EXPECT_NEAR(out.image.at(1, 1), st::crack_fill_oracle(img, m, kBinomialKernel, 1, 1)[0], 1e-6);
}

TEST(Cracks, EmptyNeighbourhoodStaysHoled)
{
    DisocclusionMask m(5, 5);
    m.at(0, 0) = 1;
    const auto out = fill_cracks(single(m, FrameBuffer(5, 5, 1))).planes[0];
    EXPECT_EQ(out.mask.at(3, 3), 0);
}

TEST(Cracks, DefaultKernelLeavesStraightEdges)
{
    const Kernel3x3 k = gaussian_kernel(kCrackSigma);
    double sum = 0.0;
    for (float v : k) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-6);
    EXPECT_NEAR(k[0] + k[1] + k[2], 0.166, 0.001);
    EXPECT_EQ(WarpOptions{}.crack_kernel, k);
    EXPECT_THROW(gaussian_kernel(0.0f), Error);

    // Half-plane hole: only thin features and corners qualify, so the edge is preserved.
    DisocclusionMask m(10, 6, 1);
    for (int y = 0; y < 6; ++y)
        for (int x = 5; x < 10; ++x) m.at(x, y) = 0;
    const auto out = fill_cracks(single(m, FrameBuffer(10, 6, 1))).planes[0];
    EXPECT_EQ(out.mask, m);

    // One-pixel vertical crack is closed.
    DisocclusionMask crack(10, 6, 1);
    for (int y = 0; y < 6; ++y) crack.at(4, y) = 0;
    EXPECT_TRUE(fill_cracks(single(crack, FrameBuffer(10, 6, 1))).planes[0].mask.all_known());
}

TEST(Cracks, MatchesConvolutionOracle)
{
    const std::array<Kernel3x3, 2> kernels = {kBinomialKernel, gaussian_kernel(kCrackSigma)};
    for (const auto& kernel : kernels) {
        for (BorderMode border : {BorderMode::Renormalize, BorderMode::Zero}) {
            WarpOptions opt;
            opt.crack_kernel = kernel;
            opt.border = border;
            for (std::uint64_t seed = 0; seed < 20; ++seed) {
                const auto m = st::random_mask(11, 8, 0.6, seed);
                const auto img = st::random_image(11, 8, 3, seed + 50);
                const auto out = fill_cracks(single(m, img), opt).planes[0];
                const auto cracks = st::crack_oracle(m, kernel, opt.crack_threshold, border == BorderMode::Zero);
                for (int y = 0; y < 8; ++y) {
                    for (int x = 0; x < 11; ++x) {
                        const bool filled = cracks.at(x, y) != 0;
                        ASSERT_EQ(out.mask.at(x, y), m.at(x, y) || filled);
                        if (!filled) continue;
                        const auto want = st::crack_fill_oracle(img, m, kernel, x, y);
                        for (int c = 0; c < 3; ++c) ASSERT_NEAR(out.image.at(x, y, c), want[std::size_t(c)], 1e-6);
                    }
                }
            }
        }
    }
}

TEST(Blend, BackToFront)
{
    MultiPlaneStack s;
    DisocclusionMask left(4, 2);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) left.at(x, y) = 1;
    s.planes.push_back(make_plane(left, FrameBuffer(4, 2, 1, 1.0f)));
    s.planes.push_back(make_plane(DisocclusionMask(4, 2, 1), FrameBuffer(4, 2, 1, 0.5f)));
    const auto out = blend_planes(s);
    EXPECT_EQ(out.image.at(0, 0), 1.0f);
    EXPECT_EQ(out.image.at(3, 1), 0.5f);
    EXPECT_TRUE(out.mask.all_known());

    std::swap(s.planes[0], s.planes[1]);
    EXPECT_EQ(blend_planes(s).image.at(0, 0), 0.5f);
}

TEST(Blend, SinglePlaneAndOracle)
{
    const auto m = st::random_mask(6, 5, 0.5, 3);
    const auto img = st::random_image(6, 5, 3, 3);
    const auto out = blend_planes(single(m, img));
    EXPECT_EQ(out.mask, m);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 6; ++x)
            if (m.at(x, y)) EXPECT_EQ(out.image.at(x, y, 2), img.at(x, y, 2));

    MultiPlaneStack s;
    std::vector<FrameBuffer> images;
    std::vector<DisocclusionMask> masks;
    for (int p = 0; p < 3; ++p) {
        images.push_back(st::random_image(6, 5, 3, 10 + p));
        masks.push_back(st::random_mask(6, 5, 0.4, 20 + p));
        s.planes.push_back(make_plane(masks.back(), images.back()));
    }
    const auto oracle = st::zbuffer_blend_oracle(images, masks);
    const auto got = blend_planes(s);
    EXPECT_EQ(got.mask, oracle.mask);
    EXPECT_EQ(got.image, oracle.image);
    EXPECT_THROW(blend_planes(MultiPlaneStack{}), Error);
}

TEST(WarpVideo, FrontoParallelStrip)
{
    const FrameBuffer rgb = st::random_image(96, 10, 3, 5);
    const DepthMap depth(96, 10, 2.0f);
    const CameraOffset cam{0.08, 0.0, 512.0};
    const auto out = warp_frame(rgb, depth, cam);
    const auto oracle = st::project_oracle(rgb, depth, 512.0, 0.08);
    EXPECT_EQ(out.mask, oracle.mask);
    EXPECT_EQ(out.image, oracle.image);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 96; ++x) EXPECT_EQ(out.mask.at(x, y), x < 96 - 20 ? 1 : 0);
}

TEST(WarpVideo, LengthAndIdentity)
{
    std::vector<FrameBuffer> rgb;
    std::vector<DepthMap> depth;
    for (int i = 0; i < 16; ++i) {
        rgb.push_back(st::random_image(8, 8, 3, std::uint64_t(i)));
        depth.push_back(random_depth(8, 8, std::uint64_t(i)));
    }
    const auto moved = warp_video(rgb, depth, CameraOffset{0.02, 0.0, 8.0});
    EXPECT_EQ(moved.frames.size(), 16u);
    EXPECT_EQ(moved.masks.size(), 16u);
    const auto same = warp_video(rgb, depth, CameraOffset{0.0, 0.0, 8.0});
    EXPECT_EQ(same.frames, rgb);
    for (const auto& m : same.masks) EXPECT_TRUE(m.all_known());
    depth.pop_back();
    EXPECT_THROW(warp_video(rgb, depth, CameraOffset{0.02}), Error);
}

TEST(WarpVideo, NearContentMovesFurther)
{
    const auto scene = st::make_scene(64, 32, 1);
    DepthSequence seq = scene.depth;
    for (float& v : seq.frames[0].data()) v = v < 5.0f ? 2.0f : 8.0f;
    const auto out = warp_frame(scene.rgb[0], seq.frames[0], CameraOffset{0.08, 0.0, 64.0});
    // Rectangle starts at x = 16 and shifts by round(2.56) = 3; the background behind it by 1.
    // The strip between the moved rectangle's right edge and the background edge is disoccluded.
    const int y = 16;
    EXPECT_EQ(out.image.at(13, y, 0), scene.rgb[0].at(16, y, 0));
    EXPECT_EQ(out.mask.at(29, y), 0);
    EXPECT_EQ(out.mask.at(63, y), 0);
    EXPECT_EQ(out.mask.at(62, y), 1);
}
