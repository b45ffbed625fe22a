#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "scene.hpp"
#include "stereodiff/codec.hpp"
#include "stereodiff/error.hpp"
#include "stereodiff/latent.hpp"

using namespace stereodiff;
namespace st = stereodiff::testing;

namespace {

LatentTensor random_latent(int c, int h, int w, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> n;
    LatentTensor z(c, h, w);
    for (float& v : z.data()) v = n(rng);
    return z;
}

LatentMask random_latent_mask(int h, int w, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<std::uint8_t> d(std::size_t(h) * w);
    for (auto& v : d) v = std::uint8_t(rng() & 1u);
    return LatentMask(h, w, std::move(d));
}

}  // namespace

TEST(DownsampleMask, MinPool)
{
    EXPECT_EQ(downsample_mask(DisocclusionMask(8, 8, 1), 8), LatentMask(1, 1, 1));
    DisocclusionMask one_hole(8, 8, 1);
    one_hole.at(5, 2) = 0;
    EXPECT_EQ(downsample_mask(one_hole, 8), LatentMask(1, 1, 0));
    const auto m = st::random_mask(7, 5, 0.5, 1);
    const auto d1 = downsample_mask(m, 1);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 7; ++x) EXPECT_EQ(d1.at(y, x), m.at(x, y));
}

TEST(DownsampleMask, PartialBlocksAndOracle)
{
    const auto m = st::random_mask(19, 13, 0.93, 2);
    const auto d = downsample_mask(m, 4);
    ASSERT_EQ(d.width(), 5);
    ASSERT_EQ(d.height(), 4);
    for (int ly = 0; ly < 4; ++ly) {
        for (int lx = 0; lx < 5; ++lx) {
            bool known = true;
            for (int y = ly * 4; y < std::min(13, ly * 4 + 4); ++y)
                for (int x = lx * 4; x < std::min(19, lx * 4 + 4); ++x) known = known && m.at(x, y);
            EXPECT_EQ(d.at(ly, lx), known ? 1 : 0);
        }
    }
    EXPECT_THROW(downsample_mask(m, 0), Error);
}

TEST(Combine, Extremes)
{
    const auto a = random_latent(4, 3, 5, 1);
    const auto b = random_latent(4, 3, 5, 2);
    EXPECT_EQ(combine_masked(a, b, LatentMask(3, 5, 1)), a);
    EXPECT_EQ(combine_masked(a, b, LatentMask(3, 5, 0)), b);
    EXPECT_THROW(combine_masked(a, random_latent(4, 3, 4, 3), LatentMask(3, 5, 1)), Error);
}

TEST(Combine, MatchesScalarSelect)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto a = random_latent(3, 6, 7, seed);
        const auto b = random_latent(3, 6, 7, seed + 100);
        const auto m = random_latent_mask(6, 7, seed + 200);
        EXPECT_EQ(combine_masked(a, b, m), st::select_oracle(a, b, m));
    }
}

TEST(LatentShapes, Validation)
{
    EXPECT_THROW(LatentTensor(0, 2, 2), Error);
    EXPECT_THROW(LatentTensor(1, 2, 2, std::vector<float>(3)), Error);
    EXPECT_THROW(LatentMask(1, 1, std::vector<std::uint8_t>{3}), Error);
    EXPECT_EQ(latent_extent(64, 8), 8);
    EXPECT_EQ(latent_extent(65, 8), 9);
}

TEST(Codec, IdentityIsExact)
{
    IdentityCodec codec;
    std::vector<FrameBuffer> frames = {st::random_image(9, 7, 3, 1), st::random_image(9, 7, 3, 2)};
    const auto z = codec.encode(frames);
    ASSERT_EQ(z.size(), 2u);
    EXPECT_EQ(z[0].channels(), 3);
    EXPECT_EQ(z[0].at(2, 4, 5), frames[0].at(5, 4, 2));
    EXPECT_EQ(codec.decode(z, 9, 7), frames);
    EXPECT_THROW(codec.decode(z, 8, 7), Error);
}

TEST(Codec, AvgPoolMeansAndBroadcasts)
{
    AvgPoolCodec codec(4);
    const FrameBuffer f = st::random_image(10, 6, 3, 3);
    const auto z = codec.encode(std::span(&f, 1));
    ASSERT_EQ(z[0].width(), 3);
    ASSERT_EQ(z[0].height(), 2);
    for (int c = 0; c < 3; ++c) {
        for (int ly = 0; ly < 2; ++ly) {
            for (int lx = 0; lx < 3; ++lx) {
                double acc = 0.0;
                int n = 0;
                for (int y = ly * 4; y < std::min(6, ly * 4 + 4); ++y)
                    for (int x = lx * 4; x < std::min(10, lx * 4 + 4); ++x, ++n) acc += f.at(x, y, c);
                EXPECT_NEAR(z[0].at(c, ly, lx), acc / n, 1e-6);
            }
        }
    }
    const auto back = codec.decode(z, 10, 6);
    EXPECT_EQ(back[0].at(9, 5, 1), z[0].at(1, 1, 2));
    // Block-constant images survive the round trip.
    EXPECT_EQ(codec.encode(back), z);
}

TEST(Codec, Factory)
{
    EXPECT_EQ(make_codec("identity")->down(), 1);
    EXPECT_EQ(make_codec("avgpool8")->down(), 8);
    EXPECT_EQ(make_codec("avgpool")->down(), 8);
    EXPECT_EQ(make_codec("avgpool2")->name(), "avgpool2");
    EXPECT_THROW(make_codec("vae"), Error);
    EXPECT_THROW(make_codec("avgpoolx"), Error);
    EXPECT_THROW(make_codec("avgpool0"), Error);
}
