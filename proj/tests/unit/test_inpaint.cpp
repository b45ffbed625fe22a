#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "scene.hpp"
#include "stereodiff/error.hpp"
#include "stereodiff/inpaint.hpp"

using namespace stereodiff;
namespace st = stereodiff::testing;

namespace {

ScheduleConfig small_schedule()
{
    ScheduleConfig cfg;
    cfg.total_steps = 100;
    cfg.denoise_steps = 10;
    cfg.resample_hi = 4;
    cfg.resample_lo = 2;
    return cfg;
}

class LimitedDenoiser final : public DenoiserEndpoint {
public:
    Prediction predict(std::span<const LatentTensor> z, std::string_view c, int t, const SequenceRef& r) override
    {
        return inner_.predict(z, c, t, r);
    }
    std::size_t max_sequence_length() const noexcept override { return 2; }

private:
    ZeroDenoiser inner_;
};

/// Expected call order, written out from the resampling rules without using the library loop.
std::vector<CallRecord> reference_trace(const NoiseSchedule& s, std::size_t rows, std::size_t cols)
{
    std::vector<CallRecord> out;
    for (const auto& step : s.plan()) {
        for (int rep = 1; rep <= step.repetitions; ++rep) {
            if (step.scope == ResampleScope::RightOnly) {
                out.push_back({step.t, {SequenceAxis::Column, cols - 1}, rows});
            } else if (rep % 2 == 1) {
                for (std::size_t v = 0; v < cols; ++v) out.push_back({step.t, {SequenceAxis::Column, v}, rows});
            } else {
                for (std::size_t r = 0; r < rows; ++r) out.push_back({step.t, {SequenceAxis::Row, r}, cols});
            }
        }
    }
    return out;
}

struct Fixture {
    FrameMatrix warped;
    FrameMatrix targets;
};

Fixture scene_matrix(int w, int h, int frames, int views)
{
    const auto scene = st::make_scene(w, h, frames);
    const auto depth = normalize_depth(scene.depth).sequence;
    Fixture f;
    f.warped = build_frame_matrix(scene.rgb, depth, build_linear_trajectory(0.08, views, double(w)));
    f.targets = st::plant_targets(f.warped);
    return f;
}

Grid<LatentTensor> encode_grid(const FrameMatrix& fm, const LatentCodec& codec)
{
    Grid<LatentTensor> g(fm.n_frames(), fm.n_views());
    for (std::size_t v = 0; v < fm.n_views(); ++v) {
        const auto z = codec.encode(fm.frames.col(v).to_vector());
        for (std::size_t s = 0; s < fm.n_frames(); ++s) g(s, v) = z[s];
    }
    return g;
}

}  // namespace

TEST(InpaintSequence, AllKnownIsCodecRoundTrip)
{
    const auto sched = make_schedule(small_schedule());
    std::vector<FrameBuffer> frames = {st::random_image(16, 16, 3, 1), st::random_image(16, 16, 3, 2)};
    std::vector<DisocclusionMask> masks(2, DisocclusionMask(16, 16, 1));
    ZeroDenoiser zero;
    IdentityCodec id;
    EXPECT_EQ(inpaint_sequence(frames, masks, "", id, zero, sched, {.seed = 3}), frames);
    AvgPoolCodec pool(8);
    const auto z = pool.encode(frames);
    EXPECT_EQ(inpaint_sequence(frames, masks, "", pool, zero, sched, {.seed = 3}), pool.decode(z, 16, 16));
}

TEST(InpaintSequence, OracleRecoversHoles)
{
    const auto sched = make_schedule();
    std::vector<FrameBuffer> truth, warped;
    std::vector<DisocclusionMask> masks;
    for (int i = 0; i < 4; ++i) {
        truth.push_back(st::random_image(12, 10, 3, std::uint64_t(i)));
        masks.push_back(st::random_mask(12, 10, 0.6, std::uint64_t(i) + 10));
        FrameBuffer w = truth.back();
        for (int y = 0; y < 10; ++y)
            for (int x = 0; x < 12; ++x)
                if (!masks.back().at(x, y))
                    for (int c = 0; c < 3; ++c) w.at(x, y, c) = 0.0f;
        warped.push_back(w);
    }
    IdentityCodec id;
    OracleDenoiser oracle(id.encode(truth), sched);
    const auto out = inpaint_sequence(warped, masks, "", id, oracle, sched, {.seed = 5, .deterministic = true});
    for (std::size_t i = 0; i < 4; ++i) {
        std::vector<float> got, want;
        for (int y = 0; y < 10; ++y)
            for (int x = 0; x < 12; ++x)
                if (!masks[i].at(x, y))
                    for (int c = 0; c < 3; ++c) {
                        got.push_back(out[i].at(x, y, c));
                        want.push_back(truth[i].at(x, y, c));
                    }
        EXPECT_LT(st::relative_error(got, want), 1e-3);
        for (int y = 0; y < 10; ++y)
            for (int x = 0; x < 12; ++x)
                if (masks[i].at(x, y)) EXPECT_EQ(out[i].at(x, y, 0), warped[i].at(x, y, 0));
    }
}

TEST(InpaintSequence, LengthLimit)
{
    const auto sched = make_schedule(small_schedule());
    std::vector<FrameBuffer> frames(3, FrameBuffer(4, 4, 3));
    std::vector<DisocclusionMask> masks(3, DisocclusionMask(4, 4, 1));
    LimitedDenoiser limited;
    IdentityCodec id;
    try {
        inpaint_sequence(frames, masks, "", id, limited, sched);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SequenceTooLong);
    }
    masks.pop_back();
    EXPECT_THROW(inpaint_sequence(frames, masks, "", id, limited, sched), Error);
}

TEST(InpaintMatrix, AllKnownIsCodecRoundTrip)
{
    const auto sched = make_schedule(small_schedule());
    FrameMatrix fm;
    fm.frames = Grid<FrameBuffer>(2, 3);
    fm.masks = Grid<DisocclusionMask>(2, 3, DisocclusionMask(16, 8, 1));
    for (std::size_t i = 0; i < 6; ++i) fm.frames.cells()[i] = st::random_image(16, 8, 3, i);
    fm.trajectory = build_linear_trajectory(0.0, 3, 16.0);
    ZeroDenoiser zero;
    AvgPoolCodec pool(8);
    const auto out = inpaint_frame_matrix(fm, pool, zero, sched, {.seed = 1});
    for (std::size_t i = 0; i < 6; ++i) {
        const auto z = pool.encode(std::span(&fm.frames.cells()[i], 1));
        EXPECT_EQ(out.matrix.frames.cells()[i], pool.decode(z, 16, 8)[0]);
    }
    EXPECT_EQ(out.matrix.masks, fm.masks);
    EXPECT_EQ(out.finalized_columns, (std::vector<bool>{false, false, true}));
}

TEST(InpaintMatrix, EveryCellConvergesToItsTarget)
{
    const auto sched = make_schedule();
    const auto fx = scene_matrix(24, 16, 2, 2);
    IdentityCodec id;
    OracleDenoiser oracle(encode_grid(fx.targets, id), sched);
    const auto out = inpaint_frame_matrix(fx.warped, id, oracle, sched, {.seed = 2, .deterministic = true});
    for (std::size_t i = 0; i < 4; ++i)
        EXPECT_LT(st::relative_error(out.matrix.frames.cells()[i].data(), fx.targets.frames.cells()[i].data()), 1e-3)
            << i;
}

TEST(InpaintMatrix, StochasticOracleStillLandsOnTarget)
{
    const auto sched = make_schedule(small_schedule());
    const auto fx = scene_matrix(24, 16, 3, 3);
    IdentityCodec id;
    OracleDenoiser oracle(encode_grid(fx.targets, id), sched, OracleVariance::Posterior);
    const auto out = inpaint_frame_matrix(fx.warped, id, oracle, sched, {.seed = 9});
    for (std::size_t s = 0; s < 3; ++s)
        EXPECT_LT(st::relative_error(out.matrix.frames(s, 2).data(), fx.targets.frames(s, 2).data()), 1e-3);
}

TEST(InpaintMatrix, CallTraceMatchesResamplingRules)
{
    const auto sched = make_schedule(small_schedule());
    const auto fx = scene_matrix(16, 8, 3, 4);
    ZeroDenoiser zero;
    RecordingDenoiser rec(zero);
    IdentityCodec id;
    inpaint_frame_matrix(fx.warped, id, rec, sched, {.reinject = false});
    EXPECT_EQ(rec.calls(), reference_trace(sched, 3, 4));
}

TEST(InpaintMatrix, ReinjectionCallsPerColumnWithHoles)
{
    const auto sched = make_schedule(small_schedule());
    const auto fx = scene_matrix(16, 8, 3, 3);
    ZeroDenoiser zero;
    RecordingDenoiser rec(zero);
    IdentityCodec id;
    inpaint_frame_matrix(fx.warped, id, rec, sched, {.reinject = true});
    std::vector<CallRecord> reinject, denoise;
    for (const auto& c : rec.calls()) (c.ref.purpose == CallPurpose::Reinject ? reinject : denoise).push_back(c);
    EXPECT_EQ(denoise, reference_trace(sched, 3, 3));
    std::vector<CallRecord> want;
    for (const auto& step : sched.plan()) {
        const std::size_t first = step.scope == ResampleScope::AllViews ? 1 : 2;  // column 0 has no holes
        for (std::size_t v = first; v < 3; ++v) want.push_back({step.t, {SequenceAxis::Column, v, CallPurpose::Reinject}, 3});
    }
    EXPECT_EQ(reinject, want);
}

TEST(InpaintMatrix, ThreadsDoNotChangeResults)
{
    const auto sched = make_schedule(small_schedule());
    const auto fx = scene_matrix(16, 16, 3, 3);
    IdentityCodec id;
    OracleDenoiser oracle(encode_grid(fx.targets, id), sched, OracleVariance::Posterior);
    const auto a = inpaint_frame_matrix(fx.warped, id, oracle, sched, {.seed = 4, .threads = 1});
    const auto b = inpaint_frame_matrix(fx.warped, id, oracle, sched, {.seed = 4, .threads = 4});
    EXPECT_EQ(a.matrix.frames, b.matrix.frames);
    ZeroDenoiser zero;
    const auto d = inpaint_frame_matrix(fx.warped, id, zero, sched, {.seed = 4});
    const auto e = inpaint_frame_matrix(fx.warped, id, zero, sched, {.seed = 5});
    EXPECT_NE(d.matrix.frames, e.matrix.frames);
}

TEST(InpaintMatrix, LengthLimitAppliesToBothAxes)
{
    const auto sched = make_schedule(small_schedule());
    const auto fx = scene_matrix(16, 8, 2, 3);
    LimitedDenoiser limited;
    IdentityCodec id;
    EXPECT_THROW(inpaint_frame_matrix(fx.warped, id, limited, sched), Error);
}
