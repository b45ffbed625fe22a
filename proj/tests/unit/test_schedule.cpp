#include <gtest/gtest.h>

#include <cmath>

#include "stereodiff/error.hpp"
#include "stereodiff/schedule.hpp"

using namespace stereodiff;

TEST(Schedule, Defaults)
{
    const auto s = make_schedule();
    EXPECT_EQ(s.total_steps(), 1000);
    ASSERT_EQ(s.plan().size(), 50u);
    EXPECT_EQ(s.stride(), 20);
    EXPECT_EQ(s.total_repetitions(), 25 * 8 + 25 * 4);
    EXPECT_EQ(s.plan().front().t, 1000);
    EXPECT_EQ(s.plan().back().t, 20);
    EXPECT_EQ(s.plan().back().t_prev, 0);
    for (std::size_t i = 0; i < 50; ++i) {
        const auto& st = s.plan()[i];
        EXPECT_EQ(st.t, 1000 - int(i) * 20);
        EXPECT_EQ(st.repetitions, i < 25 ? 8 : 4);
        EXPECT_EQ(st.scope, i < 25 ? ResampleScope::AllViews : ResampleScope::RightOnly);
    }
    EXPECT_NEAR(s.beta(1), 1e-4, 1e-15);
    EXPECT_NEAR(s.beta(1000), 0.02, 1e-15);
    EXPECT_EQ(s.alpha_bar(0), 1.0);
}

TEST(Schedule, HandProduct)
{
    const NoiseSchedule s({0.1, 0.2}, {{2, 1, 1, ResampleScope::AllViews}, {1, 0, 1, ResampleScope::AllViews}});
    EXPECT_NEAR(s.alpha_bar(1), 0.9, 1e-15);
    EXPECT_NEAR(s.alpha_bar(2), 0.72, 1e-15);
    EXPECT_NEAR(s.transition_beta(1, 2), 0.2, 1e-15);
    EXPECT_NEAR(s.transition_beta(0, 2), 0.28, 1e-15);
    EXPECT_NEAR(s.posterior_variance(2, 1), 0.2 * 0.1 / 0.28, 1e-15);
    EXPECT_EQ(s.posterior_variance(1, 0), 0.0);
}

TEST(Schedule, TinyBetasKeepSignal)
{
    ScheduleConfig cfg;
    cfg.beta_lo = 1e-12;
    cfg.beta_hi = 1e-12;
    EXPECT_NEAR(make_schedule(cfg).alpha_bar(1000), 1.0, 1e-8);
}

TEST(Schedule, JumpBetaMatchesProductOverStride)
{
    const auto s = make_schedule();
    for (const auto& st : s.plan()) {
        double prod = 1.0;
        for (int u = st.t_prev + 1; u <= st.t; ++u) prod *= 1.0 - s.beta(u);
        EXPECT_NEAR(s.transition_beta(st.t_prev, st.t), 1.0 - prod, 1e-12);
    }
}

TEST(Schedule, OddStepCountSplitsCeil)
{
    ScheduleConfig cfg;
    cfg.total_steps = 30;
    cfg.denoise_steps = 5;
    const auto s = make_schedule(cfg);
    EXPECT_EQ(s.stride(), 6);
    int hi = 0;
    for (const auto& st : s.plan()) hi += st.scope == ResampleScope::AllViews;
    EXPECT_EQ(hi, 3);
    EXPECT_EQ(s.total_repetitions(), 3 * 8 + 2 * 4);
}

TEST(Schedule, Validation)
{
    ScheduleConfig cfg;
    cfg.denoise_steps = 2000;
    EXPECT_THROW(make_schedule(cfg), Error);
    cfg = {};
    cfg.beta_hi = 1.0;
    EXPECT_THROW(make_schedule(cfg), Error);
    cfg = {};
    cfg.resample_lo = 0;
    EXPECT_THROW(make_schedule(cfg), Error);
    cfg = {};
    cfg.total_steps = 10;
    cfg.denoise_steps = 7;  // stride 1 visits 10..4 and jumps 4 -> 0
    EXPECT_NO_THROW(make_schedule(cfg));
    EXPECT_THROW(NoiseSchedule({0.1}, {{1, 1, 1, ResampleScope::AllViews}}), Error);
    EXPECT_THROW(NoiseSchedule({0.1, 0.1}, {{2, 1, 1, ResampleScope::AllViews}}), Error);
    EXPECT_THROW(make_schedule().alpha_bar(1001), Error);
}
