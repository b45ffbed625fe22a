#pragma once

#include <vector>

namespace stereodiff {

/// Which part of the frame matrix a visited step touches.
enum class ResampleScope {
    /// Alternate column and row passes over every view.
    AllViews,
    /// Only the rightmost column, as a time sequence.
    RightOnly,
};

struct VisitedStep {
    int t = 0;
    /// Level reached after this step (0 after the last one).
    int t_prev = 0;
    int repetitions = 1;
    ResampleScope scope = ResampleScope::AllViews;
};

/// DDPM noise schedule with a jumped step plan and a per-step resampling plan.
///
/// Timesteps run 1..T; alpha_bar(0) is 1. When the plan jumps by a stride, the one-step
/// quantities used by the sampler are the jump equivalents
///   alpha(t) = alpha_bar(t) / alpha_bar(t_prev),  beta(t) = 1 - alpha(t),
/// which reduce to the per-timestep DDPM values at stride 1.
class NoiseSchedule {
public:
    NoiseSchedule(std::vector<double> betas, std::vector<VisitedStep> plan);

    int total_steps() const noexcept { return int(betas_.size()); }

    /// Per-timestep beta_t, t in 1..T (0 at t = 0).
    double beta(int t) const;
    /// Cumulative product of (1 - beta_i) for i <= t; alpha_bar(0) = 1.
    double alpha_bar(int t) const;

    /// Transition beta between two levels, 1 - alpha_bar(to) / alpha_bar(from) with to > from.
    double transition_beta(int from, int to) const;

    /// DDPM posterior variance for the step t -> t_prev.
    double posterior_variance(int t, int t_prev) const;

    const std::vector<VisitedStep>& plan() const noexcept { return plan_; }
    int stride() const noexcept { return stride_; }

    /// Denoise-then-renoise passes across the whole plan.
    int total_repetitions() const noexcept;

private:
    std::vector<double> betas_;
    std::vector<double> alpha_bar_;
    std::vector<VisitedStep> plan_;
    int stride_ = 1;
};

struct ScheduleConfig {
    int total_steps = 1000;
    int denoise_steps = 50;
    double beta_lo = 1e-4;
    double beta_hi = 0.02;
    int resample_hi = 8;
    int resample_lo = 4;

    friend bool operator==(const ScheduleConfig&, const ScheduleConfig&) = default;
};

/// Linear betas over T and a plan visiting {T, T - stride, ..., T - (steps - 1) stride}, stride =
/// round(T / steps). The first ceil(steps / 2) visited steps resample `resample_hi` times over all
/// views; the rest resample `resample_lo` times over the rightmost column only.
NoiseSchedule make_schedule(const ScheduleConfig& config = {});

}  // namespace stereodiff
