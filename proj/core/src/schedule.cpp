#include "stereodiff/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stereodiff/error.hpp"

namespace stereodiff {

NoiseSchedule::NoiseSchedule(std::vector<double> betas, std::vector<VisitedStep> plan)
    : betas_(std::move(betas)), plan_(std::move(plan))
{
    if (betas_.empty()) throw Error(ErrorCode::InvalidRange, "schedule needs at least one timestep");
    alpha_bar_.resize(betas_.size() + 1);
    alpha_bar_[0] = 1.0;
    for (std::size_t t = 1; t <= betas_.size(); ++t) {
        const double b = betas_[t - 1];
        if (!(b > 0.0 && b < 1.0)) throw Error(ErrorCode::InvalidRange, "beta must lie in (0, 1)");
        alpha_bar_[t] = alpha_bar_[t - 1] * (1.0 - b);
    }
    if (plan_.empty()) throw Error(ErrorCode::InvalidRange, "empty step plan");
    for (std::size_t i = 0; i < plan_.size(); ++i) {
        const auto& s = plan_[i];
        if (s.t < 1 || s.t > total_steps() || s.t_prev < 0 || s.t_prev >= s.t || s.repetitions < 1)
            throw Error(ErrorCode::InvalidRange, "malformed visited step at position " + std::to_string(i));
        if (i + 1 < plan_.size() && plan_[i + 1].t != s.t_prev)
            throw Error(ErrorCode::InvalidRange, "step plan must chain t_prev into the next visited t");
    }
    if (plan_.back().t_prev != 0) throw Error(ErrorCode::InvalidRange, "step plan must end at t = 0");
    stride_ = plan_.size() > 1 ? plan_[0].t - plan_[1].t : plan_[0].t;
}

double NoiseSchedule::beta(int t) const
{
    if (t < 0 || t > total_steps()) throw Error(ErrorCode::InvalidRange, "timestep out of range");
    return t == 0 ? 0.0 : betas_[std::size_t(t) - 1];
}

double NoiseSchedule::alpha_bar(int t) const
{
    if (t < 0 || t > total_steps()) throw Error(ErrorCode::InvalidRange, "timestep out of range");
    return alpha_bar_[std::size_t(t)];
}

double NoiseSchedule::transition_beta(int from, int to) const
{
    if (!(to > from)) throw Error(ErrorCode::InvalidRange, "transition must go to a noisier level");
    return 1.0 - alpha_bar(to) / alpha_bar(from);
}

double NoiseSchedule::posterior_variance(int t, int t_prev) const
{
    const double b = transition_beta(t_prev, t);
    return b * (1.0 - alpha_bar(t_prev)) / (1.0 - alpha_bar(t));
}

int NoiseSchedule::total_repetitions() const noexcept
{
    int n = 0;
    for (const auto& s : plan_) n += s.repetitions;
    return n;
}

NoiseSchedule make_schedule(const ScheduleConfig& config)
{
    const int T = config.total_steps;
    const int steps = config.denoise_steps;
    if (T < 1 || steps < 1 || steps > T) throw Error(ErrorCode::InvalidRange, "need 1 <= steps <= T");
    if (!(config.beta_lo > 0.0 && config.beta_hi < 1.0 && config.beta_lo <= config.beta_hi))
        throw Error(ErrorCode::InvalidRange, "beta endpoints must satisfy 0 < lo <= hi < 1");
    if (config.resample_hi < 1 || config.resample_lo < 1)
        throw Error(ErrorCode::InvalidRange, "resample counts must be >= 1");

    const int stride = std::max(1, int(std::lround(double(T) / steps)));
    if (T - (steps - 1) * stride < 1)
        throw Error(ErrorCode::InvalidRange, "step plan with stride " + std::to_string(stride) + " runs below t = 1");

    std::vector<double> betas(static_cast<std::size_t>(T));
    for (int i = 0; i < T; ++i)
        betas[i] = T == 1 ? config.beta_lo : config.beta_lo + (config.beta_hi - config.beta_lo) * i / (T - 1);

    const int first_half = (steps + 1) / 2;
    std::vector<VisitedStep> plan;
    plan.reserve(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        const int t = T - i * stride;
        const int t_prev = i + 1 < steps ? t - stride : 0;
        const bool early = i < first_half;
        plan.push_back({t, t_prev, early ? config.resample_hi : config.resample_lo,
                        early ? ResampleScope::AllViews : ResampleScope::RightOnly});
    }
    return NoiseSchedule(std::move(betas), std::move(plan));
}

}  // namespace stereodiff
