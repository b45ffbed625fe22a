#include "stereodiff/denoiser.hpp"

#include <algorithm>
#include <cmath>

#include "stereodiff/error.hpp"

namespace stereodiff {

void validate_prediction(std::span<const LatentTensor> z, const Prediction& p)
{
    if (p.eps.size() != z.size() || p.var.size() != z.size())
        throw Error(ErrorCode::ShapeMismatch, "prediction length differs from the request");
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (!p.eps[i].same_shape(z[i]) || !p.var[i].same_shape(z[i]))
            throw Error(ErrorCode::ShapeMismatch, "prediction tensor shape differs from the request");
        for (float v : p.var[i].data()) {
            if (!(v >= 0.0f)) throw Error(ErrorCode::ShapeMismatch, "predicted variance must be non-negative");
        }
        for (float e : p.eps[i].data()) {
            if (!std::isfinite(e)) throw Error(ErrorCode::NonFiniteValues, "predicted noise is not finite");
        }
    }
}

OracleDenoiser::OracleDenoiser(Grid<LatentTensor> targets, const NoiseSchedule& schedule, OracleVariance variance)
    : targets_(std::move(targets)), schedule_(&schedule), variance_(variance)
{
}

OracleDenoiser::OracleDenoiser(const std::vector<LatentTensor>& targets, const NoiseSchedule& schedule,
                               OracleVariance variance)
    : targets_(targets.size(), 1), schedule_(&schedule), variance_(variance)
{
    for (std::size_t i = 0; i < targets.size(); ++i) targets_(i, 0) = targets[i];
}

Prediction OracleDenoiser::predict(std::span<const LatentTensor> z, std::string_view, int t, const SequenceRef& ref)
{
    std::vector<const LatentTensor*> target;
    if (ref.axis == SequenceAxis::Row) {
        if (ref.index >= targets_.rows()) throw Error(ErrorCode::ShapeMismatch, "oracle has no such row");
        for (const auto& cell : targets_.row(ref.index)) target.push_back(&cell);
    } else {
        const std::size_t col = ref.axis == SequenceAxis::Column ? ref.index : 0;
        if (col >= targets_.cols()) throw Error(ErrorCode::ShapeMismatch, "oracle has no such column");
        for (const auto& cell : targets_.col(col)) target.push_back(&cell);
    }
    if (target.size() != z.size()) throw Error(ErrorCode::ShapeMismatch, "oracle target length differs");

    const double ab = schedule_->alpha_bar(t);
    const double sqrt_ab = std::sqrt(ab);
    const double sqrt_1m = std::sqrt(1.0 - ab);

    double var = 0.0;
    if (variance_ == OracleVariance::Posterior) {
        const auto& plan = schedule_->plan();
        const auto it = std::find_if(plan.begin(), plan.end(), [t](const VisitedStep& s) { return s.t == t; });
        var = it == plan.end() ? schedule_->beta(t) : schedule_->posterior_variance(t, it->t_prev);
    }

    Prediction p;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (!target[i]->same_shape(z[i])) throw Error(ErrorCode::ShapeMismatch, "oracle target shape differs");
        LatentTensor eps(z[i].channels(), z[i].height(), z[i].width());
        const auto zt = z[i].data();
        const auto x0 = target[i]->data();
        auto out = eps.data();
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = float((double(zt[k]) - sqrt_ab * x0[k]) / sqrt_1m);
        p.eps.push_back(std::move(eps));
        p.var.emplace_back(z[i].channels(), z[i].height(), z[i].width(), float(var));
    }
    return p;
}

Prediction ZeroDenoiser::predict(std::span<const LatentTensor> z, std::string_view, int, const SequenceRef&)
{
    Prediction p;
    for (const auto& zi : z) {
        p.eps.emplace_back(zi.channels(), zi.height(), zi.width());
        p.var.emplace_back(zi.channels(), zi.height(), zi.width());
    }
    return p;
}

Prediction RecordingDenoiser::predict(std::span<const LatentTensor> z, std::string_view condition, int t,
                                      const SequenceRef& ref)
{
    {
        std::lock_guard lock(mutex_);
        calls_.push_back({t, ref, z.size()});
    }
    return inner_->predict(z, condition, t, ref);
}

std::vector<CallRecord> RecordingDenoiser::calls() const
{
    std::lock_guard lock(mutex_);
    return calls_;
}

}  // namespace stereodiff
