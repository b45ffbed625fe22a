#include "stereodiff/sampler.hpp"

#include <cmath>

#include "stereodiff/error.hpp"

namespace stereodiff {

LatentTensor sample_known(const LatentTensor& z0, double alpha_bar, NormalStream& rng)
{
    const float a = float(std::sqrt(alpha_bar));
    const float s = float(std::sqrt(1.0 - alpha_bar));
    LatentTensor out(z0.channels(), z0.height(), z0.width());
    auto dst = out.data();
    rng.fill(dst);
    const auto src = z0.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = a * src[i] + s * dst[i];
    return out;
}

LatentTensor posterior_step(const LatentTensor& z, const LatentTensor& eps, const LatentTensor& var, double beta,
                            double alpha_bar, NormalStream* rng)
{
    if (!z.same_shape(eps) || !z.same_shape(var)) throw Error(ErrorCode::ShapeMismatch, "posterior step shapes differ");
    const double k = beta / std::sqrt(1.0 - alpha_bar);
    const double inv = 1.0 / std::sqrt(1.0 - beta);
    LatentTensor out(z.channels(), z.height(), z.width());
    const auto zs = z.data();
    const auto es = eps.data();
    const auto vs = var.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        double mu = (double(zs[i]) - k * es[i]) * inv;
        if (rng && vs[i] > 0.0f) mu += std::sqrt(double(vs[i])) * rng->next();
        dst[i] = float(mu);
    }
    return out;
}

LatentTensor predict_x0(const LatentTensor& z, const LatentTensor& eps, double alpha_bar)
{
    if (!z.same_shape(eps)) throw Error(ErrorCode::ShapeMismatch, "x0 estimate shapes differ");
    const double s = std::sqrt(1.0 - alpha_bar);
    const double inv = 1.0 / std::sqrt(alpha_bar);
    LatentTensor out(z.channels(), z.height(), z.width());
    const auto zs = z.data();
    const auto es = eps.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = float((double(zs[i]) - s * es[i]) * inv);
    return out;
}

LatentTensor resample_noise(const LatentTensor& z, double beta, NormalStream& rng)
{
    const float a = float(std::sqrt(1.0 - beta));
    const float s = float(std::sqrt(beta));
    LatentTensor out(z.channels(), z.height(), z.width());
    auto dst = out.data();
    rng.fill(dst);
    const auto src = z.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = a * src[i] + s * dst[i];
    return out;
}

DenoiseResult denoise_step(std::span<const LatentTensor> z, std::string_view condition, const VisitedStep& step,
                           const NoiseSchedule& schedule, DenoiserEndpoint& endpoint, const SequenceRef& ref,
                           NormalStream* rng)
{
    Prediction p = endpoint.predict(z, condition, step.t, ref);
    validate_prediction(z, p);
    const double beta = schedule.transition_beta(step.t_prev, step.t);
    const double ab = schedule.alpha_bar(step.t);
    DenoiseResult r;
    r.z.reserve(z.size());
    r.x0.reserve(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        r.z.push_back(posterior_step(z[i], p.eps[i], p.var[i], beta, ab, rng));
        r.x0.push_back(predict_x0(z[i], p.eps[i], ab));
    }
    return r;
}

FrameBuffer composite_known(const FrameBuffer& warped, const DisocclusionMask& mask, const FrameBuffer& estimate)
{
    if (!warped.same_shape(estimate) || mask.width() != warped.width() || mask.height() != warped.height())
        throw Error(ErrorCode::ShapeMismatch, "composite inputs differ in shape");
    FrameBuffer out = warped;
    for (int y = 0; y < warped.height(); ++y) {
        for (int x = 0; x < warped.width(); ++x) {
            if (mask.at(x, y)) continue;
            for (int c = 0; c < warped.channels(); ++c) out.at(x, y, c) = estimate.at(x, y, c);
        }
    }
    return out;
}

std::vector<LatentTensor> boundary_reinject(std::span<const LatentTensor> z_t, std::span<const FrameBuffer> warped,
                                            std::span<const DisocclusionMask> masks, const LatentCodec& codec,
                                            DenoiserEndpoint& endpoint, std::string_view condition, int t,
                                            const NoiseSchedule& schedule, SequenceRef ref)
{
    if (z_t.size() != warped.size() || warped.size() != masks.size())
        throw Error(ErrorCode::ShapeMismatch, "re-injection sequence lengths differ");
    ref.purpose = CallPurpose::Reinject;
    Prediction p = endpoint.predict(z_t, condition, t, ref);
    validate_prediction(z_t, p);

    const double ab = schedule.alpha_bar(t);
    std::vector<LatentTensor> x0;
    x0.reserve(z_t.size());
    for (std::size_t i = 0; i < z_t.size(); ++i) x0.push_back(predict_x0(z_t[i], p.eps[i], ab));

    const int w = warped.empty() ? 0 : warped.front().width();
    const int h = warped.empty() ? 0 : warped.front().height();
    std::vector<FrameBuffer> decoded = codec.decode(x0, w, h);
    std::vector<FrameBuffer> composite;
    composite.reserve(decoded.size());
    for (std::size_t i = 0; i < decoded.size(); ++i) composite.push_back(composite_known(warped[i], masks[i], decoded[i]));
    return codec.encode(composite);
}

}  // namespace stereodiff
