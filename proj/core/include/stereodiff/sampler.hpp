#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "stereodiff/codec.hpp"
#include "stereodiff/denoiser.hpp"
#include "stereodiff/latent.hpp"
#include "stereodiff/rng.hpp"
#include "stereodiff/schedule.hpp"

namespace stereodiff {

/// Noisy sample of a clean latent at cumulative level alpha_bar.
LatentTensor sample_known(const LatentTensor& z0, double alpha_bar, NormalStream& rng);

/// One reverse step given a noise prediction:
///   mu = (z - beta / sqrt(1 - alpha_bar) * eps) / sqrt(1 - beta),  z' = mu + sqrt(var) * n.
/// `rng` may be null, which forces var to 0.
LatentTensor posterior_step(const LatentTensor& z, const LatentTensor& eps, const LatentTensor& var, double beta,
                            double alpha_bar, NormalStream* rng);

/// Clean-latent estimate (z - sqrt(1 - alpha_bar) * eps) / sqrt(alpha_bar).
LatentTensor predict_x0(const LatentTensor& z, const LatentTensor& eps, double alpha_bar);

/// Adds back one (jumped) forward step: sqrt(1 - beta) * z + sqrt(beta) * n.
LatentTensor resample_noise(const LatentTensor& z, double beta, NormalStream& rng);

struct DenoiseResult {
    /// Sequence at level step.t_prev.
    std::vector<LatentTensor> z;
    /// Clean-latent estimates implied by the prediction at step.t.
    std::vector<LatentTensor> x0;
};

/// Queries the endpoint at step.t and descends the sequence to step.t_prev. `rng` is null for
/// deterministic stepping.
DenoiseResult denoise_step(std::span<const LatentTensor> z, std::string_view condition, const VisitedStep& step,
                           const NoiseSchedule& schedule, DenoiserEndpoint& endpoint, const SequenceRef& ref,
                           NormalStream* rng);

/// Replaces disoccluded pixels of the warped frames with the decoded clean-latent estimate and
/// re-encodes, so that black holes stop bleeding into boundary latents. Returns the new known latents.
std::vector<LatentTensor> boundary_reinject(std::span<const LatentTensor> z_t, std::span<const FrameBuffer> warped,
                                            std::span<const DisocclusionMask> masks, const LatentCodec& codec,
                                            DenoiserEndpoint& endpoint, std::string_view condition, int t,
                                            const NoiseSchedule& schedule, SequenceRef ref);

/// M * warped + (1 - M) * estimate, per pixel and channel.
FrameBuffer composite_known(const FrameBuffer& warped, const DisocclusionMask& mask, const FrameBuffer& estimate);

}  // namespace stereodiff
