#pragma once

#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stereodiff/image.hpp"
#include "stereodiff/latent.hpp"
#include "stereodiff/schedule.hpp"

namespace stereodiff {

enum class SequenceAxis : std::uint32_t {
    /// A standalone sequence (single-video inpainting).
    Single = 0,
    /// A frame-matrix column: one camera over time.
    Column = 1,
    /// A frame-matrix row: one timestamp across cameras.
    Row = 2,
};

enum class CallPurpose : std::uint32_t {
    Denoise = 0,
    /// Clean-latent estimate for boundary re-injection.
    Reinject = 1,
};

/// Where a sequence sits in the latent matrix. External endpoints ignore it; test doubles use it.
struct SequenceRef {
    SequenceAxis axis = SequenceAxis::Single;
    std::size_t index = 0;
    CallPurpose purpose = CallPurpose::Denoise;

    friend bool operator==(const SequenceRef&, const SequenceRef&) = default;
};

struct Prediction {
    std::vector<LatentTensor> eps;
    /// Per-element Sigma; zeros mean deterministic stepping.
    std::vector<LatentTensor> var;
};

enum class Capability { Serialized, Concurrent };

/// Noise/variance predictor for a latent sequence at timestep t.
class DenoiserEndpoint {
public:
    virtual ~DenoiserEndpoint() = default;

    virtual Prediction predict(std::span<const LatentTensor> z, std::string_view condition, int t,
                               const SequenceRef& ref) = 0;

    virtual Capability capability() const noexcept { return Capability::Serialized; }
    /// Longest sequence accepted; 0 means unbounded.
    virtual std::size_t max_sequence_length() const noexcept { return 0; }
};

/// Throws ShapeMismatch unless the prediction matches the request shape and var >= 0.
void validate_prediction(std::span<const LatentTensor> z, const Prediction& p);

enum class OracleVariance {
    Zero,
    /// DDPM posterior variance of the visited step.
    Posterior,
};

/// Predicts the exact noise that separates z_t from a known clean target:
///   eps = (z_t - sqrt(alpha_bar_t) * target) / sqrt(1 - alpha_bar_t).
/// Targets are laid out as a grid so that row and column sequences of a frame matrix resolve to
/// their own cells; standalone sequences use column 0.
class OracleDenoiser final : public DenoiserEndpoint {
public:
    OracleDenoiser(Grid<LatentTensor> targets, const NoiseSchedule& schedule,
                   OracleVariance variance = OracleVariance::Zero);
    OracleDenoiser(const std::vector<LatentTensor>& targets, const NoiseSchedule& schedule,
                   OracleVariance variance = OracleVariance::Zero);

    Prediction predict(std::span<const LatentTensor> z, std::string_view condition, int t,
                       const SequenceRef& ref) override;
    Capability capability() const noexcept override { return Capability::Concurrent; }

private:
    Grid<LatentTensor> targets_;
    const NoiseSchedule* schedule_;
    OracleVariance variance_;
};

/// Returns zero noise and zero variance for any input; the "echo" model of the bridge.
class ZeroDenoiser final : public DenoiserEndpoint {
public:
    Prediction predict(std::span<const LatentTensor> z, std::string_view condition, int t,
                       const SequenceRef& ref) override;
    Capability capability() const noexcept override { return Capability::Concurrent; }
};

struct CallRecord {
    int t = 0;
    SequenceRef ref;
    std::size_t length = 0;

    friend bool operator==(const CallRecord&, const CallRecord&) = default;
};

/// Forwards to another endpoint and records every call in order.
class RecordingDenoiser final : public DenoiserEndpoint {
public:
    explicit RecordingDenoiser(DenoiserEndpoint& inner) : inner_(&inner) {}

    Prediction predict(std::span<const LatentTensor> z, std::string_view condition, int t,
                       const SequenceRef& ref) override;
    Capability capability() const noexcept override { return inner_->capability(); }
    std::size_t max_sequence_length() const noexcept override { return inner_->max_sequence_length(); }

    std::vector<CallRecord> calls() const;

private:
    DenoiserEndpoint* inner_;
    mutable std::mutex mutex_;
    std::vector<CallRecord> calls_;
};

}  // namespace stereodiff
