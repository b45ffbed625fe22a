#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace stereodiff {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key) noexcept;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Which draw a stream feeds. Part of the stream identity so that draws never alias.
enum class NoisePurpose : std::uint32_t {
    Init = 1,
    KnownSample = 2,
    PosteriorNoise = 3,
    Resample = 4,
    Test = 5,
};

/// Coordinates that name an independent stream: one per (purpose, t, repetition, axis, index).
struct StreamId {
    NoisePurpose purpose = NoisePurpose::Test;
    std::uint32_t t = 0;
    std::uint32_t repetition = 0;
    std::uint32_t axis = 0;
    std::uint32_t index = 0;

    std::uint64_t hash() const noexcept;
};

/// Standard-normal stream from a Philox counter. Independent of scheduling order, so serial and
/// parallel passes draw identical values.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, const StreamId& id) noexcept;
    NormalStream(std::uint64_t seed, std::uint64_t stream) noexcept;

    double next() noexcept;
    void fill(std::span<float> out) noexcept;

    /// Uniform in the open interval (0, 1) with 53-bit resolution.
    double next_uniform() noexcept;

private:
    void refill() noexcept;

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> bits_{};
    int bits_used_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace stereodiff
