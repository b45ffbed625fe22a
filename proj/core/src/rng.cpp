#include "stereodiff/rng.hpp"

#include <cmath>
#include <numbers>

namespace stereodiff {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept
{
    const std::uint64_t p = std::uint64_t(a) * b;
    hi = std::uint32_t(p >> 32);
    lo = std::uint32_t(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) noexcept
{
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t StreamId::hash() const noexcept
{
    std::uint64_t h = splitmix64(std::uint64_t(purpose));
    h = splitmix64(h ^ t);
    h = splitmix64(h ^ repetition);
    h = splitmix64(h ^ axis);
    return splitmix64(h ^ index);
}

NormalStream::NormalStream(std::uint64_t seed, const StreamId& id) noexcept : NormalStream(seed, id.hash()) {}

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)}, stream_(stream)
{
}

void NormalStream::refill() noexcept
{
    bits_ = philox4x32({std::uint32_t(block_), std::uint32_t(block_ >> 32), std::uint32_t(stream_),
                        std::uint32_t(stream_ >> 32)},
                       key_);
    ++block_;
    bits_used_ = 0;
}

double NormalStream::next_uniform() noexcept
{
    if (bits_used_ > 2) refill();
    const std::uint64_t word = (std::uint64_t(bits_[bits_used_]) << 32) | bits_[bits_used_ + 1];
    bits_used_ += 2;
    return (double(word >> 11) + 0.5) * 0x1.0p-53;
}

double NormalStream::next() noexcept
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

void NormalStream::fill(std::span<float> out) noexcept
{
    for (auto& v : out) v = float(next());
}

}  // namespace stereodiff
