#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stereodiff/image.hpp"

namespace stereodiff {

/// Channel-major (C x h x w) float latent.
class LatentTensor {
public:
    LatentTensor() = default;
    LatentTensor(int channels, int height, int width, float fill = 0.0f);
    LatentTensor(int channels, int height, int width, std::vector<float> data);

    int channels() const noexcept { return channels_; }
    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }

    float at(int c, int y, int x) const noexcept { return data_[index(c, y, x)]; }
    float& at(int c, int y, int x) noexcept { return data_[index(c, y, x)]; }

    std::span<const float> data() const noexcept { return data_; }
    std::span<float> data() noexcept { return data_; }

    bool same_shape(const LatentTensor& o) const noexcept
    {
        return channels_ == o.channels_ && height_ == o.height_ && width_ == o.width_;
    }

    friend bool operator==(const LatentTensor&, const LatentTensor&) = default;

private:
    std::size_t index(int c, int y, int x) const noexcept
    {
        return (std::size_t(c) * height_ + y) * width_ + x;
    }

    int channels_ = 0;
    int height_ = 0;
    int width_ = 0;
    std::vector<float> data_;
};

/// Latent-resolution known/unknown map, broadcast over channels.
class LatentMask {
public:
    LatentMask() = default;
    LatentMask(int height, int width, std::uint8_t fill = 0);
    LatentMask(int height, int width, std::vector<std::uint8_t> data);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::uint8_t at(int y, int x) const noexcept { return data_[std::size_t(y) * width_ + x]; }
    std::uint8_t& at(int y, int x) noexcept { return data_[std::size_t(y) * width_ + x]; }
    std::span<const std::uint8_t> data() const noexcept { return data_; }

    friend bool operator==(const LatentMask&, const LatentMask&) = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Min-pool over down x down blocks: a cell is known only if every covered pixel is known.
/// Partial blocks at the right/bottom edge pool over the pixels they cover.
LatentMask downsample_mask(const DisocclusionMask& mask, int down);

/// m * known + (1 - m) * unknown, elementwise, with m broadcast over channels.
LatentTensor combine_masked(const LatentTensor& known, const LatentTensor& unknown, const LatentMask& mask);

/// Latent extent for an image extent under a downsample factor.
constexpr int latent_extent(int pixels, int down) noexcept
{
    return (pixels + down - 1) / down;
}

}  // namespace stereodiff
