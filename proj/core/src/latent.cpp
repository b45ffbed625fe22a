#include "stereodiff/latent.hpp"

#include <algorithm>
#include <string>

#include "stereodiff/error.hpp"

namespace stereodiff {

LatentTensor::LatentTensor(int channels, int height, int width, float fill)
    : channels_(channels), height_(height), width_(width)
{
    if (channels < 1 || height < 0 || width < 0) throw Error(ErrorCode::InvalidArgument, "bad latent shape");
    data_.assign(std::size_t(channels) * height * width, fill);
}

LatentTensor::LatentTensor(int channels, int height, int width, std::vector<float> data)
    : channels_(channels), height_(height), width_(width), data_(std::move(data))
{
    if (channels < 1 || height < 0 || width < 0) throw Error(ErrorCode::InvalidArgument, "bad latent shape");
    if (data_.size() != std::size_t(channels) * height * width)
        throw Error(ErrorCode::ShapeMismatch, "latent data length does not match its shape");
}

LatentMask::LatentMask(int height, int width, std::uint8_t fill) : height_(height), width_(width)
{
    data_.assign(std::size_t(height) * width, fill);
}

LatentMask::LatentMask(int height, int width, std::vector<std::uint8_t> data)
    : height_(height), width_(width), data_(std::move(data))
{
    if (data_.size() != std::size_t(height) * width)
        throw Error(ErrorCode::ShapeMismatch, "latent mask length does not match its shape");
    if (std::any_of(data_.begin(), data_.end(), [](std::uint8_t v) { return v > 1; }))
        throw Error(ErrorCode::InvalidMask, "latent mask values must be 0 or 1");
}

LatentMask downsample_mask(const DisocclusionMask& mask, int down)
{
    if (down < 1) throw Error(ErrorCode::InvalidArgument, "downsample factor must be >= 1");
    const int h = latent_extent(mask.height(), down);
    const int w = latent_extent(mask.width(), down);
    LatentMask out(h, w, 1);
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y)) out.at(y / down, x / down) = 0;
        }
    }
    return out;
}

LatentTensor combine_masked(const LatentTensor& known, const LatentTensor& unknown, const LatentMask& mask)
{
    if (!known.same_shape(unknown) || mask.height() != known.height() || mask.width() != known.width())
        throw Error(ErrorCode::ShapeMismatch, "combine_masked operands differ in shape");
    LatentTensor out = unknown;
    const std::size_t plane = std::size_t(known.height()) * known.width();
    auto dst = out.data();
    auto src = known.data();
    auto m = mask.data();
    for (int c = 0; c < known.channels(); ++c) {
        for (std::size_t i = 0; i < plane; ++i) {
            if (m[i]) dst[c * plane + i] = src[c * plane + i];
        }
    }
    return out;
}

}  // namespace stereodiff
