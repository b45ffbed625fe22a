#include "stereodiff/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stereodiff/error.hpp"

namespace stereodiff {

namespace {

void check_dims(int width, int height)
{
    if (width < 0 || height < 0)
        throw Error(ErrorCode::InvalidArgument,
                    "negative image dimensions " + std::to_string(width) + "x" + std::to_string(height));
}

}  // namespace

FrameBuffer::FrameBuffer(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels)
{
    check_dims(width, height);
    if (channels != 1 && channels != 3)
        throw Error(ErrorCode::InvalidArgument, "channels must be 1 or 3, got " + std::to_string(channels));
    data_.assign(std::size_t(width) * height * channels, fill);
}

FrameBuffer::FrameBuffer(int width, int height, int channels, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data))
{
    check_dims(width, height);
    if (channels != 1 && channels != 3)
        throw Error(ErrorCode::InvalidArgument, "channels must be 1 or 3, got " + std::to_string(channels));
    if (data_.size() != std::size_t(width) * height * channels)
        throw Error(ErrorCode::DimensionMismatch, "frame data length does not match width*height*channels");
}

bool FrameBuffer::all_finite() const noexcept
{
    return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

DepthMap::DepthMap(int width, int height, float fill) : width_(width), height_(height)
{
    check_dims(width, height);
    data_.assign(std::size_t(width) * height, fill);
}

DepthMap::DepthMap(int width, int height, std::vector<float> data)
    : width_(width), height_(height), data_(std::move(data))
{
    check_dims(width, height);
    if (data_.size() != std::size_t(width) * height)
        throw Error(ErrorCode::DimensionMismatch, "depth data length does not match width*height");
}

FlowField::FlowField(int width, int height)
    : width_(width), height_(height), u_(std::size_t(width) * height), v_(std::size_t(width) * height)
{
    check_dims(width, height);
}

FlowField::FlowField(int width, int height, std::vector<float> u, std::vector<float> v)
    : width_(width), height_(height), u_(std::move(u)), v_(std::move(v))
{
    check_dims(width, height);
    if (u_.size() != std::size_t(width) * height || v_.size() != u_.size())
        throw Error(ErrorCode::DimensionMismatch, "flow data length does not match width*height");
}

DisocclusionMask::DisocclusionMask(int width, int height, std::uint8_t fill) : width_(width), height_(height)
{
    check_dims(width, height);
    if (fill > 1) throw Error(ErrorCode::InvalidMask, "mask fill must be 0 or 1");
    data_.assign(std::size_t(width) * height, fill);
}

DisocclusionMask::DisocclusionMask(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data))
{
    check_dims(width, height);
    if (data_.size() != std::size_t(width) * height)
        throw Error(ErrorCode::DimensionMismatch, "mask data length does not match width*height");
    if (std::any_of(data_.begin(), data_.end(), [](std::uint8_t v) { return v > 1; }))
        throw Error(ErrorCode::InvalidMask, "mask values must be 0 or 1");
}

std::size_t DisocclusionMask::count_known() const noexcept
{
    return std::size_t(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

}  // namespace stereodiff
