#include "stereodiff/codec.hpp"

#include <algorithm>

#include "stereodiff/error.hpp"

namespace stereodiff {

std::vector<LatentTensor> IdentityCodec::encode(std::span<const FrameBuffer> frames) const
{
    std::vector<LatentTensor> out;
    out.reserve(frames.size());
    for (const auto& f : frames) {
        LatentTensor z(f.channels(), f.height(), f.width());
        for (int c = 0; c < f.channels(); ++c)
            for (int y = 0; y < f.height(); ++y)
                for (int x = 0; x < f.width(); ++x) z.at(c, y, x) = f.at(x, y, c);
        out.push_back(std::move(z));
    }
    return out;
}

std::vector<FrameBuffer> IdentityCodec::decode(std::span<const LatentTensor> latents, int width, int height) const
{
    std::vector<FrameBuffer> out;
    out.reserve(latents.size());
    for (const auto& z : latents) {
        if (z.width() != width || z.height() != height)
            throw Error(ErrorCode::ShapeMismatch, "identity latent extent differs from requested frame size");
        FrameBuffer f(width, height, z.channels());
        for (int c = 0; c < z.channels(); ++c)
            for (int y = 0; y < height; ++y)
                for (int x = 0; x < width; ++x) f.at(x, y, c) = z.at(c, y, x);
        out.push_back(std::move(f));
    }
    return out;
}

AvgPoolCodec::AvgPoolCodec(int down) : down_(down)
{
    if (down < 1) throw Error(ErrorCode::InvalidArgument, "avgpool factor must be >= 1");
}

std::vector<LatentTensor> AvgPoolCodec::encode(std::span<const FrameBuffer> frames) const
{
    std::vector<LatentTensor> out;
    out.reserve(frames.size());
    for (const auto& f : frames) {
        const int h = latent_extent(f.height(), down_);
        const int w = latent_extent(f.width(), down_);
        LatentTensor z(f.channels(), h, w);
        for (int c = 0; c < f.channels(); ++c) {
            for (int ly = 0; ly < h; ++ly) {
                for (int lx = 0; lx < w; ++lx) {
                    double acc = 0.0;
                    int count = 0;
                    for (int y = ly * down_; y < std::min((ly + 1) * down_, f.height()); ++y) {
                        for (int x = lx * down_; x < std::min((lx + 1) * down_, f.width()); ++x) {
                            acc += f.at(x, y, c);
                            ++count;
                        }
                    }
                    z.at(c, ly, lx) = float(acc / count);
                }
            }
        }
        out.push_back(std::move(z));
    }
    return out;
}

std::vector<FrameBuffer> AvgPoolCodec::decode(std::span<const LatentTensor> latents, int width, int height) const
{
    std::vector<FrameBuffer> out;
    out.reserve(latents.size());
    for (const auto& z : latents) {
        if (z.width() != latent_extent(width, down_) || z.height() != latent_extent(height, down_))
            throw Error(ErrorCode::ShapeMismatch, "pooled latent extent does not match requested frame size");
        FrameBuffer f(width, height, z.channels());
        for (int c = 0; c < z.channels(); ++c)
            for (int y = 0; y < height; ++y)
                for (int x = 0; x < width; ++x) f.at(x, y, c) = z.at(c, y / down_, x / down_);
        out.push_back(std::move(f));
    }
    return out;
}

std::unique_ptr<LatentCodec> make_codec(const std::string& name)
{
    if (name == "identity") return std::make_unique<IdentityCodec>();
    if (name.rfind("avgpool", 0) == 0) {
        const auto suffix = name.substr(7);
        int factor = 8;
        if (!suffix.empty()) {
            try {
                factor = std::stoi(suffix);
            } catch (const std::exception&) {
                throw Error(ErrorCode::InvalidArgument, "bad codec name " + name);
            }
        }
        return std::make_unique<AvgPoolCodec>(factor);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown codec '" + name + "' (expected identity or avgpoolN)");
}

}  // namespace stereodiff
