#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "stereodiff/image.hpp"
#include "stereodiff/latent.hpp"

namespace stereodiff {

/// Encoder/decoder pair between pixel frames and latents.
class LatentCodec {
public:
    virtual ~LatentCodec() = default;

    virtual std::string name() const = 0;
    /// Spatial downsample factor.
    virtual int down() const noexcept = 0;
    virtual std::vector<LatentTensor> encode(std::span<const FrameBuffer> frames) const = 0;
    /// `width` and `height` are the pixel extent to reconstruct.
    virtual std::vector<FrameBuffer> decode(std::span<const LatentTensor> latents, int width, int height) const = 0;
};

/// Pixels reinterpreted as a channel-major latent; decode(encode(x)) == x exactly.
class IdentityCodec final : public LatentCodec {
public:
    std::string name() const override { return "identity"; }
    int down() const noexcept override { return 1; }
    std::vector<LatentTensor> encode(std::span<const FrameBuffer> frames) const override;
    std::vector<FrameBuffer> decode(std::span<const LatentTensor> latents, int width, int height) const override;
};

/// Block-mean encoder with nearest-neighbour decoder. A stand-in for a VAE whose receptive
/// field mixes disoccluded pixels into boundary latents.
class AvgPoolCodec final : public LatentCodec {
public:
    explicit AvgPoolCodec(int down = 8);

    std::string name() const override { return "avgpool" + std::to_string(down_); }
    int down() const noexcept override { return down_; }
    std::vector<LatentTensor> encode(std::span<const FrameBuffer> frames) const override;
    std::vector<FrameBuffer> decode(std::span<const LatentTensor> latents, int width, int height) const override;

private:
    int down_;
};

/// "identity" or "avgpoolN" (N >= 1; "avgpool8" is the default pooled codec).
std::unique_ptr<LatentCodec> make_codec(const std::string& name);

}  // namespace stereodiff
