#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stereodiff/image.hpp"

namespace stereodiff {

// Middlebury .flo: "PIEH" | width:i32le | height:i32le | (u,v) float32le pairs, row-major.
FlowField decode_flo(std::span<const std::byte> bytes);
std::vector<std::byte> encode_flo(const FlowField& flow);
FlowField read_flo(const std::filesystem::path& path);
void write_flo(const std::filesystem::path& path, const FlowField& flow);

enum class Endian { Little, Big };

/// Decoded PFM payload, rows stored top-down.
struct PfmImage {
    int width = 0;
    int height = 0;
    int channels = 0;
    float scale = 1.0f;
    Endian endian = Endian::Little;
    /// Top-down rows, already multiplied by |scale|; encoding divides it back out.
    std::vector<float> data;
};

PfmImage decode_pfm(std::span<const std::byte> bytes);
std::vector<std::byte> encode_pfm(const PfmImage& image);
std::vector<std::byte> encode_pfm(const DepthMap& depth, Endian endian = Endian::Little);
void write_pfm(const std::filesystem::path& path, const DepthMap& depth, Endian endian = Endian::Little);

enum class DepthFormat { Pfm, Png16 };

/// Loads raw (pre-normalization) depth. For Png16, depth = code * scale.
/// For PFM the magnitude of the header scale multiplies the stored values.
DepthMap read_depth(const std::filesystem::path& path, DepthFormat format, float png_scale = 1.0f);
/// Inverse of read_depth for Png16: code = round(depth / scale), clamped to [0, 65535].
void write_depth_png16(const std::filesystem::path& path, const DepthMap& depth, float scale);

struct PngReadOptions {
    bool srgb_decode = false;
};

/// 8- or 16-bit gray/RGB(A) PNG to [0,1] floats. Alpha is dropped.
FrameBuffer read_png(const std::filesystem::path& path, const PngReadOptions& options = {});
/// Quantizes [0,1] samples (clamped) to 8 or 16 bits.
void write_png(const std::filesystem::path& path, const FrameBuffer& frame, int bit_depth = 8);

/// Mask PNGs hold only 0 and 255.
DisocclusionMask read_mask_png(const std::filesystem::path& path);
void write_mask_png(const std::filesystem::path& path, const DisocclusionMask& mask);

/// Expands a printf-style index pattern such as "f%03d.png".
std::string format_index(std::string_view pattern, int index);

/// Files in `dir` matching `pattern`, ordered by index. Indices must be contiguous.
std::vector<std::filesystem::path> list_sequence(const std::filesystem::path& dir, std::string_view pattern);

/// Loads a numbered PNG sequence; all frames must share dimensions.
std::vector<FrameBuffer> read_frame_sequence(const std::filesystem::path& dir, std::string_view pattern,
                                             const PngReadOptions& options = {});

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes);

}  // namespace stereodiff
