#include "stereodiff/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cctype>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <regex>
#include <sstream>

#include "stereodiff/error.hpp"

namespace stereodiff {

namespace fs = std::filesystem;

namespace {

template <class T>
T load_le(const std::byte* p) noexcept
{
    static_assert(sizeof(T) == 4);
    std::uint32_t raw = std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
                        (std::uint32_t(p[3]) << 24);
    return std::bit_cast<T>(raw);
}

template <class T>
T load_be(const std::byte* p) noexcept
{
    static_assert(sizeof(T) == 4);
    std::uint32_t raw = std::uint32_t(p[3]) | (std::uint32_t(p[2]) << 8) | (std::uint32_t(p[1]) << 16) |
                        (std::uint32_t(p[0]) << 24);
    return std::bit_cast<T>(raw);
}

template <class T>
void store_le(std::vector<std::byte>& out, T value)
{
    static_assert(sizeof(T) == 4);
    auto raw = std::bit_cast<std::uint32_t>(value);
    for (int i = 0; i < 4; ++i) out.push_back(std::byte((raw >> (8 * i)) & 0xffu));
}

template <class T>
void store_be(std::vector<std::byte>& out, T value)
{
    static_assert(sizeof(T) == 4);
    auto raw = std::bit_cast<std::uint32_t>(value);
    for (int i = 3; i >= 0; --i) out.push_back(std::byte((raw >> (8 * i)) & 0xffu));
}

struct FileCloser {
    void operator()(std::FILE* f) const noexcept
    {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode)
{
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw Error(ErrorCode::FileAccess, "cannot open " + path.string());
    return f;
}

float srgb_to_linear(float v) noexcept
{
    return v <= 0.04045f ? v / 12.92f : std::pow((v + 0.055f) / 1.055f, 2.4f);
}

// Decoded PNG samples widened to 16 bits.
struct RawPng {
    int width = 0;
    int height = 0;
    int channels = 0;  // after alpha strip: 1 or 3
    int bit_depth = 0;
    std::vector<std::uint16_t> samples;
};

// Scratch storage lives outside decode_png_file's frame so a longjmp cannot leave it indeterminate.
struct PngScratch {
    std::vector<png_bytep> rows;
    std::vector<png_byte> buffer;
};

bool decode_png_file(std::FILE* fp, RawPng& out, PngScratch& scratch, char* err, std::size_t err_len)
{
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) return false;
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        return false;
    }
    auto& rows = scratch.rows;
    auto& buffer = scratch.buffer;
    if (setjmp(png_jmpbuf(png))) {
        std::snprintf(err, err_len, "libpng decode error");
        png_destroy_read_struct(&png, &info, nullptr);
        return false;
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    const auto width = png_get_image_width(png, info);
    const auto height = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);

    if (color == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
        depth = 8;
    }
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
        depth = 8;
    }
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
    if (depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
    png_read_update_info(png, info);

    const int channels = png_get_channels(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    buffer.resize(rowbytes * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = buffer.data() + y * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    out.width = int(width);
    out.height = int(height);
    out.channels = channels;
    out.bit_depth = depth;
    out.samples.resize(std::size_t(width) * height * channels);
    if (depth == 16) {
        std::memcpy(out.samples.data(), buffer.data(), out.samples.size() * 2);
    } else {
        for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] = buffer[i];
    }
    return true;
}

RawPng load_png(const fs::path& path)
{
    auto fp = open_file(path, "rb");
    unsigned char sig[8] = {};
    if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw Error(ErrorCode::BadMagic, path.string() + " is not a PNG file");
    std::rewind(fp.get());
    RawPng raw;
    PngScratch scratch;
    char err[128] = {};
    if (!decode_png_file(fp.get(), raw, scratch, err, sizeof(err)))
        throw Error(ErrorCode::TruncatedFile, path.string() + ": " + err);
    if (raw.channels != 1 && raw.channels != 3)
        throw Error(ErrorCode::UnsupportedFormat, path.string() + ": unexpected channel count");
    return raw;
}

bool encode_png_file(std::FILE* fp, int width, int height, int channels, int bit_depth,
                     const std::vector<png_byte>& buffer)
{
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) return false;
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        return false;
    }
    std::vector<png_bytep> rows(height);
    const std::size_t rowbytes = std::size_t(width) * channels * (bit_depth / 8);
    for (int y = 0; y < height; ++y) rows[y] = const_cast<png_bytep>(buffer.data() + y * rowbytes);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, width, height, bit_depth, channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

void store_png(const fs::path& path, int width, int height, int channels, int bit_depth,
               std::span<const std::uint16_t> samples)
{
    std::vector<png_byte> buffer;
    if (bit_depth == 16) {
        buffer.resize(samples.size() * 2);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            buffer[2 * i] = png_byte(samples[i] >> 8);
            buffer[2 * i + 1] = png_byte(samples[i] & 0xffu);
        }
    } else {
        buffer.resize(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) buffer[i] = png_byte(samples[i]);
    }
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    auto fp = open_file(path, "wb");
    if (!encode_png_file(fp.get(), width, height, channels, bit_depth, buffer))
        throw Error(ErrorCode::FileAccess, "failed to write PNG " + path.string());
}

std::string read_token(std::span<const std::byte> bytes, std::size_t& pos)
{
    while (pos < bytes.size() && std::isspace(int(bytes[pos]))) ++pos;
    std::string token;
    while (pos < bytes.size() && !std::isspace(int(bytes[pos]))) token.push_back(char(bytes[pos++]));
    return token;
}

}  // namespace

std::vector<std::byte> read_file_bytes(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileAccess, "cannot open " + path.string());
    in.seekg(0, std::ios::end);
    const auto size = in.tellg();
    in.seekg(0, std::ios::beg);
    std::vector<std::byte> bytes(static_cast<std::size_t>(size));
    in.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!in) throw Error(ErrorCode::FileAccess, "failed reading " + path.string());
    return bytes;
}

void write_file_bytes(const fs::path& path, std::span<const std::byte> bytes)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::FileAccess, "cannot create " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw Error(ErrorCode::FileAccess, "failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// .flo

FlowField decode_flo(std::span<const std::byte> bytes)
{
    if (bytes.size() < 4) throw Error(ErrorCode::TruncatedFile, ".flo shorter than its magic");
    if (std::memcmp(bytes.data(), "PIEH", 4) != 0) throw Error(ErrorCode::BadMagic, ".flo magic is not PIEH");
    if (bytes.size() < 12) throw Error(ErrorCode::TruncatedFile, ".flo header truncated");
    const auto width = load_le<std::int32_t>(bytes.data() + 4);
    const auto height = load_le<std::int32_t>(bytes.data() + 8);
    if (width < 0 || height < 0 || width > (1 << 20) || height > (1 << 20))
        throw Error(ErrorCode::UnsupportedFormat, ".flo dimensions out of range");
    const std::size_t n = std::size_t(width) * std::size_t(height);
    if (bytes.size() < 12 + n * 8) throw Error(ErrorCode::TruncatedFile, ".flo payload truncated");

    std::vector<float> u(n), v(n);
    const std::byte* p = bytes.data() + 12;
    for (std::size_t i = 0; i < n; ++i, p += 8) {
        u[i] = load_le<float>(p);
        v[i] = load_le<float>(p + 4);
        if (!std::isfinite(u[i]) || !std::isfinite(v[i]))
            throw Error(ErrorCode::NonFiniteValues, ".flo contains non-finite displacement");
    }
    return FlowField(width, height, std::move(u), std::move(v));
}

std::vector<std::byte> encode_flo(const FlowField& flow)
{
    std::vector<std::byte> out;
    out.reserve(12 + flow.u_data().size() * 8);
    for (char c : {'P', 'I', 'E', 'H'}) out.push_back(std::byte(c));
    store_le<std::int32_t>(out, flow.width());
    store_le<std::int32_t>(out, flow.height());
    for (std::size_t i = 0; i < flow.u_data().size(); ++i) {
        store_le(out, flow.u_data()[i]);
        store_le(out, flow.v_data()[i]);
    }
    return out;
}

FlowField read_flo(const fs::path& path)
{
    return decode_flo(read_file_bytes(path));
}

void write_flo(const fs::path& path, const FlowField& flow)
{
    write_file_bytes(path, encode_flo(flow));
}

// ---------------------------------------------------------------------------
// PFM

PfmImage decode_pfm(std::span<const std::byte> bytes)
{
    std::size_t pos = 0;
    const auto magic = read_token(bytes, pos);
    PfmImage img;
    if (magic == "Pf")
        img.channels = 1;
    else if (magic == "PF")
        img.channels = 3;
    else
        throw Error(ErrorCode::BadMagic, "PFM header must start with Pf or PF");

    const auto w = read_token(bytes, pos);
    const auto h = read_token(bytes, pos);
    const auto s = read_token(bytes, pos);
    if (w.empty() || h.empty() || s.empty()) throw Error(ErrorCode::TruncatedFile, "PFM header truncated");
    try {
        img.width = std::stoi(w);
        img.height = std::stoi(h);
        img.scale = std::stof(s);
    } catch (const std::exception&) {
        throw Error(ErrorCode::UnsupportedFormat, "PFM header fields are not numeric");
    }
    if (img.width < 0 || img.height < 0 || img.scale == 0.0f || !std::isfinite(img.scale))
        throw Error(ErrorCode::UnsupportedFormat, "PFM header fields out of range");
    img.endian = img.scale < 0 ? Endian::Little : Endian::Big;
    ++pos;  // single whitespace byte before the raster

    const std::size_t n = std::size_t(img.width) * img.height * img.channels;
    if (bytes.size() < pos + n * 4) throw Error(ErrorCode::TruncatedFile, "PFM raster truncated");

    const float mag = std::fabs(img.scale);
    img.data.resize(n);
    const std::size_t row_len = std::size_t(img.width) * img.channels;
    for (int y = 0; y < img.height; ++y) {
        // PFM rasters run bottom-to-top.
        const std::byte* src = bytes.data() + pos + std::size_t(img.height - 1 - y) * row_len * 4;
        float* dst = img.data.data() + std::size_t(y) * row_len;
        for (std::size_t i = 0; i < row_len; ++i) {
            float value = img.endian == Endian::Little ? load_le<float>(src + 4 * i) : load_be<float>(src + 4 * i);
            if (!std::isfinite(value)) throw Error(ErrorCode::NonFiniteValues, "PFM contains non-finite sample");
            dst[i] = mag == 1.0f ? value : value * mag;
        }
    }
    return img;
}

std::vector<std::byte> encode_pfm(const PfmImage& image)
{
    const float mag = std::fabs(image.scale);
    std::ostringstream header;
    header << (image.channels == 1 ? "Pf" : "PF") << '\n'
           << image.width << ' ' << image.height << '\n'
           << (image.endian == Endian::Little ? -mag : mag) << '\n';
    const auto h = header.str();
    std::vector<std::byte> out;
    out.reserve(h.size() + image.data.size() * 4);
    for (char c : h) out.push_back(std::byte(c));
    const std::size_t row_len = std::size_t(image.width) * image.channels;
    for (int y = image.height - 1; y >= 0; --y) {
        const float* src = image.data.data() + std::size_t(y) * row_len;
        for (std::size_t i = 0; i < row_len; ++i) {
            const float value = mag == 1.0f ? src[i] : src[i] / mag;
            image.endian == Endian::Little ? store_le(out, value) : store_be(out, value);
        }
    }
    return out;
}

std::vector<std::byte> encode_pfm(const DepthMap& depth, Endian endian)
{
    PfmImage img;
    img.width = depth.width();
    img.height = depth.height();
    img.channels = 1;
    img.scale = 1.0f;
    img.endian = endian;
    img.data.assign(depth.data().begin(), depth.data().end());
    return encode_pfm(img);
}

void write_pfm(const fs::path& path, const DepthMap& depth, Endian endian)
{
    write_file_bytes(path, encode_pfm(depth, endian));
}

DepthMap read_depth(const fs::path& path, DepthFormat format, float png_scale)
{
    DepthMap depth;
    if (format == DepthFormat::Pfm) {
        auto img = decode_pfm(read_file_bytes(path));
        if (img.channels != 1) throw Error(ErrorCode::UnsupportedFormat, "depth PFM must be single-channel (Pf)");
        depth = DepthMap(img.width, img.height, std::move(img.data));
    } else {
        if (!(png_scale > 0.0f) || !std::isfinite(png_scale))
            throw Error(ErrorCode::InvalidArgument, "png16 depth scale must be positive");
        const auto raw = load_png(path);
        if (raw.bit_depth != 16 || raw.channels != 1)
            throw Error(ErrorCode::UnsupportedFormat, path.string() + ": depth PNG must be 16-bit grayscale");
        std::vector<float> data(raw.samples.size());
        for (std::size_t i = 0; i < data.size(); ++i) data[i] = float(raw.samples[i]) * png_scale;
        depth = DepthMap(raw.width, raw.height, std::move(data));
    }
    for (float d : depth.data()) {
        if (!std::isfinite(d)) throw Error(ErrorCode::NonFiniteValues, path.string() + ": non-finite depth");
        if (d <= 0.0f) throw Error(ErrorCode::NonPositiveDepth, path.string() + ": depth must be strictly positive");
    }
    return depth;
}

void write_depth_png16(const fs::path& path, const DepthMap& depth, float scale)
{
    std::vector<std::uint16_t> codes(depth.data().size());
    for (std::size_t i = 0; i < codes.size(); ++i) {
        const double code = std::nearbyint(double(depth.data()[i]) / scale);
        codes[i] = std::uint16_t(std::clamp(code, 0.0, 65535.0));
    }
    store_png(path, depth.width(), depth.height(), 1, 16, codes);
}

// ---------------------------------------------------------------------------
// PNG

FrameBuffer read_png(const fs::path& path, const PngReadOptions& options)
{
    const auto raw = load_png(path);
    const float max_code = raw.bit_depth == 16 ? 65535.0f : 255.0f;
    std::vector<float> data(raw.samples.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const float v = float(raw.samples[i]) / max_code;
        data[i] = options.srgb_decode ? srgb_to_linear(v) : v;
    }
    return FrameBuffer(raw.width, raw.height, raw.channels, std::move(data));
}

void write_png(const fs::path& path, const FrameBuffer& frame, int bit_depth)
{
    if (bit_depth != 8 && bit_depth != 16) throw Error(ErrorCode::InvalidArgument, "PNG bit depth must be 8 or 16");
    if (!frame.all_finite()) throw Error(ErrorCode::NonFiniteValues, "refusing to write non-finite frame");
    const float max_code = bit_depth == 16 ? 65535.0f : 255.0f;
    std::vector<std::uint16_t> samples(frame.data().size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const float v = std::clamp(frame.data()[i], 0.0f, 1.0f);
        samples[i] = std::uint16_t(std::lround(v * max_code));
    }
    store_png(path, frame.width(), frame.height(), frame.channels(), bit_depth, samples);
}

DisocclusionMask read_mask_png(const fs::path& path)
{
    const auto raw = load_png(path);
    if (raw.bit_depth != 8 || raw.channels != 1)
        throw Error(ErrorCode::UnsupportedFormat, path.string() + ": mask PNG must be 8-bit grayscale");
    std::vector<std::uint8_t> data(raw.samples.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (raw.samples[i] == 255)
            data[i] = 1;
        else if (raw.samples[i] == 0)
            data[i] = 0;
        else
            throw Error(ErrorCode::InvalidMask, path.string() + ": mask values must be 0 or 255");
    }
    return DisocclusionMask(raw.width, raw.height, std::move(data));
}

void write_mask_png(const fs::path& path, const DisocclusionMask& mask)
{
    std::vector<std::uint16_t> samples(mask.data().size());
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = mask.data()[i] ? 255 : 0;
    store_png(path, mask.width(), mask.height(), 1, 8, samples);
}

// ---------------------------------------------------------------------------
// Numbered sequences

std::string format_index(std::string_view pattern, int index)
{
    static const std::regex single_field(R"([^%]*%0?\d*d[^%]*)");
    const std::string pat(pattern);
    if (!std::regex_match(pat, single_field))
        throw Error(ErrorCode::InvalidArgument, "pattern needs exactly one %d field: " + pat);
    const int n = std::snprintf(nullptr, 0, pat.c_str(), index);
    if (n < 0) throw Error(ErrorCode::InvalidArgument, "bad index pattern " + pat);
    std::string out(std::size_t(n) + 1, '\0');
    std::snprintf(out.data(), out.size(), pat.c_str(), index);
    out.resize(std::size_t(n));
    return out;
}

std::vector<fs::path> list_sequence(const fs::path& dir, std::string_view pattern)
{
    static const std::regex conversion(R"(%0?(\d*)d)");
    const std::string pat(pattern);
    std::smatch m;
    if (!std::regex_search(pat, m, conversion))
        throw Error(ErrorCode::InvalidArgument, "pattern needs one %d field: " + pat);

    auto escape = [](const std::string& s) {
        static const std::regex special(R"([.^$|()\[\]{}*+?\\])");
        return std::regex_replace(s, special, R"(\$&)");
    };
    const std::regex file_re(escape(m.prefix().str()) + R"((\d+))" + escape(m.suffix().str()));

    std::map<int, fs::path> found;
    std::error_code ec;
    if (fs::is_directory(dir, ec)) {
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (!entry.is_regular_file()) continue;
            const auto name = entry.path().filename().string();
            std::smatch fm;
            if (std::regex_match(name, fm, file_re)) found.emplace(std::stoi(fm[1].str()), entry.path());
        }
    }
    if (found.empty()) throw Error(ErrorCode::MissingIndex, "no files matching " + pat + " in " + dir.string());

    std::vector<fs::path> paths;
    int expected = found.begin()->first;
    for (const auto& [idx, path] : found) {
        if (idx != expected)
            throw Error(ErrorCode::MissingIndex, "sequence " + pat + " is missing index " + std::to_string(expected));
        paths.push_back(path);
        ++expected;
    }
    return paths;
}

std::vector<FrameBuffer> read_frame_sequence(const fs::path& dir, std::string_view pattern,
                                             const PngReadOptions& options)
{
    std::vector<FrameBuffer> frames;
    for (const auto& path : list_sequence(dir, pattern)) {
        auto frame = read_png(path, options);
        if (!frames.empty() && !frames.front().same_shape(frame))
            throw Error(ErrorCode::DimensionMismatch, path.string() + " differs in size from the first frame");
        frames.push_back(std::move(frame));
    }
    return frames;
}

}  // namespace stereodiff
