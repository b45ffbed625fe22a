#include "stereodiff/stereo.hpp"

#include <cstdio>

#include "stereodiff/error.hpp"
#include "stereodiff/io.hpp"

namespace stereodiff {

StereoExtraction extract_stereo(const FrameMatrix& matrix)
{
    if (matrix.n_views() < 2) throw Error(ErrorCode::InvalidViewCount, "a stereo pair needs at least two views");
    StereoExtraction out;
    const std::size_t last = matrix.n_views() - 1;
    out.pair.left = matrix.frames.col(0).to_vector();
    out.pair.right = matrix.frames.col(last).to_vector();
    for (std::size_t s = 0; s < matrix.n_frames() && !out.uninpainted; ++s) {
        const FrameBuffer& f = matrix.frames(s, last);
        const DisocclusionMask& m = matrix.masks(s, last);
        for (int y = 0; y < f.height() && !out.uninpainted; ++y) {
            for (int x = 0; x < f.width(); ++x) {
                if (m.at(x, y)) continue;
                bool black = true;
                for (int c = 0; c < f.channels(); ++c) black = black && f.at(x, y, c) == 0.0f;
                if (black) {
                    out.uninpainted = true;
                    break;
                }
            }
        }
    }
    return out;
}

void validate_pair(const StereoPairSequence& pair)
{
    if (pair.left.size() != pair.right.size())
        throw Error(ErrorCode::DimensionMismatch, "left and right sequences differ in length");
    for (std::size_t i = 0; i < pair.left.size(); ++i) {
        if (!pair.left[i].same_shape(pair.right[i]) || !pair.left[i].same_shape(pair.left.front()))
            throw Error(ErrorCode::DimensionMismatch, "stereo frames differ in shape");
    }
}

std::vector<FrameBuffer> compose_sbs(const StereoPairSequence& pair)
{
    validate_pair(pair);
    std::vector<FrameBuffer> out;
    out.reserve(pair.left.size());
    for (std::size_t i = 0; i < pair.left.size(); ++i) {
        const FrameBuffer& l = pair.left[i];
        const FrameBuffer& r = pair.right[i];
        const int w = l.width();
        FrameBuffer f(2 * w, l.height(), l.channels());
        for (int y = 0; y < l.height(); ++y) {
            for (int x = 0; x < w; ++x) {
                for (int c = 0; c < l.channels(); ++c) {
                    f.at(x, y, c) = l.at(x, y, c);
                    f.at(x + w, y, c) = r.at(x, y, c);
                }
            }
        }
        out.push_back(std::move(f));
    }
    return out;
}

StereoPairSequence split_sbs(const std::vector<FrameBuffer>& sbs)
{
    StereoPairSequence pair;
    for (const FrameBuffer& f : sbs) {
        if (f.width() % 2 != 0) throw Error(ErrorCode::DimensionMismatch, "side-by-side frame has odd width");
        const int w = f.width() / 2;
        FrameBuffer l(w, f.height(), f.channels());
        FrameBuffer r(w, f.height(), f.channels());
        for (int y = 0; y < f.height(); ++y) {
            for (int x = 0; x < w; ++x) {
                for (int c = 0; c < f.channels(); ++c) {
                    l.at(x, y, c) = f.at(x, y, c);
                    r.at(x, y, c) = f.at(x + w, y, c);
                }
            }
        }
        pair.left.push_back(std::move(l));
        pair.right.push_back(std::move(r));
    }
    return pair;
}

std::vector<FrameBuffer> compose_anaglyph(const StereoPairSequence& pair)
{
    validate_pair(pair);
    std::vector<FrameBuffer> out;
    out.reserve(pair.left.size());
    for (std::size_t i = 0; i < pair.left.size(); ++i) {
        const FrameBuffer& l = pair.left[i];
        if (l.channels() != 3) throw Error(ErrorCode::DimensionMismatch, "anaglyph needs RGB frames");
        FrameBuffer f = pair.right[i];
        for (int y = 0; y < l.height(); ++y)
            for (int x = 0; x < l.width(); ++x) f.at(x, y, 0) = l.at(x, y, 0);
        out.push_back(std::move(f));
    }
    return out;
}

std::pair<int, int> preview_tile_origin(int row, int col, int tile_w, int tile_h) noexcept
{
    return {kPreviewSeparator + col * (tile_w + kPreviewSeparator),
            kPreviewSeparator + row * (tile_h + kPreviewSeparator)};
}

FrameBuffer render_preview_grid(const FrameMatrix& matrix, const std::vector<std::size_t>& frames,
                                const std::vector<std::size_t>& views)
{
    std::vector<std::size_t> rows = frames;
    std::vector<std::size_t> cols = views;
    if (rows.empty())
        for (std::size_t s = 0; s < matrix.n_frames(); ++s) rows.push_back(s);
    if (cols.empty())
        for (std::size_t v = 0; v < matrix.n_views(); ++v) cols.push_back(v);
    for (auto s : rows)
        if (s >= matrix.n_frames()) throw Error(ErrorCode::InvalidArgument, "preview frame index out of range");
    for (auto v : cols)
        if (v >= matrix.n_views()) throw Error(ErrorCode::InvalidArgument, "preview view index out of range");

    const int tw = matrix.width();
    const int th = matrix.height();
    const int ch = matrix.channels();
    const int w = kPreviewSeparator + int(cols.size()) * (tw + kPreviewSeparator);
    const int h = kPreviewSeparator + int(rows.size()) * (th + kPreviewSeparator);
    FrameBuffer out(w, h, ch, 1.0f);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            const FrameBuffer& tile = matrix.frames(rows[i], cols[j]);
            const auto [ox, oy] = preview_tile_origin(int(i), int(j), tw, th);
            for (int y = 0; y < th; ++y)
                for (int x = 0; x < tw; ++x)
                    for (int c = 0; c < ch; ++c) out.at(ox + x, oy + y, c) = tile.at(x, y, c);
        }
    }
    return out;
}

void write_stereo_outputs(const StereoPairSequence& pair, const std::filesystem::path& dir, int bit_depth)
{
    const auto sbs = compose_sbs(pair);
    const bool colour = !pair.left.empty() && pair.left.front().channels() == 3;
    std::vector<FrameBuffer> anaglyph;
    if (colour) anaglyph = compose_anaglyph(pair);

    auto write_all = [&](const char* name, const std::vector<FrameBuffer>& seq) {
        const auto sub = dir / name;
        std::error_code ec;
        std::filesystem::create_directories(sub, ec);
        if (ec) throw Error(ErrorCode::FileAccess, "cannot create " + sub.string() + ": " + ec.message());
        for (std::size_t i = 0; i < seq.size(); ++i) {
            char file[32];
            std::snprintf(file, sizeof file, "f%03zu.png", i);
            write_png(sub / file, seq[i], bit_depth);
        }
    };
    write_all("left", pair.left);
    write_all("right", pair.right);
    write_all("sbs", sbs);
    if (colour) write_all("anaglyph", anaglyph);
}

}  // namespace stereodiff
