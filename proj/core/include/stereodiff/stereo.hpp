#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "stereodiff/frame_matrix.hpp"
#include "stereodiff/image.hpp"

namespace stereodiff {

struct StereoPairSequence {
    std::vector<FrameBuffer> left;
    std::vector<FrameBuffer> right;
};

struct StereoExtraction {
    StereoPairSequence pair;
    /// Set when a disoccluded pixel of the right column is still pure black, i.e. the matrix
    /// looks uninpainted.
    bool uninpainted = false;
};

/// Left is column 0, right is the last column.
StereoExtraction extract_stereo(const FrameMatrix& matrix);

/// Throws DimensionMismatch unless both sides have equal length and frame shapes.
void validate_pair(const StereoPairSequence& pair);

/// Left | right, width doubled.
std::vector<FrameBuffer> compose_sbs(const StereoPairSequence& pair);
StereoPairSequence split_sbs(const std::vector<FrameBuffer>& sbs);

/// Red-cyan: R from the left view, G and B from the right.
std::vector<FrameBuffer> compose_anaglyph(const StereoPairSequence& pair);

inline constexpr int kPreviewSeparator = 2;

/// Top-left corner of tile (row, col) in a preview grid.
std::pair<int, int> preview_tile_origin(int row, int col, int tile_w, int tile_h) noexcept;

/// Tiles matrix cells (frame s, view v) into one image with 2-px separators of value 1 around and
/// between tiles. Empty selections mean all frames / all views.
FrameBuffer render_preview_grid(const FrameMatrix& matrix, const std::vector<std::size_t>& frames = {},
                                const std::vector<std::size_t>& views = {});

/// Writes left/, right/, sbs/ and anaglyph/ as f###.png under `dir`.
void write_stereo_outputs(const StereoPairSequence& pair, const std::filesystem::path& dir, int bit_depth = 8);

}  // namespace stereodiff
