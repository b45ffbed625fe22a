#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stereodiff/codec.hpp"
#include "stereodiff/denoiser.hpp"
#include "stereodiff/frame_matrix.hpp"
#include "stereodiff/schedule.hpp"

namespace stereodiff {

struct InpaintOptions {
    std::uint64_t seed = 0;
    /// Forces the predicted variance to 0 in every reverse step.
    bool deterministic = false;
    bool reinject = true;
    /// Worker threads per pass; only used when the endpoint is concurrent.
    int threads = 1;
};

/// Denoising inpainting of one video: known cells follow noisy samples of encode(warped), unknown
/// cells follow the reverse process, and every repetition but the last at each step is re-noised.
std::vector<FrameBuffer> inpaint_sequence(const std::vector<FrameBuffer>& warped,
                                          const std::vector<DisocclusionMask>& masks, const std::string& condition,
                                          const LatentCodec& codec, DenoiserEndpoint& endpoint,
                                          const NoiseSchedule& schedule, const InpaintOptions& options = {});

struct InpaintResult {
    /// Decoded matrix. Masks are carried over from the input.
    FrameMatrix matrix;
    /// Columns that were stepped all the way to t = 0. The others are completed from their last
    /// clean-latent estimate.
    std::vector<bool> finalized_columns;
};

/// Alternating column/row resampling over a frame matrix. Repetition 1, 3, ... denoises every
/// column (time sequences); repetition 2, 4, ... every row (view sequences). Steps scoped to the
/// right view only process the last column.
InpaintResult inpaint_frame_matrix(const FrameMatrix& matrix, const LatentCodec& codec, DenoiserEndpoint& endpoint,
                                   const NoiseSchedule& schedule, const InpaintOptions& options = {});

}  // namespace stereodiff
