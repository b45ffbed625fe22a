#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stereodiff/codec.hpp"
#include "stereodiff/config.hpp"
#include "stereodiff/denoiser.hpp"
#include "stereodiff/depth_prep.hpp"
#include "stereodiff/frame_matrix.hpp"
#include "stereodiff/inpaint.hpp"
#include "stereodiff/io.hpp"
#include "stereodiff/warp.hpp"

namespace stereodiff {

inline constexpr const char* kDenoiserEnv = "STEREODIFF_DENOISER";
inline constexpr const char* kRunManifestName = "run_manifest.json";

std::string sha256_hex(std::span<const std::byte> bytes);
std::string sha256_file(const std::filesystem::path& path);

/// What a run consumed and how long each stage took; serialized next to the outputs.
class RunLog {
public:
    explicit RunLog(std::string command = {}) : command_(std::move(command)) {}

    /// Hashes a file, or every regular file below a directory in path order.
    void hash_input(const std::filesystem::path& path);
    void warn(std::string message) { warnings_.push_back(std::move(message)); }

    template <class F>
    decltype(auto) time(const std::string& stage, F&& f)
    {
        const auto start = std::chrono::steady_clock::now();
        struct Stop {
            RunLog* log;
            std::string stage;
            std::chrono::steady_clock::time_point start;
            ~Stop()
            {
                const std::chrono::duration<double, std::milli> ms = std::chrono::steady_clock::now() - start;
                log->timings_.emplace_back(stage, ms.count());
            }
        } stop{this, stage, start};
        return f();
    }

    const std::vector<std::pair<std::string, std::string>>& inputs() const noexcept { return inputs_; }
    const std::vector<std::pair<std::string, double>>& timings() const noexcept { return timings_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    /// Writes the manifest as `dir / name`.
    void write(const PipelineConfig& config, const std::filesystem::path& dir,
               const std::string& name = kRunManifestName) const;

private:
    std::string command_;
    std::vector<std::pair<std::string, std::string>> inputs_;
    std::vector<std::pair<std::string, double>> timings_;
    std::vector<std::string> warnings_;
};

struct SequenceLayout {
    std::string rgb_pattern = "f%03d.png";
    std::string depth_pattern = "d%03d.pfm";
    DepthFormat depth_format = DepthFormat::Pfm;
    float depth_png_scale = 1.0f;
    std::string flow_fwd_pattern = "fwd%03d.flo";
    std::string flow_bwd_pattern = "bwd%03d.flo";
    std::string mask_pattern = "m%03d.png";
};

/// Throws SequenceTooLong when the sequence exceeds config.max_frames.
void check_frame_limit(std::size_t frames, const PipelineConfig& config);

std::vector<FrameBuffer> load_rgb_sequence(const std::filesystem::path& dir, const SequenceLayout& layout,
                                           const PipelineConfig& config);
DepthSequence load_depth_sequence(const std::filesystem::path& dir, const SequenceLayout& layout,
                                  const PipelineConfig& config);

struct FlowSequence {
    std::vector<FlowField> forward;
    std::vector<FlowField> backward;
};

/// Flow pairs 0..frames-2. A missing file is a FileAccess error.
FlowSequence load_flow_sequence(const std::filesystem::path& dir, const SequenceLayout& layout, std::size_t frames);

/// Optional reciprocation, normalization onto the configured range, then temporal smoothing when
/// flows are supplied.
DepthSequence prepare_depth(const DepthSequence& raw, const FlowSequence* flows, const PipelineConfig& config);

void write_depth_sequence(const DepthSequence& depth, const std::filesystem::path& dir, const SequenceLayout& layout);
void write_warped_video(const WarpedVideo& video, const std::filesystem::path& dir, const SequenceLayout& layout);

double focal_for(const PipelineConfig& config, int width) noexcept;
WarpOptions warp_options(const PipelineConfig& config);
Trajectory make_trajectory(const PipelineConfig& config, int width);
NoiseSchedule schedule_for(const PipelineConfig& config);

/// Builds the configured endpoint. The oracle needs the clean matrix it should converge to;
/// `schedule` must outlive the endpoint.
std::unique_ptr<DenoiserEndpoint> make_denoiser(const PipelineConfig& config, const NoiseSchedule& schedule,
                                                const LatentCodec& codec, const FrameMatrix* oracle_targets);

struct PipelineInputs {
    std::filesystem::path rgb_dir;
    std::filesystem::path depth_dir;
    /// Empty: depth is normalized but not smoothed.
    std::filesystem::path flow_dir;
    /// Clean frame matrix for the oracle denoiser.
    std::filesystem::path oracle_targets;
    SequenceLayout layout;
};

/// depth -> matrix -> inpaint -> stereo outputs under `out`:
///   depth/, matrix/, inpainted/, stereo/{left,right,sbs,anaglyph}/, preview.png, run_manifest.json.
void run_pipeline(const PipelineInputs& inputs, const PipelineConfig& config, const std::filesystem::path& out,
                  RunLog& log);

}  // namespace stereodiff
