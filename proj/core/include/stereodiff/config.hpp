#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "stereodiff/frame_matrix.hpp"
#include "stereodiff/schedule.hpp"

namespace stereodiff {

struct PipelineConfig {
    float depth_lo = 1.0f;
    float depth_hi = 10.0f;
    /// The depth estimator emits inverse depth (disparity-like values).
    bool inverse_depth = false;

    double baseline = 0.08;
    /// Cameras in the frame matrix, reference view included.
    int n_views = 8;
    int max_frames = 16;
    /// 0 means the image width.
    double focal_px = 0.0;
    TrajectoryKind trajectory = TrajectoryKind::LinearBaseline;
    double max_baseline = 0.20;

    int mpi_planes = 4;
    float isolation_threshold = 0.5f;
    float crack_threshold = 0.2f;
    /// Sigma of the 3x3 Gaussian used for crack detection and fill.
    float crack_sigma = kCrackSigma;

    int smooth_window = 5;
    float smooth_sigma = 1.0f;
    float flow_consistency_px = 1.0f;

    ScheduleConfig schedule;

    /// "identity" or "avgpoolN".
    std::string codec = "avgpool8";
    /// "oracle", "zero" or "external".
    std::string denoiser = "oracle";
    /// tcp://host:port or exec:<command>; empty falls back to $STEREODIFF_DENOISER.
    std::string denoiser_address;

    bool reinject = true;
    bool deterministic = false;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string prompt;

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Throws InvalidArgument (or BaselineOutOfRange) when a field is out of its domain.
void validate_config(const PipelineConfig& config);

std::string config_to_json(const PipelineConfig& config);
/// Missing keys keep `base` values; unknown keys are rejected. A run manifest is accepted too,
/// in which case its "config" object is read.
PipelineConfig config_from_json(const std::string& text, const PipelineConfig& base = {});
PipelineConfig load_config(const std::filesystem::path& path, const PipelineConfig& base = {});
void save_config(const PipelineConfig& config, const std::filesystem::path& path);

}  // namespace stereodiff
