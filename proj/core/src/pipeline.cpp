#include "stereodiff/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <openssl/evp.h>

#include "json_io.hpp"
#include "stereodiff/error.hpp"
#include "stereodiff/protocol.hpp"
#include "stereodiff/stereo.hpp"

namespace stereodiff {

namespace fs = std::filesystem;

std::string sha256_hex(std::span<const std::byte> bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorCode::InvalidArgument, "SHA-256 failed");
    std::string hex;
    hex.reserve(2 * len);
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

std::string sha256_file(const fs::path& path)
{
    return sha256_hex(read_file_bytes(path));
}

void RunLog::hash_input(const fs::path& path)
{
    std::error_code ec;
    if (fs::is_directory(path, ec)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::recursive_directory_iterator(path)) {
            if (entry.is_regular_file()) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) inputs_.emplace_back(f.generic_string(), sha256_file(f));
        return;
    }
    inputs_.emplace_back(path.generic_string(), sha256_file(path));
}

void RunLog::write(const PipelineConfig& config, const fs::path& dir, const std::string& name) const
{
    nlohmann::json inputs = nlohmann::json::object();
    for (const auto& [path, hash] : inputs_) inputs[path] = hash;
    nlohmann::json timings = nlohmann::json::array();
    for (const auto& [stage, ms] : timings_) timings.push_back({{"stage", stage}, {"ms", ms}});
    const nlohmann::json manifest = {
        {"format", "stereodiff-run"},
        {"version", 1},
        {"command", command_},
        {"config", parse_json(config_to_json(config), "config")},
        {"inputs", inputs},
        {"timings", timings},
        {"warnings", warnings_},
    };
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream out(dir / name, std::ios::trunc);
    if (!out) throw Error(ErrorCode::FileAccess, "cannot write " + (dir / name).string());
    out << manifest.dump(2) << '\n';
}

void check_frame_limit(std::size_t frames, const PipelineConfig& config)
{
    if (frames > std::size_t(config.max_frames))
        throw Error(ErrorCode::SequenceTooLong, "sequence of " + std::to_string(frames) +
                                                    " frames exceeds the limit of " +
                                                    std::to_string(config.max_frames));
}

std::vector<FrameBuffer> load_rgb_sequence(const fs::path& dir, const SequenceLayout& layout,
                                           const PipelineConfig& config)
{
    auto frames = read_frame_sequence(dir, layout.rgb_pattern);
    check_frame_limit(frames.size(), config);
    return frames;
}

DepthSequence load_depth_sequence(const fs::path& dir, const SequenceLayout& layout, const PipelineConfig& config)
{
    DepthSequence seq;
    for (const auto& path : list_sequence(dir, layout.depth_pattern))
        seq.frames.push_back(read_depth(path, layout.depth_format, layout.depth_png_scale));
    check_frame_limit(seq.frames.size(), config);
    for (const auto& d : seq.frames) {
        if (d.width() != seq.frames.front().width() || d.height() != seq.frames.front().height())
            throw Error(ErrorCode::DimensionMismatch, "depth frames differ in size");
    }
    return seq;
}

FlowSequence load_flow_sequence(const fs::path& dir, const SequenceLayout& layout, std::size_t frames)
{
    FlowSequence flows;
    for (std::size_t i = 0; i + 1 < frames; ++i) {
        flows.forward.push_back(read_flo(dir / format_index(layout.flow_fwd_pattern, int(i))));
        flows.backward.push_back(read_flo(dir / format_index(layout.flow_bwd_pattern, int(i))));
    }
    return flows;
}

DepthSequence prepare_depth(const DepthSequence& raw, const FlowSequence* flows, const PipelineConfig& config)
{
    const DepthSequence source = config.inverse_depth ? reciprocate_depth(raw) : raw;
    DepthSequence depth = normalize_depth(source, config.depth_lo, config.depth_hi).sequence;
    if (flows) {
        const SmoothOptions opts{config.smooth_window, config.smooth_sigma, config.flow_consistency_px};
        depth = smooth_depth(depth, flows->forward, flows->backward, opts);
    }
    return depth;
}

void write_depth_sequence(const DepthSequence& depth, const fs::path& dir, const SequenceLayout& layout)
{
    fs::create_directories(dir);
    for (std::size_t i = 0; i < depth.frames.size(); ++i)
        write_pfm(dir / format_index(layout.depth_pattern, int(i)), depth.frames[i]);
}

void write_warped_video(const WarpedVideo& video, const fs::path& dir, const SequenceLayout& layout)
{
    fs::create_directories(dir);
    for (std::size_t i = 0; i < video.frames.size(); ++i) {
        write_png(dir / format_index(layout.rgb_pattern, int(i)), video.frames[i], 16);
        write_mask_png(dir / format_index(layout.mask_pattern, int(i)), video.masks[i]);
    }
}

double focal_for(const PipelineConfig& config, int width) noexcept
{
    return config.focal_px > 0.0 ? config.focal_px : double(width);
}

WarpOptions warp_options(const PipelineConfig& config)
{
    WarpOptions o;
    o.n_planes = config.mpi_planes;
    o.depth_lo = config.depth_lo;
    o.depth_hi = config.depth_hi;
    o.max_baseline = config.max_baseline;
    o.isolation_threshold = config.isolation_threshold;
    o.crack_threshold = config.crack_threshold;
    o.crack_kernel = gaussian_kernel(config.crack_sigma);
    return o;
}

Trajectory make_trajectory(const PipelineConfig& config, int width)
{
    const double f = focal_for(config, width);
    return config.trajectory == TrajectoryKind::Spiral ? build_spiral_trajectory(config.baseline, config.n_views, f)
                                                        : build_linear_trajectory(config.baseline, config.n_views, f);
}

NoiseSchedule schedule_for(const PipelineConfig& config)
{
    return make_schedule(config.schedule);
}

std::unique_ptr<DenoiserEndpoint> make_denoiser(const PipelineConfig& config, const NoiseSchedule& schedule,
                                                const LatentCodec& codec, const FrameMatrix* oracle_targets)
{
    if (config.denoiser == "zero") return std::make_unique<ZeroDenoiser>();
    if (config.denoiser == "external") {
        std::string address = config.denoiser_address;
        if (address.empty()) {
            const char* env = std::getenv(kDenoiserEnv);
            if (!env || !*env)
                throw Error(ErrorCode::InvalidArgument,
                            std::string("external denoiser needs an address or $") + kDenoiserEnv);
            address = env;
        }
        return std::make_unique<protocol::ExternalDenoiser>(protocol::open_transport(address),
                                                            std::size_t(config.max_frames));
    }
    if (config.denoiser != "oracle") throw Error(ErrorCode::InvalidArgument, "unknown denoiser " + config.denoiser);
    if (!oracle_targets) throw Error(ErrorCode::InvalidArgument, "the oracle denoiser needs a target matrix");

    const FrameMatrix& fm = *oracle_targets;
    Grid<LatentTensor> targets(fm.n_frames(), fm.n_views());
    for (std::size_t v = 0; v < fm.n_views(); ++v) {
        const auto column = fm.frames.col(v).to_vector();
        auto latents = codec.encode(column);
        for (std::size_t s = 0; s < fm.n_frames(); ++s) targets(s, v) = std::move(latents[s]);
    }
    return std::make_unique<OracleDenoiser>(std::move(targets), schedule);
}

void run_pipeline(const PipelineInputs& inputs, const PipelineConfig& config, const fs::path& out, RunLog& log)
{
    validate_config(config);
    log.hash_input(inputs.rgb_dir);
    log.hash_input(inputs.depth_dir);
    if (!inputs.flow_dir.empty()) log.hash_input(inputs.flow_dir);
    if (!inputs.oracle_targets.empty()) log.hash_input(inputs.oracle_targets);

    const auto rgb = log.time("load", [&] { return load_rgb_sequence(inputs.rgb_dir, inputs.layout, config); });
    const DepthSequence raw = load_depth_sequence(inputs.depth_dir, inputs.layout, config);
    if (raw.frames.size() != rgb.size())
        throw Error(ErrorCode::DimensionMismatch, "rgb and depth sequences differ in length");

    const DepthSequence depth = log.time("smooth-depth", [&] {
        if (inputs.flow_dir.empty()) return prepare_depth(raw, nullptr, config);
        const FlowSequence flows = load_flow_sequence(inputs.flow_dir, inputs.layout, raw.frames.size());
        return prepare_depth(raw, &flows, config);
    });
    write_depth_sequence(depth, out / "depth", inputs.layout);

    const int width = rgb.front().width();
    const FrameMatrix matrix = log.time("matrix", [&] {
        return build_frame_matrix(rgb, depth, make_trajectory(config, width), warp_options(config), config.prompt);
    });
    save_frame_matrix(matrix, out / "matrix");

    const auto codec = make_codec(config.codec);
    const NoiseSchedule schedule = schedule_for(config);
    std::optional<FrameMatrix> targets;
    if (!inputs.oracle_targets.empty()) targets = load_frame_matrix(inputs.oracle_targets);
    const auto endpoint = make_denoiser(config, schedule, *codec, targets ? &*targets : nullptr);

    const InpaintOptions opts{config.seed, config.deterministic, config.reinject, config.threads};
    const InpaintResult result =
        log.time("inpaint", [&] { return inpaint_frame_matrix(matrix, *codec, *endpoint, schedule, opts); });
    save_frame_matrix(result.matrix, out / "inpainted");

    log.time("assemble", [&] {
        const StereoExtraction stereo = extract_stereo(result.matrix);
        if (stereo.uninpainted) log.warn("right view still has black disoccluded pixels");
        write_stereo_outputs(stereo.pair, out / "stereo");
        write_png(out / "preview.png", render_preview_grid(result.matrix));
    });
    log.write(config, out);
}

}  // namespace stereodiff
