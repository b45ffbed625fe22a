#include "stereodiff/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json_io.hpp"
#include "stereodiff/codec.hpp"
#include "stereodiff/error.hpp"

namespace stereodiff {

namespace {

using nlohmann::json;

json to_object(const PipelineConfig& c)
{
    return {
        {"depth_lo", c.depth_lo},
        {"depth_hi", c.depth_hi},
        {"inverse_depth", c.inverse_depth},
        {"baseline", c.baseline},
        {"n_views", c.n_views},
        {"max_frames", c.max_frames},
        {"focal_px", c.focal_px},
        {"trajectory", c.trajectory},
        {"max_baseline", c.max_baseline},
        {"mpi_planes", c.mpi_planes},
        {"isolation_threshold", c.isolation_threshold},
        {"crack_threshold", c.crack_threshold},
        {"crack_sigma", c.crack_sigma},
        {"smooth_window", c.smooth_window},
        {"smooth_sigma", c.smooth_sigma},
        {"flow_consistency_px", c.flow_consistency_px},
        {"total_steps", c.schedule.total_steps},
        {"denoise_steps", c.schedule.denoise_steps},
        {"beta_lo", c.schedule.beta_lo},
        {"beta_hi", c.schedule.beta_hi},
        {"resample_hi", c.schedule.resample_hi},
        {"resample_lo", c.schedule.resample_lo},
        {"codec", c.codec},
        {"denoiser", c.denoiser},
        {"denoiser_address", c.denoiser_address},
        {"reinject", c.reinject},
        {"deterministic", c.deterministic},
        {"seed", c.seed},
        {"threads", c.threads},
        {"prompt", c.prompt},
    };
}

template <class T>
void read(const json& j, const char* key, T& out)
{
    if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

void validate_config(const PipelineConfig& c)
{
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
    if (!(c.depth_lo > 0.0f) || !(c.depth_hi > c.depth_lo)) fail("depth range must satisfy 0 < lo < hi");
    if (c.n_views < 2) throw Error(ErrorCode::InvalidViewCount, "n_views must be at least 2");
    if (c.max_frames < 1) fail("max_frames must be positive");
    if (c.focal_px < 0.0) fail("focal_px must be non-negative");
    if (!(c.max_baseline > 0.0)) fail("max_baseline must be positive");
    if (std::abs(c.baseline) > c.max_baseline)
        throw Error(ErrorCode::BaselineOutOfRange, "baseline exceeds max_baseline");
    if (c.mpi_planes < 1) fail("mpi_planes must be positive");
    if (c.isolation_threshold < 0.0f || c.isolation_threshold > 1.0f) fail("isolation_threshold must lie in [0, 1]");
    if (c.crack_threshold < 0.0f || c.crack_threshold > 1.0f) fail("crack_threshold must lie in [0, 1]");
    if (!(c.crack_sigma > 0.0f)) fail("crack_sigma must be positive");
    if (c.smooth_window < 1 || c.smooth_window % 2 == 0) fail("smooth_window must be a positive odd number");
    if (!(c.smooth_sigma > 0.0f)) fail("smooth_sigma must be positive");
    if (c.schedule.resample_hi < 1 || c.schedule.resample_lo < 1) fail("resample counts must be positive");
    if (c.denoiser != "oracle" && c.denoiser != "zero" && c.denoiser != "external")
        fail("denoiser must be oracle, zero or external");
    if (c.threads < 1) fail("threads must be positive");
    make_codec(c.codec);
}

std::string config_to_json(const PipelineConfig& config)
{
    return to_object(config).dump(2);
}

PipelineConfig config_from_json(const std::string& text, const PipelineConfig& base)
{
    json j = parse_json(text, "config");
    if (j.is_object() && j.contains("config") && j.at("config").is_object()) j = j.at("config");
    if (!j.is_object()) throw Error(ErrorCode::UnsupportedFormat, "config must be a JSON object");

    const json known = to_object(base);
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw Error(ErrorCode::UnsupportedFormat, "unknown config key '" + key + "'");
    }

    PipelineConfig c = base;
    try {
        read(j, "depth_lo", c.depth_lo);
        read(j, "depth_hi", c.depth_hi);
        read(j, "inverse_depth", c.inverse_depth);
        read(j, "baseline", c.baseline);
        read(j, "n_views", c.n_views);
        read(j, "max_frames", c.max_frames);
        read(j, "focal_px", c.focal_px);
        read(j, "trajectory", c.trajectory);
        read(j, "max_baseline", c.max_baseline);
        read(j, "mpi_planes", c.mpi_planes);
        read(j, "isolation_threshold", c.isolation_threshold);
        read(j, "crack_threshold", c.crack_threshold);
        read(j, "crack_sigma", c.crack_sigma);
        read(j, "smooth_window", c.smooth_window);
        read(j, "smooth_sigma", c.smooth_sigma);
        read(j, "flow_consistency_px", c.flow_consistency_px);
        read(j, "total_steps", c.schedule.total_steps);
        read(j, "denoise_steps", c.schedule.denoise_steps);
        read(j, "beta_lo", c.schedule.beta_lo);
        read(j, "beta_hi", c.schedule.beta_hi);
        read(j, "resample_hi", c.schedule.resample_hi);
        read(j, "resample_lo", c.schedule.resample_lo);
        read(j, "codec", c.codec);
        read(j, "denoiser", c.denoiser);
        read(j, "denoiser_address", c.denoiser_address);
        read(j, "reinject", c.reinject);
        read(j, "deterministic", c.deterministic);
        read(j, "seed", c.seed);
        read(j, "threads", c.threads);
        read(j, "prompt", c.prompt);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::UnsupportedFormat, std::string("config: ") + e.what());
    }
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path, const PipelineConfig& base)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::FileAccess, "cannot open config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return config_from_json(text.str(), base);
}

void save_config(const PipelineConfig& config, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::FileAccess, "cannot write config " + path.string());
    out << config_to_json(config) << '\n';
}

}  // namespace stereodiff
