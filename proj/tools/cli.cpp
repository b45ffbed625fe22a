#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>

#include <CLI11.hpp>

#include "stereodiff/error.hpp"
#include "stereodiff/pipeline.hpp"
#include "stereodiff/protocol.hpp"
#include "stereodiff/stereo.hpp"

namespace stereodiff::cli {

namespace {

namespace fs = std::filesystem;

using Copy = std::function<void(PipelineConfig&, const PipelineConfig&)>;

/// Flag storage plus the bookkeeping that applies only the flags the user actually passed on top
/// of the config file.
struct Context {
    PipelineConfig flags;
    std::string config_path;
    std::string trajectory;
    std::vector<std::pair<CLI::Option*, Copy>> overrides;
    std::string command;

    PipelineConfig resolve() const
    {
        PipelineConfig c = config_path.empty() ? PipelineConfig{} : load_config(config_path);
        for (const auto& [opt, copy] : overrides) {
            if (opt->count() > 0) copy(c, flags);
        }
        validate_config(c);
        return c;
    }
};

template <class Get>
void bind_option(CLI::App* sub, Context& ctx, const std::string& name, Get get, const std::string& help)
{
    CLI::Option* opt = sub->add_option(name, get(ctx.flags), help);
    ctx.overrides.emplace_back(opt, [get](PipelineConfig& dst, const PipelineConfig& src) {
        get(dst) = get(const_cast<PipelineConfig&>(src));
    });
}

template <class Get>
void bind_flag(CLI::App* sub, Context& ctx, const std::string& name, Get get, const std::string& help)
{
    CLI::Option* opt = sub->add_flag(name, get(ctx.flags), help);
    ctx.overrides.emplace_back(opt, [get](PipelineConfig& dst, const PipelineConfig& src) {
        get(dst) = get(const_cast<PipelineConfig&>(src));
    });
}

#define FIELD(expr) [](PipelineConfig& c) -> auto& { return c.expr; }

void add_config_option(CLI::App* sub, Context& ctx)
{
    sub->add_option("--config", ctx.config_path, "JSON config or run manifest; flags override it")
        ->check(CLI::ExistingFile);
}

void add_depth_options(CLI::App* sub, Context& ctx)
{
    bind_option(sub, ctx, "--depth-lo", FIELD(depth_lo), "Normalized depth lower bound");
    bind_option(sub, ctx, "--depth-hi", FIELD(depth_hi), "Normalized depth upper bound");
    bind_flag(sub, ctx, "--inverse-depth", FIELD(inverse_depth), "Input depth is inverse depth");
}

void add_layout_options(CLI::App* sub, SequenceLayout& layout, std::string& depth_format)
{
    sub->add_option("--rgb-pattern", layout.rgb_pattern, "Frame file pattern")->capture_default_str();
    sub->add_option("--depth-pattern", layout.depth_pattern, "Depth file pattern")->capture_default_str();
    sub->add_option("--depth-format", depth_format, "pfm or png16")
        ->check(CLI::IsMember({"pfm", "png16"}))
        ->capture_default_str();
    sub->add_option("--depth-scale", layout.depth_png_scale, "Depth per 16-bit PNG code")->capture_default_str();
}

void add_warp_options(CLI::App* sub, Context& ctx)
{
    bind_option(sub, ctx, "--baseline", FIELD(baseline), "Stereo baseline in metres");
    bind_option(sub, ctx, "--max-baseline", FIELD(max_baseline), "Largest accepted baseline");
    bind_option(sub, ctx, "--focal", FIELD(focal_px), "Focal length in pixels (0: image width)");
    bind_option(sub, ctx, "--planes", FIELD(mpi_planes), "Multi-plane layers");
    bind_option(sub, ctx, "--isolation", FIELD(isolation_threshold), "Isolated-pixel removal threshold");
    bind_option(sub, ctx, "--crack", FIELD(crack_threshold), "Crack-filling threshold");
    bind_option(sub, ctx, "--crack-sigma", FIELD(crack_sigma), "Sigma of the 3x3 crack kernel");
    bind_option(sub, ctx, "--max-frames", FIELD(max_frames), "Longest accepted sequence");
}

void add_matrix_options(CLI::App* sub, Context& ctx)
{
    bind_option(sub, ctx, "--views", FIELD(n_views), "Cameras including the reference view");
    CLI::Option* opt = sub->add_option("--trajectory", ctx.trajectory, "linear-baseline or spiral")
                           ->check(CLI::IsMember({"linear-baseline", "spiral"}));
    ctx.overrides.emplace_back(opt, [&ctx](PipelineConfig& dst, const PipelineConfig&) {
        dst.trajectory = ctx.trajectory == "spiral" ? TrajectoryKind::Spiral : TrajectoryKind::LinearBaseline;
    });
    bind_option(sub, ctx, "--prompt", FIELD(prompt), "Text condition stored with the matrix");
}

void add_inpaint_options(CLI::App* sub, Context& ctx)
{
    bind_option(sub, ctx, "--codec", FIELD(codec), "identity or avgpoolN");
    bind_option(sub, ctx, "--denoiser", FIELD(denoiser), "oracle, zero or external");
    bind_option(sub, ctx, "--denoiser-address", FIELD(denoiser_address),
         std::string("tcp://host:port or exec:<command>; defaults to $") + kDenoiserEnv);
    bind_option(sub, ctx, "--seed", FIELD(seed), "Noise seed");
    bind_flag(sub, ctx, "--deterministic", FIELD(deterministic), "Ignore predicted variance");
    bind_flag(sub, ctx, "--reinject,!--no-reinject", FIELD(reinject), "Disocclusion boundary re-injection");
    bind_option(sub, ctx, "--total-steps", FIELD(schedule.total_steps), "Diffusion timesteps");
    bind_option(sub, ctx, "--steps", FIELD(schedule.denoise_steps), "Visited denoising steps");
    bind_option(sub, ctx, "--beta-lo", FIELD(schedule.beta_lo), "First beta of the linear schedule");
    bind_option(sub, ctx, "--beta-hi", FIELD(schedule.beta_hi), "Last beta of the linear schedule");
    bind_option(sub, ctx, "--resample-hi", FIELD(schedule.resample_hi), "Repetitions in the first half");
    bind_option(sub, ctx, "--resample-lo", FIELD(schedule.resample_lo), "Repetitions in the second half");
    bind_option(sub, ctx, "--threads", FIELD(threads), "Worker threads for concurrent endpoints");
}

#undef FIELD

DepthFormat depth_format_of(const std::string& name)
{
    return name == "png16" ? DepthFormat::Png16 : DepthFormat::Pfm;
}

DepthSequence load_working_depth(const fs::path& dir, const SequenceLayout& layout, const PipelineConfig& cfg,
                                 bool normalize)
{
    DepthSequence depth = load_depth_sequence(dir, layout, cfg);
    if (normalize) return prepare_depth(depth, nullptr, cfg);
    depth.normalized = true;
    return depth;
}

int report(const char* kind, const std::string& message, int code)
{
    std::fprintf(stderr, "stereodiff: %s: %s\n", kind, message.c_str());
    return code;
}

int exit_code(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Io: return kIo;
    case ErrorKind::Protocol: return kProtocol;
    case ErrorKind::Invariant: break;
    }
    return kInvariant;
}

int dispatch(CLI::App& app, const std::vector<std::string>& args)
{
    Context ctx;
    for (const auto& a : args) ctx.command += (ctx.command.empty() ? "" : " ") + a;
    ctx.command = "stereodiff " + ctx.command;

    SequenceLayout layout;
    std::string depth_format = "pfm";
    fs::path rgb_dir, depth_dir, flow_dir, matrix_dir, targets_dir, out;
    bool normalize = false;
    int bit_depth = 8;
    std::vector<std::size_t> frames, views;
    std::function<int()> action;

    app.require_subcommand(1);

    auto* smooth = app.add_subcommand("smooth-depth", "Normalize and flow-smooth a depth sequence");
    add_config_option(smooth, ctx);
    add_layout_options(smooth, layout, depth_format);
    smooth->add_option("--depth", depth_dir, "Raw depth directory")->required();
    smooth->add_option("--flow", flow_dir, "Directory of fwd%03d.flo / bwd%03d.flo")->required();
    smooth->add_option("--out", out, "Output directory")->required();
    add_depth_options(smooth, ctx);
    bind_option(smooth, ctx, "--window", [](PipelineConfig& c) -> auto& { return c.smooth_window; }, "Temporal window");
    bind_option(smooth, ctx, "--sigma", [](PipelineConfig& c) -> auto& { return c.smooth_sigma; }, "Gaussian sigma (frames)");
    bind_option(smooth, ctx, "--consistency", [](PipelineConfig& c) -> auto& { return c.flow_consistency_px; },
         "Round-trip flow error bound in pixels");
    bind_option(smooth, ctx, "--max-frames", [](PipelineConfig& c) -> auto& { return c.max_frames; },
         "Longest accepted sequence");
    smooth->callback([&] {
        action = [&] {
            const PipelineConfig cfg = ctx.resolve();
            RunLog log(ctx.command);
            log.hash_input(depth_dir);
            log.hash_input(flow_dir);
            layout.depth_format = depth_format_of(depth_format);
            const DepthSequence raw = load_depth_sequence(depth_dir, layout, cfg);
            const FlowSequence flows = load_flow_sequence(flow_dir, layout, raw.frames.size());
            const DepthSequence depth = log.time("smooth-depth", [&] { return prepare_depth(raw, &flows, cfg); });
            write_depth_sequence(depth, out, SequenceLayout{});
            log.write(cfg, out);
            return int(kOk);
        };
    });

    auto* warp = app.add_subcommand("warp", "Warp a video to one offset camera");
    add_config_option(warp, ctx);
    add_layout_options(warp, layout, depth_format);
    warp->add_option("--rgb", rgb_dir, "Frame directory")->required();
    warp->add_option("--depth", depth_dir, "Depth directory")->required();
    warp->add_option("--out", out, "Output directory")->required();
    warp->add_flag("--normalize", normalize, "Normalize raw depth before warping");
    add_depth_options(warp, ctx);
    add_warp_options(warp, ctx);
    warp->callback([&] {
        action = [&] {
            const PipelineConfig cfg = ctx.resolve();
            RunLog log(ctx.command);
            log.hash_input(rgb_dir);
            log.hash_input(depth_dir);
            layout.depth_format = depth_format_of(depth_format);
            const auto rgb = load_rgb_sequence(rgb_dir, layout, cfg);
            const DepthSequence depth = load_working_depth(depth_dir, layout, cfg, normalize);
            const CameraOffset cam{cfg.baseline, 0.0, focal_for(cfg, rgb.front().width())};
            const WarpedVideo video =
                log.time("warp", [&] { return warp_video(rgb, depth.frames, cam, warp_options(cfg)); });
            write_warped_video(video, out, SequenceLayout{});
            log.write(cfg, out);
            return int(kOk);
        };
    });

    auto* matrix = app.add_subcommand("matrix", "Build the frame matrix");
    add_config_option(matrix, ctx);
    add_layout_options(matrix, layout, depth_format);
    matrix->add_option("--rgb", rgb_dir, "Frame directory")->required();
    matrix->add_option("--depth", depth_dir, "Depth directory")->required();
    matrix->add_option("--out", out, "Output directory")->required();
    matrix->add_flag("--normalize", normalize, "Normalize raw depth before warping");
    add_depth_options(matrix, ctx);
    add_warp_options(matrix, ctx);
    add_matrix_options(matrix, ctx);
    matrix->callback([&] {
        action = [&] {
            const PipelineConfig cfg = ctx.resolve();
            RunLog log(ctx.command);
            log.hash_input(rgb_dir);
            log.hash_input(depth_dir);
            layout.depth_format = depth_format_of(depth_format);
            const auto rgb = load_rgb_sequence(rgb_dir, layout, cfg);
            const DepthSequence depth = load_working_depth(depth_dir, layout, cfg, normalize);
            const FrameMatrix fm = log.time("matrix", [&] {
                return build_frame_matrix(rgb, depth, make_trajectory(cfg, rgb.front().width()), warp_options(cfg),
                                          cfg.prompt);
            });
            save_frame_matrix(fm, out);
            log.write(cfg, out);
            return int(kOk);
        };
    });

    auto* inpaint = app.add_subcommand("inpaint", "Fill disocclusions across the frame matrix");
    add_config_option(inpaint, ctx);
    inpaint->add_option("--matrix", matrix_dir, "Frame-matrix directory")->required();
    inpaint->add_option("--out", out, "Output frame-matrix directory")->required();
    inpaint->add_option("--oracle-targets", targets_dir, "Clean frame matrix for the oracle denoiser");
    add_inpaint_options(inpaint, ctx);
    bind_option(inpaint, ctx, "--max-frames", [](PipelineConfig& c) -> auto& { return c.max_frames; },
         "Longest accepted sequence");
    inpaint->callback([&] {
        action = [&] {
            const PipelineConfig cfg = ctx.resolve();
            RunLog log(ctx.command);
            log.hash_input(matrix_dir);
            FrameMatrix fm = load_frame_matrix(matrix_dir);
            check_frame_limit(fm.n_frames(), cfg);
            if (!cfg.prompt.empty()) fm.prompt = cfg.prompt;
            std::optional<FrameMatrix> targets;
            if (!targets_dir.empty()) {
                log.hash_input(targets_dir);
                targets = load_frame_matrix(targets_dir);
            }
            const auto codec = make_codec(cfg.codec);
            const NoiseSchedule schedule = schedule_for(cfg);
            const auto endpoint = make_denoiser(cfg, schedule, *codec, targets ? &*targets : nullptr);
            const InpaintOptions opts{cfg.seed, cfg.deterministic, cfg.reinject, cfg.threads};
            const InpaintResult result =
                log.time("inpaint", [&] { return inpaint_frame_matrix(fm, *codec, *endpoint, schedule, opts); });
            save_frame_matrix(result.matrix, out);
            log.write(cfg, out);
            return int(kOk);
        };
    });

    auto* assemble = app.add_subcommand("assemble", "Write left/right/side-by-side/anaglyph sequences");
    add_config_option(assemble, ctx);
    assemble->add_option("--matrix", matrix_dir, "Inpainted frame-matrix directory")->required();
    assemble->add_option("--out", out, "Output directory")->required();
    assemble->add_option("--bit-depth", bit_depth, "PNG bit depth")->check(CLI::IsMember({8, 16}))->capture_default_str();
    assemble->callback([&] {
        action = [&] {
            const PipelineConfig cfg = ctx.resolve();
            RunLog log(ctx.command);
            log.hash_input(matrix_dir);
            const FrameMatrix fm = load_frame_matrix(matrix_dir);
            const StereoExtraction stereo = extract_stereo(fm);
            if (stereo.uninpainted) {
                log.warn("right view still has black disoccluded pixels");
                std::fprintf(stderr, "stereodiff: warning: right view still has black disoccluded pixels\n");
            }
            log.time("assemble", [&] { write_stereo_outputs(stereo.pair, out, bit_depth); });
            log.write(cfg, out);
            return int(kOk);
        };
    });

    auto* preview = app.add_subcommand("preview", "Tile frame-matrix cells into one image");
    add_config_option(preview, ctx);
    preview->add_option("--matrix", matrix_dir, "Frame-matrix directory")->required();
    preview->add_option("--out", out, "Output PNG")->required();
    preview->add_option("--frames", frames, "Frame indices (default: all)")->delimiter(',');
    preview->add_option("--views", views, "View indices (default: all)")->delimiter(',');
    preview->callback([&] {
        action = [&] {
            const PipelineConfig cfg = ctx.resolve();
            RunLog log(ctx.command);
            log.hash_input(matrix_dir);
            const FrameMatrix fm = load_frame_matrix(matrix_dir);
            const FrameBuffer grid = render_preview_grid(fm, frames, views);
            const fs::path dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
            fs::create_directories(dir);
            write_png(out, grid);
            log.write(cfg, dir, out.filename().string() + ".run_manifest.json");
            return int(kOk);
        };
    });

    auto* run = app.add_subcommand("run", "Depth preparation through stereo assembly in one go");
    add_config_option(run, ctx);
    add_layout_options(run, layout, depth_format);
    run->add_option("--rgb", rgb_dir, "Frame directory")->required();
    run->add_option("--depth", depth_dir, "Raw depth directory")->required();
    run->add_option("--flow", flow_dir, "Flow directory; omit to skip temporal smoothing");
    run->add_option("--oracle-targets", targets_dir, "Clean frame matrix for the oracle denoiser");
    run->add_option("--out", out, "Output directory")->required();
    add_depth_options(run, ctx);
    add_warp_options(run, ctx);
    add_matrix_options(run, ctx);
    add_inpaint_options(run, ctx);
    run->callback([&] {
        action = [&] {
            const PipelineConfig cfg = ctx.resolve();
            RunLog log(ctx.command);
            layout.depth_format = depth_format_of(depth_format);
            run_pipeline({rgb_dir, depth_dir, flow_dir, targets_dir, layout}, cfg, out, log);
            for (const auto& w : log.warnings()) std::fprintf(stderr, "stereodiff: warning: %s\n", w.c_str());
            return int(kOk);
        };
    });

    auto* serve = app.add_subcommand("serve-echo", "Serve a zero-noise model over stdin/stdout");
    serve->group("");
    serve->callback([&] {
        action = [&] {
            ZeroDenoiser model;
            protocol::FdTransport io(0, 1, false);
            protocol::serve(io, model);
            return int(kOk);
        };
    });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    return action ? action() : int(kInvariant);
}

}  // namespace

int run(const std::vector<std::string>& args)
{
    CLI::App app{"Stereoscopic video from monocular video via depth warping and diffusion inpainting", "stereodiff"};
    try {
        return dispatch(app, args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInvariant;
    } catch (const Error& e) {
        return report("error", e.what(), exit_code(e.kind()));
    } catch (const fs::filesystem_error& e) {
        return report("error", std::string("FileAccess: ") + e.what(), kIo);
    } catch (const std::exception& e) {
        return report("error", e.what(), kInvariant);
    }
}

int run(int argc, char** argv)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace stereodiff::cli
