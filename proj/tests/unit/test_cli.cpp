#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "cli.hpp"
#include "scene.hpp"
#include "stereodiff/config.hpp"
#include "stereodiff/frame_matrix.hpp"
#include "stereodiff/io.hpp"
#include "stereodiff/pipeline.hpp"

using namespace stereodiff;
namespace st = stereodiff::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("stereodiff_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(std::vector<std::string> args)
{
    return cli::run(args);
}

/// Exit status of the installed binary, with output silenced.
int shell(const std::string& args)
{
    const std::string cmd = std::string(STEREODIFF_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const std::vector<std::string> kFast = {"--total-steps", "100", "--steps", "10", "--resample-hi", "2",
                                        "--resample-lo", "2", "--codec", "identity"};

std::vector<std::string> with_fast(std::vector<std::string> args)
{
    args.insert(args.end(), kFast.begin(), kFast.end());
    return args;
}

}  // namespace

TEST(Cli, ExitCodes)
{
    EXPECT_EQ(shell("--help"), 0);
    EXPECT_EQ(shell(""), 1);
    EXPECT_EQ(shell("warp --rgb /nonexistent --depth /nonexistent --out /tmp/x"), 2);
    EXPECT_EQ(shell("no-such-command"), 1);
    EXPECT_EQ(run_cli({"warp", "--rgb", "/nonexistent"}), cli::kInvariant);
}

TEST(Cli, SmoothDepthWindowOneIsNormalizeOnly)
{
    const fs::path dir = scratch("smooth");
    const auto scene = st::make_scene(24, 12, 4);
    st::write_scene(scene, dir / "scene");
    ASSERT_EQ(run_cli({"smooth-depth", "--depth", (dir / "scene/depth").string(), "--flow",
                   (dir / "scene/flow").string(), "--out", (dir / "out").string(), "--window", "1"}),
              cli::kOk);
    const auto want = normalize_depth(scene.depth).sequence;
    for (int i = 0; i < 4; ++i)
        EXPECT_EQ(read_depth(dir / "out" / format_index("d%03d.pfm", i), DepthFormat::Pfm), want.frames[std::size_t(i)]);
    EXPECT_TRUE(fs::exists(dir / "out" / kRunManifestName));

    EXPECT_EQ(run_cli({"smooth-depth", "--depth", (dir / "scene/depth").string(), "--flow",
                   (dir / "scene/flow").string(), "--out", (dir / "bad").string(), "--window", "2"}),
              cli::kInvariant);
}

TEST(Cli, ZeroBaselineWarpIsIdentity)
{
    const fs::path dir = scratch("warp");
    const auto scene = st::make_scene(24, 12, 2);
    st::write_scene(scene, dir / "scene");
    ASSERT_EQ(run_cli({"warp", "--rgb", (dir / "scene/rgb").string(), "--depth", (dir / "scene/depth").string(),
                   "--normalize", "--baseline", "0", "--out", (dir / "out").string()}),
              cli::kOk);
    for (int i = 0; i < 2; ++i) {
        const auto frame = read_png(dir / "out" / format_index("f%03d.png", i));
        const auto orig = read_png(dir / "scene/rgb" / format_index("f%03d.png", i));
        EXPECT_EQ(frame, orig);
        EXPECT_TRUE(read_mask_png(dir / "out" / format_index("m%03d.png", i)).all_known());
    }
    // Depth outside the normalized range is rejected by the warper.
    DepthSequence far;
    for (const auto& d : scene.depth.frames) far.frames.emplace_back(d.width(), d.height(), 50.0f);
    for (int i = 0; i < 2; ++i) write_pfm(dir / "far" / format_index("d%03d.pfm", i), far.frames[std::size_t(i)]);
    EXPECT_EQ(run_cli({"warp", "--rgb", (dir / "scene/rgb").string(), "--depth", (dir / "far").string(), "--out",
                   (dir / "raw").string()}),
              cli::kInvariant);
}

TEST(Cli, ConfigPrecedence)
{
    const fs::path dir = scratch("config");
    const auto scene = st::make_scene(16, 8, 2);
    st::write_scene(scene, dir / "scene");
    PipelineConfig cfg;
    cfg.n_views = 3;
    cfg.baseline = 0.05;
    save_config(cfg, dir / "c.json");
    ASSERT_EQ(run_cli({"matrix", "--config", (dir / "c.json").string(), "--views", "4", "--rgb",
                   (dir / "scene/rgb").string(), "--depth", (dir / "scene/depth").string(), "--normalize", "--out",
                   (dir / "fm").string()}),
              cli::kOk);
    const auto fm = load_frame_matrix(dir / "fm");
    EXPECT_EQ(fm.n_views(), 4u);
    EXPECT_NEAR(fm.trajectory.views.back().baseline_offset, 0.05, 1e-12);
    const auto used = load_config(dir / "fm" / kRunManifestName);
    EXPECT_EQ(used.n_views, 4);
    EXPECT_EQ(used.baseline, 0.05);
}

TEST(Cli, StagedPipelineMatchesRun)
{
    const fs::path dir = scratch("staged");
    const auto scene = st::make_scene(24, 16, 3);
    st::write_scene(scene, dir / "scene");
    const std::string s = (dir / "scene").string();
    const std::vector<std::string> geometry = {"--views", "3", "--seed", "5"};

    auto smooth = std::vector<std::string>{"smooth-depth", "--depth", s + "/depth", "--flow", s + "/flow", "--out",
                                           (dir / "depth").string()};
    ASSERT_EQ(run_cli(smooth), cli::kOk);
    auto matrix = std::vector<std::string>{"matrix", "--rgb", s + "/rgb", "--depth", (dir / "depth").string(),
                                           "--out", (dir / "matrix").string(), "--views", "3"};
    ASSERT_EQ(run_cli(matrix), cli::kOk);
    ASSERT_EQ(run_cli(with_fast({"inpaint", "--matrix", (dir / "matrix").string(), "--out", (dir / "inpainted").string(),
                             "--denoiser", "zero", "--seed", "5"})),
              cli::kOk);
    ASSERT_EQ(run_cli({"assemble", "--matrix", (dir / "inpainted").string(), "--out", (dir / "stereo").string()}),
              cli::kOk);
    ASSERT_EQ(run_cli({"preview", "--matrix", (dir / "inpainted").string(), "--out", (dir / "p.png").string(), "--views",
                   "0,2"}),
              cli::kOk);
    EXPECT_TRUE(fs::exists(dir / "p.png.run_manifest.json"));
    EXPECT_EQ(read_png(dir / "p.png").width(), 2 + 2 * (24 + 2));

    auto run = with_fast({"run", "--rgb", s + "/rgb", "--depth", s + "/depth", "--flow", s + "/flow", "--out",
                          (dir / "run").string(), "--denoiser", "zero"});
    run.insert(run.end(), geometry.begin(), geometry.end());
    ASSERT_EQ(run_cli(run), cli::kOk);
    // The staged path reloads a 16-bit matrix, so 8-bit outputs may differ by one code.
    for (int i = 0; i < 3; ++i) {
        const std::string f = format_index("f%03d.png", i);
        for (const char* side : {"stereo/right/", "stereo/anaglyph/"}) {
            const auto a = read_png(dir / side / f);
            const auto b = read_png(dir / "run" / side / f);
            ASSERT_TRUE(a.same_shape(b));
            for (std::size_t k = 0; k < a.data().size(); ++k)
                ASSERT_NEAR(a.data()[k], b.data()[k], 1.0 / 255.0 + 1e-6) << side << f;
        }
    }
}

TEST(Cli, OracleNeedsTargets)
{
    const fs::path dir = scratch("oracle");
    const auto scene = st::make_scene(16, 8, 2);
    st::write_scene(scene, dir / "scene");
    const std::string s = (dir / "scene").string();
    EXPECT_EQ(run_cli(with_fast({"run", "--rgb", s + "/rgb", "--depth", s + "/depth", "--out", (dir / "o").string(),
                             "--views", "2"})),
              cli::kInvariant);
}

TEST(Cli, ExternalDenoiserOverExecTransport)
{
    const fs::path dir = scratch("external");
    const auto scene = st::make_scene(16, 8, 2);
    st::write_scene(scene, dir / "scene");
    const std::string s = (dir / "scene").string();
    const std::string address = std::string("exec:") + STEREODIFF_CLI_PATH + " serve-echo";
    auto base = with_fast({"run", "--rgb", s + "/rgb", "--depth", s + "/depth", "--views", "2", "--seed", "3",
                           "--denoiser", "external", "--denoiser-address", address});
    auto ext = base;
    ext.insert(ext.end(), {"--out", (dir / "ext").string()});
    ASSERT_EQ(run_cli(ext), cli::kOk);

    auto local = with_fast({"run", "--rgb", s + "/rgb", "--depth", s + "/depth", "--views", "2", "--seed", "3",
                            "--denoiser", "zero", "--out", (dir / "local").string()});
    ASSERT_EQ(run_cli(local), cli::kOk);
    for (int i = 0; i < 2; ++i) {
        const std::string f = format_index("f%03d.png", i);
        EXPECT_EQ(read_file_bytes(dir / "ext/stereo/right" / f), read_file_bytes(dir / "local/stereo/right" / f));
    }

    auto broken = with_fast({"run", "--rgb", s + "/rgb", "--depth", s + "/depth", "--views", "2", "--denoiser",
                             "external", "--denoiser-address", "exec:true", "--out", (dir / "broken").string()});
    EXPECT_EQ(run_cli(broken), cli::kProtocol);
}

TEST(Cli, EnvironmentSuppliesDenoiserAddress)
{
    const fs::path dir = scratch("env");
    const auto scene = st::make_scene(16, 8, 2);
    st::write_scene(scene, dir / "scene");
    const std::string s = (dir / "scene").string();
    ::setenv(kDenoiserEnv, "tcp://127.0.0.1:1", 1);
    EXPECT_EQ(run_cli(with_fast({"run", "--rgb", s + "/rgb", "--depth", s + "/depth", "--views", "2", "--denoiser",
                             "external", "--out", (dir / "o").string()})),
              cli::kProtocol);
    ::unsetenv(kDenoiserEnv);
}
