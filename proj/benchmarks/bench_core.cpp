// Microbenchmarks for the hot paths: warping, mask cleanup, denoising steps and resampling.

#include <benchmark/benchmark.h>

#include <random>

#include "stereodiff/codec.hpp"
#include "stereodiff/denoiser.hpp"
#include "stereodiff/inpaint.hpp"
#include "stereodiff/sampler.hpp"
#include "stereodiff/schedule.hpp"
#include "stereodiff/warp.hpp"

using namespace stereodiff;

namespace {

FrameBuffer noise_image(int w, int h, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    FrameBuffer img(w, h, 3);
    for (float& v : img.data()) v = u(rng);
    return img;
}

DepthMap layered_depth(int w, int h)
{
    DepthMap d(w, h, 8.0f);
    for (int y = h / 4; y < 3 * h / 4; ++y)
        for (int x = w / 4; x < w / 2; ++x) d.at(x, y) = 2.0f;
    return d;
}

DisocclusionMask noise_mask(int w, int h, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    DisocclusionMask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m.at(x, y) = (rng() % 10) < 7;
    return m;
}

void BM_WarpFrame(benchmark::State& state)
{
    const int w = int(state.range(0)), h = w / 2;
    const auto rgb = noise_image(w, h, 1);
    const auto depth = layered_depth(w, h);
    const CameraOffset cam{0.08, 0.0, double(w)};
    for (auto _ : state) benchmark::DoNotOptimize(warp_frame(rgb, depth, cam));
    state.SetItemsProcessed(state.iterations() * w * h);
}
BENCHMARK(BM_WarpFrame)->Arg(256)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_ConvolveMask(benchmark::State& state)
{
    const int w = int(state.range(0)), h = w / 2;
    const auto mask = noise_mask(w, h, 2);
    const auto kernel = gaussian_kernel(kCrackSigma);
    for (auto _ : state) benchmark::DoNotOptimize(convolve_mask(mask, kernel, BorderMode::Renormalize));
    state.SetItemsProcessed(state.iterations() * w * h);
}
BENCHMARK(BM_ConvolveMask)->Arg(256)->Arg(1024)->Unit(benchmark::kMicrosecond);

void BM_CleanupPasses(benchmark::State& state)
{
    const int w = int(state.range(0)), h = w / 2;
    MultiPlaneStack stack;
    for (int i = 0; i < 4; ++i)
        stack.planes.push_back(Plane{noise_image(w, h, 10 + i), noise_mask(w, h, 20 + i), DepthMap(w, h, 5.0f), 1.0f, 10.0f});
    for (auto _ : state) benchmark::DoNotOptimize(fill_cracks(remove_isolated(stack)));
    state.SetItemsProcessed(state.iterations() * w * h * 4);
}
BENCHMARK(BM_CleanupPasses)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_DenoiseStep(benchmark::State& state)
{
    const auto frames = std::size_t(state.range(0));
    const NoiseSchedule schedule = make_schedule();
    std::vector<LatentTensor> z(frames, LatentTensor(4, 64, 64, 0.5f));
    ZeroDenoiser zero;
    const VisitedStep& step = schedule.plan()[10];
    for (auto _ : state) {
        NormalStream rng(1, StreamId{NoisePurpose::PosteriorNoise, std::uint32_t(step.t)});
        benchmark::DoNotOptimize(denoise_step(z, "", step, schedule, zero, {}, &rng));
    }
    state.SetItemsProcessed(state.iterations() * std::int64_t(frames) * 4 * 64 * 64);
}
BENCHMARK(BM_DenoiseStep)->Arg(4)->Arg(16)->Unit(benchmark::kMicrosecond);

void BM_ResampleNoise(benchmark::State& state)
{
    const LatentTensor z(4, 64, 64, 0.25f);
    for (auto _ : state) {
        NormalStream rng(3, StreamId{NoisePurpose::Resample});
        benchmark::DoNotOptimize(resample_noise(z, 0.01, rng));
    }
    state.SetItemsProcessed(state.iterations() * std::int64_t(z.size()));
}
BENCHMARK(BM_ResampleNoise)->Unit(benchmark::kMicrosecond);

void BM_InpaintMatrix(benchmark::State& state)
{
    const int w = 64, h = 32;
    const std::size_t frames = 8, views = std::size_t(state.range(0));
    FrameMatrix m;
    m.frames = Grid<FrameBuffer>(frames, views, noise_image(w, h, 4));
    m.masks = Grid<DisocclusionMask>(frames, views, noise_mask(w, h, 5));
    ScheduleConfig sc;
    sc.denoise_steps = 10;
    sc.resample_hi = 2;
    sc.resample_lo = 2;
    const NoiseSchedule schedule = make_schedule(sc);
    const AvgPoolCodec codec(8);
    ZeroDenoiser zero;
    InpaintOptions opts;
    opts.threads = int(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(inpaint_frame_matrix(m, codec, zero, schedule, opts));
}
BENCHMARK(BM_InpaintMatrix)->Args({4, 1})->Args({8, 1})->Args({8, 4})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
