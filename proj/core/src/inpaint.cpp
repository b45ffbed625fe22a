#include "stereodiff/inpaint.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include "stereodiff/error.hpp"
#include "stereodiff/rng.hpp"
#include "stereodiff/sampler.hpp"

namespace stereodiff {

namespace {

struct Cell {
    LatentTensor z;
    LatentTensor known;
    LatentTensor x0;
    LatentMask mask;
};

void check_length(const DenoiserEndpoint& endpoint, std::size_t n)
{
    const std::size_t limit = endpoint.max_sequence_length();
    if (limit != 0 && n > limit)
        throw Error(ErrorCode::SequenceTooLong,
                    "sequence of " + std::to_string(n) + " exceeds the endpoint limit of " + std::to_string(limit));
}

StreamId stream(NoisePurpose purpose, int t, int rep, SequenceRef ref)
{
    return {purpose, std::uint32_t(t), std::uint32_t(rep), std::uint32_t(ref.axis), std::uint32_t(ref.index)};
}

/// One repetition over one sequence: known sample, reverse step, mask combine, optional re-noise.
void run_repetition(std::vector<Cell*>& cells, const std::string& condition, const VisitedStep& step, int rep,
                    const NoiseSchedule& schedule, DenoiserEndpoint& endpoint, SequenceRef ref,
                    const InpaintOptions& options)
{
    std::vector<LatentTensor> z;
    z.reserve(cells.size());
    for (Cell* c : cells) z.push_back(c->z);

    NormalStream posterior(options.seed, stream(NoisePurpose::PosteriorNoise, step.t, rep, ref));
    DenoiseResult d = denoise_step(z, condition, step, schedule, endpoint, ref,
                                   options.deterministic ? nullptr : &posterior);

    NormalStream known_rng(options.seed, stream(NoisePurpose::KnownSample, step.t, rep, ref));
    NormalStream resample_rng(options.seed, stream(NoisePurpose::Resample, step.t, rep, ref));
    const double ab_prev = schedule.alpha_bar(step.t_prev);
    const bool renoise = rep + 1 < step.repetitions;
    const double beta = schedule.transition_beta(step.t_prev, step.t);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        Cell& c = *cells[i];
        LatentTensor known = sample_known(c.known, ab_prev, known_rng);
        LatentTensor next = combine_masked(known, d.z[i], c.mask);
        c.z = renoise ? resample_noise(next, beta, resample_rng) : std::move(next);
        c.x0 = std::move(d.x0[i]);
    }
}

/// Runs `job(i)` for i in [0, n), across threads when allowed. Rethrows the first failure.
void for_each_sequence(std::size_t n, int threads, const std::function<void(std::size_t)>& job)
{
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                job(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::jthread> pool;
    const std::size_t count = std::min<std::size_t>(std::size_t(threads), n);
    for (std::size_t k = 0; k < count; ++k) pool.emplace_back(worker);
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

void init_noise(Cell& cell, std::uint64_t seed, std::size_t row, std::size_t col)
{
    cell.z = LatentTensor(cell.known.channels(), cell.known.height(), cell.known.width());
    NormalStream rng(seed, StreamId{NoisePurpose::Init, 0, 0, std::uint32_t(row), std::uint32_t(col)});
    rng.fill(cell.z.data());
}

bool any_unknown(const std::vector<DisocclusionMask>& masks)
{
    return std::any_of(masks.begin(), masks.end(), [](const DisocclusionMask& m) { return !m.all_known(); });
}

}  // namespace

std::vector<FrameBuffer> inpaint_sequence(const std::vector<FrameBuffer>& warped,
                                          const std::vector<DisocclusionMask>& masks, const std::string& condition,
                                          const LatentCodec& codec, DenoiserEndpoint& endpoint,
                                          const NoiseSchedule& schedule, const InpaintOptions& options)
{
    if (warped.size() != masks.size() || warped.empty())
        throw Error(ErrorCode::ShapeMismatch, "frame and mask counts differ");
    check_length(endpoint, warped.size());
    const int w = warped.front().width();
    const int h = warped.front().height();

    std::vector<LatentTensor> known = codec.encode(warped);
    std::vector<Cell> cells(warped.size());
    std::vector<Cell*> seq;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        cells[i].known = std::move(known[i]);
        cells[i].mask = downsample_mask(masks[i], codec.down());
        init_noise(cells[i], options.seed, i, 0);
        seq.push_back(&cells[i]);
    }

    const SequenceRef ref{SequenceAxis::Single, 0};
    const bool reinject = options.reinject && any_unknown(masks);
    for (const VisitedStep& step : schedule.plan()) {
        if (reinject) {
            std::vector<LatentTensor> z;
            for (const Cell& c : cells) z.push_back(c.z);
            auto updated = boundary_reinject(z, warped, masks, codec, endpoint, condition, step.t, schedule, ref);
            for (std::size_t i = 0; i < cells.size(); ++i) cells[i].known = std::move(updated[i]);
        }
        for (int rep = 0; rep < step.repetitions; ++rep)
            run_repetition(seq, condition, step, rep, schedule, endpoint, ref, options);
    }

    std::vector<LatentTensor> z;
    for (const Cell& c : cells) z.push_back(c.z);
    return codec.decode(z, w, h);
}

InpaintResult inpaint_frame_matrix(const FrameMatrix& matrix, const LatentCodec& codec, DenoiserEndpoint& endpoint,
                                   const NoiseSchedule& schedule, const InpaintOptions& options)
{
    const std::size_t rows = matrix.n_frames();
    const std::size_t cols = matrix.n_views();
    if (rows == 0 || cols == 0) throw Error(ErrorCode::ShapeMismatch, "frame matrix is empty");
    check_length(endpoint, rows);
    check_length(endpoint, cols);
    const int w = matrix.width();
    const int h = matrix.height();

    Grid<Cell> cells(rows, cols);
    std::vector<std::vector<FrameBuffer>> col_frames(cols);
    std::vector<std::vector<DisocclusionMask>> col_masks(cols);
    for (std::size_t v = 0; v < cols; ++v) {
        col_frames[v] = matrix.frames.col(v).to_vector();
        col_masks[v] = matrix.masks.col(v).to_vector();
        std::vector<LatentTensor> known = codec.encode(col_frames[v]);
        for (std::size_t s = 0; s < rows; ++s) {
            Cell& c = cells(s, v);
            c.known = std::move(known[s]);
            c.mask = downsample_mask(col_masks[v][s], codec.down());
            init_noise(c, options.seed, s, v);
        }
    }

    const int threads = endpoint.capability() == Capability::Concurrent ? options.threads : 1;
    const std::string& cond = matrix.prompt;
    std::vector<bool> column_has_holes(cols);
    for (std::size_t v = 0; v < cols; ++v) column_has_holes[v] = options.reinject && any_unknown(col_masks[v]);

    auto column_cells = [&](std::size_t v) {
        std::vector<Cell*> seq;
        for (auto& c : cells.col(v)) seq.push_back(&c);
        return seq;
    };
    auto row_cells = [&](std::size_t s) {
        std::vector<Cell*> seq;
        for (auto& c : cells.row(s)) seq.push_back(&c);
        return seq;
    };
    auto reinject_column = [&](std::size_t v, int t) {
        if (!column_has_holes[v]) return;
        std::vector<LatentTensor> z;
        for (const auto& c : cells.col(v)) z.push_back(c.z);
        auto updated = boundary_reinject(z, col_frames[v], col_masks[v], codec, endpoint, cond, t, schedule,
                                         SequenceRef{SequenceAxis::Column, v});
        for (std::size_t s = 0; s < rows; ++s) cells(s, v).known = std::move(updated[s]);
    };

    std::vector<bool> finalized(cols, false);
    for (const VisitedStep& step : schedule.plan()) {
        const bool all_views = step.scope == ResampleScope::AllViews;
        if (all_views)
            for_each_sequence(cols, threads, [&](std::size_t v) { reinject_column(v, step.t); });
        else
            reinject_column(cols - 1, step.t);

        for (int rep = 0; rep < step.repetitions; ++rep) {
            // Repetitions are counted from 1: odd ones run over time sequences.
            const bool columns = !all_views || rep % 2 == 0;
            if (columns) {
                const std::size_t first = all_views ? 0 : cols - 1;
                for_each_sequence(cols - first, threads, [&](std::size_t k) {
                    const std::size_t v = first + k;
                    auto seq = column_cells(v);
                    run_repetition(seq, cond, step, rep, schedule, endpoint, SequenceRef{SequenceAxis::Column, v},
                                   options);
                });
            } else {
                for_each_sequence(rows, threads, [&](std::size_t s) {
                    auto seq = row_cells(s);
                    run_repetition(seq, cond, step, rep, schedule, endpoint, SequenceRef{SequenceAxis::Row, s},
                                   options);
                });
            }
        }
        if (step.t_prev == 0) {
            for (std::size_t v = 0; v < cols; ++v) finalized[v] = all_views || v + 1 == cols;
        }
    }

    InpaintResult result;
    result.matrix.frames = Grid<FrameBuffer>(rows, cols);
    result.matrix.masks = matrix.masks;
    result.matrix.trajectory = matrix.trajectory;
    result.matrix.prompt = matrix.prompt;
    result.finalized_columns = finalized;
    for (std::size_t v = 0; v < cols; ++v) {
        std::vector<LatentTensor> z;
        for (const auto& c : cells.col(v)) {
            if (finalized[v]) {
                z.push_back(c.z);
            } else {
                // Not stepped to t = 0: known cells take the clean latent, the rest the last estimate.
                z.push_back(c.x0.size() ? combine_masked(c.known, c.x0, c.mask) : c.known);
            }
        }
        std::vector<FrameBuffer> decoded = codec.decode(z, w, h);
        for (std::size_t s = 0; s < rows; ++s) result.matrix.frames(s, v) = std::move(decoded[s]);
    }
    return result;
}

}  // namespace stereodiff
