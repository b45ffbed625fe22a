#include "stereodiff/depth_prep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stereodiff/error.hpp"

namespace stereodiff {

namespace {

void check_same_dims(const DepthSequence& seq)
{
    for (const auto& f : seq.frames) {
        if (f.width() != seq.frames.front().width() || f.height() != seq.frames.front().height())
            throw Error(ErrorCode::DimensionMismatch, "depth frames differ in size");
    }
}

template <class Getter>
float bilinear(int w, int h, float x, float y, Getter get) noexcept
{
    const int x0 = std::clamp(int(std::floor(x)), 0, w - 1);
    const int y0 = std::clamp(int(std::floor(y)), 0, h - 1);
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const float fx = x - float(x0);
    const float fy = y - float(y0);
    const float top = get(x0, y0) * (1.0f - fx) + get(x1, y0) * fx;
    const float bottom = get(x0, y1) * (1.0f - fx) + get(x1, y1) * fx;
    return top * (1.0f - fy) + bottom * fy;
}

bool in_bounds(int w, int h, float x, float y) noexcept
{
    return x >= 0.0f && y >= 0.0f && x <= float(w - 1) && y <= float(h - 1);
}

// One hop along `along`, verified against `back`. Returns false when the chain breaks.
bool hop(const FlowField& along, const FlowField& back, float& x, float& y, float tolerance) noexcept
{
    const int w = along.width();
    const int h = along.height();
    const float u = bilinear(w, h, x, y, [&](int i, int j) { return along.u(i, j); });
    const float v = bilinear(w, h, x, y, [&](int i, int j) { return along.v(i, j); });
    const float nx = x + u;
    const float ny = y + v;
    if (!in_bounds(w, h, nx, ny)) return false;
    const float bu = bilinear(w, h, nx, ny, [&](int i, int j) { return back.u(i, j); });
    const float bv = bilinear(w, h, nx, ny, [&](int i, int j) { return back.v(i, j); });
    if (std::hypot(u + bu, v + bv) >= tolerance) return false;
    x = nx;
    y = ny;
    return true;
}

}  // namespace

float sample_bilinear(const DepthMap& map, float x, float y) noexcept
{
    return bilinear(map.width(), map.height(), x, y, [&](int i, int j) { return map.at(i, j); });
}

NormalizeResult normalize_depth(const DepthSequence& seq, float lo, float hi)
{
    if (seq.normalized) throw Error(ErrorCode::InvalidArgument, "depth sequence is already normalized");
    if (!(hi > lo && lo > 0.0f)) throw Error(ErrorCode::InvalidArgument, "normalization needs hi > lo > 0");
    if (seq.frames.empty()) throw Error(ErrorCode::InvalidArgument, "empty depth sequence");
    check_same_dims(seq);

    double mn = std::numeric_limits<double>::infinity();
    double mx = -mn;
    for (const auto& f : seq.frames) {
        for (float d : f.data()) {
            mn = std::min(mn, double(d));
            mx = std::max(mx, double(d));
        }
    }

    NormalizeResult result;
    result.sequence.normalized = true;
    result.degenerate_range = (mx - mn) < 1e-12;
    const double span = mx - mn;
    for (const auto& f : seq.frames) {
        DepthMap out(f.width(), f.height());
        for (std::size_t i = 0; i < f.data().size(); ++i) {
            out.data()[i] = result.degenerate_range
                                ? lo
                                : float(double(lo) + double(hi - lo) * (double(f.data()[i]) - mn) / span);
        }
        result.sequence.frames.push_back(std::move(out));
    }
    return result;
}

DepthSequence reciprocate_depth(const DepthSequence& seq)
{
    DepthSequence out{.frames = {}, .normalized = false};
    for (const auto& f : seq.frames) {
        DepthMap r(f.width(), f.height());
        for (std::size_t i = 0; i < f.data().size(); ++i) {
            if (!(f.data()[i] > 0.0f)) throw Error(ErrorCode::NonPositiveDepth, "cannot invert non-positive depth");
            r.data()[i] = 1.0f / f.data()[i];
        }
        out.frames.push_back(std::move(r));
    }
    return out;
}

DepthSequence smooth_depth(const DepthSequence& seq, const std::vector<FlowField>& flows_fwd,
                           const std::vector<FlowField>& flows_bwd, const SmoothOptions& options)
{
    if (options.window < 1 || options.window % 2 == 0)
        throw Error(ErrorCode::InvalidArgument, "smoothing window must be odd and positive");
    if (!(options.sigma > 0.0f)) throw Error(ErrorCode::InvalidArgument, "smoothing sigma must be positive");
    check_same_dims(seq);
    if (seq.frames.empty() || options.window == 1) return seq;

    const std::size_t n = seq.frames.size();
    const int w = seq.frames.front().width();
    const int h = seq.frames.front().height();
    if (flows_fwd.size() + 1 != n || flows_bwd.size() + 1 != n)
        throw Error(ErrorCode::FlowDimensionMismatch,
                    "expected " + std::to_string(n - 1) + " forward and backward flows");
    for (const auto* flows : {&flows_fwd, &flows_bwd}) {
        for (const auto& f : *flows) {
            if (f.width() != w || f.height() != h)
                throw Error(ErrorCode::FlowDimensionMismatch, "flow field size differs from depth size");
        }
    }

    const int radius = options.window / 2;
    std::vector<double> weight(std::size_t(radius) + 1);
    for (int k = 0; k <= radius; ++k)
        weight[k] = std::exp(-double(k) * k / (2.0 * double(options.sigma) * options.sigma));

    DepthSequence out{.frames = {}, .normalized = seq.normalized};
    out.frames.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        DepthMap result(w, h);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = weight[0] * seq.frames[j].at(x, y);
                double norm = weight[0];

                // Forward in time.
                float px = float(x), py = float(y);
                for (int k = 1; k <= radius && j + k < n; ++k) {
                    if (!hop(flows_fwd[j + k - 1], flows_bwd[j + k - 1], px, py, options.consistency_px)) break;
                    acc += weight[k] * sample_bilinear(seq.frames[j + k], px, py);
                    norm += weight[k];
                }
                // Backward in time.
                px = float(x), py = float(y);
                for (int k = 1; k <= radius && std::size_t(k) <= j; ++k) {
                    if (!hop(flows_bwd[j - k], flows_fwd[j - k], px, py, options.consistency_px)) break;
                    acc += weight[k] * sample_bilinear(seq.frames[j - k], px, py);
                    norm += weight[k];
                }
                result.at(x, y) = float(acc / norm);
            }
        }
        out.frames.push_back(std::move(result));
    }
    return out;
}

}  // namespace stereodiff
