#include "world4d/noveltime.hpp"

#include <cmath>

namespace world4d {

TimelineSplit TimelineSplit::even_odd(int frame_count) {
    if (frame_count <= 0) throw InvalidInputError("TimelineSplit: frame_count must be > 0");
    TimelineSplit s;
    for (int t = 0; t < frame_count; ++t) (t % 2 == 0 ? s.observed : s.novel).push_back(t);
    return s;
}

DepthMap interpolate_depth(const DepthMap& d_obs_prev, const FlowField& flow_pred) {
    WarpResult warped = backward_warp(d_obs_prev, flow_pred);
    DepthMap out;
    out.values = std::move(warped.channels[0]);
    out.valid = std::move(warped.coverage);
    return out;
}

namespace {

std::optional<double> mean_abs_diff(const Raster<double>& a, const Mask& a_valid,
                                    const Raster<double>& b, const Mask& b_valid) {
    if (!a.same_shape(b)) throw InvalidInputError("novel-time error: shape mismatch");
    double sum = 0.0;
    std::size_t count = 0;
    for (int v = 0; v < a.height(); ++v)
        for (int u = 0; u < a.width(); ++u)
            if (a_valid(u, v) && b_valid(u, v)) {
                sum += std::abs(a(u, v) - b(u, v));
                ++count;
            }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

}  // namespace

std::optional<double> novel_depth_error(const DepthMap& d_tilde, const DepthMap& d_gt_novel) {
    return mean_abs_diff(d_tilde.values, d_tilde.valid, d_gt_novel.values, d_gt_novel.valid);
}

std::optional<double> novel_warp_error(const DepthMap& d_prev_pred, const FlowField& flow_gt,
                                       const DepthMap& d_tilde) {
    const DepthMap reference = interpolate_depth(d_prev_pred, flow_gt);
    return mean_abs_diff(reference.values, reference.valid, d_tilde.values, d_tilde.valid);
}

}  // namespace world4d
