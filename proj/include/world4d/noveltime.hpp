#pragma once

#include <optional>
#include <vector>

#include "world4d/warp.hpp"

namespace world4d {

/// Observed/novel frame index split; disjoint, union covers 0..T-1.
struct TimelineSplit {
    std::vector<int> observed;
    std::vector<int> novel;

    /// Default protocol split: observed = evens, novel = odds.
    static TimelineSplit even_odd(int frame_count);
};

/// Flow-based geometry estimate at the novel frame: backward-warped depth
/// with coverage as the validity mask.
DepthMap interpolate_depth(const DepthMap& d_obs_prev, const FlowField& flow_pred);

/// Mean |D_tilde - D_gt| over the validity intersection; absent when empty.
std::optional<double> novel_depth_error(const DepthMap& d_tilde, const DepthMap& d_gt_novel);

/// Mean |warp(D_prev_pred, flow_gt) - D_tilde| over the joint valid region.
std::optional<double> novel_warp_error(const DepthMap& d_prev_pred, const FlowField& flow_gt,
                                       const DepthMap& d_tilde);

}  // namespace world4d
