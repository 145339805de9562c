#pragma once

#include <optional>
#include <span>
#include <vector>

#include "world4d/geometry.hpp"

namespace world4d {

/// Result of backward warping: one raster per source channel plus the
/// coverage mask (pixels whose whole bilinear footprint was in-bounds and
/// valid, and whose flow was valid).
struct WarpResult {
    std::vector<Raster<double>> channels;
    Mask coverage;
};

/// Pixels whose surface point is not visible in the target frame.
struct OcclusionMask {
    Mask occluded;
};

// warped(p) = bilinear(source, p + flow(p)). With zero flow this is the
// identity on the coverage region, bit-exact.
WarpResult backward_warp(std::span<const Raster<double>> source, const Mask* source_valid,
                         const FlowField& flow);
WarpResult backward_warp(const DepthMap& source, const FlowField& flow);
WarpResult backward_warp(const RgbFrame& source, const FlowField& flow);

struct WarpErrorRegion {
    std::optional<double> l1;           // mean |error|
    std::optional<double> charbonnier;  // mean sqrt(error^2 + eps^2)
    std::size_t pixel_count = 0;
};

struct WarpErrorStats {
    WarpErrorRegion all, occluded, non_occluded;
    double charbonnier_eps = 1e-3;
};

/// ||W(D_t, flow) - D_next|| over coverage ∧ D_next validity, split by the
/// occlusion mask. Empty regions report absent values, never zero.
WarpErrorStats depth_warp_error(const DepthMap& d_t, const DepthMap& d_next,
                                const FlowField& flow, const OcclusionMask& occ,
                                double charbonnier_eps = 1e-3);

/// Same as depth_warp_error with per-pixel error averaged over 3 channels.
WarpErrorStats rgb_warp_error(const RgbFrame& i_t, const RgbFrame& i_next,
                              const FlowField& flow_pred, const OcclusionMask& occ,
                              double charbonnier_eps = 1e-3);

// Forward-backward check: occluded iff |fwd(p) + bilinear(bwd, p + fwd(p))| >
// tol_px or the backward sample is out of coverage. Pixels where fwd itself is
// invalid are marked occluded (they cannot be verified).
OcclusionMask occlusion_from_fb(const FlowField& flow_fwd, const FlowField& flow_bwd,
                                double tol_px);

}  // namespace world4d
