#pragma once

#include <optional>
#include <span>
#include <vector>

#include "world4d/geometry.hpp"

namespace world4d {

enum class DepthAlignment { metric, median_scaled };

struct DepthEvalConfig {
    DepthAlignment alignment = DepthAlignment::metric;
    double delta_base = 1.25;
};

struct DepthMetrics {
    double absrel = 0.0;
    double rmse = 0.0;
    double delta1 = 0.0, delta2 = 0.0, delta3 = 0.0;  // percent
};

// AbsRel, RMSE and threshold accuracies over the joint valid region. In
// median_scaled mode pred is rescaled by median(gt)/median(pred) first.
DepthMetrics depth_metrics(const DepthMap& pred, const DepthMap& gt,
                           const DepthEvalConfig& cfg);

struct FlowMetrics {
    double epe = 0.0;
    double fl_all_pct = 0.0;   // EPE > 3 px and EPE > 5% of |gt|
    double out_1px_pct = 0.0;  // EPE > 1 px
};

FlowMetrics flow_metrics(const FlowField& pred, const FlowField& gt);

struct PixelMetrics {
    double mse = 0.0;
    double psnr = 0.0;  // +inf for an exact match
    double ssim = 0.0;
};

/// MSE/PSNR over all pixels and frames; SSIM with an 11x11 Gaussian window
/// (sigma 1.5, k1=0.01, k2=0.03) on BT.601 luma, averaged per frame.
PixelMetrics pixel_metrics(std::span<const RgbFrame> pred, std::span<const RgbFrame> gt);

struct MotionMaskConfig {
    double diff_threshold = 0.05;  // luma units in (0, 1)
    double smoothing_radius = 1.5;  // Gaussian sigma in px; 0 disables
};

struct PhysicsIqScores {
    std::optional<double> spatial_iou;
    std::optional<double> spatiotemporal_iou;
    std::optional<double> weighted_spatial_iou;
    double mse = 0.0;
};

// Physics-IQ style motion-mask agreement. The per-frame motion mask is a
// smoothed |luma(I_t) - luma(I_0)| threshold against each sequence's own
// first frame. IoUs are absent when neither sequence shows any motion.
PhysicsIqScores physicsiq_scores(std::span<const RgbFrame> pred,
                                 std::span<const RgbFrame> gt,
                                 const MotionMaskConfig& cfg);

/// BT.601 luma of an RGB frame.
Raster<double> luma_bt601(const RgbFrame& frame);

/// Separable Gaussian blur with replicated borders; sigma 0 is the identity.
Raster<double> gaussian_blur(const Raster<double>& img, double sigma);

}  // namespace world4d
