#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "world4d/geometry.hpp"

namespace world4d {

// Trajectory of one seed pixel. valid is prefix-monotone: once a track breaks
// it never resumes, and positions are defined exactly where valid.
struct Worldline {
    std::array<int, 2> seed_pixel{0, 0};
    std::vector<Eigen::Vector2d> positions_2d;
    std::vector<Eigen::Vector3d> positions_3d_pred;
    std::vector<Eigen::Vector3d> positions_3d_gt;
    std::vector<std::uint8_t> valid;
};

struct WorldlineSet {
    std::vector<Worldline> lines;
    int horizon = 0;  // frame count T
};

struct WorldlineMetrics {
    double l2_error = 0.0;
    double mean_drift = 0.0;
    std::optional<double> final_drift;  // absent when no track survives to T-1
    double fail_rate = 0.0;
    double traj_length_frames = 0.0;
    double traj_length_pct = 0.0;
    std::vector<std::optional<double>> drift_curve;  // Drift(t)
};

/// n pixels drawn uniformly without replacement from the true region (all of
/// them if fewer are available). Deterministic given seed.
std::vector<std::array<int, 2>> sample_seeds(const Mask& mask, std::size_t n,
                                             std::uint64_t seed);

// Advances each seed by bilinearly sampled flow, one field per frame pair.
// Validity turns false permanently when the position leaves the raster or the
// flow sample footprint is invalid.
WorldlineSet track_2d(const std::vector<std::array<int, 2>>& seeds,
                      std::span<const FlowField> flows);

enum class LiftTarget { pred, gt };

// Unprojects each tracked position at bilinearly sampled depth into the
// chosen 3D slot. Validity additionally requires a depth-valid footprint and
// stays prefix-monotone.
WorldlineSet lift_3d(const WorldlineSet& tracks, std::span<const DepthMap> depths,
                     const CameraIntrinsics& K, LiftTarget target);

// L2 error, drift curve and its mean/final summaries, fail rate (deviation
// above fail_tau at any valid step, or track broken before the horizon end),
// and mean valid trajectory length in frames and percent of horizon.
WorldlineMetrics worldline_metrics(const WorldlineSet& wls, double fail_tau);

}  // namespace world4d
