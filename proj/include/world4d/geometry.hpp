#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "world4d/camera.hpp"
#include "world4d/raster.hpp"

namespace world4d {

/// Per-frame depth in meters. Valid entries are finite and > 0; everything
/// else is masked out, never clamped.
struct DepthMap {
    Raster<double> values;
    Mask valid;

    DepthMap() = default;
    DepthMap(Raster<double> values_in, Mask valid_in);

    /// Masks out non-finite and non-positive entries instead of throwing.
    static DepthMap from_values(Raster<double> values_in);

    int width() const { return values.width(); }
    int height() const { return values.height(); }
};

/// Pixel displacement from frame t to t+1. Invalid pixels keep the sentinel
/// value they carry on disk; the mask is authoritative.
struct FlowField {
    Raster<double> du, dv;
    Mask valid;

    FlowField() = default;
    FlowField(Raster<double> du_in, Raster<double> dv_in, Mask valid_in);

    int width() const { return du.width(); }
    int height() const { return du.height(); }
};

/// Per-pixel 3D displacement in camera space, meters.
struct SceneFlowField {
    Raster<double> dx, dy, dz;
    Mask valid;

    SceneFlowField() = default;
    SceneFlowField(Raster<double> dx_in, Raster<double> dy_in, Raster<double> dz_in,
                   Mask valid_in);

    int width() const { return dx.width(); }
    int height() const { return dx.height(); }
};

/// RGB frame with channels in [0, 1].
struct RgbFrame {
    Raster<double> r, g, b;

    RgbFrame() = default;
    RgbFrame(Raster<double> r_in, Raster<double> g_in, Raster<double> b_in);

    int width() const { return r.width(); }
    int height() const { return r.height(); }
};

/// One spatio-temporal sample: camera-space position plus discrete frame index.
struct Point4D {
    double x = 0.0, y = 0.0, z = 0.0;
    double tau = 0.0;
};

/// Weighted (x, y, z, tau) point collection. alpha converts one frame of
/// temporal offset into meters.
struct PointSet4D {
    std::vector<Point4D> points;
    double alpha = 0.03;
};

/// One Point4D per selected valid pixel, unprojected through K, tagged tau.
/// Pixels are visited row-major so output order is deterministic.
PointSet4D depth_to_points4d(const DepthMap& depth, const CameraIntrinsics& K, int tau,
                             const Mask* select = nullptr, double alpha = 0.03);

/// True exactly where the motion magnitude strictly exceeds delta and the
/// flow is valid.
Mask moving_mask(const FlowField& flow, double delta);
Mask moving_mask(const SceneFlowField& flow, double delta);

}  // namespace world4d
