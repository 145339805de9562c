#pragma once

#include <Eigen/Dense>
#include <vector>

#include "world4d/error.hpp"

namespace world4d {

/// Pinhole intrinsics; no distortion.
struct CameraIntrinsics {
    double fx = 0.0, fy = 0.0;
    double cx = 0.0, cy = 0.0;
    int width = 0, height = 0;

    void validate() const;
};

/// Rigid world-to-camera transform: X_cam = rotation * X_world + translation.
struct CameraPose {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    void validate() const;  // orthonormal within 1e-9, det +1
    CameraPose inverse() const;
    Eigen::Vector3d camera_center() const { return -rotation.transpose() * translation; }
};

struct Projection {
    double u = 0.0, v = 0.0;
    double depth = 0.0;
};

/// depth * K^-1 * (u, v, 1)^T. The z component equals depth exactly.
Eigen::Vector3d unproject(double u, double v, double depth, const CameraIntrinsics& K);

/// (fx*x/z + cx, fy*y/z + cy) with returned depth = z. Throws for z <= 0.
Projection project(const Eigen::Vector3d& point_cam, const CameraIntrinsics& K);

Eigen::Vector3d world_to_camera(const Eigen::Vector3d& point_world, const CameraPose& pose);
std::vector<Eigen::Vector3d> world_to_camera(const std::vector<Eigen::Vector3d>& points_world,
                                             const CameraPose& pose);
Eigen::Vector3d camera_to_world(const Eigen::Vector3d& point_cam, const CameraPose& pose);

// World-to-camera pose for a camera at eye looking at target. Image u grows
// along world "right" (up_hint x forward) and v grows downward. up_hint must
// not be colinear with the view direction.
CameraPose look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                   const Eigen::Vector3d& up_hint);

}  // namespace world4d
