#include "world4d/camera.hpp"

#include <cmath>

namespace world4d {

void CameraIntrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0))
        throw InvalidInputError("intrinsics: focal lengths must be positive");
    if (width <= 0 || height <= 0)
        throw InvalidInputError("intrinsics: raster size must be positive");
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
        throw InvalidInputError("intrinsics: principal point outside raster");
}

void CameraPose::validate() const {
    const Eigen::Matrix3d gram = rotation.transpose() * rotation;
    if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9)
        throw InvalidInputError("pose: rotation is not orthonormal");
    if (std::abs(rotation.determinant() - 1.0) > 1e-9)
        throw InvalidInputError("pose: rotation determinant is not +1");
}

CameraPose CameraPose::inverse() const {
    CameraPose inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(rotation.transpose() * translation);
    return inv;
}

Eigen::Vector3d unproject(double u, double v, double depth, const CameraIntrinsics& K) {
    if (!std::isfinite(depth) || depth <= 0.0)
        throw InvalidInputError("unproject: depth must be finite and > 0");
    if (u < -0.5 || u > K.width - 0.5 || v < -0.5 || v > K.height - 0.5)
        throw InvalidInputError("unproject: pixel outside raster bounds");
    return {(u - K.cx) / K.fx * depth, (v - K.cy) / K.fy * depth, depth};
}

Projection project(const Eigen::Vector3d& point_cam, const CameraIntrinsics& K) {
    if (!(point_cam.z() > 0.0))
        throw InvalidInputError("project: point is behind the camera (z <= 0)");
    return {K.fx * point_cam.x() / point_cam.z() + K.cx,
            K.fy * point_cam.y() / point_cam.z() + K.cy, point_cam.z()};
}

Eigen::Vector3d world_to_camera(const Eigen::Vector3d& point_world, const CameraPose& pose) {
    return pose.rotation * point_world + pose.translation;
}

std::vector<Eigen::Vector3d> world_to_camera(const std::vector<Eigen::Vector3d>& points_world,
                                             const CameraPose& pose) {
    std::vector<Eigen::Vector3d> out;
    out.reserve(points_world.size());
    for (const auto& p : points_world) out.push_back(world_to_camera(p, pose));
    return out;
}

Eigen::Vector3d camera_to_world(const Eigen::Vector3d& point_cam, const CameraPose& pose) {
    return pose.rotation.transpose() * (point_cam - pose.translation);
}

CameraPose look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                   const Eigen::Vector3d& up_hint) {
    const Eigen::Vector3d forward = (target - eye).normalized();
    Eigen::Vector3d right = forward.cross(up_hint);
    if (right.norm() < 1e-12)
        throw InvalidInputError("look_at: up_hint colinear with view direction");
    right.normalize();
    const Eigen::Vector3d down = forward.cross(right);
    CameraPose pose;
    pose.rotation.row(0) = right;
    pose.rotation.row(1) = down;
    pose.rotation.row(2) = forward;
    pose.translation = -(pose.rotation * eye);
    return pose;
}

}  // namespace world4d
