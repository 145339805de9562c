#pragma once

#include <array>

#include "world4d/camera.hpp"
#include "world4d/geometry.hpp"
#include "world4d/sim.hpp"
#include "world4d/warp.hpp"

namespace world4d {

enum class CameraMode { fixed_multiview, trajectory };

/// Per-frame poses for one or more views sharing intrinsics. fixed_multiview
/// keeps every view's pose constant over time.
struct CameraRig {
    CameraMode mode = CameraMode::fixed_multiview;
    CameraIntrinsics intrinsics;
    std::vector<std::vector<CameraPose>> poses;  // [view][frame]

    int view_count() const { return static_cast<int>(poses.size()); }
    int frame_count() const { return poses.empty() ? 0 : static_cast<int>(poses[0].size()); }
    const CameraPose& pose(int view, int frame) const { return poses[view][frame]; }
};

CameraIntrinsics default_intrinsics(int width, int height, double fov_deg = 60.0);

/// Static cameras on a circle around target, all views constant over time.
CameraRig make_fixed_rig(const CameraIntrinsics& K, int frames, int views,
                         const Eigen::Vector3d& target, double distance, double height);

/// Single static straight-down view; covers the ground patch under the camera.
CameraRig make_topdown_rig(const CameraIntrinsics& K, int frames,
                           const Eigen::Vector3d& center, double height);

/// Orbit trajectory: eye circles target at angular_rate rad/s.
CameraRig make_orbit_rig(const CameraIntrinsics& K, int frames, double fps,
                         const Eigen::Vector3d& target, double radius, double height,
                         double angular_rate);

/// Dolly trajectory: eye translates at constant velocity, aimed at target.
CameraRig make_dolly_rig(const CameraIntrinsics& K, int frames, double fps,
                         const Eigen::Vector3d& start_eye, const Eigen::Vector3d& target,
                         const Eigen::Vector3d& velocity);

struct RenderedFrame {
    RgbFrame rgb;
    DepthMap depth;
    Raster<double> object_id;  // front-most object per pixel; 0 = ground/background
};

/// Analytic per-pixel ray cast: spheres, axis-aligned boxes, ground plane.
/// Depth is the camera-space z of the nearest hit; sky pixels are invalid.
RenderedFrame render_frame(const SceneTrace& trace, int frame, const CameraRig& rig,
                           int view);

struct RenderedFlow {
    FlowField flow;
    SceneFlowField scene_flow;
    OcclusionMask occlusion;
};

/// Exact motion ground truth for the pair frame -> frame+1 (see
/// render_flow_between). frame must be <= T-2.
RenderedFlow render_flow(const SceneTrace& trace, int frame, const CameraRig& rig, int view);

// Motion between two arbitrary frames of the same view. Each hit surface
// point is advanced with its object, re-projected at t_dst, and depth-tested
// there (tolerance 1e-4 m) for the occlusion flag.
RenderedFlow render_flow_between(const SceneTrace& trace, int t_src, int t_dst,
                                 const CameraRig& rig, int view);

enum class SurfaceSampleMode { full_surface, camera_visible };

// Deterministic uniform surface samples per object per frame transformed into
// camera space and tagged with the frame index. moving_only drops points whose
// camera-space displacement into the adjacent frame is <= delta.
// camera_visible additionally drops points that fail a z-buffer test against
// the rendered depth of their frame.
PointSet4D gt_points4d(const SceneTrace& trace, const CameraRig& rig, int view,
                       std::size_t samples_per_object, bool moving_only, double delta,
                       SurfaceSampleMode mode = SurfaceSampleMode::full_surface,
                       double alpha = 0.03);

/// Exact camera-space trajectories of the surface points seen at the given
/// seed pixels in frame 0. seeded is false where the seed ray hit nothing.
struct AnalyticWorldlines {
    std::vector<std::vector<Eigen::Vector3d>> positions;  // [seed][frame]
    std::vector<std::uint8_t> seeded;
};

AnalyticWorldlines analytic_worldlines(const SceneTrace& trace, const CameraRig& rig,
                                       int view,
                                       const std::vector<std::array<int, 2>>& seeds);

}  // namespace world4d
