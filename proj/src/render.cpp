#include "world4d/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace world4d {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFlowInvalid = 1e10;  // .flo invalid sentinel
constexpr double kOcclusionTol = 1e-4;  // meters

struct Hit {
    double s = kInf;  // ray parameter == camera-space depth (dir has z_cam = 1)
    int id = 0;       // 0 = ground, 1..N = objects
    Eigen::Vector3d normal = Eigen::Vector3d::UnitY();
    bool ok = false;
};

double intersect_sphere(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                        const Eigen::Vector3d& center, double radius) {
    const Eigen::Vector3d oc = origin - center;
    const double a = dir.squaredNorm();
    const double b = 2.0 * oc.dot(dir);
    const double c = oc.squaredNorm() - radius * radius;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0 || a == 0.0) return kInf;
    const double sq = std::sqrt(disc);
    const double s0 = (-b - sq) / (2.0 * a);
    if (s0 > 1e-9) return s0;
    const double s1 = (-b + sq) / (2.0 * a);
    if (s1 > 1e-9) return s1;
    return kInf;
}

struct BoxHit {
    double s = kInf;
    int axis = 0;
    double sign = 1.0;
};

BoxHit intersect_box(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                     const Eigen::Vector3d& center, double half) {
    double s_near = -kInf, s_far = kInf;
    int near_axis = 0;
    double near_sign = 1.0;
    for (int ax = 0; ax < 3; ++ax) {
        const double lo = center[ax] - half;
        const double hi = center[ax] + half;
        if (dir[ax] == 0.0) {
            if (origin[ax] < lo || origin[ax] > hi) return {};
            continue;
        }
        double t1 = (lo - origin[ax]) / dir[ax];
        double t2 = (hi - origin[ax]) / dir[ax];
        double sign = -1.0;  // entering through the low face
        if (t1 > t2) {
            std::swap(t1, t2);
            sign = 1.0;
        }
        if (t1 > s_near) {
            s_near = t1;
            near_axis = ax;
            near_sign = sign;
        }
        s_far = std::min(s_far, t2);
        if (s_near > s_far) return {};
    }
    if (s_near > 1e-9) return {s_near, near_axis, near_sign};
    return {};
}

struct SceneAtTime {
    const SceneTrace* trace = nullptr;
    int frame = 0;

    const SceneSpec& spec() const { return trace->spec; }
    const std::vector<ObjectState>& states() const { return trace->frames[frame]; }
};

Hit trace_ray(const SceneAtTime& scene, const Eigen::Vector3d& origin,
              const Eigen::Vector3d& dir) {
    Hit hit;
    const auto& objects = scene.spec().objects;
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const Eigen::Vector3d& center = scene.states()[i].position;
        if (objects[i].shape == Shape::sphere) {
            const double s = intersect_sphere(origin, dir, center, objects[i].size);
            if (s < hit.s) {
                hit.s = s;
                hit.id = static_cast<int>(i) + 1;
                hit.normal = (origin + s * dir - center) / objects[i].size;
                hit.ok = true;
            }
        } else {
            const BoxHit bh = intersect_box(origin, dir, center, 0.5 * objects[i].size);
            if (bh.s < hit.s) {
                hit.s = bh.s;
                hit.id = static_cast<int>(i) + 1;
                hit.normal = Eigen::Vector3d::Zero();
                hit.normal[bh.axis] = bh.sign;
                hit.ok = true;
            }
        }
    }
    if (dir.y() != 0.0) {
        const double s = (scene.spec().ground_plane - origin.y()) / dir.y();
        if (s > 1e-9 && s < hit.s) {
            hit.s = s;
            hit.id = 0;
            hit.normal = Eigen::Vector3d::UnitY();
            hit.ok = true;
        }
    }
    return hit;
}

Eigen::Vector3d ground_albedo(const Eigen::Vector3d& p) {
    const long cell = static_cast<long>(std::floor(p.x() / 0.1)) +
                      static_cast<long>(std::floor(p.z() / 0.1));
    const double g = (cell & 1) ? 0.35 : 0.55;
    return {g, g, g};
}

Eigen::Vector3d shade(const SceneSpec& spec, int id, const Eigen::Vector3d& point,
                      const Eigen::Vector3d& normal) {
    const Eigen::Vector3d albedo =
        id == 0 ? ground_albedo(point) : spec.objects[id - 1].albedo;
    const double diffuse = std::max(0.0, normal.dot(-spec.light_dir));
    const double intensity = 0.25 + 0.75 * diffuse;
    return albedo * intensity;
}

/// Camera-space ray direction with z = 1, so the ray parameter is the depth.
Eigen::Vector3d pixel_dir_cam(double u, double v, const CameraIntrinsics& K) {
    return {(u - K.cx) / K.fx, (v - K.cy) / K.fy, 1.0};
}

}  // namespace

CameraIntrinsics default_intrinsics(int width, int height, double fov_deg) {
    CameraIntrinsics K;
    K.width = width;
    K.height = height;
    const double f = 0.5 * width / std::tan(0.5 * fov_deg * std::numbers::pi / 180.0);
    K.fx = K.fy = f;
    K.cx = 0.5 * (width - 1);
    K.cy = 0.5 * (height - 1);
    return K;
}

CameraRig make_fixed_rig(const CameraIntrinsics& K, int frames, int views,
                         const Eigen::Vector3d& target, double distance, double height) {
    if (views <= 0 || frames <= 0) throw InvalidInputError("make_fixed_rig: bad counts");
    CameraRig rig;
    rig.mode = CameraMode::fixed_multiview;
    rig.intrinsics = K;
    for (int v = 0; v < views; ++v) {
        const double angle = 2.0 * std::numbers::pi * v / views;
        const Eigen::Vector3d eye = target + Eigen::Vector3d(distance * std::cos(angle),
                                                             height, distance * std::sin(angle));
        const CameraPose pose = look_at(eye, target, Eigen::Vector3d::UnitY());
        rig.poses.emplace_back(frames, pose);
    }
    return rig;
}

CameraRig make_topdown_rig(const CameraIntrinsics& K, int frames,
                           const Eigen::Vector3d& center, double height) {
    CameraRig rig;
    rig.mode = CameraMode::fixed_multiview;
    rig.intrinsics = K;
    const Eigen::Vector3d eye = center + Eigen::Vector3d(0.0, height, 0.0);
    const CameraPose pose = look_at(eye, center, Eigen::Vector3d::UnitZ());
    rig.poses.emplace_back(frames, pose);
    return rig;
}

CameraRig make_orbit_rig(const CameraIntrinsics& K, int frames, double fps,
                         const Eigen::Vector3d& target, double radius, double height,
                         double angular_rate) {
    if (frames <= 0 || !(fps > 0.0)) throw InvalidInputError("make_orbit_rig: bad counts");
    CameraRig rig;
    rig.mode = CameraMode::trajectory;
    rig.intrinsics = K;
    rig.poses.emplace_back();
    for (int f = 0; f < frames; ++f) {
        const double angle = angular_rate * f / fps;
        const Eigen::Vector3d eye =
            target + Eigen::Vector3d(radius * std::cos(angle), height,
                                     radius * std::sin(angle));
        rig.poses[0].push_back(look_at(eye, target, Eigen::Vector3d::UnitY()));
    }
    return rig;
}

CameraRig make_dolly_rig(const CameraIntrinsics& K, int frames, double fps,
                         const Eigen::Vector3d& start_eye, const Eigen::Vector3d& target,
                         const Eigen::Vector3d& velocity) {
    if (frames <= 0 || !(fps > 0.0)) throw InvalidInputError("make_dolly_rig: bad counts");
    CameraRig rig;
    rig.mode = CameraMode::trajectory;
    rig.intrinsics = K;
    rig.poses.emplace_back();
    for (int f = 0; f < frames; ++f) {
        const Eigen::Vector3d eye = start_eye + velocity * (f / fps);
        rig.poses[0].push_back(look_at(eye, target, Eigen::Vector3d::UnitY()));
    }
    return rig;
}

RenderedFrame render_frame(const SceneTrace& trace, int frame, const CameraRig& rig,
                           int view) {
    if (frame < 0 || frame >= trace.frame_count())
        throw InvalidInputError("render_frame: frame out of range");
    const CameraIntrinsics& K = rig.intrinsics;
    const CameraPose& pose = rig.pose(view, frame);
    const Eigen::Matrix3d rot_t = pose.rotation.transpose();
    const Eigen::Vector3d origin = pose.camera_center();
    const SceneAtTime scene{&trace, frame};

    Raster<double> depth(K.width, K.height, std::numeric_limits<double>::quiet_NaN());
    Mask valid(K.width, K.height, 0);
    Raster<double> r(K.width, K.height, 0.0), g(K.width, K.height, 0.0),
        b(K.width, K.height, 0.0);
    Raster<double> ids(K.width, K.height, 0.0);

    for (int v = 0; v < K.height; ++v) {
        for (int u = 0; u < K.width; ++u) {
            const Eigen::Vector3d dir_w = rot_t * pixel_dir_cam(u, v, K);
            const Hit hit = trace_ray(scene, origin, dir_w);
            if (!hit.ok) continue;
            const Eigen::Vector3d point = origin + hit.s * dir_w;
            const Eigen::Vector3d rgb = shade(trace.spec, hit.id, point, hit.normal);
            depth(u, v) = hit.s;
            valid(u, v) = 1;
            r(u, v) = std::clamp(rgb.x(), 0.0, 1.0);
            g(u, v) = std::clamp(rgb.y(), 0.0, 1.0);
            b(u, v) = std::clamp(rgb.z(), 0.0, 1.0);
            ids(u, v) = hit.id;
        }
    }

    RenderedFrame out;
    out.rgb = RgbFrame(std::move(r), std::move(g), std::move(b));
    out.depth = DepthMap(std::move(depth), std::move(valid));
    out.object_id = std::move(ids);
    return out;
}

RenderedFlow render_flow_between(const SceneTrace& trace, int t_src, int t_dst,
                                 const CameraRig& rig, int view) {
    if (t_src < 0 || t_src >= trace.frame_count() || t_dst < 0 ||
        t_dst >= trace.frame_count())
        throw InvalidInputError("render_flow_between: frame out of range");
    const CameraIntrinsics& K = rig.intrinsics;
    const CameraPose& pose_src = rig.pose(view, t_src);
    const CameraPose& pose_dst = rig.pose(view, t_dst);
    const Eigen::Matrix3d rot_src_t = pose_src.rotation.transpose();
    const Eigen::Vector3d origin_src = pose_src.camera_center();
    const Eigen::Matrix3d rot_dst_t = pose_dst.rotation.transpose();
    const Eigen::Vector3d origin_dst = pose_dst.camera_center();
    const SceneAtTime scene_src{&trace, t_src};
    const SceneAtTime scene_dst{&trace, t_dst};

    Raster<double> du(K.width, K.height, kFlowInvalid), dv(K.width, K.height, kFlowInvalid);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    Raster<double> sx(K.width, K.height, nan), sy(K.width, K.height, nan),
        sz(K.width, K.height, nan);
    Mask valid(K.width, K.height, 0);
    Mask occluded(K.width, K.height, 0);

    for (int v = 0; v < K.height; ++v) {
        for (int u = 0; u < K.width; ++u) {
            const Eigen::Vector3d dir_cam = pixel_dir_cam(u, v, K);
            const Eigen::Vector3d dir_w = rot_src_t * dir_cam;
            const Hit hit = trace_ray(scene_src, origin_src, dir_w);
            if (!hit.ok) continue;
            const Eigen::Vector3d point_src = origin_src + hit.s * dir_w;
            Eigen::Vector3d point_dst = point_src;
            if (hit.id > 0)
                point_dst += trace.frames[t_dst][hit.id - 1].position -
                             trace.frames[t_src][hit.id - 1].position;
            // Both endpoints go through identical transform+projection
            // arithmetic, so a static scene under a static camera yields
            // exact zeros.
            const Eigen::Vector3d cam_src =
                pose_src.rotation * point_src + pose_src.translation;
            const Eigen::Vector3d cam_dst =
                pose_dst.rotation * point_dst + pose_dst.translation;
            if (!(cam_dst.z() > 1e-9) || !(cam_src.z() > 0.0)) {
                occluded(u, v) = 1;
                continue;
            }
            const Projection proj = project(cam_dst, K);
            const Projection proj_src = project(cam_src, K);
            du(u, v) = proj.u - proj_src.u;
            dv(u, v) = proj.v - proj_src.v;
            sx(u, v) = cam_dst.x() - cam_src.x();
            sy(u, v) = cam_dst.y() - cam_src.y();
            sz(u, v) = cam_dst.z() - cam_src.z();
            valid(u, v) = 1;

            bool occ = proj.u < 0.0 || proj.u > K.width - 1.0 || proj.v < 0.0 ||
                       proj.v > K.height - 1.0;
            if (!occ) {
                const Eigen::Vector3d probe_dir =
                    rot_dst_t * pixel_dir_cam(proj.u, proj.v, K);
                const Hit probe = trace_ray(scene_dst, origin_dst, probe_dir);
                occ = probe.ok && probe.s < cam_dst.z() - kOcclusionTol;
            }
            occluded(u, v) = occ;
        }
    }

    RenderedFlow out;
    out.flow = FlowField(std::move(du), std::move(dv), valid);
    out.scene_flow = SceneFlowField(std::move(sx), std::move(sy), std::move(sz), valid);
    out.occlusion.occluded = std::move(occluded);
    return out;
}

RenderedFlow render_flow(const SceneTrace& trace, int frame, const CameraRig& rig,
                         int view) {
    if (frame + 1 >= trace.frame_count())
        throw InvalidInputError("render_flow: frame must be <= T-2");
    return render_flow_between(trace, frame, frame + 1, rig, view);
}

namespace {

// Deterministic surface samples in the object frame: Fibonacci spiral for
// spheres, Halton-placed points on area-partitioned cube faces.
std::vector<Eigen::Vector3d> surface_samples(const ObjectSpec& obj, std::size_t count) {
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(count);
    if (obj.shape == Shape::sphere) {
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (std::size_t i = 0; i < count; ++i) {
            const double y = 1.0 - 2.0 * (i + 0.5) / static_cast<double>(count);
            const double radius = std::sqrt(std::max(0.0, 1.0 - y * y));
            const double theta = golden * static_cast<double>(i);
            pts.emplace_back(obj.size * radius * std::cos(theta), obj.size * y,
                             obj.size * radius * std::sin(theta));
        }
        return pts;
    }
    const auto halton = [](std::size_t index, std::size_t base) {
        double f = 1.0, r = 0.0;
        for (std::size_t i = index + 1; i > 0; i /= base) {
            f /= static_cast<double>(base);
            r += f * static_cast<double>(i % base);
        }
        return r;
    };
    const double half = 0.5 * obj.size;
    for (std::size_t i = 0; i < count; ++i) {
        const int face = static_cast<int>(i % 6);
        const double a = (2.0 * halton(i / 6, 2) - 1.0) * half;
        const double b = (2.0 * halton(i / 6, 3) - 1.0) * half;
        switch (face) {
            case 0: pts.emplace_back(half, a, b); break;
            case 1: pts.emplace_back(-half, a, b); break;
            case 2: pts.emplace_back(a, half, b); break;
            case 3: pts.emplace_back(a, -half, b); break;
            case 4: pts.emplace_back(a, b, half); break;
            default: pts.emplace_back(a, b, -half); break;
        }
    }
    return pts;
}

}  // namespace

PointSet4D gt_points4d(const SceneTrace& trace, const CameraRig& rig, int view,
                       std::size_t samples_per_object, bool moving_only, double delta,
                       SurfaceSampleMode mode, double alpha) {
    if (samples_per_object == 0)
        throw InvalidInputError("gt_points4d: samples_per_object must be > 0");
    const int frames = trace.frame_count();
    const CameraIntrinsics& K = rig.intrinsics;

    std::vector<std::vector<Eigen::Vector3d>> offsets;
    offsets.reserve(trace.spec.objects.size());
    for (const auto& obj : trace.spec.objects)
        offsets.push_back(surface_samples(obj, samples_per_object));

    PointSet4D set;
    set.alpha = alpha;
    for (int t = 0; t < frames; ++t) {
        const CameraPose& pose = rig.pose(view, t);
        // Displacement is thresholded against the adjacent frame: forward when
        // one exists, else backward (final frame).
        const int t_adj = t + 1 < frames ? t + 1 : std::max(0, t - 1);
        const CameraPose& pose_adj = rig.pose(view, t_adj);

        std::optional<DepthMap> zbuffer;
        if (mode == SurfaceSampleMode::camera_visible)
            zbuffer = render_frame(trace, t, rig, view).depth;

        for (std::size_t o = 0; o < trace.spec.objects.size(); ++o) {
            const Eigen::Vector3d center = trace.frames[t][o].position;
            const Eigen::Vector3d center_adj = trace.frames[t_adj][o].position;
            for (const auto& off : offsets[o]) {
                const Eigen::Vector3d pw = center + off;
                const Eigen::Vector3d pc = pose.rotation * pw + pose.translation;
                if (moving_only) {
                    const Eigen::Vector3d pc_adj =
                        pose_adj.rotation * (center_adj + off) + pose_adj.translation;
                    if ((pc_adj - pc).norm() <= delta) continue;
                }
                if (mode == SurfaceSampleMode::camera_visible) {
                    if (!(pc.z() > 0.0)) continue;
                    const Projection proj = project(pc, K);
                    if (proj.u < 0.0 || proj.u > K.width - 1.0 || proj.v < 0.0 ||
                        proj.v > K.height - 1.0)
                        continue;
                    const double tol =
                        2.0 * pc.z() * std::max(1.0 / K.fx, 1.0 / K.fy) + 1e-6;
                    const int u0 = static_cast<int>(std::floor(proj.u));
                    const int v0 = static_cast<int>(std::floor(proj.v));
                    double front = kInf;
                    for (int dv2 = 0; dv2 <= 1; ++dv2)
                        for (int du2 = 0; du2 <= 1; ++du2) {
                            const int uu = std::min(u0 + du2, K.width - 1);
                            const int vv = std::min(v0 + dv2, K.height - 1);
                            if (zbuffer->valid(uu, vv))
                                front = std::min(front, zbuffer->values(uu, vv));
                        }
                    if (front == kInf || pc.z() > front + tol) continue;
                }
                set.points.push_back({pc.x(), pc.y(), pc.z(), static_cast<double>(t)});
            }
        }
    }
    return set;
}

AnalyticWorldlines analytic_worldlines(const SceneTrace& trace, const CameraRig& rig,
                                       int view,
                                       const std::vector<std::array<int, 2>>& seeds) {
    const int frames = trace.frame_count();
    const CameraIntrinsics& K = rig.intrinsics;
    const CameraPose& pose0 = rig.pose(view, 0);
    const Eigen::Matrix3d rot0_t = pose0.rotation.transpose();
    const Eigen::Vector3d origin0 = pose0.camera_center();
    const SceneAtTime scene0{&trace, 0};

    AnalyticWorldlines out;
    out.positions.resize(seeds.size());
    out.seeded.assign(seeds.size(), 0);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const Eigen::Vector3d dir_w =
            rot0_t * pixel_dir_cam(seeds[i][0], seeds[i][1], K);
        const Hit hit = trace_ray(scene0, origin0, dir_w);
        if (!hit.ok) continue;
        out.seeded[i] = 1;
        const Eigen::Vector3d point0 = origin0 + hit.s * dir_w;
        out.positions[i].reserve(frames);
        for (int t = 0; t < frames; ++t) {
            Eigen::Vector3d pw = point0;
            if (hit.id > 0)
                pw += trace.frames[t][hit.id - 1].position -
                      trace.frames[0][hit.id - 1].position;
            const CameraPose& pose = rig.pose(view, t);
            out.positions[i].push_back(pose.rotation * pw + pose.translation);
        }
    }
    return out;
}

}  // namespace world4d
