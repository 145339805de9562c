#include "world4d/synth.hpp"

#include <cstdio>

#include "world4d/io.hpp"
#include "world4d/parallel.hpp"
#include "world4d/version.hpp"

namespace world4d {

namespace fs = std::filesystem;

namespace {

std::string frame_name(const char* stem, int frame, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s/%06d.%s", stem, frame, ext);
    return buf;
}

Raster<double> from_mask(const Mask& m) {
    Raster<double> r(m.width(), m.height(), 0.0);
    for (std::size_t i = 0; i < r.data().size(); ++i) r.data()[i] = m.data()[i] ? 1.0 : 0.0;
    return r;
}

}  // namespace

CameraRig make_rig(const SceneSpec& spec, const SynthOptions& opts) {
    const CameraIntrinsics K = default_intrinsics(opts.width, opts.height, opts.fov_deg);
    const int frames = spec.frame_count();
    const Eigen::Vector3d target(0.0, spec.ground_plane + 0.25, 0.0);
    switch (opts.rig) {
        case RigKind::fixed:
            return make_fixed_rig(K, frames, opts.views, target, 2.2, 1.1);
        case RigKind::topdown:
            return make_topdown_rig(K, frames, Eigen::Vector3d(0.0, spec.ground_plane, 0.0),
                                    2.4);
        case RigKind::orbit:
            return make_orbit_rig(K, frames, spec.fps, target, 2.2, 1.1, 0.5);
        case RigKind::dolly:
            return make_dolly_rig(K, frames, spec.fps,
                                  target + Eigen::Vector3d(2.2, 0.85, 0.0), target,
                                  Eigen::Vector3d(-0.3, 0.0, 0.1));
    }
    throw InvalidInputError("make_rig: unknown rig kind");
}

std::vector<fs::path> synthesize_dataset(const SceneSpec& spec, const SynthOptions& opts,
                                         const fs::path& out_dir) {
    spec.validate();
    const SceneTrace trace = simulate(spec);
    const CameraRig rig = make_rig(spec, opts);
    const int frames = trace.frame_count();

    std::vector<fs::path> manifests;
    for (int view = 0; view < rig.view_count(); ++view) {
        char view_name[32];
        std::snprintf(view_name, sizeof view_name, "view_%03d", view);
        const fs::path view_dir = out_dir / view_name;
        for (const char* sub : {"rgb", "depth", "object_id", "flow", "occlusion",
                                "scene_flow_dx", "scene_flow_dy", "scene_flow_dz", "points"})
            fs::create_directories(view_dir / sub);
        if (opts.write_backward_flow) fs::create_directories(view_dir / "flow_bwd");

        parallel_for(
            static_cast<std::size_t>(frames), opts.workers,
            [&](std::size_t f) {
                const int t = static_cast<int>(f);
                const RenderedFrame rf = render_frame(trace, t, rig, view);
                write_png(view_dir / frame_name("rgb", t, "png"), rf.rgb);
                write_depth(view_dir / frame_name("depth", t, "d4df"), rf.depth);
                write_d4df(view_dir / frame_name("object_id", t, "d4df"), rf.object_id);
                if (t + 1 < frames) {
                    const RenderedFlow fl = render_flow(trace, t, rig, view);
                    write_flo(view_dir / frame_name("flow", t, "flo"), fl.flow);
                    write_d4df(view_dir / frame_name("occlusion", t, "d4df"),
                               from_mask(fl.occlusion.occluded));
                    const Raster<double>* chans[3] = {&fl.scene_flow.dx, &fl.scene_flow.dy,
                                                      &fl.scene_flow.dz};
                    const char* stems[3] = {"scene_flow_dx", "scene_flow_dy",
                                            "scene_flow_dz"};
                    for (int c = 0; c < 3; ++c)
                        write_d4df(view_dir / frame_name(stems[c], t, "d4df"), *chans[c]);
                    if (opts.write_backward_flow) {
                        const RenderedFlow bw =
                            render_flow_between(trace, t + 1, t, rig, view);
                        write_flo(view_dir / frame_name("flow_bwd", t, "flo"), bw.flow);
                    }
                }
            },
            1);

        const PointSet4D gt_points =
            gt_points4d(trace, rig, view, opts.points_per_object, /*moving_only=*/false,
                        /*delta=*/0.0, SurfaceSampleMode::full_surface);
        write_ply4d(view_dir / "points" / "gt.ply", gt_points);

        SequenceManifest m;
        m.frame_count = frames;
        m.fps = spec.fps;
        m.width = opts.width;
        m.height = opts.height;
        m.intrinsics = rig.intrinsics;
        for (int t = 0; t < frames; ++t) m.extrinsics.push_back(rig.pose(view, t));
        m.modalities = {{"rgb", "rgb/%06d.png"},
                        {"depth", "depth/%06d.d4df"},
                        {"object_id", "object_id/%06d.d4df"},
                        {"flow", "flow/%06d.flo"},
                        {"occlusion", "occlusion/%06d.d4df"},
                        {"scene_flow_dx", "scene_flow_dx/%06d.d4df"},
                        {"scene_flow_dy", "scene_flow_dy/%06d.d4df"},
                        {"scene_flow_dz", "scene_flow_dz/%06d.d4df"},
                        {"points4d", "points/gt.ply"}};
        if (opts.write_backward_flow) m.modalities["flow_bwd"] = "flow_bwd/%06d.flo";
        m.provenance = {{"generator", "world4d-synth"},
                        {"tool_version", kVersion},
                        {"scene_spec", scene_spec_to_json(spec)},
                        {"camera",
                         {{"rig", opts.rig == RigKind::fixed      ? "fixed"
                                  : opts.rig == RigKind::topdown  ? "topdown"
                                  : opts.rig == RigKind::orbit    ? "orbit"
                                                                  : "dolly"},
                          {"view", view},
                          {"fov_deg", opts.fov_deg}}},
                        {"points_per_object", opts.points_per_object}};
        const fs::path manifest_path = view_dir / "manifest.json";
        write_manifest(manifest_path, m);
        validate_manifest(m, view_dir);
        manifests.push_back(manifest_path);
    }
    return manifests;
}

}  // namespace world4d
