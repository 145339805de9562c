#pragma once

#include <filesystem>
#include <vector>

#include "world4d/render.hpp"
#include "world4d/sim.hpp"

namespace world4d {

enum class RigKind { fixed, topdown, orbit, dolly };

struct SynthOptions {
    RigKind rig = RigKind::fixed;
    int views = 1;  // fixed-rig view count; trajectory rigs have one view
    int width = 256, height = 256;
    double fov_deg = 60.0;
    std::size_t points_per_object = 4096;
    bool write_backward_flow = false;
    int workers = 1;
};

/// Camera rig the synth pipeline uses for a scene, deterministic given the
/// spec and options.
CameraRig make_rig(const SceneSpec& spec, const SynthOptions& opts);

// Writes one directory per view (view_000, ...) containing rgb/depth/
// object_id per frame, flow/occlusion/scene-flow per frame pair, a GT 4D
// point cloud, and a validated manifest. Returns the manifest paths.
std::vector<std::filesystem::path> synthesize_dataset(const SceneSpec& spec,
                                                      const SynthOptions& opts,
                                                      const std::filesystem::path& out_dir);

}  // namespace world4d
