#pragma once

#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "world4d/camera.hpp"
#include "world4d/geometry.hpp"
#include "world4d/sim.hpp"

namespace world4d {

// Scalar raster container ("D4DF"): magic bytes, u32 LE version=1, u32 width,
// u32 height, then height*width float32 LE row-major. NaN encodes invalid.
Raster<double> read_d4df(const std::filesystem::path& path);
void write_d4df(const std::filesystem::path& path, const Raster<double>& raster);

/// Depth through the D4DF container; non-finite and non-positive payload
/// entries are masked out, never clamped. Invalid pixels are written as NaN.
DepthMap read_depth(const std::filesystem::path& path);
void write_depth(const std::filesystem::path& path, const DepthMap& depth);

// Middlebury .flo: float32 magic 202021.25, i32 width, i32 height, then
// interleaved (du, dv) float32 row-major. Component magnitude > 1e9 encodes
// invalid; invalid pixels are written with the 1e10 sentinel.
FlowField read_flo(const std::filesystem::path& path);
void write_flo(const std::filesystem::path& path, const FlowField& flow);

/// 8-bit RGB PNG; values map linearly to [0, 1].
RgbFrame read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const RgbFrame& frame);

// ASCII PLY with float properties x, y, z, tau and a "comment alpha <value>"
// header line. Values are written with enough digits to round-trip float32.
PointSet4D read_ply4d(const std::filesystem::path& path);
void write_ply4d(const std::filesystem::path& path, const PointSet4D& set);

/// Modalities a sequence can carry, keyed by canonical name. Frame-indexed
/// patterns use printf-style %06d.
struct SequenceManifest {
    int schema_version = 1;
    int frame_count = 0;
    double fps = 0.0;
    int width = 0, height = 0;
    CameraIntrinsics intrinsics;
    std::vector<CameraPose> extrinsics;           // one per frame
    std::map<std::string, std::string> modalities;  // name -> pattern or file
    nlohmann::json provenance;  // generator details or {"generator": "external"}

    bool has(const std::string& modality) const { return modalities.count(modality) > 0; }
    /// Absolute path of one frame file of a modality.
    std::filesystem::path frame_path(const std::filesystem::path& base_dir,
                                     const std::string& modality, int frame) const;
    /// Number of files a modality is expected to have.
    int modality_count(const std::string& modality) const;
};

SequenceManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const SequenceManifest& manifest);

/// Checks that every referenced file exists and has a parseable header of the
/// right dimensions. Throws FormatError naming the first offending path.
void validate_manifest(const SequenceManifest& manifest,
                       const std::filesystem::path& base_dir);

// JSON round-trip helpers shared by manifests, reports, and scene specs.
nlohmann::json scene_spec_to_json(const SceneSpec& spec);
SceneSpec scene_spec_from_json(const nlohmann::json& j);
nlohmann::json pose_to_json(const CameraPose& pose);
CameraPose pose_from_json(const nlohmann::json& j);
nlohmann::json intrinsics_to_json(const CameraIntrinsics& K);
CameraIntrinsics intrinsics_from_json(const nlohmann::json& j);

}  // namespace world4d
