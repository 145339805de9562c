#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "world4d/frame_metrics.hpp"
#include "world4d/io.hpp"

namespace world4d {

/// Lazily loads a sequence's modalities from its manifest.
class Sequence {
public:
    explicit Sequence(const std::filesystem::path& manifest_path);

    const SequenceManifest& manifest() const { return manifest_; }
    const std::filesystem::path& dir() const { return dir_; }
    bool has(const std::string& modality) const { return manifest_.has(modality); }

    const std::vector<DepthMap>& depths();
    const std::vector<FlowField>& flows();
    const std::vector<FlowField>& flows_bwd();
    const std::vector<RgbFrame>& rgbs();
    const std::vector<Mask>& occlusions();
    const std::vector<Raster<double>>& object_ids();
    const PointSet4D& points4d();

private:
    SequenceManifest manifest_;
    std::filesystem::path dir_;
    std::optional<std::vector<DepthMap>> depths_;
    std::optional<std::vector<FlowField>> flows_, flows_bwd_;
    std::optional<std::vector<RgbFrame>> rgbs_;
    std::optional<std::vector<Mask>> occlusions_;
    std::optional<std::vector<Raster<double>>> object_ids_;
    std::optional<PointSet4D> points4d_;
};

struct EvalOptions {
    double alpha = 0.03;           // chamfer temporal weight, meters per frame
    double delta_flow = 0.5;       // moving-mask threshold, px
    double delta_scene = 0.01;     // moving-mask threshold for scene flow, m
    double fail_tau = 0.1;         // worldline failure threshold, m
    double charbonnier_eps = 1e-3;
    std::optional<DepthAlignment> depth_align;  // unset reports both modes
    double delta_base = 1.25;
    double diff_threshold = 0.05;
    double smoothing_radius = 1.5;
    std::size_t worldline_seeds = 2048;
    std::string worldline_mask = "auto";      // objects | depth | auto
    std::uint64_t seed = 42;
    std::size_t chamfer_budget = 100000;
    std::string chamfer_gt_source = "depth";  // depth | points
    double fb_tol_px = 1.0;
    int workers = 1;
};

/// Valid suite names, in canonical report order. "all" expands to all of them.
const std::vector<std::string>& suite_names();

// Runs the requested suites over a pred/gt manifest pair and returns the full
// report (config echo included per suite). Throws InvalidInputError for
// incompatible sequences or missing required modalities.
nlohmann::json run_eval(const std::vector<std::string>& suites,
                        const std::filesystem::path& pred_manifest,
                        const std::filesystem::path& gt_manifest, const EvalOptions& opts);

}  // namespace world4d
