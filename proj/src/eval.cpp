#include "world4d/eval.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>

#include "world4d/chamfer.hpp"
#include "world4d/noveltime.hpp"
#include "world4d/version.hpp"
#include "world4d/warp.hpp"
#include "world4d/worldline.hpp"

namespace world4d {

namespace fs = std::filesystem;
using nlohmann::json;

Sequence::Sequence(const fs::path& manifest_path)
    : manifest_(read_manifest(manifest_path)), dir_(manifest_path.parent_path()) {}

namespace {

[[noreturn]] void missing_modality(const char* suite, const std::string& name,
                                   const char* which) {
    throw InvalidInputError(std::string(suite) + " suite requires the \"" + name +
                            "\" modality in the " + which + " dataset");
}

Mask to_mask(const Raster<double>& r) {
    Mask m(r.width(), r.height(), 0);
    for (std::size_t i = 0; i < m.data().size(); ++i) m.data()[i] = r.data()[i] != 0.0;
    return m;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

/// PSNR serialization: exact matches carry an explicit "inf" sentinel string.
json psnr_json(double psnr) {
    return std::isinf(psnr) ? json("inf") : json(psnr);
}

struct MeanAcc {
    double sum = 0.0;
    std::size_t n = 0;
    void add(double v) {
        sum += v;
        ++n;
    }
    void add(const std::optional<double>& v) {
        if (v) add(*v);
    }
    json value() const { return n ? json(sum / static_cast<double>(n)) : json(nullptr); }
};

}  // namespace

const std::vector<DepthMap>& Sequence::depths() {
    if (!depths_) {
        std::vector<DepthMap> v;
        for (int t = 0; t < manifest_.frame_count; ++t)
            v.push_back(read_depth(manifest_.frame_path(dir_, "depth", t)));
        depths_ = std::move(v);
    }
    return *depths_;
}

const std::vector<FlowField>& Sequence::flows() {
    if (!flows_) {
        std::vector<FlowField> v;
        for (int t = 0; t + 1 < manifest_.frame_count; ++t)
            v.push_back(read_flo(manifest_.frame_path(dir_, "flow", t)));
        flows_ = std::move(v);
    }
    return *flows_;
}

const std::vector<FlowField>& Sequence::flows_bwd() {
    if (!flows_bwd_) {
        std::vector<FlowField> v;
        for (int t = 0; t + 1 < manifest_.frame_count; ++t)
            v.push_back(read_flo(manifest_.frame_path(dir_, "flow_bwd", t)));
        flows_bwd_ = std::move(v);
    }
    return *flows_bwd_;
}

const std::vector<RgbFrame>& Sequence::rgbs() {
    if (!rgbs_) {
        std::vector<RgbFrame> v;
        for (int t = 0; t < manifest_.frame_count; ++t)
            v.push_back(read_png(manifest_.frame_path(dir_, "rgb", t)));
        rgbs_ = std::move(v);
    }
    return *rgbs_;
}

const std::vector<Mask>& Sequence::occlusions() {
    if (!occlusions_) {
        std::vector<Mask> v;
        for (int t = 0; t + 1 < manifest_.frame_count; ++t)
            v.push_back(to_mask(read_d4df(manifest_.frame_path(dir_, "occlusion", t))));
        occlusions_ = std::move(v);
    }
    return *occlusions_;
}

const std::vector<Raster<double>>& Sequence::object_ids() {
    if (!object_ids_) {
        std::vector<Raster<double>> v;
        for (int t = 0; t < manifest_.frame_count; ++t)
            v.push_back(read_d4df(manifest_.frame_path(dir_, "object_id", t)));
        object_ids_ = std::move(v);
    }
    return *object_ids_;
}

const PointSet4D& Sequence::points4d() {
    if (!points4d_) points4d_ = read_ply4d(manifest_.frame_path(dir_, "points4d", 0));
    return *points4d_;
}

namespace {

json depth_suite(Sequence& pred, Sequence& gt, const EvalOptions& o) {
    if (!pred.has("depth")) missing_modality("depth", "depth", "pred");
    if (!gt.has("depth")) missing_modality("depth", "depth", "gt");
    std::vector<std::pair<std::string, DepthAlignment>> modes;
    if (!o.depth_align || *o.depth_align == DepthAlignment::metric)
        modes.emplace_back("metric", DepthAlignment::metric);
    if (!o.depth_align || *o.depth_align == DepthAlignment::median_scaled)
        modes.emplace_back("median_scaled", DepthAlignment::median_scaled);

    json out;
    out["config"] = {{"delta_base", o.delta_base},
                     {"alignment", o.depth_align ? modes[0].first : "both"}};
    const int frames = pred.manifest().frame_count;
    for (const auto& [name, mode] : modes) {
        MeanAcc absrel, rmse, d1, d2, d3;
        std::size_t skipped = 0;
        for (int t = 0; t < frames; ++t) {
            try {
                const DepthMetrics m =
                    depth_metrics(pred.depths()[t], gt.depths()[t], {mode, o.delta_base});
                absrel.add(m.absrel);
                rmse.add(m.rmse);
                d1.add(m.delta1);
                d2.add(m.delta2);
                d3.add(m.delta3);
            } catch (const EmptySetError&) {
                ++skipped;
            }
        }
        out[name] = {{"absrel", absrel.value()}, {"rmse", rmse.value()},
                     {"delta1", d1.value()},     {"delta2", d2.value()},
                     {"delta3", d3.value()},     {"frames", absrel.n},
                     {"skipped_frames", skipped}};
    }
    return out;
}

json flow_suite(Sequence& pred, Sequence& gt, const EvalOptions&) {
    if (!pred.has("flow")) missing_modality("flow", "flow", "pred");
    if (!gt.has("flow")) missing_modality("flow", "flow", "gt");
    MeanAcc epe, fl_all, out_1px;
    std::size_t skipped = 0;
    for (std::size_t t = 0; t < pred.flows().size(); ++t) {
        try {
            const FlowMetrics m = flow_metrics(pred.flows()[t], gt.flows()[t]);
            epe.add(m.epe);
            fl_all.add(m.fl_all_pct);
            out_1px.add(m.out_1px_pct);
        } catch (const EmptySetError&) {
            ++skipped;
        }
    }
    return {{"config", json::object()},
            {"epe", epe.value()},
            {"fl_all_pct", fl_all.value()},
            {"out_1px_pct", out_1px.value()},
            {"frame_pairs", epe.n},
            {"skipped_pairs", skipped}};
}

struct RegionMeans {
    MeanAcc l1, charb;
    std::size_t empty = 0;
    void add(const WarpErrorRegion& r) {
        if (r.l1)
            l1.add(*r.l1);
        else
            ++empty;
        charb.add(r.charbonnier);
    }
    json value() const {
        return {{"l1", l1.value()},
                {"charbonnier", charb.value()},
                {"pairs", l1.n},
                {"empty_pairs", empty}};
    }
};

json warp_suite(Sequence& pred, Sequence& gt, const EvalOptions& o) {
    if (!pred.has("depth")) missing_modality("warp", "depth", "pred");
    if (!gt.has("depth")) missing_modality("warp", "depth", "gt");
    if (!gt.has("flow")) missing_modality("warp", "flow", "gt");
    if (!pred.has("rgb")) missing_modality("warp", "rgb", "pred");
    if (!pred.has("flow")) missing_modality("warp", "flow", "pred");

    std::string occ_source = "none";
    if (gt.has("occlusion"))
        occ_source = "renderer";
    else if (gt.has("flow_bwd"))
        occ_source = "fb_check";

    const int pairs = pred.manifest().frame_count - 1;
    RegionMeans depth_all, depth_occ, depth_vis, rgb_all, rgb_occ, rgb_vis;
    for (int t = 0; t < pairs; ++t) {
        OcclusionMask occ;
        if (occ_source == "renderer")
            occ.occluded = gt.occlusions()[t];
        else if (occ_source == "fb_check")
            occ = occlusion_from_fb(gt.flows()[t], gt.flows_bwd()[t], o.fb_tol_px);
        WarpErrorStats d = depth_warp_error(pred.depths()[t], gt.depths()[t + 1],
                                            gt.flows()[t], occ, o.charbonnier_eps);
        WarpErrorStats r = rgb_warp_error(pred.rgbs()[t], pred.rgbs()[t + 1],
                                          pred.flows()[t], occ, o.charbonnier_eps);
        if (occ_source == "none") {
            // No occlusion information: only the "all" region is meaningful.
            d.occluded = d.non_occluded = WarpErrorRegion{};
            r.occluded = r.non_occluded = WarpErrorRegion{};
        }
        depth_all.add(d.all);
        depth_occ.add(d.occluded);
        depth_vis.add(d.non_occluded);
        rgb_all.add(r.all);
        rgb_occ.add(r.occluded);
        rgb_vis.add(r.non_occluded);
    }
    return {{"config",
             {{"charbonnier_eps", o.charbonnier_eps},
              {"occlusion_source", occ_source},
              {"fb_tol_px", o.fb_tol_px},
              {"depth_warp", "warp(pred_depth[t], gt_flow[t]) vs gt_depth[t+1]"},
              {"rgb_warp", "warp(pred_rgb[t], pred_flow[t]) vs pred_rgb[t+1]"}}},
            {"depth",
             {{"all", depth_all.value()},
              {"occluded", depth_occ.value()},
              {"non_occluded", depth_vis.value()}}},
            {"rgb",
             {{"all", rgb_all.value()},
              {"occluded", rgb_occ.value()},
              {"non_occluded", rgb_vis.value()}}}};
}

// Moving-point 4D cloud from a sequence's depth + flow. The final frame
// reuses the preceding pair's flow for its moving mask.
PointSet4D sequence_points(Sequence& seq, double delta, double alpha,
                           std::size_t* skipped_frames) {
    PointSet4D set;
    set.alpha = alpha;
    const int frames = seq.manifest().frame_count;
    for (int t = 0; t < frames; ++t) {
        const int flow_index = std::min(t, frames - 2);
        const Mask mask = moving_mask(seq.flows()[flow_index], delta);
        try {
            const PointSet4D frame_points =
                depth_to_points4d(seq.depths()[t], seq.manifest().intrinsics, t, &mask,
                                  alpha);
            set.points.insert(set.points.end(), frame_points.points.begin(),
                              frame_points.points.end());
        } catch (const EmptySetError&) {
            ++*skipped_frames;
        }
    }
    return set;
}

json chamfer_suite(Sequence& pred, Sequence& gt, const EvalOptions& o) {
    if (!pred.has("depth")) missing_modality("chamfer4d", "depth", "pred");
    if (!pred.has("flow")) missing_modality("chamfer4d", "flow", "pred");
    const bool gt_from_points = o.chamfer_gt_source == "points";
    if (gt_from_points) {
        if (!gt.has("points4d")) missing_modality("chamfer4d", "points4d", "gt");
    } else {
        if (!gt.has("depth")) missing_modality("chamfer4d", "depth", "gt");
        if (!gt.has("flow")) missing_modality("chamfer4d", "flow", "gt");
    }

    std::size_t skipped_pred = 0, skipped_gt = 0;
    PointSet4D gen = sequence_points(pred, o.delta_flow, o.alpha, &skipped_pred);
    PointSet4D ref = gt_from_points
                         ? gt.points4d()
                         : sequence_points(gt, o.delta_flow, o.alpha, &skipped_gt);

    json out;
    out["config"] = {{"alpha", o.alpha},
                     {"delta_px", o.delta_flow},
                     {"gt_source", o.chamfer_gt_source},
                     {"distance_convention", "squared"},
                     {"acceleration", "indexed"},
                     {"subsample_budget", o.chamfer_budget},
                     {"subsample_seed", o.seed}};
    out["gen_points_total"] = gen.points.size();
    out["gt_points_total"] = ref.points.size();
    out["skipped_empty_frames_pred"] = skipped_pred;
    out["skipped_empty_frames_gt"] = skipped_gt;
    if (gen.points.empty() || ref.points.empty()) {
        out["chamfer4d"] = nullptr;
        out["reward"] = nullptr;
        out["note"] = "empty moving-point set; metric is undefined on this pair";
        return out;
    }
    const PointSet4D gen_s = subsample_points(gen, o.chamfer_budget, o.seed);
    const PointSet4D ref_s = subsample_points(ref, o.chamfer_budget, o.seed + 1);
    const ChamferConfig cfg{o.alpha, ChamferAcceleration::indexed};
    const double cd = chamfer4d(gen_s, ref_s, cfg, o.workers);
    out["gen_points_used"] = gen_s.points.size();
    out["gt_points_used"] = ref_s.points.size();
    out["chamfer4d"] = cd;
    out["reward"] = -cd;
    return out;
}

json worldline_suite(Sequence& pred, Sequence& gt, const EvalOptions& o) {
    if (!pred.has("depth")) missing_modality("worldline", "depth", "pred");
    if (!gt.has("depth")) missing_modality("worldline", "depth", "gt");
    if (!gt.has("flow")) missing_modality("worldline", "flow", "gt");

    std::string mask_source = o.worldline_mask;
    if (mask_source == "auto") mask_source = gt.has("object_id") ? "objects" : "depth";
    const DepthMap& d0 = gt.depths()[0];
    Mask mask = d0.valid;
    if (mask_source == "objects") {
        if (!gt.has("object_id")) missing_modality("worldline", "object_id", "gt");
        const Raster<double>& ids = gt.object_ids()[0];
        for (int v = 0; v < mask.height(); ++v)
            for (int u = 0; u < mask.width(); ++u)
                mask(u, v) = mask(u, v) && ids(u, v) > 0.0;
    } else if (mask_source != "depth") {
        throw InvalidInputError("worldline: unknown mask source \"" + mask_source + "\"");
    }

    const auto seeds = sample_seeds(mask, o.worldline_seeds, o.seed);
    WorldlineSet tracks = track_2d(seeds, gt.flows());
    tracks = lift_3d(tracks, pred.depths(), pred.manifest().intrinsics, LiftTarget::pred);
    tracks = lift_3d(tracks, gt.depths(), gt.manifest().intrinsics, LiftTarget::gt);
    const WorldlineMetrics m = worldline_metrics(tracks, o.fail_tau);

    json drift = json::array();
    for (const auto& d : m.drift_curve) drift.push_back(opt_json(d));
    return {{"config",
             {{"seeds", o.worldline_seeds},
              {"sampling_seed", o.seed},
              {"mask_source", mask_source},
              {"fail_tau", o.fail_tau}}},
            {"l2_error", m.l2_error},
            {"mean_drift", m.mean_drift},
            {"final_drift", opt_json(m.final_drift)},
            {"fail_rate", m.fail_rate},
            {"traj_length_frames", m.traj_length_frames},
            {"traj_length_pct", m.traj_length_pct},
            {"drift_curve", std::move(drift)}};
}

json noveltime_suite(Sequence& pred, Sequence& gt, const EvalOptions&) {
    if (!pred.has("depth")) missing_modality("noveltime", "depth", "pred");
    if (!pred.has("flow")) missing_modality("noveltime", "flow", "pred");
    if (!gt.has("depth")) missing_modality("noveltime", "depth", "gt");
    if (!gt.has("flow")) missing_modality("noveltime", "flow", "gt");

    const TimelineSplit split = TimelineSplit::even_odd(pred.manifest().frame_count);
    MeanAcc depth_err, warp_err;
    std::size_t skipped_depth = 0, skipped_warp = 0;
    for (int n : split.novel) {
        const int prev = n - 1;
        const DepthMap d_tilde = interpolate_depth(pred.depths()[prev], pred.flows()[prev]);
        const auto de = novel_depth_error(d_tilde, gt.depths()[n]);
        if (de)
            depth_err.add(*de);
        else
            ++skipped_depth;
        const auto we = novel_warp_error(pred.depths()[prev], gt.flows()[prev], d_tilde);
        if (we)
            warp_err.add(*we);
        else
            ++skipped_warp;
    }
    return {{"config", {{"split", "even_odd"}}},
            {"novel_frames", split.novel.size()},
            {"depth_err", depth_err.value()},
            {"warp_err", warp_err.value()},
            {"skipped_depth_frames", skipped_depth},
            {"skipped_warp_frames", skipped_warp}};
}

json physicsiq_suite(Sequence& pred, Sequence& gt, const EvalOptions& o) {
    if (!pred.has("rgb")) missing_modality("physicsiq", "rgb", "pred");
    if (!gt.has("rgb")) missing_modality("physicsiq", "rgb", "gt");
    const MotionMaskConfig cfg{o.diff_threshold, o.smoothing_radius};
    const PhysicsIqScores s = physicsiq_scores(pred.rgbs(), gt.rgbs(), cfg);
    const PixelMetrics px = pixel_metrics(pred.rgbs(), gt.rgbs());
    return {{"config",
             {{"diff_threshold", o.diff_threshold},
              {"smoothing_radius", o.smoothing_radius},
              {"luma", "bt601"},
              {"ssim_window", "11x11 gaussian sigma 1.5"}}},
            {"spatial_iou", opt_json(s.spatial_iou)},
            {"spatiotemporal_iou", opt_json(s.spatiotemporal_iou)},
            {"weighted_spatial_iou", opt_json(s.weighted_spatial_iou)},
            {"mse", s.mse},
            {"psnr", psnr_json(px.psnr)},
            {"ssim", px.ssim}};
}

std::string iso_timestamp() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {
        "depth", "warp", "flow", "chamfer4d", "worldline", "noveltime", "physicsiq"};
    return names;
}

json run_eval(const std::vector<std::string>& suites, const fs::path& pred_manifest,
              const fs::path& gt_manifest, const EvalOptions& opts) {
    Sequence pred(pred_manifest);
    Sequence gt(gt_manifest);
    if (pred.manifest().width != gt.manifest().width ||
        pred.manifest().height != gt.manifest().height)
        throw InvalidInputError(
            "pred and gt resolutions differ (" + std::to_string(pred.manifest().width) +
            "x" + std::to_string(pred.manifest().height) + " vs " +
            std::to_string(gt.manifest().width) + "x" +
            std::to_string(gt.manifest().height) + "); sequences are not comparable");
    if (pred.manifest().frame_count != gt.manifest().frame_count)
        throw InvalidInputError("pred and gt frame counts differ");

    std::vector<std::string> expanded;
    for (const auto& s : suites) {
        if (s == "all") {
            expanded = suite_names();
            break;
        }
        if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end())
            throw InvalidInputError("unknown suite \"" + s + "\"");
        expanded.push_back(s);
    }

    json report;
    report["schema_version"] = 1;
    report["tool_version"] = kVersion;
    report["generated_at"] = iso_timestamp();
    report["pred_manifest"] = pred_manifest.string();
    report["gt_manifest"] = gt_manifest.string();
    json& blocks = report["suites"] = json::object();
    for (const auto& name : suite_names()) {
        if (std::find(expanded.begin(), expanded.end(), name) == expanded.end()) continue;
        if (name == "depth")
            blocks[name] = depth_suite(pred, gt, opts);
        else if (name == "warp")
            blocks[name] = warp_suite(pred, gt, opts);
        else if (name == "flow")
            blocks[name] = flow_suite(pred, gt, opts);
        else if (name == "chamfer4d")
            blocks[name] = chamfer_suite(pred, gt, opts);
        else if (name == "worldline")
            blocks[name] = worldline_suite(pred, gt, opts);
        else if (name == "noveltime")
            blocks[name] = noveltime_suite(pred, gt, opts);
        else if (name == "physicsiq")
            blocks[name] = physicsiq_suite(pred, gt, opts);
    }
    return report;
}

}  // namespace world4d
