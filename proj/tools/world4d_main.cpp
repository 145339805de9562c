// world4d command-line tool: synthesize rigid-body RGB-D-flow datasets and
// run the 4D consistency metric suites over pred/gt sequence pairs.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "world4d/eval.hpp"
#include "world4d/io.hpp"
#include "world4d/parallel.hpp"
#include "world4d/synth.hpp"
#include "world4d/version.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct SynthArgs {
    std::uint64_t seed = 0;
    std::string spec_file;
    std::string out_dir;
    std::string complexity = "mix";
    std::string camera = "fixed";
    std::string resolution = "256x256";
    double fps = 24.0;
    double duration = 1.0;
    int views = 1;
    std::size_t points_per_object = 4096;
    bool write_backward_flow = false;
    int workers = 0;
};

std::pair<int, int> parse_resolution(const std::string& s) {
    const auto x = s.find('x');
    if (x == std::string::npos)
        throw world4d::InvalidInputError("resolution must look like 256x256");
    try {
        const int w = std::stoi(s.substr(0, x));
        const int h = std::stoi(s.substr(x + 1));
        if (w <= 0 || h <= 0) throw world4d::InvalidInputError("resolution must be positive");
        return {w, h};
    } catch (const std::exception&) {
        throw world4d::InvalidInputError("resolution must look like 256x256");
    }
}

int run_synth(const SynthArgs& args) {
    world4d::SceneSpec spec;
    if (!args.spec_file.empty()) {
        std::ifstream in(args.spec_file);
        if (!in)
            throw world4d::InvalidInputError("cannot open spec file " + args.spec_file);
        spec = world4d::scene_spec_from_json(json::parse(in));
    } else if (args.complexity == "mix") {
        spec = world4d::randomize_scene(args.seed);
    } else {
        const std::map<std::string, world4d::Complexity> classes = {
            {"single", world4d::Complexity::single},
            {"two", world4d::Complexity::two_body},
            {"multi", world4d::Complexity::multi}};
        const auto it = classes.find(args.complexity);
        if (it == classes.end())
            throw world4d::InvalidInputError("complexity must be single, two, multi, or mix");
        spec = world4d::randomize_scene(it->second, args.seed);
    }
    spec.fps = args.fps;
    spec.duration = args.duration;
    spec.validate();

    world4d::SynthOptions opts;
    const std::map<std::string, world4d::RigKind> rigs = {
        {"fixed", world4d::RigKind::fixed},
        {"topdown", world4d::RigKind::topdown},
        {"orbit", world4d::RigKind::orbit},
        {"dolly", world4d::RigKind::dolly}};
    const auto rig = rigs.find(args.camera);
    if (rig == rigs.end())
        throw world4d::InvalidInputError("camera must be fixed, topdown, orbit, or dolly");
    opts.rig = rig->second;
    opts.views = args.views;
    std::tie(opts.width, opts.height) = parse_resolution(args.resolution);
    opts.points_per_object = args.points_per_object;
    opts.write_backward_flow = args.write_backward_flow;
    opts.workers = world4d::resolve_workers(args.workers);

    const auto manifests = world4d::synthesize_dataset(spec, opts, args.out_dir);
    for (const auto& m : manifests) std::cout << m.string() << "\n";
    return 0;
}

struct EvalArgs {
    std::string suite;
    std::string pred_manifest;
    std::string gt_manifest;
    std::string out_path;
    world4d::EvalOptions opts;
    std::string depth_align = "both";
    int workers = 0;
};

int run_eval_cmd(EvalArgs& args) {
    if (args.depth_align == "metric")
        args.opts.depth_align = world4d::DepthAlignment::metric;
    else if (args.depth_align == "median")
        args.opts.depth_align = world4d::DepthAlignment::median_scaled;
    else if (args.depth_align != "both")
        throw world4d::InvalidInputError("--depth-align must be metric, median, or both");
    args.opts.workers = world4d::resolve_workers(args.workers);

    const json report =
        world4d::run_eval({args.suite}, args.pred_manifest, args.gt_manifest, args.opts);
    const std::string text = report.dump(2) + "\n";
    if (args.out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(args.out_path, std::ios::trunc);
        if (!out)
            throw world4d::InvalidInputError("cannot open output file " + args.out_path);
        out << text;
    }
    return 0;
}

struct ReportArgs {
    std::vector<std::string> inputs;
    std::string format = "json";
    std::string out_path;
};

void collect_numeric_leaves(const json& node, const std::string& prefix,
                            std::map<std::string, std::pair<double, std::size_t>>& acc) {
    if (node.is_object()) {
        for (const auto& [key, value] : node.items()) {
            if (key == "config") continue;  // echoed verbatim, not a metric
            collect_numeric_leaves(value, prefix.empty() ? key : prefix + "." + key, acc);
        }
    } else if (node.is_number()) {
        auto& slot = acc[prefix];
        slot.first += node.get<double>();
        slot.second += 1;
    }
    // null (absent), strings, and arrays (curves) are not aggregated
}

int run_report(const ReportArgs& args) {
    if (args.inputs.empty()) throw world4d::InvalidInputError("report: no input files");
    std::vector<json> reports;
    for (const auto& path : args.inputs) {
        std::ifstream in(path);
        if (!in) throw world4d::InvalidInputError("cannot open report " + path);
        try {
            reports.push_back(json::parse(in));
        } catch (const json::exception& e) {
            throw world4d::FormatError(path + ": invalid JSON: " + std::string(e.what()));
        }
        if (!reports.back().contains("suites"))
            throw world4d::FormatError(path + ": not a metrics report (no suites block)");
    }

    // A report without its config is malformed; conflicting configs across
    // inputs make the means meaningless, so refuse both.
    const json& first_suites = reports[0]["suites"];
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const json& suites = reports[i]["suites"];
        for (const auto& [name, block] : suites.items()) {
            if (!block.contains("config"))
                throw world4d::FormatError(args.inputs[i] + ": suite \"" + name +
                                           "\" has no config echo; report is malformed");
            if (!first_suites.contains(name) ||
                first_suites[name]["config"] != block["config"])
                throw world4d::InvalidInputError(
                    args.inputs[i] + ": suite \"" + name +
                    "\" config conflicts with " + args.inputs[0]);
        }
        if (suites.size() != first_suites.size())
            throw world4d::InvalidInputError(args.inputs[i] +
                                             ": suite set differs from " + args.inputs[0]);
    }

    std::map<std::string, std::pair<double, std::size_t>> acc;
    for (const auto& r : reports) collect_numeric_leaves(r["suites"], "", acc);

    std::string text;
    if (args.format == "json") {
        json out;
        out["inputs"] = args.inputs.size();
        json metrics = json::object();
        for (const auto& [path, sums] : acc)
            metrics[path] = {{"mean", sums.first / static_cast<double>(sums.second)},
                             {"count", sums.second}};
        out["metrics"] = std::move(metrics);
        text = out.dump(2) + "\n";
    } else if (args.format == "csv") {
        text = "metric,mean,count\n";
        char buf[160];
        for (const auto& [path, sums] : acc) {
            std::snprintf(buf, sizeof buf, "%s,%.17g,%zu\n", path.c_str(),
                          sums.first / static_cast<double>(sums.second), sums.second);
            text += buf;
        }
    } else {
        throw world4d::InvalidInputError("--format must be json or csv");
    }

    if (args.out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(args.out_path, std::ios::trunc);
        if (!out)
            throw world4d::InvalidInputError("cannot open output file " + args.out_path);
        out << text;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"world4d: synthetic rigid-body 4D datasets and world-consistency metrics"};
    app.set_version_flag("--version", world4d::kVersion);
    app.require_subcommand(1);

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    synth->add_option("--seed", synth_args.seed, "scene randomization seed");
    synth->add_option("--spec", synth_args.spec_file, "scene spec JSON instead of --seed");
    synth->add_option("--out", synth_args.out_dir, "output directory")->required();
    synth->add_option("--complexity", synth_args.complexity, "single|two|multi|mix");
    synth->add_option("--camera", synth_args.camera, "fixed|topdown|orbit|dolly");
    synth->add_option("--views", synth_args.views, "view count for the fixed rig");
    synth->add_option("--resolution", synth_args.resolution, "WxH, default 256x256");
    synth->add_option("--fps", synth_args.fps, "frames per second");
    synth->add_option("--duration", synth_args.duration, "seconds");
    synth->add_option("--points-per-object", synth_args.points_per_object,
                      "GT surface samples per object per frame");
    synth->add_flag("--write-backward-flow", synth_args.write_backward_flow,
                    "also store backward flow fields");
    synth->add_option("--workers,-w", synth_args.workers,
                      "worker threads (0 = WORLD4D_WORKERS or hardware)");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "run metric suites on a pred/gt pair");
    eval->add_option("suite", eval_args.suite,
                     "depth|warp|flow|chamfer4d|worldline|noveltime|physicsiq|all")
        ->required();
    eval->add_option("pred_manifest", eval_args.pred_manifest)->required();
    eval->add_option("gt_manifest", eval_args.gt_manifest)->required();
    eval->add_option("--alpha", eval_args.opts.alpha, "chamfer temporal weight, m/frame");
    eval->add_option("--delta", eval_args.opts.delta_flow, "moving-mask threshold, px");
    eval->add_option("--scene-delta", eval_args.opts.delta_scene,
                     "moving-mask threshold for scene flow, m");
    eval->add_option("--fail-tau", eval_args.opts.fail_tau, "worldline fail threshold, m");
    eval->add_option("--charbonnier-eps", eval_args.opts.charbonnier_eps);
    eval->add_option("--depth-align", eval_args.depth_align, "metric|median|both");
    eval->add_option("--seeds", eval_args.opts.worldline_seeds, "worldline seed count");
    eval->add_option("--seed", eval_args.opts.seed, "sampling seed");
    eval->add_option("--chamfer-budget", eval_args.opts.chamfer_budget,
                     "points per set before subsampling");
    eval->add_option("--chamfer-gt-source", eval_args.opts.chamfer_gt_source,
                     "depth|points");
    eval->add_option("--wl-mask", eval_args.opts.worldline_mask, "objects|depth|auto");
    eval->add_option("--fb-tol", eval_args.opts.fb_tol_px,
                     "forward-backward occlusion tolerance, px");
    eval->add_option("--diff-threshold", eval_args.opts.diff_threshold,
                     "physics-iq motion threshold");
    eval->add_option("--smoothing-radius", eval_args.opts.smoothing_radius,
                     "physics-iq gaussian sigma, px");
    eval->add_option("--out", eval_args.out_path, "write report here instead of stdout");
    eval->add_option("--workers,-w", eval_args.workers,
                     "worker threads (0 = WORLD4D_WORKERS or hardware)");

    ReportArgs report_args;
    CLI::App* report = app.add_subcommand("report", "aggregate eval reports");
    report->add_option("inputs", report_args.inputs, "report JSON files")->required();
    report->add_option("--format", report_args.format, "json|csv");
    report->add_option("--out", report_args.out_path, "write summary here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (synth->parsed()) return run_synth(synth_args);
        if (eval->parsed()) return run_eval_cmd(eval_args);
        if (report->parsed()) return run_report(report_args);
        return 2;
    } catch (const world4d::InvalidInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const world4d::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const world4d::EmptySetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
