#include "weldgroove/error.hpp"
#include "weldgroove/evaluation.hpp"
#include "weldgroove/io.hpp"
#include "weldgroove/pipeline.hpp"
#include "weldgroove/synthgen.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace weldgroove;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitEmpty = 2;

struct CommonOptions {
    std::string config;
    std::string out;
    int threads = -1;
    bool reverse = false;
};

PipelineConfig resolve_config(const CommonOptions& opts) {
    PipelineConfig config = opts.config.empty() ? PipelineConfig{} : load_config(opts.config);
    if (!opts.out.empty()) config.output_dir = opts.out;
    if (opts.threads >= 0) config.threads = static_cast<unsigned>(opts.threads);
    if (opts.reverse) config.reverse = true;
    config.validate();
    return config;
}

fs::path ensure_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
    return p;
}

void write_json(const nlohmann::json& j, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

void append_csv(const std::string& path, const std::string& row) {
    const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot append to '" + path + "'");
    if (fresh) out << kCsvHeader << '\n';
    out << row << '\n';
}

int cmd_detect(const std::string& cloud_path, const CommonOptions& opts) {
    const auto config = resolve_config(opts);
    const auto cloud = load_cloud(cloud_path);
    const auto result = run_detection(cloud, config);
    write_detection_artifacts(result, ensure_dir(config.output_dir));
    if (result.groove.empty()) {
        std::cerr << "error: empty groove (threshold " << result.groove.threshold << ")\n";
        return kExitEmpty;
    }
    std::cout << "groove points: " << result.groove.size() << " of " << cloud.size() << '\n';
    return kExitOk;
}

PointCloud with_normals(const PointCloud& cloud, const PipelineConfig& config) {
    if (cloud.has_normals()) return cloud;
    ResolvedRadii radii;
    return preprocess_cloud(cloud, config, radii);
}

int cmd_trajectory(const std::string& cloud_path, const std::string& groove_path, const CommonOptions& opts) {
    const auto config = resolve_config(opts);
    const auto cloud = with_normals(load_cloud(cloud_path), config);
    GrooveSet groove;
    groove.indices = load_indices(groove_path);
    for (const auto i : groove.indices) {
        if (i >= cloud.size()) throw ConfigError("groove index " + std::to_string(i) + " out of range");
    }
    const auto trajectory = run_trajectory(cloud, groove, config);
    write_trajectory_artifacts(trajectory, ensure_dir(config.output_dir));
    for (const auto& w : trajectory.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "waypoints: " << trajectory.size() << '\n';
    return kExitOk;
}

int cmd_eval(std::vector<std::string> paths, const std::string& reference_path, const std::string& trajectory_path,
             const std::string& cloud_path, const std::string& csv_path, const std::string& name) {
    if (paths.size() < 2) throw ConfigError("eval needs at least one detected file and a truth file");
    const auto truth = load_indices(paths.back());
    paths.pop_back();
    EvalReport report;
    for (const auto& p : paths) {
        const auto o = overlap_rate(load_indices(p), truth);
        if (!report.overlap) report.overlap = o;
        if (paths.size() > 1) report.batch_rates.push_back(o.rate);
    }
    if (!reference_path.empty() || !trajectory_path.empty()) {
        if (reference_path.empty() || trajectory_path.empty()) {
            throw ConfigError("deviation needs both --reference and --trajectory");
        }
        report.deviation = trajectory_deviation(load_trajectory(trajectory_path), load_reference(reference_path));
    }
    std::cout << to_json(report).dump(2) << '\n';
    if (!csv_path.empty()) {
        std::optional<std::size_t> points;
        if (!cloud_path.empty()) points = load_cloud(cloud_path).size();
        append_csv(csv_path, csv_row(name, points, report));
    }
    return kExitOk;
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir) {
    const auto spec = load_workpiece_spec(spec_path);
    const auto w = generate_workpiece(spec);
    const auto dir = ensure_dir(out_dir.empty() ? "." : out_dir);
    save_cloud(w.cloud, dir / "cloud.pcd");
    save_indices(w.truth, dir / "truth.idx");
    save_reference(w.reference, dir / "reference.json");
    std::cout << "points: " << w.cloud.size() << ", groove points: " << w.truth.size() << '\n';
    return kExitOk;
}

int cmd_pipeline(const std::string& cloud_path, const CommonOptions& opts, std::size_t runs,
                 const std::string& csv_path) {
    if (runs == 0) throw ConfigError("--runs must be at least 1");
    const auto config = resolve_config(opts);
    const auto cloud = load_cloud(cloud_path);
    const auto dir = ensure_dir(config.output_dir);

    TimingReport timing;
    timing.points = cloud.size();
    StageTimes times;
    const auto start = std::chrono::steady_clock::now();
    const auto detection = run_detection(cloud, config, &times);
    if (detection.groove.empty()) {
        write_detection_artifacts(detection, dir);
        std::cerr << "error: empty groove (threshold " << detection.groove.threshold << ")\n";
        return kExitEmpty;
    }
    const auto trajectory = run_trajectory(detection.processed, detection.groove, config, &times);
    times.total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    timing.runs.push_back(times);
    write_detection_artifacts(detection, dir);
    write_trajectory_artifacts(trajectory, dir);
    if (runs > 1) {
        const auto more = time_pipeline(cloud, config, runs - 1);
        timing.runs.insert(timing.runs.end(), more.runs.begin(), more.runs.end());
    }
    write_json(to_json(timing), dir / "timing.json");
    for (const auto& w : trajectory.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "groove points: " << detection.groove.size() << ", waypoints: " << trajectory.size()
              << ", mean total: " << timing.mean_total() << " s\n";
    if (!csv_path.empty()) {
        EvalReport report;
        report.timing = timing;
        append_csv(csv_path, csv_row(fs::path(cloud_path).stem().string(), cloud.size(), report));
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"V-groove weld seam detection and trajectory generation"};
    app.require_subcommand(1);

    CommonOptions opts;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config, "Config file (key = value or JSON)")->check(CLI::ExistingFile);
        sub->add_option("--out", opts.out, "Output directory (overrides output.dir)");
        sub->add_option("--threads", opts.threads, "Worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
    };

    std::string cloud_path, groove_path, spec_path, reference_path, trajectory_path, csv_path, name = "eval";
    std::vector<std::string> eval_paths;
    std::size_t runs = 1;

    auto* detect = app.add_subcommand("detect", "Detect the groove in a point cloud");
    detect->add_option("cloud", cloud_path, "Input cloud (.pcd or .ply)")->required();
    add_common(detect);

    auto* traj = app.add_subcommand("trajectory", "Generate waypoints from a cloud and its groove indices");
    traj->add_option("cloud", cloud_path, "Processed cloud, ideally with normals")->required();
    traj->add_option("groove", groove_path, "Groove index file")->required();
    add_common(traj);
    traj->add_flag("--reverse", opts.reverse, "Reverse the travel direction");

    auto* eval = app.add_subcommand("eval", "Overlap rate of detected indices against ground truth");
    eval->add_option("files", eval_paths, "Detected index files followed by the truth index file")->required();
    eval->add_option("--reference", reference_path, "Reference curve (JSON)");
    eval->add_option("--trajectory", trajectory_path, "Trajectory JSON for deviation statistics");
    eval->add_option("--cloud", cloud_path, "Source cloud, used for the point count in --csv rows");
    eval->add_option("--csv", csv_path, "Append a CSV row to this file");
    eval->add_option("--name", name, "Row name for --csv");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic workpiece");
    synth->add_option("spec", spec_path, "Workpiece spec file")->required();
    synth->add_option("--out", opts.out, "Output directory");

    auto* pipe = app.add_subcommand("pipeline", "Detect and generate the trajectory in one run");
    pipe->add_option("cloud", cloud_path, "Input cloud (.pcd or .ply)")->required();
    add_common(pipe);
    pipe->add_flag("--reverse", opts.reverse, "Reverse the travel direction");
    pipe->add_option("--runs", runs, "Timing repetitions");
    pipe->add_option("--csv", csv_path, "Append a timing CSV row to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (detect->parsed()) return cmd_detect(cloud_path, opts);
        if (traj->parsed()) return cmd_trajectory(cloud_path, groove_path, opts);
        if (eval->parsed()) return cmd_eval(eval_paths, reference_path, trajectory_path, cloud_path, csv_path, name);
        if (synth->parsed()) return cmd_synth(spec_path, opts.out);
        if (pipe->parsed()) return cmd_pipeline(cloud_path, opts, runs, csv_path);
    } catch (const DegenerateError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitEmpty;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
