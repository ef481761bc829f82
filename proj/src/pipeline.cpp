#include "weldgroove/pipeline.hpp"
#include "weldgroove/error.hpp"
#include "weldgroove/io.hpp"
#include "kv.hpp"

#include <chrono>
#include <fstream>
#include <numeric>
#include <sstream>

namespace weldgroove {
namespace {

using Clock = std::chrono::steady_clock;

class StageClock {
public:
    StageClock(StageTimes* times, Stage stage) : times_(times), stage_(stage), start_(Clock::now()) {}
    ~StageClock() {
        if (times_) (*times_)[stage_] += std::chrono::duration<double>(Clock::now() - start_).count();
    }
    StageClock(const StageClock&) = delete;
    StageClock& operator=(const StageClock&) = delete;

private:
    StageTimes* times_;
    Stage stage_;
    Clock::time_point start_;
};

std::optional<double> optional_radius(const detail::KeyValues& kv, const std::string& key) {
    if (!kv.has(key) || kv.raw(key) == "auto") return std::nullopt;
    return kv.get_double(key);
}

std::string radius_text(const std::optional<double>& r) { return r ? format_double(*r) : "auto"; }

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace

std::string_view stage_name(Stage stage) {
    switch (stage) {
        case Stage::Smooth: return "smooth";
        case Stage::Normals: return "normals";
        case Stage::Variation: return "variation";
        case Stage::Extraction: return "extraction";
        case Stage::Trajectory: return "trajectory";
    }
    return "?";
}

double StageTimes::stage_sum() const { return std::accumulate(seconds.begin(), seconds.end(), 0.0); }

void PipelineConfig::validate() const {
    auto positive = [](const std::optional<double>& r, const char* what) {
        if (r && !(*r > 0.0)) throw ConfigError(std::string(what) + " must be positive");
    };
    positive(mls_radius, "mls.radius");
    positive(normal_radius, "normals.radius");
    positive(gfh_radius, "gfh.radius");
    positive(denoise_cluster_radius, "denoise.cluster_radius");
    if (mls_order != 1 && mls_order != 2) throw ConfigError("mls.order must be 1 or 2");
    if (viewpoint && !is_finite(*viewpoint)) throw ConfigError("normals.viewpoint must be finite");
    if (threshold_mode == ThresholdMode::Fixed && !(threshold_value > 0.0)) {
        throw ConfigError("threshold.value must be positive in fixed mode");
    }
    if (segments < 1 || segments > 10000) throw ConfigError("trajectory.segments must lie in [1, 10000]");
    gd.validate();
}

PipelineConfig parse_config(std::string_view text) {
    const auto kv = detail::KeyValues::parse(text);
    PipelineConfig c;
    if (kv.has("mls.enabled")) c.mls_enabled = kv.get_bool("mls.enabled");
    c.mls_radius = optional_radius(kv, "mls.radius");
    if (kv.has("mls.order")) c.mls_order = static_cast<int>(kv.get_int("mls.order"));
    c.normal_radius = optional_radius(kv, "normals.radius");
    if (kv.has("normals.viewpoint") && kv.raw("normals.viewpoint") != "auto") {
        std::istringstream in(kv.raw("normals.viewpoint"));
        Point3 vp;
        if (!(in >> vp.x() >> vp.y() >> vp.z())) throw ParseError("normals.viewpoint expects three numbers");
        std::string rest;
        if (in >> rest) throw ParseError("normals.viewpoint expects three numbers");
        c.viewpoint = vp;
    }
    c.gfh_radius = optional_radius(kv, "gfh.radius");
    if (kv.has("threshold.mode")) {
        const auto& m = kv.raw("threshold.mode");
        if (m == "otsu") c.threshold_mode = ThresholdMode::Otsu;
        else if (m == "fixed") c.threshold_mode = ThresholdMode::Fixed;
        else throw ConfigError("threshold.mode must be 'otsu' or 'fixed'");
    }
    if (kv.has("threshold.value")) c.threshold_value = kv.get_double("threshold.value");
    if (kv.has("denoise.enabled")) c.denoise_enabled = kv.get_bool("denoise.enabled");
    if (kv.has("denoise.min_cluster")) {
        const auto v = kv.get_int("denoise.min_cluster");
        if (v < 0) throw ConfigError("denoise.min_cluster must be non-negative");
        c.denoise_min_cluster = static_cast<std::size_t>(v);
    }
    c.denoise_cluster_radius = optional_radius(kv, "denoise.cluster_radius");
    if (kv.has("trajectory.segments")) {
        const auto v = kv.get_int("trajectory.segments");
        if (v < 1) throw ConfigError("trajectory.segments must lie in [1, 10000]");
        c.segments = static_cast<std::size_t>(v);
    }
    if (kv.has("trajectory.reverse")) c.reverse = kv.get_bool("trajectory.reverse");
    if (kv.has("gd.tolerance")) c.gd.tolerance = kv.get_double("gd.tolerance");
    if (kv.has("gd.max_iterations")) {
        const auto v = kv.get_int("gd.max_iterations");
        if (v < 1) throw ConfigError("gd.max_iterations must be positive");
        c.gd.max_iterations = static_cast<std::size_t>(v);
    }
    if (kv.has("gd.armijo_c")) c.gd.armijo_c = kv.get_double("gd.armijo_c");
    if (kv.has("threads")) {
        const auto v = kv.get_int("threads");
        if (v < 0) throw ConfigError("threads must be non-negative");
        c.threads = static_cast<unsigned>(v);
    }
    if (kv.has("output.dir")) c.output_dir = kv.raw("output.dir");
    kv.reject_unknown();
    c.validate();
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ParseError& e) {
        throw e.within(path.string());
    }
}

std::string emit_config(const PipelineConfig& c) {
    std::ostringstream out;
    out << "mls.enabled = " << (c.mls_enabled ? "true" : "false") << '\n'
        << "mls.radius = " << radius_text(c.mls_radius) << '\n'
        << "mls.order = " << c.mls_order << '\n'
        << "normals.radius = " << radius_text(c.normal_radius) << '\n'
        << "normals.viewpoint = ";
    if (c.viewpoint) {
        out << format_double(c.viewpoint->x()) << ' ' << format_double(c.viewpoint->y()) << ' '
            << format_double(c.viewpoint->z()) << '\n';
    } else {
        out << "auto\n";
    }
    out << "gfh.radius = " << radius_text(c.gfh_radius) << '\n'
        << "threshold.mode = " << (c.threshold_mode == ThresholdMode::Otsu ? "otsu" : "fixed") << '\n'
        << "threshold.value = " << format_double(c.threshold_value) << '\n'
        << "denoise.enabled = " << (c.denoise_enabled ? "true" : "false") << '\n'
        << "denoise.min_cluster = " << c.denoise_min_cluster << '\n'
        << "denoise.cluster_radius = " << radius_text(c.denoise_cluster_radius) << '\n'
        << "trajectory.segments = " << c.segments << '\n'
        << "trajectory.reverse = " << (c.reverse ? "true" : "false") << '\n'
        << "gd.tolerance = " << format_double(c.gd.tolerance) << '\n'
        << "gd.max_iterations = " << c.gd.max_iterations << '\n'
        << "gd.armijo_c = " << format_double(c.gd.armijo_c) << '\n'
        << "threads = " << c.threads << '\n'
        << "output.dir = " << c.output_dir << '\n';
    return out.str();
}

PointCloud preprocess_cloud(const PointCloud& raw, const PipelineConfig& config, ResolvedRadii& radii,
                            Diagnostics* diagnostics, StageTimes* times) {
    config.validate();
    raw.validate();
    if (raw.empty()) throw ConfigError("empty cloud");
    PointCloud smoothed;
    std::optional<SpatialIndex> index;
    {
        StageClock clock(times, Stage::Smooth);
        index.emplace(raw);
        radii.spacing = median_spacing(*index);
        radii.mls = config.mls_radius.value_or(kMlsRadiusFactor * radii.spacing);
        radii.normal = config.normal_radius.value_or(kNormalRadiusFactor * radii.spacing);
        radii.gfh = config.gfh_radius.value_or(kGfhRadiusFactor * radii.spacing);
        radii.cluster = config.denoise_cluster_radius.value_or(kClusterRadiusFactor * radii.spacing);
        if (raw.has_normals()) return raw;
        if (config.mls_enabled) {
            Diagnostics mls_diag;
            smoothed = mls_smooth(raw, *index, MlsParams{radii.mls, config.mls_order, config.threads}, &mls_diag);
            if (diagnostics) diagnostics->append(mls_diag, "mls");
            index.emplace(smoothed);
        } else {
            smoothed = raw;
        }
    }
    StageClock clock(times, Stage::Normals);
    Diagnostics normal_diag;
    auto out = estimate_normals(smoothed, *index,
                                NormalParams{radii.normal, config.viewpoint.value_or(raw.viewpoint), config.threads},
                                &normal_diag);
    if (diagnostics) diagnostics->append(normal_diag, "normals");
    return out;
}

double select_threshold(const VariationMap& map, const PipelineConfig& config) {
    return config.threshold_mode == ThresholdMode::Fixed ? config.threshold_value : otsu_threshold(map);
}

DetectionResult run_detection(const PointCloud& raw, const PipelineConfig& config, StageTimes* times) {
    DetectionResult r;
    r.processed = preprocess_cloud(raw, config, r.radii, &r.diagnostics, times);
    {
        StageClock clock(times, Stage::Variation);
        r.map = variation_map(r.processed, SpatialIndex(r.processed), r.radii.gfh, config.threads);
    }
    StageClock clock(times, Stage::Extraction);
    r.extracted = extract_groove(r.map, select_threshold(r.map, config));
    r.groove = config.denoise_enabled
                   ? denoise_groove(r.extracted, r.processed, config.denoise_min_cluster, r.radii.cluster)
                   : r.extracted;
    return r;
}

Trajectory run_trajectory(const PointCloud& processed, const GrooveSet& groove, const PipelineConfig& config,
                          StageTimes* times) {
    StageClock clock(times, Stage::Trajectory);
    TrajectoryConfig tc;
    tc.segments = config.segments;
    tc.gd = config.gd;
    tc.reverse = config.reverse;
    tc.threads = config.threads;
    return generate_trajectory(processed, groove, tc);
}

void write_detection_artifacts(const DetectionResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    save_indices(result.groove.indices, dir / "groove.idx");
    std::ostringstream map;
    write_variation_map(result.map, result.processed, map);
    write_text(dir / "variation.txt", map.str());
    std::ostringstream diag;
    result.diagnostics.write(diag);
    write_text(dir / "diagnostics.txt", diag.str());
    save_cloud(result.processed, dir / "processed.pcd");
}

void write_trajectory_artifacts(const Trajectory& trajectory, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ostringstream text, json;
    write_trajectory_text(trajectory, text);
    write_trajectory_json(trajectory, json);
    write_text(dir / "trajectory.txt", text.str());
    write_text(dir / "trajectory.json", json.str());
}

}  // namespace weldgroove
