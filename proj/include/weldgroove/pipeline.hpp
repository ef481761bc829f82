#pragma once

#include "weldgroove/gfh.hpp"
#include "weldgroove/preprocess.hpp"
#include "weldgroove/trajectory.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace weldgroove {

enum class ThresholdMode { Otsu, Fixed };

/// Radius multipliers applied to the median point spacing when a radius is "auto".
inline constexpr double kMlsRadiusFactor = 6.0;
inline constexpr double kNormalRadiusFactor = 4.0;
inline constexpr double kGfhRadiusFactor = 4.0;
inline constexpr double kClusterRadiusFactor = 3.0;

/// Every pipeline setting. Radii left empty are derived from the median point spacing.
struct PipelineConfig {
    bool mls_enabled = true;
    std::optional<double> mls_radius;
    int mls_order = 2;
    std::optional<double> normal_radius;
    std::optional<Point3> viewpoint;  // empty: use the cloud's viewpoint
    std::optional<double> gfh_radius;
    ThresholdMode threshold_mode = ThresholdMode::Otsu;
    double threshold_value = 0.0;  // used when threshold_mode == Fixed
    bool denoise_enabled = true;
    std::size_t denoise_min_cluster = 30;
    std::optional<double> denoise_cluster_radius;
    std::size_t segments = 55;
    GdParams gd;
    bool reverse = false;
    unsigned threads = 0;  // 0: hardware concurrency
    std::string output_dir = ".";

    void validate() const;
};

/// Parses "key = value" text (or a JSON object). Unknown keys are errors.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);
/// Canonical key = value text; parse_config(emit_config(c)) reproduces c.
std::string emit_config(const PipelineConfig& config);

/// Radii actually used for one cloud.
struct ResolvedRadii {
    double spacing = 0.0;
    double mls = 0.0;
    double normal = 0.0;
    double gfh = 0.0;
    double cluster = 0.0;
};

enum class Stage : std::size_t { Smooth, Normals, Variation, Extraction, Trajectory };
inline constexpr std::size_t kStageCount = 5;
std::string_view stage_name(Stage stage);

/// Wall-clock seconds per stage plus the independently measured total.
struct StageTimes {
    std::array<double, kStageCount> seconds{};
    double total = 0.0;

    double& operator[](Stage s) { return seconds[static_cast<std::size_t>(s)]; }
    double operator[](Stage s) const { return seconds[static_cast<std::size_t>(s)]; }
    double stage_sum() const;
};

struct DetectionResult {
    PointCloud processed;  // smoothed, with normals
    ResolvedRadii radii;
    VariationMap map;
    GrooveSet extracted;  // straight after thresholding
    GrooveSet groove;     // after denoising
    Diagnostics diagnostics;
};

/// Smoothing and normal estimation. A cloud that already carries normals is returned as is.
PointCloud preprocess_cloud(const PointCloud& raw, const PipelineConfig& config, ResolvedRadii& radii,
                            Diagnostics* diagnostics = nullptr, StageTimes* times = nullptr);

/// Preprocess, descriptor map, threshold, extraction, and denoising.
DetectionResult run_detection(const PointCloud& raw, const PipelineConfig& config, StageTimes* times = nullptr);

Trajectory run_trajectory(const PointCloud& processed, const GrooveSet& groove, const PipelineConfig& config,
                          StageTimes* times = nullptr);

/// Threshold for a map under the configured mode.
double select_threshold(const VariationMap& map, const PipelineConfig& config);

/// Writes groove.idx, variation.txt, diagnostics.txt and processed.pcd into `dir`.
void write_detection_artifacts(const DetectionResult& result, const std::filesystem::path& dir);
/// Writes trajectory.txt and trajectory.json into `dir`.
void write_trajectory_artifacts(const Trajectory& trajectory, const std::filesystem::path& dir);

}  // namespace weldgroove
