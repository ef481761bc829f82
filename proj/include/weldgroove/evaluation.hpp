#pragma once

#include "weldgroove/pipeline.hpp"
#include "weldgroove/reference_curve.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace weldgroove {

/// A cloud with its ground-truth groove indices.
struct LabeledCloud {
    PointCloud cloud;
    IndexList truth;

    /// Throws ConfigError if a truth index is out of range.
    void validate() const;
};

struct OverlapResult {
    double rate = 0.0;
    std::size_t n_detected = 0;
    std::size_t n_truth = 0;
    std::size_t n_overlap = 0;
    bool vacuous = false;  // both sets empty; rate defined as 1
};

/// Intersection over union of two index sets of the same cloud. Inputs need not be sorted.
OverlapResult overlap_rate(const IndexList& detected, const IndexList& truth);

struct DeviationStats {
    double mean = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

/// Closest distance from every waypoint to the reference curve.
DeviationStats trajectory_deviation(const Trajectory& trajectory, const ReferenceCurve& reference);

/// Polyline length through the waypoint positions.
double polyline_length(const Trajectory& trajectory);

struct TimingReport {
    std::vector<StageTimes> runs;
    std::size_t points = 0;

    double mean_total() const;
    StageTimes mean() const;
};

/// Runs the full pipeline (detection and trajectory) `runs` times on the raw cloud.
/// Errors from any stage propagate.
TimingReport time_pipeline(const PointCloud& cloud, const PipelineConfig& config, std::size_t runs = 1);

struct EvalReport {
    std::optional<OverlapResult> overlap;
    std::vector<double> batch_rates;  // one entry per detected set when evaluating several runs
    std::optional<DeviationStats> deviation;
    std::optional<TimingReport> timing;

    double mean_rate() const;
};

nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const TimingReport& report);

/// "name,points,rate,total_seconds"; fields that are unavailable are left empty.
std::string csv_row(const std::string& name, std::optional<std::size_t> points, const EvalReport& report);
inline constexpr const char* kCsvHeader = "name,points,overlap_rate,total_seconds";

/// Threshold that maximizes the overlap rate of extract (+ optional denoise) against `truth`.
/// Thresholds are the distinct positive descriptor values; a coarse pass over `candidates` ranks is
/// refined around its best rank. Ties prefer the higher threshold.
double calibrate_threshold(const VariationMap& map, const PointCloud& processed, const IndexList& truth,
                           const PipelineConfig& config, double cluster_radius, std::size_t candidates = 200);

}  // namespace weldgroove
