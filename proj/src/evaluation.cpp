#include "weldgroove/evaluation.hpp"
#include "weldgroove/error.hpp"
#include "weldgroove/io.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <sstream>

namespace weldgroove {

void LabeledCloud::validate() const {
    cloud.validate();
    for (const auto i : truth) {
        if (i >= cloud.size()) throw ConfigError("truth index " + std::to_string(i) + " out of range");
    }
}

OverlapResult overlap_rate(const IndexList& detected, const IndexList& truth) {
    IndexList d = detected, t = truth;
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    OverlapResult r;
    r.n_detected = d.size();
    r.n_truth = t.size();
    std::size_t i = 0, j = 0;
    while (i < d.size() && j < t.size()) {
        if (d[i] < t[j]) ++i;
        else if (t[j] < d[i]) ++j;
        else {
            ++r.n_overlap;
            ++i;
            ++j;
        }
    }
    const std::size_t uni = r.n_detected + r.n_truth - r.n_overlap;
    if (uni == 0) {
        r.vacuous = true;
        r.rate = 1.0;
    } else {
        r.rate = static_cast<double>(r.n_overlap) / static_cast<double>(uni);
    }
    return r;
}

DeviationStats trajectory_deviation(const Trajectory& trajectory, const ReferenceCurve& reference) {
    DeviationStats s;
    for (const auto& w : trajectory.waypoints) {
        const double d = distance_to_curve(reference, w.position);
        s.mean += d;
        s.max = std::max(s.max, d);
        ++s.count;
    }
    if (s.count > 0) s.mean /= static_cast<double>(s.count);
    return s;
}

double polyline_length(const Trajectory& trajectory) {
    double len = 0.0;
    for (std::size_t k = 1; k < trajectory.waypoints.size(); ++k) {
        len += (trajectory.waypoints[k].position - trajectory.waypoints[k - 1].position).norm();
    }
    return len;
}

double TimingReport::mean_total() const {
    if (runs.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& r : runs) sum += r.total;
    return sum / static_cast<double>(runs.size());
}

StageTimes TimingReport::mean() const {
    StageTimes m;
    if (runs.empty()) return m;
    for (const auto& r : runs) {
        for (std::size_t s = 0; s < kStageCount; ++s) m.seconds[s] += r.seconds[s];
        m.total += r.total;
    }
    for (auto& s : m.seconds) s /= static_cast<double>(runs.size());
    m.total /= static_cast<double>(runs.size());
    return m;
}

TimingReport time_pipeline(const PointCloud& cloud, const PipelineConfig& config, std::size_t runs) {
    if (runs == 0) throw ConfigError("at least one timing run is required");
    TimingReport report;
    report.points = cloud.size();
    for (std::size_t k = 0; k < runs; ++k) {
        StageTimes times;
        const auto start = std::chrono::steady_clock::now();
        const auto detection = run_detection(cloud, config, &times);
        run_trajectory(detection.processed, detection.groove, config, &times);
        times.total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.runs.push_back(times);
    }
    return report;
}

double EvalReport::mean_rate() const {
    if (!batch_rates.empty()) {
        double s = 0.0;
        for (const auto r : batch_rates) s += r;
        return s / static_cast<double>(batch_rates.size());
    }
    return overlap ? overlap->rate : 0.0;
}

nlohmann::json to_json(const TimingReport& report) {
    using nlohmann::json;
    auto stages = [](const StageTimes& t) {
        json j;
        for (std::size_t s = 0; s < kStageCount; ++s) j[std::string(stage_name(static_cast<Stage>(s)))] = t.seconds[s];
        j["total"] = t.total;
        return j;
    };
    json runs = json::array();
    for (const auto& r : report.runs) runs.push_back(stages(r));
    return {{"points", report.points}, {"runs", runs}, {"mean", stages(report.mean())}};
}

nlohmann::json to_json(const EvalReport& report) {
    nlohmann::json j = nlohmann::json::object();
    if (report.overlap) {
        const auto& o = *report.overlap;
        j["overlap"] = {{"rate", o.rate},
                        {"n_detected", o.n_detected},
                        {"n_truth", o.n_truth},
                        {"n_overlap", o.n_overlap},
                        {"vacuous", o.vacuous}};
    }
    if (!report.batch_rates.empty()) {
        j["batch"] = {{"rates", report.batch_rates}, {"mean_rate", report.mean_rate()}};
    }
    if (report.deviation) {
        j["deviation"] = {{"mean", report.deviation->mean},
                          {"max", report.deviation->max},
                          {"waypoints", report.deviation->count}};
    }
    if (report.timing) j["timing"] = to_json(*report.timing);
    return j;
}

std::string csv_row(const std::string& name, std::optional<std::size_t> points, const EvalReport& report) {
    std::ostringstream out;
    out << name << ',';
    if (points) out << *points;
    out << ',';
    if (report.overlap || !report.batch_rates.empty()) out << format_double(report.mean_rate());
    out << ',';
    if (report.timing) out << format_double(report.timing->mean_total());
    return out.str();
}

double calibrate_threshold(const VariationMap& map, const PointCloud& processed, const IndexList& truth,
                           const PipelineConfig& config, double cluster_radius, std::size_t candidates) {
    if (candidates == 0) throw ConfigError("calibration needs at least one candidate");
    std::vector<double> values;
    for (const auto& r : map.records) {
        if (r.descriptor > 0.0) values.push_back(r.descriptor);
    }
    if (values.empty()) throw DegenerateError("no positive descriptor values to calibrate against");
    std::sort(values.begin(), values.end(), std::greater<>());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    if (truth.empty()) return values.front();

    // Threshold at rank k keeps values[0..k]. A detection more than 4x the truth size cannot reach 0.25.
    const std::size_t last = std::min(values.size(), 4 * truth.size()) - 1;
    std::map<std::size_t, double> rates;
    auto rate_at = [&](std::size_t k) {
        if (auto it = rates.find(k); it != rates.end()) return it->second;
        auto groove = extract_groove(map, values[k]);
        if (config.denoise_enabled) {
            groove = denoise_groove(groove, processed, config.denoise_min_cluster, cluster_radius);
        }
        return rates[k] = overlap_rate(groove.indices, truth).rate;
    };

    // Seed with the best rank before denoising, found by one sweep over the sorted descriptors.
    std::vector<char> is_truth(map.size(), 0);
    for (const auto i : truth) is_truth.at(i) = 1;
    std::vector<std::pair<double, bool>> ranked;
    ranked.reserve(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (map.records[i].descriptor > 0.0) ranked.emplace_back(map.records[i].descriptor, is_truth[i] != 0);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::size_t hits = 0, best_raw = 0;
    double best_raw_rate = -1.0;
    for (std::size_t j = 0, k = 0; j < ranked.size() && k <= last; ++k) {
        for (; j < ranked.size() && ranked[j].first >= values[k]; ++j) hits += ranked[j].second ? 1 : 0;
        const double rate = static_cast<double>(hits) / static_cast<double>(j + truth.size() - hits);
        if (rate > best_raw_rate) {
            best_raw_rate = rate;
            best_raw = k;
        }
    }
    rate_at(best_raw);

    const std::size_t step = std::max<std::size_t>(1, (last + 1) / candidates);
    for (std::size_t k = 0; k <= last; k += step) rate_at(k);
    auto best = [&] {
        return std::max_element(rates.begin(), rates.end(), [](const auto& a, const auto& b) {
                   return a.second < b.second || (a.second == b.second && a.first > b.first);
               })->first;
    };
    const std::size_t coarse = best();
    const std::size_t lo = coarse > step ? coarse - step : 0, hi = std::min(last, coarse + step);
    const std::size_t fine = std::max<std::size_t>(1, (hi - lo) / candidates);
    for (std::size_t k = lo; k <= hi; k += fine) rate_at(k);
    return values[best()];
}

}  // namespace weldgroove
