#include "test_support.hpp"
#include "weldgroove/error.hpp"
#include "weldgroove/evaluation.hpp"
#include "weldgroove/synthgen.hpp"

#include <gtest/gtest.h>

using namespace weldgroove;

namespace {

IndexList random_subset(std::mt19937_64& rng, std::size_t universe, double p) {
    std::bernoulli_distribution keep(p);
    IndexList out;
    for (std::size_t i = 0; i < universe; ++i)
        if (keep(rng)) out.push_back(i);
    return out;
}

Trajectory waypoints_at(const std::vector<Point3>& positions) {
    Trajectory t;
    for (std::size_t k = 0; k < positions.size(); ++k) {
        Waypoint w;
        w.ordinal = k;
        w.position = positions[k];
        t.waypoints.push_back(w);
    }
    return t;
}

}  // namespace

TEST(OverlapRate, Examples) {
    EXPECT_EQ(overlap_rate({1, 2, 3}, {1, 2, 3}).rate, 1.0);
    EXPECT_EQ(overlap_rate({1, 2, 3}, {4, 5}).rate, 0.0);
    IndexList d, t;
    for (std::size_t i = 0; i < 100; ++i) d.push_back(i);
    for (std::size_t i = 50; i < 150; ++i) t.push_back(i);
    const auto r = overlap_rate(d, t);
    EXPECT_EQ(r.n_detected, 100u);
    EXPECT_EQ(r.n_truth, 100u);
    EXPECT_EQ(r.n_overlap, 50u);
    EXPECT_DOUBLE_EQ(r.rate, 50.0 / 150.0);
}

TEST(OverlapRate, BothEmptyIsVacuousOne) {
    const auto r = overlap_rate({}, {});
    EXPECT_EQ(r.rate, 1.0);
    EXPECT_TRUE(r.vacuous);
    EXPECT_FALSE(overlap_rate({1}, {}).vacuous);
    EXPECT_EQ(overlap_rate({1}, {}).rate, 0.0);
}

TEST(OverlapRate, UnsortedAndDuplicateInputs) {
    EXPECT_EQ(overlap_rate({3, 1, 2, 2}, {2, 3, 1}).rate, 1.0);
}

TEST(OverlapRate, Properties) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const auto a = random_subset(rng, 300, 0.3), b = random_subset(rng, 300, 0.3);
        const auto ab = overlap_rate(a, b), ba = overlap_rate(b, a);
        EXPECT_EQ(ab.rate, ba.rate);
        EXPECT_GE(ab.rate, 0.0);
        EXPECT_LE(ab.rate, 1.0);
        EXPECT_LE(ab.n_overlap, std::min(ab.n_detected, ab.n_truth));
        EXPECT_EQ(ab.rate == 1.0, a == b);
        // Adding a true point never lowers the rate; adding a false one never raises it.
        for (const auto i : b) {
            if (std::find(a.begin(), a.end(), i) == a.end()) {
                auto more = a;
                more.push_back(i);
                EXPECT_GE(overlap_rate(more, b).rate, ab.rate);
                break;
            }
        }
        for (std::size_t i = 300; i < 301; ++i) {
            auto more = a;
            more.push_back(i);
            EXPECT_LE(overlap_rate(more, b).rate, ab.rate);
        }
    }
}

TEST(TrajectoryDeviation, OnLineIsZero) {
    const ReferenceCurve line = LineCurve{Point3(0, 0, 0), Point3(1, 0, 0)};
    const auto s = trajectory_deviation(waypoints_at({{0.1, 0, 0}, {0.5, 0, 0}, {0.9, 0, 0}}), line);
    EXPECT_EQ(s.max, 0.0);
    EXPECT_EQ(s.mean, 0.0);
    EXPECT_EQ(s.count, 3u);
}

TEST(TrajectoryDeviation, SingleOffsetWaypoint) {
    const ReferenceCurve line = LineCurve{Point3(0, 0, 0), Point3(1, 0, 0)};
    const auto s = trajectory_deviation(waypoints_at({{0.4, 0.0, 0.002}}), line);
    EXPECT_NEAR(s.max, 0.002, 1e-15);
    EXPECT_NEAR(s.mean, 0.002, 1e-15);
}

TEST(TrajectoryDeviation, BeyondSegmentEndUsesEndpoint) {
    const ReferenceCurve line = LineCurve{Point3(0, 0, 0), Point3(1, 0, 0)};
    EXPECT_NEAR(trajectory_deviation(waypoints_at({{1.003, 0.004, 0}}), line).max, 0.005, 1e-12);
}

TEST(TrajectoryDeviation, ArcDistance) {
    ArcCurve arc;
    arc.center = Point3::Zero();
    arc.u = UnitVector3::normalized({1, 0, 0});
    arc.v = UnitVector3::normalized({0, 1, 0});
    arc.radius = 0.1;
    arc.angle_begin = 0.0;
    arc.angle_end = std::numbers::pi / 2;
    const ReferenceCurve curve = arc;
    EXPECT_NEAR(trajectory_deviation(waypoints_at({{0.0, 0.103, 0.004}}), curve).max, 0.005, 1e-12);
    EXPECT_NEAR(curve_length(curve), 0.1 * std::numbers::pi / 2, 1e-15);
    // Outside the angular range the nearest endpoint counts.
    EXPECT_NEAR(distance_to_curve(curve, Point3(0.1, -0.01, 0.0)), 0.01, 1e-12);
}

TEST(PolylineLength, SumsSegments) {
    EXPECT_DOUBLE_EQ(polyline_length(waypoints_at({{0, 0, 0}, {3, 4, 0}, {3, 4, 12}})), 17.0);
    EXPECT_EQ(polyline_length(waypoints_at({{1, 1, 1}})), 0.0);
}

TEST(TimePipeline, RunsAndStageAccounting) {
    WorkpieceSpec spec;
    spec.length = 0.06;
    spec.width = 0.05;
    const auto w = generate_workpiece(spec);
    PipelineConfig cfg;
    cfg.threads = 1;
    const auto report = time_pipeline(w.cloud, cfg, 3);
    ASSERT_EQ(report.runs.size(), 3u);
    EXPECT_EQ(report.points, w.cloud.size());
    for (const auto& r : report.runs) {
        EXPECT_GT(r.total, 0.0);
        EXPECT_NEAR(r.stage_sum(), r.total, 0.01 * r.total);
    }
    const auto j = to_json(report);
    EXPECT_EQ(j["runs"].size(), 3u);
    EXPECT_TRUE(j["mean"].contains("total"));
    EXPECT_THROW(time_pipeline(w.cloud, cfg, 0), ConfigError);
}

TEST(EvalReport, JsonAndCsv) {
    EvalReport r;
    r.overlap = overlap_rate({1, 2}, {2, 3});
    r.batch_rates = {0.5, 1.0};
    EXPECT_DOUBLE_EQ(r.mean_rate(), 0.75);
    const auto j = to_json(r);
    EXPECT_DOUBLE_EQ(j["batch"]["mean_rate"].get<double>(), 0.75);
    EXPECT_EQ(j["overlap"]["n_overlap"].get<int>(), 1);
    EXPECT_EQ(csv_row("plate", 30000, r), "plate,30000,0.75,");
    EXPECT_EQ(csv_row("plate", std::nullopt, EvalReport{}), "plate,,,");
}

TEST(CalibrateThreshold, RecoversSeparableLabels) {
    auto c = fixtures::grid_plane(30, 30, 0.001);
    VariationMap m;
    IndexList truth;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const bool in = std::abs(c.points[i].x()) < 0.004;
        if (in) truth.push_back(i);
        m.records.push_back({0, 0, in ? 0.5 + 0.001 * static_cast<double>(i % 7) : 0.01 * static_cast<double>(i % 5), 8, false});
    }
    PipelineConfig cfg;
    const double t = calibrate_threshold(m, c, truth, cfg, 0.0015);
    EXPECT_EQ(overlap_rate(extract_groove(m, t).indices, truth).rate, 1.0);
    VariationMap zero;
    zero.records.resize(c.size());
    EXPECT_THROW(calibrate_threshold(zero, c, truth, cfg, 0.0015), DegenerateError);
}
