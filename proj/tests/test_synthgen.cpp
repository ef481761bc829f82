#include "weldgroove/error.hpp"
#include "weldgroove/preprocess.hpp"
#include "weldgroove/synthgen.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace weldgroove;

namespace {

double degrees(double rad) { return rad * 180.0 / std::numbers::pi; }

double angle_between(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    return std::atan2(a.cross(b).norm(), a.dot(b));
}

WorkpieceSpec noise_free(WorkpieceShape shape) {
    WorkpieceSpec s;
    s.shape = shape;
    s.noise_sigma = 0.0;
    return s;
}

}  // namespace

TEST(Synthgen, FlatPlateGridCount) {
    WorkpieceSpec s = noise_free(WorkpieceShape::StraightLine);
    s.groove = false;
    const auto w = generate_workpiece(s);
    EXPECT_EQ(w.cloud.size(), 200u * 150u);
    EXPECT_TRUE(w.truth.empty());
    EXPECT_FALSE(w.cloud.has_normals());
    for (const auto& p : w.cloud.points) EXPECT_EQ(p.z(), 0.0);
}

TEST(Synthgen, RightAngleWallsAtFortyFiveDegrees) {
    WorkpieceSpec s = noise_free(WorkpieceShape::StraightLine);
    s.opening_angle = std::numbers::pi / 2.0;
    s.depth = 0.005;
    const auto w = generate_workpiece(s);
    const double half_bottom = s.bottom_width / 2.0;
    std::size_t walls = 0;
    for (const auto i : w.truth) {
        const auto& p = w.cloud.points[i];
        if (std::abs(p.y()) <= half_bottom) continue;
        ++walls;
        const double tilt = degrees(std::acos(std::clamp(w.true_normals[i].z(), -1.0, 1.0)));
        EXPECT_NEAR(tilt, 45.0, 1e-9);
        // Wall normals lean away from the groove center line.
        EXPECT_LT(w.true_normals[i].y() * p.y(), 0.0);
    }
    EXPECT_GT(walls, 0u);
}

TEST(Synthgen, TruthIsExactlyTheCarvedPoints) {
    const auto s = noise_free(WorkpieceShape::StraightLine);
    const auto w = generate_workpiece(s);
    IndexList carved;
    for (std::size_t i = 0; i < w.cloud.size(); ++i) {
        if (w.cloud.points[i].z() < 0.0) carved.push_back(i);
    }
    EXPECT_EQ(carved, w.truth);
    EXPECT_TRUE(std::is_sorted(w.truth.begin(), w.truth.end()));
}

TEST(Synthgen, EstimatedWallNormalsMatchAnalytic) {
    WorkpieceSpec s = noise_free(WorkpieceShape::StraightLine);
    s.opening_angle = std::numbers::pi / 2.0;
    s.depth = 0.008;
    s.bottom_width = 0.004;
    const auto w = generate_workpiece(s);
    const auto est = estimate_normals(w.cloud, NormalParams{0.0021, w.cloud.viewpoint, 1});
    const double half_bottom = s.bottom_width / 2.0;
    const double half_top = s.groove_half_width();
    std::size_t checked = 0;
    for (const auto i : w.truth) {
        const auto& p = w.cloud.points[i];
        const double a = std::abs(p.y());
        // Interior of a wall: at least the search radius away from either crease.
        if (a < half_bottom + 0.003 || a > half_top - 0.003) continue;
        if (std::abs(p.x()) > 0.09) continue;
        ++checked;
        EXPECT_LE(degrees(angle_between(est.normal(i).vec(), w.true_normals[i].vec())), 2.0) << i;
    }
    EXPECT_GT(checked, 100u);
}

TEST(Synthgen, NoiseMovesPointsAlongTheNormal) {
    auto s = noise_free(WorkpieceShape::StraightLine);
    const auto clean = generate_workpiece(s);
    s.noise_sigma = 0.0003;
    const auto noisy = generate_workpiece(s);
    ASSERT_EQ(clean.cloud.size(), noisy.cloud.size());
    double sum2 = 0.0;
    for (std::size_t i = 0; i < clean.cloud.size(); ++i) {
        const Eigen::Vector3d d = noisy.cloud.points[i] - clean.cloud.points[i];
        const Eigen::Vector3d& n = clean.true_normals[i].vec();
        EXPECT_LT((d - d.dot(n) * n).norm(), 1e-12);
        sum2 += d.squaredNorm();
    }
    const double rms = std::sqrt(sum2 / static_cast<double>(clean.cloud.size()));
    EXPECT_NEAR(rms, 0.0003, 0.00001);
    EXPECT_EQ(clean.truth, noisy.truth);
}

TEST(Synthgen, DeterministicPerSeed) {
    WorkpieceSpec s;
    s.shape = WorkpieceShape::CurveLine;
    const auto a = generate_workpiece(s);
    const auto b = generate_workpiece(s);
    EXPECT_EQ(a.cloud.points, b.cloud.points);
    EXPECT_EQ(a.truth, b.truth);
    s.seed = 2;
    const auto c = generate_workpiece(s);
    EXPECT_NE(a.cloud.points, c.cloud.points);
}

TEST(Synthgen, ReferenceFollowsGrooveBottom) {
    for (const auto shape : {WorkpieceShape::StraightLine, WorkpieceShape::CurveLine, WorkpieceShape::Box,
                             WorkpieceShape::Cylinder}) {
        const auto w = generate_workpiece(noise_free(shape));
        ASSERT_FALSE(w.truth.empty()) << to_string(shape);
        // Bottom points of the groove sit within half a bottom width of the reference curve.
        std::size_t bottom = 0;
        for (const auto i : w.truth) {
            if (distance_to_curve(w.reference, w.cloud.points[i]) <= w.spec.bottom_width / 2.0 + 1e-9) ++bottom;
        }
        EXPECT_GT(bottom, 100u) << to_string(shape);
    }
}

TEST(Synthgen, CurveReferenceLength) {
    const auto w = generate_workpiece(noise_free(WorkpieceShape::CurveLine));
    const auto& arc = std::get<ArcCurve>(w.reference);
    const double half = std::asin(w.spec.length / (2.0 * w.spec.arc_radius));
    EXPECT_NEAR(curve_length(w.reference), 2.0 * half * arc.radius, 1e-12);
}

TEST(Synthgen, ShapesFaceTheViewpoint) {
    for (const auto shape : {WorkpieceShape::StraightLine, WorkpieceShape::CurveLine, WorkpieceShape::Box,
                             WorkpieceShape::Cylinder}) {
        const auto w = generate_workpiece(noise_free(shape));
        for (std::size_t i = 0; i < w.cloud.size(); ++i) {
            ASSERT_GT(w.true_normals[i].vec().dot(w.cloud.viewpoint - w.cloud.points[i]), 0.0) << to_string(shape);
        }
    }
}

TEST(Synthgen, InvalidSpecs) {
    WorkpieceSpec s;
    s.depth = s.thickness;
    EXPECT_THROW(generate_workpiece(s), ConfigError);
    s = WorkpieceSpec{};
    s.opening_angle = std::numbers::pi;
    EXPECT_THROW(s.validate(), ConfigError);
    s.opening_angle = 0.0;
    EXPECT_THROW(s.validate(), ConfigError);
    s = WorkpieceSpec{};
    s.pitch = 0.0;
    EXPECT_THROW(s.validate(), ConfigError);
    s = WorkpieceSpec{};
    s.depth = -0.001;
    EXPECT_THROW(s.validate(), ConfigError);
    s = WorkpieceSpec{};
    s.shape = WorkpieceShape::CurveLine;
    s.arc_radius = 0.09;
    EXPECT_THROW(s.validate(), ConfigError);
    s = WorkpieceSpec{};
    s.groove = false;
    s.depth = 1.0;  // ignored without a groove
    EXPECT_NO_THROW(s.validate());
}

TEST(Synthgen, SpecTextRoundTrip) {
    WorkpieceSpec s;
    s.shape = WorkpieceShape::Cylinder;
    s.seed = 42;
    s.noise_sigma = 0.00025;
    s.opening_angle = 1.1;
    const auto back = parse_workpiece_spec(emit_workpiece_spec(s));
    EXPECT_EQ(emit_workpiece_spec(back), emit_workpiece_spec(s));
    EXPECT_EQ(back.seed, 42u);
    EXPECT_EQ(back.opening_angle, 1.1);
    EXPECT_EQ(back.shape, WorkpieceShape::Cylinder);
}

TEST(Synthgen, SpecParsing) {
    const auto s = parse_workpiece_spec("shape = box\npitch = 0.002\n");
    EXPECT_EQ(s.shape, WorkpieceShape::Box);
    EXPECT_EQ(s.pitch, 0.002);
    EXPECT_THROW(parse_workpiece_spec("shape = sphere\n"), ConfigError);
    EXPECT_THROW(parse_workpiece_spec("colour = red\n"), ParseError);
    EXPECT_THROW(parse_workpiece_spec("seed = -1\n"), ConfigError);
    EXPECT_THROW(parse_workpiece_spec("groove.depth = 0.02\n"), ConfigError);
    const auto j = parse_workpiece_spec(R"({"shape": "curve-line", "groove": {"depth": 0.004}})");
    EXPECT_EQ(j.shape, WorkpieceShape::CurveLine);
    EXPECT_EQ(j.depth, 0.004);
}

TEST(Synthgen, ShapeNames) {
    for (const auto shape : {WorkpieceShape::StraightLine, WorkpieceShape::CurveLine, WorkpieceShape::Box,
                             WorkpieceShape::Cylinder}) {
        EXPECT_EQ(shape_from_string(to_string(shape)), shape);
    }
}
