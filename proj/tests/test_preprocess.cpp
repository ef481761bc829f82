#include "test_support.hpp"
#include "weldgroove/error.hpp"
#include "weldgroove/preprocess.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace weldgroove;

namespace {

double rms_z(const PointCloud& c) {
    double s = 0.0;
    for (const auto& p : c.points) s += p.z() * p.z();
    return std::sqrt(s / static_cast<double>(c.size()));
}

PointCloud with_normals(PointCloud c, const std::vector<Eigen::Vector3d>& normals) {
    std::vector<UnitVector3> n;
    for (const auto& v : normals) n.push_back(UnitVector3::normalized(v));
    c.points.resize(normals.size(), Point3::Zero());
    c.normals = n;
    return c;
}

/// Patch of the sphere |p| = radius around the +z pole, sampled on a 2D grid of the given pitch.
PointCloud sphere_patch(double radius, double pitch, double half_extent) {
    PointCloud c;
    const int n = static_cast<int>(half_extent / pitch);
    for (int i = -n; i <= n; ++i) {
        for (int j = -n; j <= n; ++j) {
            const double x = i * pitch, y = j * pitch;
            c.points.emplace_back(x, y, std::sqrt(radius * radius - x * x - y * y));
        }
    }
    c.viewpoint = Point3(0, 0, 2 * radius);
    return c;
}

}  // namespace

TEST(MlsSmooth, PlanarCloudIsUnchanged) {
    auto c = fixtures::grid_plane(30, 30, 0.001);
    Diagnostics d;
    const auto out = mls_smooth(c, MlsParams{0.005, 2, 1}, &d);
    ASSERT_EQ(out.size(), c.size());
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_LT((out.points[i] - c.points[i]).norm(), 1e-9);
    EXPECT_EQ(d.size(), 0u);
    EXPECT_FALSE(out.has_normals());
}

TEST(MlsSmooth, TiltedPlaneIsIdempotent) {
    auto c = fixtures::grid_plane(25, 25, 0.001);
    const Eigen::Matrix3d r = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
    for (auto& p : c.points) p = r * p + Point3(0.1, -0.2, 0.3);
    const MlsParams params{0.006, 2, 1};
    const auto once = mls_smooth(c, params);
    const auto twice = mls_smooth(once, params);
    for (std::size_t i = 0; i < c.size(); ++i) {
        EXPECT_LT((once.points[i] - c.points[i]).norm(), 1e-9);
        EXPECT_LT((twice.points[i] - once.points[i]).norm(), 1e-9);
    }
}

TEST(MlsSmooth, HalvesNoiseOnPlane) {
    auto c = fixtures::grid_plane(60, 60, 0.001);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 0.0005);
    for (auto& p : c.points) p.z() += g(rng);
    const auto out = mls_smooth(c, MlsParams{0.006, 2, 1});
    EXPECT_LE(rms_z(out), 0.5 * rms_z(c));
}

TEST(MlsSmooth, QuadraticSurfaceDisplacementIsSmall) {
    PointCloud c;
    for (int i = -20; i <= 20; ++i)
        for (int j = -20; j <= 20; ++j) {
            const double x = i * 0.001, y = j * 0.001;
            c.points.emplace_back(x, y, x * x);
        }
    const auto out = mls_smooth(c, MlsParams{0.005, 2, 1});
    double worst = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) worst = std::max(worst, (out.points[i] - c.points[i]).norm());
    EXPECT_LE(worst, 1e-4);
}

TEST(MlsSmooth, SparseAndCollinearPointsPassThrough) {
    PointCloud c;
    for (int i = 0; i < 10; ++i) c.points.emplace_back(i * 0.001, 0.0, 0.0);  // collinear run
    c.points.emplace_back(1.0, 1.0, 1.0);                                    // isolated
    Diagnostics d;
    const auto out = mls_smooth(c, MlsParams{0.0035, 2, 1}, &d);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(out.points[i], c.points[i]);
    EXPECT_EQ(d.size(), c.size());
    std::ostringstream text;
    d.write(text);
    EXPECT_NE(text.str().find("10 "), std::string::npos);
}

TEST(MlsSmooth, ThreadCountDoesNotChangeOutput) {
    auto c = fixtures::grid_plane(40, 40, 0.001);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 0.0003);
    for (auto& p : c.points) p.z() += g(rng);
    const auto a = mls_smooth(c, MlsParams{0.005, 2, 1});
    const auto b = mls_smooth(c, MlsParams{0.005, 2, 4});
    EXPECT_EQ(a.points, b.points);
}

TEST(MlsParams, ValidateRejectsBadValues) {
    EXPECT_THROW((MlsParams{0.0, 2, 1}).validate(), ConfigError);
    EXPECT_THROW((MlsParams{0.01, 3, 1}).validate(), ConfigError);
    EXPECT_NO_THROW((MlsParams{0.01, 1, 1}).validate());
    EXPECT_THROW((NormalParams{-1.0, Point3::Zero(), 1}).validate(), ConfigError);
}

TEST(EstimateNormals, PlaneNormalsFollowViewpoint) {
    const auto c = fixtures::grid_plane(20, 20, 0.001);
    for (const double side : {1.0, -1.0}) {
        const auto out = estimate_normals(c, NormalParams{0.004, Point3(0, 0, side), 1});
        ASSERT_TRUE(out.has_normals());
        for (std::size_t i = 0; i < out.size(); ++i) {
            EXPECT_LT((out.normal(i).vec() - Eigen::Vector3d(0, 0, side)).cwiseAbs().maxCoeff(), 1e-6);
        }
    }
}

TEST(EstimateNormals, SpherePatchWithinTwoDegrees) {
    const auto c = sphere_patch(0.1, 0.002, 0.04);
    const auto out = estimate_normals(c, NormalParams{0.008, c.viewpoint, 1});
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto& p = c.points[i];
        if (std::hypot(p.x(), p.y()) > 0.03) continue;  // interior only
        const double cosang = std::clamp(out.normal(i).vec().dot(p.normalized()), -1.0, 1.0);
        EXPECT_LE(std::acos(cosang) * 180.0 / std::numbers::pi, 2.0) << i;
    }
}

TEST(EstimateNormals, RotationEquivariance) {
    std::mt19937_64 rng(99);
    auto c = sphere_patch(0.1, 0.002, 0.02);
    std::normal_distribution<double> g(0.0, 0.0002);
    for (auto& p : c.points) p += Point3(g(rng), g(rng), g(rng));
    const NormalParams params{0.007, c.viewpoint, 1};
    const auto base = estimate_normals(c, params);
    for (int trial = 0; trial < 5; ++trial) {
        const auto t = fixtures::random_rigid(rng);
        PointCloud moved = c;
        for (auto& p : moved.points) p = t * p;
        moved.viewpoint = t * c.viewpoint;
        const auto out = estimate_normals(moved, NormalParams{0.007, moved.viewpoint, 1});
        for (std::size_t i = 0; i < c.size(); ++i) {
            const Eigen::Vector3d expect = t.linear() * base.normal(i).vec();
            EXPECT_LT((out.normal(i).vec() - expect).cwiseAbs().maxCoeff(), 1e-6);
        }
    }
}

TEST(EstimateNormals, DegenerateNeighborhoodBorrowsNearestValidNormal) {
    auto c = fixtures::grid_plane(10, 10, 0.001);
    c.points.emplace_back(0.02, 0.0, 0.0);  // isolated, beyond the search radius
    Diagnostics d;
    const auto out = estimate_normals(c, NormalParams{0.0025, Point3(0, 0, 1), 1}, &d);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d.entries[0].index, c.size() - 1);
    EXPECT_EQ(out.normal(c.size() - 1).vec(), Eigen::Vector3d(0, 0, 1));
}

TEST(EstimateNormals, AllUnitLength) {
    auto c = fixtures::random_cloud(2000, 4, 0.02);
    const auto out = estimate_normals(c, NormalParams{0.006, Point3(0, 0, 1), 1});
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out.normal(i).vec().norm(), 1.0, 1e-9);
}

TEST(BenchmarkNormal, AllUp) {
    const auto c = with_normals(PointCloud{}, {{0, 0, 1}, {0, 0, 1}, {0, 0, 1}});
    EXPECT_EQ(benchmark_normal(c).vec(), Eigen::Vector3d(0, 0, 1));
}

TEST(BenchmarkNormal, HalfXHalfY) {
    const auto c = with_normals(PointCloud{}, {{1, 0, 0}, {0, 1, 0}, {1, 0, 0}, {0, 1, 0}});
    const auto b = benchmark_normal(c);
    EXPECT_NEAR(b.x(), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(b.y(), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_EQ(b.z(), 0.0);
}

TEST(BenchmarkNormal, OppositeNormalsAreDegenerate) {
    const auto c = with_normals(PointCloud{}, {{0, 0, 1}, {0, 0, -1}});
    try {
        benchmark_normal(c);
        FAIL();
    } catch (const DegenerateError& e) {
        EXPECT_NE(std::string(e.what()).find("degenerate benchmark"), std::string::npos);
    }
}

TEST(BenchmarkNormal, SubsetUsesOnlyListedNormals) {
    const auto c = with_normals(PointCloud{}, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    EXPECT_EQ(benchmark_normal(c, {2}).vec(), Eigen::Vector3d(0, 0, 1));
}

TEST(BenchmarkNormal, PermutationInvariant) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Eigen::Vector3d> n;
    for (int i = 0; i < 200; ++i) n.emplace_back(g(rng), g(rng), g(rng) + 2.0);
    const auto base = benchmark_normal(with_normals(PointCloud{}, n));
    for (int t = 0; t < 10; ++t) {
        std::shuffle(n.begin(), n.end(), rng);
        const auto b = benchmark_normal(with_normals(PointCloud{}, n));
        EXPECT_LT((b.vec() - base.vec()).norm(), 1e-12);
    }
}
