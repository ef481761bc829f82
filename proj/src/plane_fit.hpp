#pragma once

#include "weldgroove/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <span>
#include <vector>

namespace weldgroove::detail {

struct PlaneFit {
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();  // smallest-eigenvalue eigenvector
    Eigen::Vector3d eigenvalues = Eigen::Vector3d::Zero();  // ascending
    bool degenerate = true;
};

/// Covariance plane fit over `points` (accumulated in the given order). Degenerate
/// when the two smallest eigenvalues are within 1e-12 * trace of each other.
inline PlaneFit fit_plane(std::span<const Point3> points) {
    PlaneFit fit;
    if (points.size() < 3) return fit;
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& p : points) mean += p;
    mean /= static_cast<double>(points.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& p : points) {
        const Eigen::Vector3d d = p - mean;
        cov.noalias() += d * d.transpose();
    }
    cov /= static_cast<double>(points.size());
    fit.centroid = mean;
    const double trace = cov.trace();
    if (!(trace > 0.0)) return fit;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    fit.eigenvalues = solver.eigenvalues();
    fit.normal = solver.eigenvectors().col(0).normalized();
    fit.degenerate = fit.eigenvalues[1] - fit.eigenvalues[0] < 1e-12 * trace;
    return fit;
}

/// Gathers the center point together with its neighbors in ascending index order.
template <class Cloud>
void gather_with_center(const Cloud& points, std::size_t center, std::span<const std::size_t> neighbors,
                        std::vector<Point3>& out) {
    out.clear();
    out.reserve(neighbors.size() + 1);
    bool placed = false;
    for (const auto j : neighbors) {
        if (!placed && center < j) {
            out.push_back(points[center]);
            placed = true;
        }
        out.push_back(points[j]);
    }
    if (!placed) out.push_back(points[center]);
}

}  // namespace weldgroove::detail
