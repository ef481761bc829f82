#include "weldgroove/geometry.hpp"
#include "weldgroove/error.hpp"
#include "weldgroove/point_cloud.hpp"

#include <string>

namespace weldgroove {

UnitVector3 UnitVector3::normalized(const Eigen::Vector3d& v, double min_norm) {
    const double n = v.norm();
    if (!(n >= min_norm) || !std::isfinite(n)) {
        throw DegenerateError("cannot normalize vector of norm " + std::to_string(n));
    }
    return UnitVector3(v / n);
}

UnitVector3 UnitVector3::from_unit(const Eigen::Vector3d& v) {
    if (std::abs(v.norm() - 1.0) > 1e-9) {
        throw ConfigError("vector is not unit length");
    }
    return UnitVector3(v);
}

Eigen::Vector3d any_orthogonal(const Eigen::Vector3d& n) {
    // Cross with the axis least aligned with n.
    const Eigen::Vector3d a = std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
    return n.cross(a).normalized();
}

void PointCloud::validate() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!is_finite(points[i])) {
            throw ConfigError("point " + std::to_string(i) + " has non-finite coordinates");
        }
    }
    if (normals && normals->size() != points.size()) {
        throw ConfigError("normal count " + std::to_string(normals->size()) + " does not match point count " +
                          std::to_string(points.size()));
    }
}

}  // namespace weldgroove
