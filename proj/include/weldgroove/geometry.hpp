#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>

namespace weldgroove {

/// Position in meters.
using Point3 = Eigen::Vector3d;

/// Direction vector of unit length. Construction normalizes, so the invariant
/// |v| = 1 holds for every instance.
class UnitVector3 {
public:
    UnitVector3() : v_(0.0, 0.0, 1.0) {}

    /// Normalizes `v`. Throws DegenerateError if |v| < min_norm.
    static UnitVector3 normalized(const Eigen::Vector3d& v, double min_norm = 1e-12);

    /// Wraps a vector already known to be unit length (checked to 1e-9).
    static UnitVector3 from_unit(const Eigen::Vector3d& v);

    const Eigen::Vector3d& vec() const noexcept { return v_; }
    double x() const noexcept { return v_.x(); }
    double y() const noexcept { return v_.y(); }
    double z() const noexcept { return v_.z(); }

    double dot(const UnitVector3& other) const noexcept { return v_.dot(other.v_); }
    UnitVector3 operator-() const { return UnitVector3(-v_); }

    bool operator==(const UnitVector3& other) const noexcept { return v_ == other.v_; }

private:
    explicit UnitVector3(const Eigen::Vector3d& v) : v_(v) {}
    Eigen::Vector3d v_;
};

inline bool is_finite(const Point3& p) noexcept {
    return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z());
}

/// Any unit vector orthogonal to `n`.
Eigen::Vector3d any_orthogonal(const Eigen::Vector3d& n);

}  // namespace weldgroove
