#pragma once

#include "weldgroove/geometry.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace weldgroove {

/// Unorganized point cloud. Index i refers to the same physical point through
/// every pipeline stage; stages return new clouds instead of mutating.
struct PointCloud {
    std::vector<Point3> points;
    std::optional<std::vector<UnitVector3>> normals;
    Point3 viewpoint = Point3::Zero();

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }
    bool has_normals() const noexcept { return normals.has_value(); }

    const UnitVector3& normal(std::size_t i) const { return (*normals)[i]; }

    /// Throws ConfigError when points are non-finite or the normal count mismatches.
    void validate() const;
};

/// Sorted ascending list of point indices into one cloud.
using IndexList = std::vector<std::size_t>;

}  // namespace weldgroove
