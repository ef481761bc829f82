#pragma once

#include "weldgroove/point_cloud.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace weldgroove {

/// Radius neighborhood of one cloud point. The center itself is never listed and
/// neighbor indices are sorted ascending.
struct NeighborSet {
    std::size_t center_index = 0;
    IndexList neighbor_indices;
    double radius = 0.0;

    std::size_t size() const noexcept { return neighbor_indices.size(); }
    bool empty() const noexcept { return neighbor_indices.empty(); }
};

/// Immutable kd-tree over a fixed set of points. Queries are const and may run
/// concurrently. Radius queries are exact: a point q is reported iff
/// (q - c).squaredNorm() <= r * r, the same test a brute-force scan uses.
class KdTree {
public:
    /// Keeps a copy of the positions. Throws ConfigError on empty input.
    explicit KdTree(std::span<const Point3> points, std::size_t leaf_size = 16);
    explicit KdTree(const PointCloud& cloud) : KdTree(std::span<const Point3>(cloud.points)) {}

    std::size_t size() const noexcept { return points_.size(); }
    const Point3& point(std::size_t i) const { return points_[i]; }

    /// All indices within distance r of `query` (inclusive), sorted ascending.
    void radius_search(const Point3& query, double r, IndexList& out) const;

    /// Index of the closest point other than `exclude` that satisfies `accept`, if any.
    std::optional<std::size_t> nearest(const Point3& query, std::optional<std::size_t> exclude = std::nullopt,
                                       const std::function<bool(std::size_t)>& accept = {}) const;

private:
    struct Node {
        // Leaf when left == 0: items [begin, end) of order_.
        std::uint32_t begin = 0, end = 0;
        std::uint32_t left = 0, right = 0;
        int axis = 0;
        double split = 0.0;
    };

    std::uint32_t build(std::uint32_t begin, std::uint32_t end);
    void radius_recurse(std::uint32_t node, const Point3& q, double r2, IndexList& out) const;
    void nearest_recurse(std::uint32_t node, const Point3& q, std::optional<std::size_t> exclude,
                         const std::function<bool(std::size_t)>& accept, std::optional<std::size_t>& best,
                         double& best_d2) const;

    std::vector<Point3> points_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
    std::size_t leaf_size_;
};

/// Spatial index over a cloud; alias kept for readability at call sites.
using SpatialIndex = KdTree;

inline SpatialIndex build_index(const PointCloud& cloud) { return SpatialIndex(cloud); }

/// Neighbors of cloud point `center_index` within r, self excluded.
/// Throws ConfigError for r <= 0 or an out-of-range index.
NeighborSet radius_neighbors(const SpatialIndex& index, std::size_t center_index, double r);

/// Median nearest-neighbor distance, estimated over at most `max_samples` evenly strided points.
double median_spacing(const SpatialIndex& index, std::size_t max_samples = 20000);

}  // namespace weldgroove
