#include "weldgroove/spatial_index.hpp"
#include "weldgroove/error.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace weldgroove {

KdTree::KdTree(std::span<const Point3> points, std::size_t leaf_size)
    : points_(points.begin(), points.end()), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
    if (points_.empty()) throw ConfigError("cannot index an empty cloud");
    if (points_.size() >= std::numeric_limits<std::uint32_t>::max()) throw ConfigError("cloud too large to index");
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    nodes_.reserve(2 * points_.size() / leaf_size_ + 2);
    build(0, static_cast<std::uint32_t>(points_.size()));
}

std::uint32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(Node{begin, end, 0, 0, 0, 0.0});
    if (end - begin <= leaf_size_) return id;

    Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector3d hi = -lo;
    for (auto i = begin; i < end; ++i) {
        lo = lo.cwiseMin(points_[order_[i]]);
        hi = hi.cwiseMax(points_[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    if (hi[axis] == lo[axis]) return id;  // all points coincide

    const auto mid = begin + (end - begin) / 2;
    // Ties broken by index so the layout is a pure function of the input.
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         const double pa = points_[a][axis], pb = points_[b][axis];
                         return pa < pb || (pa == pb && a < b);
                     });
    const double split = points_[order_[mid]][axis];
    const auto left = build(begin, mid);
    const auto right = build(mid, end);
    auto& node = nodes_[id];
    node.left = left;
    node.right = right;
    node.axis = axis;
    node.split = split;
    return id;
}

void KdTree::radius_search(const Point3& query, double r, IndexList& out) const {
    out.clear();
    radius_recurse(0, query, r * r, out);
    std::sort(out.begin(), out.end());
}

void KdTree::radius_recurse(std::uint32_t id, const Point3& q, double r2, IndexList& out) const {
    const Node& node = nodes_[id];
    if (node.left == 0) {
        for (auto i = node.begin; i < node.end; ++i) {
            const auto idx = order_[i];
            if ((points_[idx] - q).squaredNorm() <= r2) out.push_back(idx);
        }
        return;
    }
    // Left holds coordinates <= split, right holds >= split. A far side can only
    // contribute if its slab distance alone is within r; rounding is monotone so
    // this never prunes a point the brute-force test would accept.
    const double diff = q[node.axis] - node.split;
    const double d2 = diff * diff;
    if (diff <= 0.0) {
        radius_recurse(node.left, q, r2, out);
        if (d2 <= r2) radius_recurse(node.right, q, r2, out);
    } else {
        radius_recurse(node.right, q, r2, out);
        if (d2 <= r2) radius_recurse(node.left, q, r2, out);
    }
}

std::optional<std::size_t> KdTree::nearest(const Point3& query, std::optional<std::size_t> exclude,
                                           const std::function<bool(std::size_t)>& accept) const {
    std::optional<std::size_t> best;
    double best_d2 = std::numeric_limits<double>::infinity();
    nearest_recurse(0, query, exclude, accept, best, best_d2);
    return best;
}

void KdTree::nearest_recurse(std::uint32_t id, const Point3& q, std::optional<std::size_t> exclude,
                             const std::function<bool(std::size_t)>& accept, std::optional<std::size_t>& best,
                             double& best_d2) const {
    const Node& node = nodes_[id];
    if (node.left == 0) {
        for (auto i = node.begin; i < node.end; ++i) {
            const std::size_t idx = order_[i];
            if (exclude && idx == *exclude) continue;
            const double d2 = (points_[idx] - q).squaredNorm();
            if (d2 < best_d2 || (d2 == best_d2 && best && idx < *best)) {
                if (accept && !accept(idx)) continue;
                best_d2 = d2;
                best = idx;
            }
        }
        return;
    }
    const double diff = q[node.axis] - node.split;
    const auto near = diff <= 0.0 ? node.left : node.right;
    const auto far = diff <= 0.0 ? node.right : node.left;
    nearest_recurse(near, q, exclude, accept, best, best_d2);
    if (diff * diff <= best_d2) nearest_recurse(far, q, exclude, accept, best, best_d2);
}

NeighborSet radius_neighbors(const SpatialIndex& index, std::size_t center_index, double r) {
    if (!(r > 0.0)) throw ConfigError("radius must be positive");
    if (center_index >= index.size()) {
        throw ConfigError("point index " + std::to_string(center_index) + " out of range");
    }
    NeighborSet set;
    set.center_index = center_index;
    set.radius = r;
    index.radius_search(index.point(center_index), r, set.neighbor_indices);
    auto it = std::lower_bound(set.neighbor_indices.begin(), set.neighbor_indices.end(), center_index);
    if (it != set.neighbor_indices.end() && *it == center_index) set.neighbor_indices.erase(it);
    return set;
}

double median_spacing(const SpatialIndex& index, std::size_t max_samples) {
    const std::size_t n = index.size();
    if (n < 2) throw DegenerateError("spacing undefined for fewer than two points");
    const std::size_t stride = std::max<std::size_t>(1, n / std::max<std::size_t>(max_samples, 1));
    std::vector<double> d;
    for (std::size_t i = 0; i < n; i += stride) {
        const auto j = index.nearest(index.point(i), i);
        d.push_back((index.point(*j) - index.point(i)).norm());
    }
    const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    if (!(*mid > 0.0)) throw DegenerateError("median spacing is zero (duplicate points)");
    return *mid;
}

}  // namespace weldgroove
