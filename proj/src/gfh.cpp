#include "weldgroove/gfh.hpp"
#include "weldgroove/error.hpp"
#include "weldgroove/io.hpp"
#include "weldgroove/parallel.hpp"
#include "weldgroove/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <iterator>
#include <limits>
#include <ostream>

namespace weldgroove {
namespace {

void require_normals(const PointCloud& cloud) {
    if (!cloud.has_normals()) throw ConfigError("descriptor computation requires normals");
}

void local_into(const PointCloud& cloud, std::size_t center, std::span<const std::size_t> nbrs, AngleSet& out) {
    out.clear();
    const auto& uc = cloud.normal(center);
    for (const auto j : nbrs) out.push_back(pair_angle(uc, cloud.normal(j)));
}

void global_into(const PointCloud& cloud, std::size_t center, std::span<const std::size_t> nbrs,
                 const UnitVector3& benchmark, AngleSet& out) {
    out.clear();
    out.push_back(pair_angle(benchmark, cloud.normal(center)));
    for (const auto j : nbrs) out.push_back(pair_angle(benchmark, cloud.normal(j)));
}

/// Distance from p to the nearest edge of the box [lo, hi].
double edge_distance(const Point3& p, const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
    std::array<double, 3> d{};
    for (int a = 0; a < 3; ++a) d[a] = std::max(0.0, std::min(p[a] - lo[a], hi[a] - p[a]));
    std::sort(d.begin(), d.end());
    return std::hypot(d[0], d[1]);
}

}  // namespace

double pair_angle(const UnitVector3& u, const UnitVector3& v) noexcept {
    // Same angle as acos(u.v), without its loss of precision near 0 and pi.
    return std::atan2(u.vec().cross(v.vec()).norm(), u.dot(v));
}

AngleSet local_gfh(const PointCloud& cloud, const NeighborSet& neighbors) {
    require_normals(cloud);
    AngleSet out;
    local_into(cloud, neighbors.center_index, neighbors.neighbor_indices, out);
    return out;
}

AngleSet global_gfh(const PointCloud& cloud, const NeighborSet& neighbors, const UnitVector3& benchmark) {
    require_normals(cloud);
    AngleSet out;
    global_into(cloud, neighbors.center_index, neighbors.neighbor_indices, benchmark, out);
    return out;
}

Variance histogram_variance(std::span<const double> angles) noexcept {
    if (angles.empty()) return {0.0, true};
    // Shifted by the first sample so constant input gives exactly 0.
    const double shift = angles.front();
    double mean = 0.0;
    for (const double a : angles) mean += a - shift;
    mean /= static_cast<double>(angles.size());
    double ss = 0.0;
    for (const double a : angles) ss += (a - shift - mean) * (a - shift - mean);
    return {ss / static_cast<double>(angles.size()), false};
}

double descriptor(double sigma_local, double sigma_global) noexcept {
    return std::sqrt(sigma_local * sigma_local + sigma_global * sigma_global);
}

double VariationMap::max_descriptor() const noexcept {
    double m = 0.0;
    for (const auto& r : records) m = std::max(m, r.descriptor);
    return m;
}

VariationMap variation_map(const PointCloud& cloud, double radius, unsigned threads) {
    return variation_map(cloud, SpatialIndex(cloud), radius, threads);
}

VariationMap variation_map(const PointCloud& cloud, const SpatialIndex& index, double radius, unsigned threads) {
    require_normals(cloud);
    if (!(radius > 0.0)) throw ConfigError("descriptor radius must be positive");
    if (index.size() != cloud.size()) throw ConfigError("index does not match cloud");
    VariationMap map;
    map.radius = radius;
    map.benchmark = benchmark_normal(cloud);
    map.records.resize(cloud.size());
    std::vector<std::uint32_t> evaluations(cloud.size(), 0);
    parallel_for(cloud.size(), threads, [&](std::size_t i) {
        thread_local IndexList nbrs;
        thread_local AngleSet local, global;
        index.radius_search(cloud.points[i], radius, nbrs);
        std::erase(nbrs, i);
        local_into(cloud, i, nbrs, local);
        global_into(cloud, i, nbrs, map.benchmark, global);
        evaluations[i] = static_cast<std::uint32_t>(local.size() + global.size());
        VariationRecord& rec = map.records[i];
        rec.neighbors = static_cast<std::uint32_t>(nbrs.size());
        if (nbrs.size() < kMinDescriptorNeighbors) {
            rec.insufficient = true;
            return;
        }
        rec.sigma_local = histogram_variance(local).value;
        rec.sigma_global = histogram_variance(global).value;
        rec.descriptor = descriptor(rec.sigma_local, rec.sigma_global);
    });
    for (const auto e : evaluations) map.angle_evaluations += e;
    return map;
}

double otsu_threshold(const VariationMap& map, std::size_t bins) {
    if (bins < 2) throw ConfigError("Otsu needs at least two bins");
    const double max = map.max_descriptor();
    if (!(max > 0.0)) return std::numeric_limits<double>::min();
    std::vector<double> hist(bins, 0.0);
    for (const auto& r : map.records) {
        const auto b = std::min(bins - 1, static_cast<std::size_t>(r.descriptor / max * static_cast<double>(bins)));
        hist[b] += 1.0;
    }
    const double total = static_cast<double>(map.size());
    double sum_all = 0.0;
    for (std::size_t b = 0; b < bins; ++b) sum_all += static_cast<double>(b) * hist[b];
    double w0 = 0.0, sum0 = 0.0, best = -1.0;
    std::size_t best_split = 1;
    for (std::size_t t = 1; t < bins; ++t) {
        w0 += hist[t - 1];
        sum0 += static_cast<double>(t - 1) * hist[t - 1];
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double m0 = sum0 / w0, m1 = (sum_all - sum0) / w1;
        const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if (between > best) {
            best = between;
            best_split = t;
        }
    }
    return max * static_cast<double>(best_split) / static_cast<double>(bins);
}

GrooveSet extract_groove(const VariationMap& map, double threshold) {
    if (!(threshold > 0.0)) throw ConfigError("groove threshold must be positive");
    GrooveSet set;
    set.threshold = threshold;
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (map.records[i].descriptor >= threshold) set.indices.push_back(i);
    }
    return set;
}

std::vector<IndexList> euclidean_clusters(const PointCloud& cloud, const IndexList& subset, double radius) {
    if (!(radius > 0.0)) throw ConfigError("cluster radius must be positive");
    std::vector<IndexList> clusters;
    if (subset.empty()) return clusters;
    std::vector<Point3> pts;
    pts.reserve(subset.size());
    for (const auto i : subset) pts.push_back(cloud.points.at(i));
    const KdTree tree(pts);
    std::vector<bool> seen(subset.size(), false);
    IndexList found;
    for (std::size_t seed = 0; seed < subset.size(); ++seed) {
        if (seen[seed]) continue;
        IndexList members;
        std::deque<std::size_t> queue{seed};
        seen[seed] = true;
        while (!queue.empty()) {
            const auto k = queue.front();
            queue.pop_front();
            members.push_back(subset[k]);
            tree.radius_search(pts[k], radius, found);
            for (const auto m : found) {
                if (!seen[m]) {
                    seen[m] = true;
                    queue.push_back(m);
                }
            }
        }
        std::sort(members.begin(), members.end());
        clusters.push_back(std::move(members));
    }
    return clusters;
}

GrooveSet denoise_groove(const GrooveSet& groove, const PointCloud& cloud, std::size_t min_cluster,
                         double cluster_radius) {
    GrooveSet out;
    out.threshold = groove.threshold;
    if (groove.empty()) return out;
    Eigen::Vector3d lo = cloud.points.front(), hi = cloud.points.front();
    for (const auto& p : cloud.points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    auto within = [&](std::size_t i, double r) { return edge_distance(cloud.points[i], lo, hi) <= r; };
    auto edge_dominated = [&](const IndexList& cluster, double r) {
        const auto near = std::count_if(cluster.begin(), cluster.end(), [&](std::size_t i) { return within(i, r); });
        return 2 * static_cast<std::size_t>(near) >= cluster.size();
    };
    for (auto& cluster : euclidean_clusters(cloud, groove.indices, cluster_radius)) {
        if (cluster.size() < min_cluster) continue;
        if (!edge_dominated(cluster, cluster_radius)) {
            out.indices.insert(out.indices.end(), cluster.begin(), cluster.end());
            continue;
        }
        // Mostly edge response, but a groove may run into it: keep the parts that survive
        // once the edge band is cut away and do not hug an edge themselves.
        IndexList inner;
        std::copy_if(cluster.begin(), cluster.end(), std::back_inserter(inner),
                     [&](std::size_t i) { return !within(i, cluster_radius); });
        for (auto& part : euclidean_clusters(cloud, inner, cluster_radius)) {
            if (part.size() < min_cluster || edge_dominated(part, 2.0 * cluster_radius)) continue;
            out.indices.insert(out.indices.end(), part.begin(), part.end());
        }
    }
    std::sort(out.indices.begin(), out.indices.end());
    return out;
}

void write_variation_map(const VariationMap& map, const PointCloud& cloud, std::ostream& out) {
    if (map.size() != cloud.size()) throw ConfigError("variation map does not match cloud");
    out << "# index x y z sigma_local sigma_global descriptor flag\n";
    for (std::size_t i = 0; i < map.size(); ++i) {
        const auto& r = map.records[i];
        const auto& p = cloud.points[i];
        out << i << ' ' << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z()) << ' '
            << format_double(r.sigma_local) << ' ' << format_double(r.sigma_global) << ' '
            << format_double(r.descriptor) << ' ' << (r.insufficient ? 1 : 0) << '\n';
    }
}

}  // namespace weldgroove
