#pragma once

#include "weldgroove/point_cloud.hpp"
#include "weldgroove/spatial_index.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace weldgroove {

/// Included angles in radians, each in [0, pi].
using AngleSet = std::vector<double>;

/// Included angle between two unit vectors; the dot product is clamped to [-1, 1].
double pair_angle(const UnitVector3& u, const UnitVector3& v) noexcept;

/// Angle between the center normal and each neighbor normal, in neighbor order.
AngleSet local_gfh(const PointCloud& cloud, const NeighborSet& neighbors);

/// Angle between the benchmark and each normal of {center} + neighbors, center first.
AngleSet global_gfh(const PointCloud& cloud, const NeighborSet& neighbors, const UnitVector3& benchmark);

struct Variance {
    double value = 0.0;
    bool insufficient = false;  // set for empty input, where value is defined as 0
};

/// Population variance (divides by the number of angles).
Variance histogram_variance(std::span<const double> angles) noexcept;

/// Euclidean combination of the local and global variances.
double descriptor(double sigma_local, double sigma_global) noexcept;

struct VariationRecord {
    double sigma_local = 0.0;
    double sigma_global = 0.0;
    double descriptor = 0.0;
    std::uint32_t neighbors = 0;
    bool insufficient = false;  // fewer than kMinDescriptorNeighbors neighbors; descriptor forced to 0
};

/// Points with fewer neighbors than this get descriptor 0 and the insufficient flag.
inline constexpr std::size_t kMinDescriptorNeighbors = 3;

struct VariationMap {
    std::vector<VariationRecord> records;  // one per cloud point
    double radius = 0.0;
    UnitVector3 benchmark;
    std::uint64_t angle_evaluations = 0;  // pair_angle calls made while building the map

    std::size_t size() const noexcept { return records.size(); }
    double max_descriptor() const noexcept;
};

/// Surface-variation descriptor for every point. Builds the index internally unless one is given.
/// Output is identical for any thread count.
VariationMap variation_map(const PointCloud& cloud, double radius, unsigned threads = 1);
VariationMap variation_map(const PointCloud& cloud, const SpatialIndex& index, double radius, unsigned threads = 1);

struct GrooveSet {
    IndexList indices;  // strictly ascending
    double threshold = 0.0;

    std::size_t size() const noexcept { return indices.size(); }
    bool empty() const noexcept { return indices.empty(); }
};

/// Otsu threshold over a `bins`-bin histogram of the descriptor values on [0, max].
/// Returns a positive value; when every descriptor is 0 the result exceeds them all.
double otsu_threshold(const VariationMap& map, std::size_t bins = 256);

/// Indices whose descriptor is >= threshold. Throws ConfigError unless threshold > 0.
GrooveSet extract_groove(const VariationMap& map, double threshold);

/// Euclidean clustering of the groove points (linkage distance `cluster_radius`).
/// Drops clusters smaller than `min_cluster`. A cluster lying mostly (at least half its
/// points) within `cluster_radius` of an edge of the cloud's axis-aligned bounding box
/// is edge response; only its parts that remain once that band is cut away, reach
/// `min_cluster`, and do not themselves lie mostly within twice the radius of an edge survive.
GrooveSet denoise_groove(const GrooveSet& groove, const PointCloud& cloud, std::size_t min_cluster,
                         double cluster_radius);

/// Euclidean clusters of a subset of cloud points; each cluster sorted, clusters ordered by first index.
std::vector<IndexList> euclidean_clusters(const PointCloud& cloud, const IndexList& subset, double radius);

/// Table with one row per point: index x y z sigma_local sigma_global descriptor flag.
void write_variation_map(const VariationMap& map, const PointCloud& cloud, std::ostream& out);

}  // namespace weldgroove
