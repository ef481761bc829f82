#pragma once

#include "weldgroove/point_cloud.hpp"
#include "weldgroove/spatial_index.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace weldgroove {

struct MlsParams {
    double search_radius = 0.0;
    int polynomial_order = 2;  // 1 or 2
    unsigned threads = 1;

    void validate() const;
};

struct NormalParams {
    double search_radius = 0.0;
    Point3 viewpoint = Point3::Zero();
    unsigned threads = 1;

    void validate() const;
};

/// Per-point notes about neighborhoods that could not be processed normally.
struct Diagnostics {
    struct Entry {
        std::size_t index;
        std::string reason;
    };
    std::vector<Entry> entries;

    std::size_t size() const noexcept { return entries.size(); }
    void add(std::size_t index, std::string reason) { entries.push_back({index, std::move(reason)}); }
    void append(const Diagnostics& other, const std::string& stage);

    /// One line per entry: "<index> <reason>".
    void write(std::ostream& out) const;
};

/// Projects every point onto a Gaussian-weighted least-squares polynomial fitted over
/// its radius neighborhood (bandwidth = radius / 2). Points with fewer than three
/// neighbors or a collinear neighborhood pass through unchanged and are reported.
/// The result has no normals; point order and count are preserved.
PointCloud mls_smooth(const PointCloud& cloud, const MlsParams& params, Diagnostics* diagnostics = nullptr);
PointCloud mls_smooth(const PointCloud& cloud, const SpatialIndex& index, const MlsParams& params,
                      Diagnostics* diagnostics = nullptr);

/// Least-squares plane normal (smallest covariance eigenvector) per point, oriented
/// toward params.viewpoint. Degenerate neighborhoods copy the normal of the nearest
/// point that has a valid one and are reported.
PointCloud estimate_normals(const PointCloud& cloud, const NormalParams& params,
                            Diagnostics* diagnostics = nullptr);
PointCloud estimate_normals(const PointCloud& cloud, const SpatialIndex& index, const NormalParams& params,
                            Diagnostics* diagnostics = nullptr);

/// Normalized sum of all point normals: the dominant surface direction.
/// Throws DegenerateError("degenerate benchmark") when the sum nearly cancels.
UnitVector3 benchmark_normal(const PointCloud& cloud);

/// Same reduction over a subset of normals.
UnitVector3 benchmark_normal(const PointCloud& cloud, const IndexList& subset);

}  // namespace weldgroove
