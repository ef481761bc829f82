#include "weldgroove/preprocess.hpp"
#include "weldgroove/error.hpp"
#include "weldgroove/parallel.hpp"
#include "plane_fit.hpp"

#include <Eigen/QR>

#include <cmath>
#include <optional>
#include <ostream>

namespace weldgroove {
namespace {

enum class Status : unsigned char { Ok, TooFewNeighbors, Collinear, RankDeficient };

const char* reason(Status s) {
    switch (s) {
        case Status::TooFewNeighbors: return "insufficient-neighbors";
        case Status::Collinear: return "collinear-neighborhood";
        case Status::RankDeficient: return "rank-deficient-fit";
        default: return "ok";
    }
}

/// Weighted polynomial height fit in the local tangent frame; returns the height at the origin.
std::optional<double> fit_height(const std::vector<Point3>& pts, const Point3& origin, const Eigen::Vector3d& n,
                                 double radius, int order) {
    const Eigen::Vector3d u = any_orthogonal(n);
    const Eigen::Vector3d v = n.cross(u);
    const double inv_r = 1.0 / radius;
    const double h = radius / 2.0;
    const double inv_h2 = 1.0 / (h * h);
    for (; order >= 1; --order) {
        const int terms = order == 2 ? 6 : 3;
        if (static_cast<int>(pts.size()) < terms) continue;
        Eigen::MatrixXd a(pts.size(), terms);
        Eigen::VectorXd b(pts.size());
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const Eigen::Vector3d d = pts[k] - origin;
            const double w = std::sqrt(std::exp(-d.squaredNorm() * inv_h2));
            const double du = d.dot(u) * inv_r, dv = d.dot(v) * inv_r;
            a(k, 0) = w;
            a(k, 1) = w * du;
            a(k, 2) = w * dv;
            if (terms == 6) {
                a(k, 3) = w * du * du;
                a(k, 4) = w * du * dv;
                a(k, 5) = w * dv * dv;
            }
            b(k) = w * d.dot(n) * inv_r;
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
        qr.setThreshold(1e-10);
        if (qr.rank() < terms) continue;
        const Eigen::VectorXd c = qr.solve(b);
        return c(0) * radius;
    }
    return std::nullopt;
}

}  // namespace

void MlsParams::validate() const {
    if (!(search_radius > 0.0)) throw ConfigError("MLS search radius must be positive");
    if (polynomial_order != 1 && polynomial_order != 2) throw ConfigError("MLS polynomial order must be 1 or 2");
}

void NormalParams::validate() const {
    if (!(search_radius > 0.0)) throw ConfigError("normal search radius must be positive");
    if (!is_finite(viewpoint)) throw ConfigError("viewpoint must be finite");
}

void Diagnostics::append(const Diagnostics& other, const std::string& stage) {
    for (const auto& e : other.entries) entries.push_back({e.index, stage + ":" + e.reason});
}

void Diagnostics::write(std::ostream& out) const {
    for (const auto& e : entries) out << e.index << ' ' << e.reason << '\n';
}

PointCloud mls_smooth(const PointCloud& cloud, const MlsParams& params, Diagnostics* diagnostics) {
    return mls_smooth(cloud, SpatialIndex(cloud), params, diagnostics);
}

PointCloud mls_smooth(const PointCloud& cloud, const SpatialIndex& index, const MlsParams& params,
                      Diagnostics* diagnostics) {
    params.validate();
    PointCloud out;
    out.points = cloud.points;
    out.viewpoint = cloud.viewpoint;
    std::vector<Status> status(cloud.size(), Status::Ok);
    parallel_for(cloud.size(), params.threads, [&](std::size_t i) {
        thread_local IndexList nbrs;
        thread_local std::vector<Point3> pts;
        index.radius_search(cloud.points[i], params.search_radius, nbrs);
        std::erase(nbrs, i);
        if (nbrs.size() < 3) {
            status[i] = Status::TooFewNeighbors;
            return;
        }
        detail::gather_with_center(cloud.points, i, nbrs, pts);
        const auto plane = detail::fit_plane(pts);
        if (plane.degenerate) {
            status[i] = Status::Collinear;
            return;
        }
        const auto height = fit_height(pts, cloud.points[i], plane.normal, params.search_radius,
                                       params.polynomial_order);
        if (!height) {
            status[i] = Status::RankDeficient;
            return;
        }
        out.points[i] = cloud.points[i] + *height * plane.normal;
    });
    if (diagnostics) {
        for (std::size_t i = 0; i < status.size(); ++i) {
            if (status[i] != Status::Ok) diagnostics->add(i, reason(status[i]));
        }
    }
    return out;
}

PointCloud estimate_normals(const PointCloud& cloud, const NormalParams& params, Diagnostics* diagnostics) {
    return estimate_normals(cloud, SpatialIndex(cloud), params, diagnostics);
}

PointCloud estimate_normals(const PointCloud& cloud, const SpatialIndex& index, const NormalParams& params,
                            Diagnostics* diagnostics) {
    params.validate();
    std::vector<Eigen::Vector3d> normals(cloud.size(), Eigen::Vector3d::Zero());
    std::vector<Status> status(cloud.size(), Status::Ok);
    parallel_for(cloud.size(), params.threads, [&](std::size_t i) {
        thread_local IndexList nbrs;
        thread_local std::vector<Point3> pts;
        index.radius_search(cloud.points[i], params.search_radius, nbrs);
        std::erase(nbrs, i);
        if (nbrs.size() < 3) {
            status[i] = Status::TooFewNeighbors;
            return;
        }
        detail::gather_with_center(cloud.points, i, nbrs, pts);
        const auto plane = detail::fit_plane(pts);
        if (plane.degenerate) {
            status[i] = Status::Collinear;
            return;
        }
        Eigen::Vector3d n = plane.normal;
        if (n.dot(params.viewpoint - cloud.points[i]) < 0.0) n = -n;
        normals[i] = n;
    });

    PointCloud out;
    out.points = cloud.points;
    out.viewpoint = cloud.viewpoint;
    std::vector<UnitVector3> unit(cloud.size());
    bool any_valid = false;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (status[i] == Status::Ok) {
            unit[i] = UnitVector3::normalized(normals[i]);
            any_valid = true;
        }
    }
    if (!any_valid) throw DegenerateError("no point has a valid normal neighborhood");
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (status[i] == Status::Ok) continue;
        const auto donor = index.nearest(cloud.points[i], i, [&](std::size_t j) { return status[j] == Status::Ok; });
        unit[i] = unit[*donor];
        if (diagnostics) diagnostics->add(i, std::string(reason(status[i])) + " normal-from " + std::to_string(*donor));
    }
    out.normals = std::move(unit);
    return out;
}

UnitVector3 benchmark_normal(const PointCloud& cloud) {
    if (!cloud.has_normals()) throw ConfigError("benchmark normal requires normals");
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (const auto& n : *cloud.normals) sum += n.vec();
    if (!(sum.norm() >= 1e-12)) throw DegenerateError("degenerate benchmark");
    return UnitVector3::normalized(sum);
}

UnitVector3 benchmark_normal(const PointCloud& cloud, const IndexList& subset) {
    if (!cloud.has_normals()) throw ConfigError("benchmark normal requires normals");
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (const auto i : subset) sum += cloud.normal(i).vec();
    if (!(sum.norm() >= 1e-12)) throw DegenerateError("degenerate benchmark");
    return UnitVector3::normalized(sum);
}

}  // namespace weldgroove
