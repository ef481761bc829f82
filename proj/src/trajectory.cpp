#include "weldgroove/trajectory.hpp"
#include "weldgroove/error.hpp"
#include "weldgroove/io.hpp"
#include "weldgroove/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>

namespace weldgroove {
namespace {

constexpr double kSkipDistance = 1e-12;

double sum_dist_normalized(const std::vector<Eigen::Vector3d>& q, const Eigen::Vector3d& x) {
    double f = 0.0;
    for (const auto& p : q) f += (x - p).norm();
    return f;
}

}  // namespace

void GdParams::validate() const {
    if (!(tolerance > 0.0)) throw ConfigError("gradient-descent tolerance must be positive");
    if (max_iterations == 0) throw ConfigError("gradient-descent iteration cap must be positive");
    if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw ConfigError("Armijo constant must lie in (0, 1)");
}

void TrajectoryConfig::validate() const {
    if (segments < 1 || segments > 10000) throw ConfigError("segment count must lie in [1, 10000]");
    gd.validate();
}

double sum_of_distances(std::span<const Point3> points, const Point3& p) noexcept {
    double f = 0.0;
    for (const auto& q : points) f += (p - q).norm();
    return f;
}

GrooveDirection estimate_direction(const PointCloud& cloud, const IndexList& groove) {
    if (groove.size() < 2) throw DegenerateError("groove too short: need at least two points");
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto i : groove) mean += cloud.points.at(i);
    mean /= static_cast<double>(groove.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto i : groove) {
        const Eigen::Vector3d d = cloud.points[i] - mean;
        cov.noalias() += d * d.transpose();
    }
    cov /= static_cast<double>(groove.size());
    if (!(cov.trace() > 0.0)) throw DegenerateError("groove too short: all points coincide");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    const auto& ev = solver.eigenvalues();
    if (ev[2] - ev[1] <= 1e-9 * ev[2]) throw DegenerateError("no dominant direction");
    Eigen::Vector3d axis = solver.eigenvectors().col(2).normalized();
    for (int k = 0; k < 3; ++k) {
        if (std::abs(axis[k]) > 1e-12) {
            if (axis[k] < 0.0) axis = -axis;
            break;
        }
    }
    return GrooveDirection{UnitVector3::normalized(axis), mean};
}

std::vector<Segment> segment_groove(const PointCloud& cloud, const IndexList& groove, const GrooveDirection& direction,
                                    std::size_t n_segments, std::vector<std::size_t>* dropped) {
    if (n_segments < 1) throw ConfigError("segment count must be at least 1");
    std::vector<Segment> out;
    if (groove.empty()) return out;
    std::vector<double> t(groove.size());
    for (std::size_t k = 0; k < groove.size(); ++k) t[k] = direction.project(cloud.points.at(groove[k]));
    const auto [lo_it, hi_it] = std::minmax_element(t.begin(), t.end());
    const double t_min = *lo_it, t_max = *hi_it;
    const double width = (t_max - t_min) / static_cast<double>(n_segments);
    auto boundary = [&](std::size_t k) {
        if (k == n_segments) return std::nextafter(t_max, std::numeric_limits<double>::infinity());
        return t_min + static_cast<double>(k) * width;
    };
    std::vector<Segment> all(n_segments);
    for (std::size_t k = 0; k < n_segments; ++k) {
        all[k].ordinal = k;
        all[k].t_low = boundary(k);
        all[k].t_high = boundary(k + 1);
    }
    for (std::size_t k = 0; k < groove.size(); ++k) {
        std::size_t s = 0;
        if (width > 0.0) {
            s = static_cast<std::size_t>(std::clamp(std::floor((t[k] - t_min) / width), 0.0,
                                                    static_cast<double>(n_segments - 1)));
        }
        while (s > 0 && t[k] < all[s].t_low) --s;
        while (s + 1 < n_segments && t[k] >= all[s + 1].t_low) ++s;
        all[s].point_indices.push_back(groove[k]);
    }
    for (auto& seg : all) {
        if (seg.point_indices.empty()) {
            if (dropped) dropped->push_back(seg.ordinal);
            continue;
        }
        out.push_back(std::move(seg));
    }
    return out;
}

MedianResult geometric_median(std::span<const Point3> points, const GdParams& params) {
    params.validate();
    MedianResult result;
    if (points.empty()) throw ConfigError("geometric median of an empty set");
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    for (const auto& p : points) center += p;
    center /= static_cast<double>(points.size());
    double spread = 0.0;
    for (const auto& p : points) spread += (p - center).squaredNorm();
    spread = std::sqrt(spread / static_cast<double>(points.size()));
    if (!(spread > 0.0)) {
        result.position = center;
        result.converged = true;
        return result;
    }
    std::vector<Eigen::Vector3d> q;
    q.reserve(points.size());
    for (const auto& p : points) q.push_back((p - center) / spread);

    auto gradient = [&](const Eigen::Vector3d& at) {
        Eigen::Vector3d g = Eigen::Vector3d::Zero();
        for (const auto& p : q) {
            const Eigen::Vector3d d = at - p;
            const double n = d.norm();
            if (n >= kSkipDistance) g += d / n;
        }
        return g;
    };

    Eigen::Vector3d x = Eigen::Vector3d::Zero();
    double fx = sum_dist_normalized(q, x);
    Eigen::Vector3d grad = gradient(x);
    double step = 1.0 / static_cast<double>(q.size());
    // Barzilai-Borwein steps vary in length, so one short step is not yet convergence.
    constexpr int kSettledSteps = 3;
    int settled = 0;
    for (std::size_t iter = 0; iter < params.max_iterations; ++iter) {
        result.iterations = iter + 1;
        const double g2 = grad.squaredNorm();
        if (g2 == 0.0) {
            result.converged = true;
            break;
        }
        Eigen::Vector3d trial = x - step * grad;
        double ft = sum_dist_normalized(q, trial);
        while (ft > fx - params.armijo_c * step * g2) {
            step *= 0.5;
            if (step * std::sqrt(g2) < 1e-15) break;
            trial = x - step * grad;
            ft = sum_dist_normalized(q, trial);
        }
        if (!(ft < fx)) {
            // No descent possible along the (sub)gradient: x sits at a kink minimum.
            result.converged = true;
            break;
        }
        const Eigen::Vector3d moved = trial - x;
        const Eigen::Vector3d next_grad = gradient(trial);
        x = trial;
        fx = ft;
        settled = moved.norm() < params.tolerance ? settled + 1 : 0;
        if (settled == kSettledSteps) {
            result.converged = true;
            break;
        }
        // Barzilai-Borwein guess for the next trial step; long valleys need it.
        const double curvature = moved.dot(next_grad - grad);
        step = curvature > 0.0 ? moved.squaredNorm() / curvature : 2.0 * step;
        grad = next_grad;
    }
    // The minimizer may sit exactly on a data point, which descent only approaches.
    std::size_t nearest = 0;
    for (std::size_t k = 1; k < q.size(); ++k) {
        if ((q[k] - x).squaredNorm() < (q[nearest] - x).squaredNorm()) nearest = k;
    }
    // Ties (e.g. two points, where the whole chord is optimal) keep the iterate; only a
    // gain beyond rounding justifies the jump.
    if (sum_dist_normalized(q, q[nearest]) < fx * (1.0 - 1e-12)) x = q[nearest];
    result.position = center + spread * x;
    return result;
}

MedianResult waypoint_position(const PointCloud& cloud, const Segment& segment, const GdParams& params) {
    if (segment.point_indices.empty()) throw ConfigError("waypoint of an empty segment");
    std::vector<Point3> pts;
    pts.reserve(segment.point_indices.size());
    for (const auto i : segment.point_indices) pts.push_back(cloud.points.at(i));
    return geometric_median(pts, params);
}

std::optional<UnitVector3> waypoint_orientation(const PointCloud& cloud, const Segment& segment) {
    if (!cloud.has_normals()) throw ConfigError("waypoint orientation requires normals");
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (const auto i : segment.point_indices) sum += cloud.normal(i).vec();
    if (!(sum.norm() >= 1e-12)) return std::nullopt;
    return UnitVector3::normalized(sum);
}

EulerAngles orientation_to_euler(const UnitVector3& o) noexcept {
    EulerAngles e;
    e.yaw = (o.x() == 0.0 && o.y() == 0.0) ? 0.0 : std::atan2(o.y(), o.x());
    e.pitch = std::asin(std::clamp(o.z(), -1.0, 1.0));
    e.roll = 0.0;
    return e;
}

UnitVector3 euler_to_orientation(const EulerAngles& e) {
    return UnitVector3::normalized(Eigen::Vector3d(std::cos(e.pitch) * std::cos(e.yaw),
                                                   std::cos(e.pitch) * std::sin(e.yaw), std::sin(e.pitch)));
}

Trajectory generate_trajectory(const PointCloud& cloud, const GrooveSet& groove, const TrajectoryConfig& config) {
    config.validate();
    if (groove.size() < 2) throw DegenerateError("groove too short");
    Trajectory traj;
    traj.direction = estimate_direction(cloud, groove.indices);
    std::vector<std::size_t> dropped;
    const auto segments = segment_groove(cloud, groove.indices, traj.direction, config.segments, &dropped);
    for (const auto d : dropped) traj.warnings.push_back("segment " + std::to_string(d) + " is empty");
    if (segments.size() < 2) throw DegenerateError("groove too short");

    traj.waypoints.resize(segments.size());
    std::vector<std::optional<UnitVector3>> orient(segments.size());
    parallel_for(segments.size(), config.threads, [&](std::size_t k) {
        const auto median = waypoint_position(cloud, segments[k], config.gd);
        auto& wp = traj.waypoints[k];
        wp.ordinal = segments[k].ordinal;
        wp.position = median.position;
        wp.converged = median.converged;
        orient[k] = waypoint_orientation(cloud, segments[k]);
    });

    const auto first_valid = std::find_if(orient.begin(), orient.end(), [](const auto& o) { return o.has_value(); });
    if (first_valid == orient.end()) throw DegenerateError("every segment has cancelling normals");
    UnitVector3 previous = **first_valid;
    for (std::size_t k = 0; k < segments.size(); ++k) {
        auto& wp = traj.waypoints[k];
        if (orient[k]) {
            previous = *orient[k];
        } else {
            wp.orientation_inherited = true;
            traj.warnings.push_back("segment " + std::to_string(wp.ordinal) + " orientation inherited");
        }
        wp.orientation = previous;
        wp.euler = orientation_to_euler(wp.orientation);
    }
    return config.reverse ? reversed(std::move(traj)) : traj;
}

Trajectory reversed(Trajectory trajectory) {
    std::reverse(trajectory.waypoints.begin(), trajectory.waypoints.end());
    trajectory.direction.axis = -trajectory.direction.axis;
    return trajectory;
}

void write_trajectory_text(const Trajectory& trajectory, std::ostream& out) {
    out << "# ordinal x y z ox oy oz roll pitch yaw converged\n";
    for (const auto& w : trajectory.waypoints) {
        out << w.ordinal << ' ' << format_double(w.position.x()) << ' ' << format_double(w.position.y()) << ' '
            << format_double(w.position.z()) << ' ' << format_double(w.orientation.x()) << ' '
            << format_double(w.orientation.y()) << ' ' << format_double(w.orientation.z()) << ' '
            << format_double(w.euler.roll) << ' ' << format_double(w.euler.pitch) << ' '
            << format_double(w.euler.yaw) << ' ' << (w.converged ? 1 : 0) << '\n';
    }
}

void write_trajectory_json(const Trajectory& trajectory, std::ostream& out) {
    using nlohmann::json;
    auto vec = [](const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); };
    json j;
    j["direction"] = {{"axis", vec(trajectory.direction.axis.vec())}, {"origin", vec(trajectory.direction.origin)}};
    json wps = json::array();
    for (const auto& w : trajectory.waypoints) {
        wps.push_back({{"ordinal", w.ordinal},
                       {"position", vec(w.position)},
                       {"orientation", vec(w.orientation.vec())},
                       {"euler", {{"roll", w.euler.roll}, {"pitch", w.euler.pitch}, {"yaw", w.euler.yaw}}},
                       {"converged", w.converged},
                       {"orientation_inherited", w.orientation_inherited}});
    }
    j["waypoints"] = std::move(wps);
    j["warnings"] = trajectory.warnings;
    out << j.dump(2) << '\n';
}

Trajectory read_trajectory_json(std::istream& in) {
    using nlohmann::json;
    try {
        const json j = json::parse(in);
        auto vec = [](const json& a) {
            if (!a.is_array() || a.size() != 3) throw ParseError("expected a 3-vector");
            return Eigen::Vector3d(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
        };
        Trajectory t;
        t.direction.axis = UnitVector3::normalized(vec(j.at("direction").at("axis")));
        t.direction.origin = vec(j.at("direction").at("origin"));
        for (const auto& w : j.at("waypoints")) {
            Waypoint wp;
            wp.ordinal = w.at("ordinal").get<std::size_t>();
            wp.position = vec(w.at("position"));
            wp.orientation = UnitVector3::normalized(vec(w.at("orientation")));
            const auto& e = w.at("euler");
            wp.euler = {e.at("roll").get<double>(), e.at("pitch").get<double>(), e.at("yaw").get<double>()};
            wp.converged = w.at("converged").get<bool>();
            wp.orientation_inherited = w.at("orientation_inherited").get<bool>();
            t.waypoints.push_back(wp);
        }
        if (j.contains("warnings")) t.warnings = j.at("warnings").get<std::vector<std::string>>();
        return t;
    } catch (const json::exception& e) {
        throw ParseError(std::string("trajectory json: ") + e.what());
    } catch (const DegenerateError& e) {
        throw ParseError(std::string("trajectory json: ") + e.what());
    }
}

Trajectory load_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return read_trajectory_json(in);
}

}  // namespace weldgroove
