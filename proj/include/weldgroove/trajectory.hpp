#pragma once

#include "weldgroove/gfh.hpp"
#include "weldgroove/point_cloud.hpp"

#include <iosfwd>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace weldgroove {

/// Principal axis of the groove point set, anchored at its centroid.
struct GrooveDirection {
    UnitVector3 axis;
    Point3 origin = Point3::Zero();

    double project(const Point3& p) const { return (p - origin).dot(axis.vec()); }
};

/// Groove points whose projection t along the axis falls in [t_low, t_high).
struct Segment {
    std::size_t ordinal = 0;
    IndexList point_indices;
    double t_low = 0.0;
    double t_high = 0.0;
};

/// Gradient-descent settings for the waypoint position.
struct GdParams {
    double tolerance = 1e-4;  // on iterate displacement, in units of the segment's RMS radius
    std::size_t max_iterations = 1000;
    double armijo_c = 1e-4;

    void validate() const;
};

struct MedianResult {
    Point3 position = Point3::Zero();
    bool converged = false;
    std::size_t iterations = 0;
};

/// Z-Y-X angles in radians. Roll is always 0 for a direction-only orientation.
struct EulerAngles {
    double roll = 0.0;
    double pitch = 0.0;
    double yaw = 0.0;
};

struct Waypoint {
    std::size_t ordinal = 0;  // segment ordinal the waypoint came from
    Point3 position = Point3::Zero();
    UnitVector3 orientation;
    EulerAngles euler;
    bool converged = false;
    bool orientation_inherited = false;
};

struct Trajectory {
    std::vector<Waypoint> waypoints;
    GrooveDirection direction;
    std::vector<std::string> warnings;

    std::size_t size() const noexcept { return waypoints.size(); }
};

struct TrajectoryConfig {
    std::size_t segments = 55;
    GdParams gd;
    bool reverse = false;
    unsigned threads = 1;

    void validate() const;
};

/// Sum of Euclidean distances from p to every point.
double sum_of_distances(std::span<const Point3> points, const Point3& p) noexcept;

/// First principal component of the groove points, sign fixed so its first
/// component with magnitude above 1e-12 (x, then y, then z) is positive; origin is
/// the centroid. Throws DegenerateError when fewer than two distinct points are
/// given or the two leading eigenvalues agree within 1e-9 relative.
GrooveDirection estimate_direction(const PointCloud& cloud, const IndexList& groove);

/// Splits the projected extent [t_min, t_max] into `n_segments` equal half-open
/// intervals (the last one also holds t_max). Empty intervals are dropped and their
/// ordinals appended to `dropped` when given.
std::vector<Segment> segment_groove(const PointCloud& cloud, const IndexList& groove, const GrooveDirection& direction,
                                    std::size_t n_segments, std::vector<std::size_t>* dropped = nullptr);

/// Minimizes the sum of distances to `points` by gradient descent with Armijo
/// backtracking, starting from the centroid. Trial steps follow the Barzilai-Borwein
/// rule. Distances below 1e-12 are skipped in the gradient. The problem is solved in
/// centroid-centered coordinates scaled by the RMS radius, so `tolerance` is relative
/// to the point spread; iteration stops once three successive steps move less than it.
/// A data point with a lower objective than the final iterate replaces it.
MedianResult geometric_median(std::span<const Point3> points, const GdParams& params);

MedianResult waypoint_position(const PointCloud& cloud, const Segment& segment, const GdParams& params);

/// Normalized sum of the segment's point normals, or nullopt when the sum nearly cancels.
std::optional<UnitVector3> waypoint_orientation(const PointCloud& cloud, const Segment& segment);

EulerAngles orientation_to_euler(const UnitVector3& o) noexcept;
UnitVector3 euler_to_orientation(const EulerAngles& e);

/// Direction estimate, segmentation, and one waypoint per non-empty segment.
/// Throws DegenerateError("groove too short") with fewer than two groove points or
/// fewer than two non-empty segments.
Trajectory generate_trajectory(const PointCloud& cloud, const GrooveSet& groove, const TrajectoryConfig& config);

/// Same waypoints in the opposite order, with the axis negated.
Trajectory reversed(Trajectory trajectory);

/// One waypoint per line: ordinal x y z ox oy oz roll pitch yaw converged.
void write_trajectory_text(const Trajectory& trajectory, std::ostream& out);
void write_trajectory_json(const Trajectory& trajectory, std::ostream& out);
/// Inverse of write_trajectory_json. Throws ParseError on malformed input.
Trajectory read_trajectory_json(std::istream& in);
Trajectory load_trajectory(const std::filesystem::path& path);

}  // namespace weldgroove
