#pragma once

#include "weldgroove/point_cloud.hpp"
#include "weldgroove/reference_curve.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace weldgroove {

enum class WorkpieceShape { StraightLine, CurveLine, Box, Cylinder };

std::string_view to_string(WorkpieceShape shape);
WorkpieceShape shape_from_string(std::string_view name);

/// Synthetic workpiece with a V-groove. Lengths in meters, angles in radians.
///
/// - straight-line: plate of length x width, groove along x through the center.
/// - curve-line: same plate, groove along a circular arc of radius `arc_radius`
///   passing through the plate center.
/// - box: top face plus the front (-y) face of height `box_height`, groove along x
///   on the top face. The top/front edge is a genuine crease.
/// - cylinder: outer radius `cylinder_radius`, axis along x, only the camera-facing
///   +-75 degrees of the circumference, circumferential groove at x = 0.
///
/// Surfaces are sampled as a regular grid of `pitch` over the base surface with the
/// groove carved into it, mimicking a depth camera looking down +z.
struct WorkpieceSpec {
    WorkpieceShape shape = WorkpieceShape::StraightLine;
    double length = 0.2;
    double width = 0.15;
    double thickness = 0.01;  // plate thickness, box depth budget, pipe wall
    bool groove = true;
    double opening_angle = 0.8726646259971648;  // 50 degrees
    double depth = 0.006;
    double bottom_width = 0.003;
    double pitch = 0.001;
    double noise_sigma = 0.0003;
    std::uint64_t seed = 1;
    double arc_radius = 0.15;
    double cylinder_radius = 0.06;
    double box_height = 0.05;
    bool side_walls = false;  // plates only: also sample the four vertical sides

    /// Throws ConfigError on an invalid spec (including a groove deeper than the thickness).
    void validate() const;

    /// Half width of the groove opening at the surface.
    double groove_half_width() const;
};

WorkpieceSpec parse_workpiece_spec(std::string_view text);
WorkpieceSpec load_workpiece_spec(const std::filesystem::path& path);
std::string emit_workpiece_spec(const WorkpieceSpec& spec);

struct SyntheticWorkpiece {
    PointCloud cloud;                       // no normals, viewpoint set for the shape
    IndexList truth;                        // points constructed on groove faces
    std::vector<UnitVector3> true_normals;  // analytic surface normal per point
    ReferenceCurve reference;               // groove bottom center line
    WorkpieceSpec spec;
};

/// Deterministic for a fixed spec (including seed).
SyntheticWorkpiece generate_workpiece(const WorkpieceSpec& spec);

}  // namespace weldgroove
