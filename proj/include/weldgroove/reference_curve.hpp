#pragma once

#include "weldgroove/geometry.hpp"

#include <json.hpp>

#include <filesystem>
#include <variant>

namespace weldgroove {

/// Finite straight segment.
struct LineCurve {
    Point3 start = Point3::Zero();
    Point3 end = Point3::UnitX();
};

/// Circular arc: center + radius * (cos(a) * u + sin(a) * v) for a in [angle_begin, angle_end].
struct ArcCurve {
    Point3 center = Point3::Zero();
    UnitVector3 u;
    UnitVector3 v;
    double radius = 1.0;
    double angle_begin = 0.0;
    double angle_end = 1.0;

    Point3 at(double angle) const;
};

/// Analytic groove-bottom curve used as the trajectory reference.
using ReferenceCurve = std::variant<LineCurve, ArcCurve>;

double distance_to_curve(const ReferenceCurve& curve, const Point3& p);
double curve_length(const ReferenceCurve& curve);

nlohmann::json to_json(const ReferenceCurve& curve);
/// Throws ParseError on unknown types or missing fields.
ReferenceCurve reference_from_json(const nlohmann::json& j);

void save_reference(const ReferenceCurve& curve, const std::filesystem::path& path);
ReferenceCurve load_reference(const std::filesystem::path& path);

}  // namespace weldgroove
