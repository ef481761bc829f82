#include "weldgroove/reference_curve.hpp"
#include "weldgroove/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace weldgroove {
namespace {

double segment_distance(const Point3& a, const Point3& b, const Point3& p) {
    const Eigen::Vector3d d = b - a;
    const double len2 = d.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
    return (a + t * d - p).norm();
}

double arc_distance(const ArcCurve& arc, const Point3& p) {
    const Eigen::Vector3d r = p - arc.center;
    const double a = std::atan2(r.dot(arc.v.vec()), r.dot(arc.u.vec()));
    double best = std::min((arc.at(arc.angle_begin) - p).norm(), (arc.at(arc.angle_end) - p).norm());
    // The closest point on the full circle has polar angle a (mod 2 pi).
    for (int k = -2; k <= 2; ++k) {
        const double candidate = a + 2.0 * M_PI * k;
        if (candidate >= arc.angle_begin && candidate <= arc.angle_end) {
            best = std::min(best, (arc.at(candidate) - p).norm());
        }
    }
    return best;
}

Eigen::Vector3d vec3(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3) {
        throw ParseError(std::string("reference curve: field '") + key + "' must be a 3-element array");
    }
    return {j[key][0].get<double>(), j[key][1].get<double>(), j[key][2].get<double>()};
}

nlohmann::json arr(const Eigen::Vector3d& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

}  // namespace

Point3 ArcCurve::at(double angle) const {
    return center + radius * (std::cos(angle) * u.vec() + std::sin(angle) * v.vec());
}

double distance_to_curve(const ReferenceCurve& curve, const Point3& p) {
    return std::visit(
        [&](const auto& c) -> double {
            if constexpr (std::is_same_v<std::decay_t<decltype(c)>, LineCurve>) {
                return segment_distance(c.start, c.end, p);
            } else {
                return arc_distance(c, p);
            }
        },
        curve);
}

double curve_length(const ReferenceCurve& curve) {
    if (const auto* line = std::get_if<LineCurve>(&curve)) return (line->end - line->start).norm();
    const auto& arc = std::get<ArcCurve>(curve);
    return arc.radius * (arc.angle_end - arc.angle_begin);
}

nlohmann::json to_json(const ReferenceCurve& curve) {
    if (const auto* line = std::get_if<LineCurve>(&curve)) {
        return {{"type", "line"}, {"start", arr(line->start)}, {"end", arr(line->end)}};
    }
    const auto& arc = std::get<ArcCurve>(curve);
    return {{"type", "arc"},
            {"center", arr(arc.center)},
            {"u", arr(arc.u.vec())},
            {"v", arr(arc.v.vec())},
            {"radius", arc.radius},
            {"angle_begin", arc.angle_begin},
            {"angle_end", arc.angle_end}};
}

ReferenceCurve reference_from_json(const nlohmann::json& j) {
    try {
        const auto type = j.at("type").get<std::string>();
        if (type == "line") return LineCurve{vec3(j, "start"), vec3(j, "end")};
        if (type == "arc") {
            ArcCurve arc;
            arc.center = vec3(j, "center");
            arc.u = UnitVector3::normalized(vec3(j, "u"));
            arc.v = UnitVector3::normalized(vec3(j, "v"));
            arc.radius = j.at("radius").get<double>();
            arc.angle_begin = j.at("angle_begin").get<double>();
            arc.angle_end = j.at("angle_end").get<double>();
            if (!(arc.radius > 0.0) || !(arc.angle_end >= arc.angle_begin)) {
                throw ParseError("reference curve: invalid arc parameters");
            }
            return arc;
        }
        throw ParseError("reference curve: unknown type '" + type + "'");
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("reference curve: ") + e.what());
    } catch (const DegenerateError& e) {
        throw ParseError(std::string("reference curve: ") + e.what());
    }
}

void save_reference(const ReferenceCurve& curve, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << to_json(curve).dump(2) << '\n';
}

ReferenceCurve load_reference(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return reference_from_json(j);
}

}  // namespace weldgroove
