#include "weldgroove/synthgen.hpp"
#include "weldgroove/error.hpp"
#include "weldgroove/io.hpp"
#include "kv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace weldgroove {
namespace {

/// Cross-section of the V-groove: depth below the surface at lateral offset s.
struct GrooveProfile {
    double half_bottom;
    double half_top;
    double depth;
    double cot_half;  // run per unit depth on the walls, tan(opening/2)

    double depth_at(double s) const {
        const double a = std::abs(s);
        if (a <= half_bottom) return depth;
        if (a < half_top) return depth - (a - half_bottom) / cot_half;
        return 0.0;
    }
    /// d(depth)/ds
    double slope_at(double s) const {
        const double a = std::abs(s);
        if (a <= half_bottom || a >= half_top) return 0.0;
        return (s > 0.0 ? -1.0 : 1.0) / cot_half;
    }
    bool inside(double s) const { return std::abs(s) < half_top; }
};

GrooveProfile profile_of(const WorkpieceSpec& spec) {
    if (!spec.groove) return {0.0, 0.0, 0.0, 1.0};
    const double t = std::tan(spec.opening_angle / 2.0);
    return {spec.bottom_width / 2.0, spec.bottom_width / 2.0 + spec.depth * t, spec.depth, t};
}

std::size_t samples(double extent, double pitch) {
    return static_cast<std::size_t>(std::llround(extent / pitch));
}

double grid(double lo, std::size_t k, double pitch) { return lo + (static_cast<double>(k) + 0.5) * pitch; }

class Builder {
public:
    explicit Builder(const WorkpieceSpec& spec) : spec_(spec), rng_(spec.seed) {}

    void add(const Point3& p, const Eigen::Vector3d& normal, bool truth) {
        const auto n = UnitVector3::normalized(normal);
        const double offset = spec_.noise_sigma > 0.0 ? noise_(rng_) * spec_.noise_sigma : 0.0;
        if (truth) out_.truth.push_back(out_.cloud.points.size());
        out_.cloud.points.push_back(p + offset * n.vec());
        out_.true_normals.push_back(n);
    }

    SyntheticWorkpiece finish(const Point3& viewpoint, ReferenceCurve reference) {
        out_.cloud.viewpoint = viewpoint;
        out_.reference = std::move(reference);
        out_.spec = spec_;
        return std::move(out_);
    }

private:
    const WorkpieceSpec& spec_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> noise_{0.0, 1.0};
    SyntheticWorkpiece out_;
};

/// Height-field plate z = -depth(s(x, y)) over [-L/2, L/2] x [-W/2, W/2].
template <class Offset>
void add_plate_top(Builder& b, const WorkpieceSpec& spec, const GrooveProfile& g, Offset&& offset) {
    const std::size_t nx = samples(spec.length, spec.pitch), ny = samples(spec.width, spec.pitch);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            const double x = grid(-spec.length / 2.0, i, spec.pitch);
            const double y = grid(-spec.width / 2.0, j, spec.pitch);
            const auto [s, grad_s] = offset(x, y);  // lateral offset and its xy-gradient
            const double slope = g.slope_at(s);
            const Eigen::Vector3d n(slope * grad_s.x(), slope * grad_s.y(), 1.0);
            b.add(Point3(x, y, -g.depth_at(s)), n, spec.groove && g.inside(s));
        }
    }
}

void add_side_walls(Builder& b, const WorkpieceSpec& spec) {
    const std::size_t nx = samples(spec.length, spec.pitch), ny = samples(spec.width, spec.pitch);
    const std::size_t nz = samples(spec.thickness, spec.pitch);
    const double hx = spec.length / 2.0, hy = spec.width / 2.0;
    for (std::size_t k = 0; k < nz; ++k) {
        const double z = -grid(0.0, k, spec.pitch);
        for (std::size_t i = 0; i < nx; ++i) {
            const double x = grid(-hx, i, spec.pitch);
            b.add(Point3(x, -hy, z), -Eigen::Vector3d::UnitY(), false);
            b.add(Point3(x, hy, z), Eigen::Vector3d::UnitY(), false);
        }
        for (std::size_t j = 0; j < ny; ++j) {
            const double y = grid(-hy, j, spec.pitch);
            b.add(Point3(-hx, y, z), -Eigen::Vector3d::UnitX(), false);
            b.add(Point3(hx, y, z), Eigen::Vector3d::UnitX(), false);
        }
    }
}

SyntheticWorkpiece straight_plate(const WorkpieceSpec& spec) {
    const auto g = profile_of(spec);
    Builder b(spec);
    add_plate_top(b, spec, g, [](double, double y) { return std::pair(y, Eigen::Vector2d(0.0, 1.0)); });
    if (spec.side_walls) add_side_walls(b, spec);
    const LineCurve ref{Point3(-spec.length / 2.0, 0.0, -spec.depth), Point3(spec.length / 2.0, 0.0, -spec.depth)};
    return b.finish(Point3(0.0, 0.0, 0.5), ref);
}

SyntheticWorkpiece curve_plate(const WorkpieceSpec& spec) {
    const auto g = profile_of(spec);
    const Eigen::Vector2d center(0.0, -spec.arc_radius);
    Builder b(spec);
    add_plate_top(b, spec, g, [&](double x, double y) {
        const Eigen::Vector2d d = Eigen::Vector2d(x, y) - center;
        const double rho = d.norm();
        // s > 0 outside the arc; grad s = d / rho.
        return std::pair(rho - spec.arc_radius, Eigen::Vector2d(d / rho));
    });
    if (spec.side_walls) add_side_walls(b, spec);
    ArcCurve arc;
    arc.center = Point3(center.x(), center.y(), -spec.depth);
    arc.u = UnitVector3::normalized(Eigen::Vector3d::UnitX());
    arc.v = UnitVector3::normalized(Eigen::Vector3d::UnitY());
    arc.radius = spec.arc_radius;
    arc.angle_begin = std::acos(spec.length / (2.0 * spec.arc_radius));
    arc.angle_end = std::numbers::pi - arc.angle_begin;
    return b.finish(Point3(0.0, 0.0, 0.5), arc);
}

/// Top plate of a box with the seam parallel to its front edge; the front face is also in view.
SyntheticWorkpiece box(const WorkpieceSpec& spec) {
    const auto g = profile_of(spec);
    Builder b(spec);
    add_plate_top(b, spec, g, [](double, double y) { return std::pair(y, Eigen::Vector2d(0.0, 1.0)); });
    const std::size_t nx = samples(spec.length, spec.pitch), nz = samples(spec.box_height, spec.pitch);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t k = 0; k < nz; ++k) {
            b.add(Point3(grid(-spec.length / 2.0, i, spec.pitch), -spec.width / 2.0, -grid(0.0, k, spec.pitch)),
                  -Eigen::Vector3d::UnitY(), false);
        }
    }
    const LineCurve ref{Point3(-spec.length / 2.0, 0.0, -spec.depth), Point3(spec.length / 2.0, 0.0, -spec.depth)};
    return b.finish(Point3(0.0, -0.12, 0.5), ref);
}

SyntheticWorkpiece cylinder(const WorkpieceSpec& spec) {
    const auto g = profile_of(spec);
    Builder b(spec);
    const double half_arc = 75.0 * std::numbers::pi / 180.0;
    const double r0 = spec.cylinder_radius;
    const std::size_t nx = samples(spec.length, spec.pitch);
    const std::size_t nphi = samples(2.0 * half_arc * r0, spec.pitch);
    const double dphi = 2.0 * half_arc / static_cast<double>(nphi);
    for (std::size_t i = 0; i < nx; ++i) {
        const double x = grid(-spec.length / 2.0, i, spec.pitch);
        const double rho = r0 - g.depth_at(x);
        const double drho = -g.slope_at(x);
        for (std::size_t k = 0; k < nphi; ++k) {
            const double phi = -half_arc + (static_cast<double>(k) + 0.5) * dphi;
            const Eigen::Vector3d radial(0.0, std::sin(phi), std::cos(phi));
            b.add(Point3(x, rho * radial.y(), rho * radial.z()), Eigen::Vector3d(-drho, radial.y(), radial.z()),
                  spec.groove && g.inside(x));
        }
    }
    ArcCurve arc;
    arc.center = Point3::Zero();
    arc.u = UnitVector3::normalized(Eigen::Vector3d::UnitZ());
    arc.v = UnitVector3::normalized(Eigen::Vector3d::UnitY());
    arc.radius = r0 - spec.depth;
    arc.angle_begin = -half_arc;
    arc.angle_end = half_arc;
    return b.finish(Point3(0.0, 0.0, 0.5), arc);
}

}  // namespace

std::string_view to_string(WorkpieceShape shape) {
    switch (shape) {
        case WorkpieceShape::StraightLine: return "straight-line";
        case WorkpieceShape::CurveLine: return "curve-line";
        case WorkpieceShape::Box: return "box";
        case WorkpieceShape::Cylinder: return "cylinder";
    }
    return "straight-line";
}

WorkpieceShape shape_from_string(std::string_view name) {
    if (name == "straight-line") return WorkpieceShape::StraightLine;
    if (name == "curve-line") return WorkpieceShape::CurveLine;
    if (name == "box") return WorkpieceShape::Box;
    if (name == "cylinder") return WorkpieceShape::Cylinder;
    throw ConfigError("unknown workpiece shape '" + std::string(name) + "'");
}

double WorkpieceSpec::groove_half_width() const { return profile_of(*this).half_top; }

void WorkpieceSpec::validate() const {
    if (!(pitch > 0.0)) throw ConfigError("pitch must be positive");
    if (!(length > 0.0) || !(width > 0.0) || !(thickness > 0.0)) throw ConfigError("dimensions must be positive");
    if (!(noise_sigma >= 0.0)) throw ConfigError("noise sigma must be non-negative");
    if (samples(length, pitch) < 2 || samples(width, pitch) < 2) throw ConfigError("pitch too coarse for the workpiece");
    if (groove) {
        if (!(opening_angle > 0.0 && opening_angle < std::numbers::pi)) {
            throw ConfigError("opening angle must lie in (0, pi)");
        }
        if (!(depth > 0.0)) throw ConfigError("groove depth must be positive");
        if (!(bottom_width >= 0.0)) throw ConfigError("bottom width must be non-negative");
        if (depth >= thickness) throw ConfigError("groove deeper than plate thickness");
    }
    const double half_top = groove_half_width();
    switch (shape) {
        case WorkpieceShape::StraightLine:
            if (2.0 * half_top >= width) throw ConfigError("groove wider than the plate");
            break;
        case WorkpieceShape::CurveLine: {
            if (!(arc_radius > length / 2.0)) throw ConfigError("arc radius must exceed half the plate length");
            const double sag = arc_radius - std::sqrt(arc_radius * arc_radius - length * length / 4.0);
            if (sag + half_top >= width / 2.0) throw ConfigError("arc groove leaves the plate");
            break;
        }
        case WorkpieceShape::Box:
            if (!(box_height > 0.0)) throw ConfigError("box height must be positive");
            if (depth >= box_height) throw ConfigError("groove deeper than the box");
            if (2.0 * half_top >= width) throw ConfigError("groove wider than the box");
            break;
        case WorkpieceShape::Cylinder:
            if (!(cylinder_radius > thickness)) throw ConfigError("cylinder radius must exceed wall thickness");
            if (2.0 * half_top >= length) throw ConfigError("groove wider than the cylinder");
            break;
    }
}

WorkpieceSpec parse_workpiece_spec(std::string_view text) {
    const auto kv = detail::KeyValues::parse(text);
    WorkpieceSpec spec;
    if (kv.has("shape")) spec.shape = shape_from_string(kv.raw("shape"));
    auto number = [&](const char* key, double& field) {
        if (kv.has(key)) field = kv.get_double(key);
    };
    number("length", spec.length);
    number("width", spec.width);
    number("thickness", spec.thickness);
    if (kv.has("groove")) spec.groove = kv.get_bool("groove");
    number("groove.opening_angle", spec.opening_angle);
    number("groove.depth", spec.depth);
    number("groove.bottom_width", spec.bottom_width);
    number("pitch", spec.pitch);
    number("noise_sigma", spec.noise_sigma);
    if (kv.has("seed")) {
        const auto seed = kv.get_int("seed");
        if (seed < 0) throw ConfigError("seed must be non-negative");
        spec.seed = static_cast<std::uint64_t>(seed);
    }
    number("arc_radius", spec.arc_radius);
    number("cylinder_radius", spec.cylinder_radius);
    number("box_height", spec.box_height);
    if (kv.has("side_walls")) spec.side_walls = kv.get_bool("side_walls");
    kv.reject_unknown();
    spec.validate();
    return spec;
}

WorkpieceSpec load_workpiece_spec(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_workpiece_spec(ss.str());
}

std::string emit_workpiece_spec(const WorkpieceSpec& spec) {
    std::ostringstream out;
    out << "shape = " << to_string(spec.shape) << '\n'
        << "length = " << format_double(spec.length) << '\n'
        << "width = " << format_double(spec.width) << '\n'
        << "thickness = " << format_double(spec.thickness) << '\n'
        << "groove = " << (spec.groove ? "true" : "false") << '\n'
        << "groove.opening_angle = " << format_double(spec.opening_angle) << '\n'
        << "groove.depth = " << format_double(spec.depth) << '\n'
        << "groove.bottom_width = " << format_double(spec.bottom_width) << '\n'
        << "pitch = " << format_double(spec.pitch) << '\n'
        << "noise_sigma = " << format_double(spec.noise_sigma) << '\n'
        << "seed = " << spec.seed << '\n'
        << "arc_radius = " << format_double(spec.arc_radius) << '\n'
        << "cylinder_radius = " << format_double(spec.cylinder_radius) << '\n'
        << "box_height = " << format_double(spec.box_height) << '\n'
        << "side_walls = " << (spec.side_walls ? "true" : "false") << '\n';
    return out.str();
}

SyntheticWorkpiece generate_workpiece(const WorkpieceSpec& spec) {
    spec.validate();
    switch (spec.shape) {
        case WorkpieceShape::StraightLine: return straight_plate(spec);
        case WorkpieceShape::CurveLine: return curve_plate(spec);
        case WorkpieceShape::Box: return box(spec);
        case WorkpieceShape::Cylinder: return cylinder(spec);
    }
    throw ConfigError("unknown shape");
}

}  // namespace weldgroove
