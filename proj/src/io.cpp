#include "weldgroove/io.hpp"
#include "weldgroove/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace weldgroove {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

double parse_double(std::string_view tok, std::size_t line) {
    double v = 0.0;
    const char* first = tok.data();
    if (!tok.empty() && tok.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ParseError("invalid number '" + std::string(tok) + "'", line);
    }
    return v;
}

std::size_t parse_count(std::string_view tok, std::size_t line) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ParseError("invalid count '" + std::string(tok) + "'", line);
    }
    return v;
}

UnitVector3 file_normal(const Eigen::Vector3d& n, std::size_t line) {
    if (!std::isfinite(n.x()) || !std::isfinite(n.y()) || !std::isfinite(n.z())) {
        throw ParseError("non-finite normal", line);
    }
    if (std::abs(n.norm() - 1.0) <= 1e-9) return UnitVector3::from_unit(n);
    try {
        return UnitVector3::normalized(n);
    } catch (const DegenerateError&) {
        throw ParseError("zero-length normal", line);
    }
}

/// Column positions of the geometric fields within one record.
struct FieldLayout {
    int x = -1, y = -1, z = -1, nx = -1, ny = -1, nz = -1;
    std::size_t columns = 0;

    bool has_xyz() const { return x >= 0 && y >= 0 && z >= 0; }
    bool has_normals() const { return nx >= 0 && ny >= 0 && nz >= 0; }

    void assign(std::string_view name, int column) {
        if (name == "x") x = column;
        else if (name == "y") y = column;
        else if (name == "z") z = column;
        else if (name == "normal_x" || name == "nx") nx = column;
        else if (name == "normal_y" || name == "ny") ny = column;
        else if (name == "normal_z" || name == "nz") nz = column;
    }
};

void read_records(std::istream& in, std::size_t& lineno, std::size_t count, const FieldLayout& layout,
                  PointCloud& cloud) {
    cloud.points.reserve(count);
    std::vector<UnitVector3> normals;
    if (layout.has_normals()) normals.reserve(count);
    std::string line;
    while (cloud.points.size() < count && std::getline(in, line)) {
        ++lineno;
        const auto tok = split_ws(line);
        if (tok.empty()) continue;
        if (tok.size() != layout.columns) {
            throw ParseError("expected " + std::to_string(layout.columns) + " values, got " +
                                 std::to_string(tok.size()),
                             lineno);
        }
        Point3 p(parse_double(tok[layout.x], lineno), parse_double(tok[layout.y], lineno),
                 parse_double(tok[layout.z], lineno));
        if (!is_finite(p)) throw ParseError("non-finite coordinate", lineno);
        cloud.points.push_back(p);
        if (layout.has_normals()) {
            const Eigen::Vector3d n(parse_double(tok[layout.nx], lineno), parse_double(tok[layout.ny], lineno),
                                    parse_double(tok[layout.nz], lineno));
            normals.push_back(file_normal(n, lineno));
        }
    }
    if (cloud.points.empty()) throw ParseError("zero points", lineno);
    if (cloud.points.size() < count) {
        throw ParseError("expected " + std::to_string(count) + " points, found " +
                             std::to_string(cloud.points.size()),
                         lineno);
    }
    if (layout.has_normals()) cloud.normals = std::move(normals);
}

PointCloud load_pcd(std::istream& in) {
    PointCloud cloud;
    FieldLayout layout;
    std::vector<std::string> fields;
    std::vector<std::size_t> counts;
    std::size_t points = 0;
    bool have_points = false;
    std::size_t width = 0, height = 1;
    std::size_t lineno = 0;
    std::string line;
    bool data = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto tok = split_ws(line);
        if (tok.empty() || tok[0].front() == '#') continue;
        const std::string_view key = tok[0];
        if (key == "VERSION" || key == "SIZE" || key == "TYPE") {
            continue;
        } else if (key == "FIELDS") {
            fields.assign(tok.begin() + 1, tok.end());
        } else if (key == "COUNT") {
            for (std::size_t i = 1; i < tok.size(); ++i) counts.push_back(parse_count(tok[i], lineno));
        } else if (key == "WIDTH" && tok.size() == 2) {
            width = parse_count(tok[1], lineno);
        } else if (key == "HEIGHT" && tok.size() == 2) {
            height = parse_count(tok[1], lineno);
        } else if (key == "VIEWPOINT") {
            if (tok.size() < 4) throw ParseError("VIEWPOINT needs at least 3 values", lineno);
            cloud.viewpoint = Point3(parse_double(tok[1], lineno), parse_double(tok[2], lineno),
                                     parse_double(tok[3], lineno));
        } else if (key == "POINTS" && tok.size() == 2) {
            points = parse_count(tok[1], lineno);
            have_points = true;
        } else if (key == "DATA") {
            if (tok.size() != 2 || tok[1] != "ascii") throw ParseError("only DATA ascii is supported", lineno);
            data = true;
            break;
        } else {
            throw ParseError("unknown header key '" + std::string(key) + "'", lineno);
        }
    }
    if (!data) throw ParseError("missing DATA line", lineno);
    if (fields.empty()) throw ParseError("missing FIELDS line", lineno);
    if (!counts.empty() && counts.size() != fields.size()) throw ParseError("COUNT does not match FIELDS", lineno);
    int column = 0;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        const std::size_t c = counts.empty() ? 1 : counts[i];
        if (c == 1) layout.assign(fields[i], column);
        column += static_cast<int>(c);
    }
    layout.columns = static_cast<std::size_t>(column);
    if (!layout.has_xyz()) throw ParseError("FIELDS must contain x y z", lineno);
    if (!have_points) points = width * height;
    if (points == 0) throw ParseError("zero points", lineno);
    read_records(in, lineno, points, layout, cloud);
    return cloud;
}

PointCloud load_ply(std::istream& in) {
    PointCloud cloud;
    FieldLayout layout;
    std::size_t lineno = 0;
    std::string line;
    if (!std::getline(in, line) || split_ws(line).empty() || split_ws(line)[0] != "ply") {
        throw ParseError("missing 'ply' magic", 1);
    }
    ++lineno;
    std::size_t vertices = 0;
    bool in_vertex = false;
    bool vertex_seen = false;
    bool header_done = false;
    int column = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto tok = split_ws(line);
        if (tok.empty()) continue;
        if (tok[0] == "format") {
            if (tok.size() < 2 || tok[1] != "ascii") throw ParseError("only ascii PLY is supported", lineno);
        } else if (tok[0] == "comment") {
            if (tok.size() == 5 && tok[1] == "viewpoint") {
                cloud.viewpoint = Point3(parse_double(tok[2], lineno), parse_double(tok[3], lineno),
                                         parse_double(tok[4], lineno));
            }
        } else if (tok[0] == "element") {
            if (tok.size() != 3) throw ParseError("malformed element line", lineno);
            in_vertex = tok[1] == "vertex";
            if (in_vertex) {
                if (vertex_seen) throw ParseError("duplicate vertex element", lineno);
                if (column != 0) throw ParseError("vertex element must come first", lineno);
                vertex_seen = true;
                vertices = parse_count(tok[2], lineno);
            }
        } else if (tok[0] == "property") {
            if (!in_vertex) continue;
            if (tok.size() != 3) throw ParseError("list properties are not supported on vertices", lineno);
            layout.assign(tok[2], column++);
        } else if (tok[0] == "end_header") {
            header_done = true;
            break;
        } else if (tok[0] != "obj_info") {
            throw ParseError("unknown header line", lineno);
        }
    }
    if (!header_done) throw ParseError("missing end_header", lineno);
    if (!vertex_seen || vertices == 0) throw ParseError("zero points", lineno);
    layout.columns = static_cast<std::size_t>(column);
    if (!layout.has_xyz()) throw ParseError("vertex element must have x y z", lineno);
    read_records(in, lineno, vertices, layout, cloud);
    return cloud;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    if (ec != std::errc()) throw Error("number formatting failed");
    return std::string(buf, ptr);
}

CloudFormat format_from_path(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pcd") return CloudFormat::PcdAscii;
    if (ext == ".ply") return CloudFormat::PlyAscii;
    throw ConfigError("cannot infer cloud format from '" + path.string() + "' (expected .pcd or .ply)");
}

PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    try {
        return format == CloudFormat::PcdAscii ? load_pcd(in) : load_ply(in);
    } catch (const ParseError& e) {
        throw e.within(path.string());
    }
}

PointCloud load_cloud(const std::filesystem::path& path) { return load_cloud(path, format_from_path(path)); }

void save_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format) {
    if (cloud.empty()) throw ConfigError("refusing to write an empty cloud");
    cloud.validate();
    const bool normals = cloud.has_normals();
    std::ostringstream out;
    const auto& vp = cloud.viewpoint;
    if (format == CloudFormat::PcdAscii) {
        out << "# .PCD v0.7 - Point Cloud Data file format\nVERSION 0.7\n";
        out << (normals ? "FIELDS x y z normal_x normal_y normal_z\nSIZE 8 8 8 8 8 8\nTYPE F F F F F F\nCOUNT 1 1 1 1 1 1\n"
                        : "FIELDS x y z\nSIZE 8 8 8\nTYPE F F F\nCOUNT 1 1 1\n");
        out << "WIDTH " << cloud.size() << "\nHEIGHT 1\n";
        out << "VIEWPOINT " << format_double(vp.x()) << ' ' << format_double(vp.y()) << ' ' << format_double(vp.z())
            << " 1 0 0 0\n";
        out << "POINTS " << cloud.size() << "\nDATA ascii\n";
    } else {
        out << "ply\nformat ascii 1.0\n";
        out << "comment viewpoint " << format_double(vp.x()) << ' ' << format_double(vp.y()) << ' '
            << format_double(vp.z()) << '\n';
        out << "element vertex " << cloud.size() << '\n';
        out << "property double x\nproperty double y\nproperty double z\n";
        if (normals) out << "property double nx\nproperty double ny\nproperty double nz\n";
        out << "end_header\n";
    }
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& p = cloud.points[i];
        out << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z());
        if (normals) {
            const auto& n = cloud.normal(i);
            out << ' ' << format_double(n.x()) << ' ' << format_double(n.y()) << ' ' << format_double(n.z());
        }
        out << '\n';
    }
    auto file = open_for_write(path);
    file << out.str();
    if (!file) throw IoError("write to '" + path.string() + "' failed");
}

void save_cloud(const PointCloud& cloud, const std::filesystem::path& path) {
    save_cloud(cloud, path, format_from_path(path));
}

IndexList load_indices(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    IndexList out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto tok = split_ws(line);
        if (tok.empty() || tok[0].front() == '#') continue;
        if (tok.size() != 1) throw ParseError(path.string() + ": expected one index per line", lineno);
        out.push_back(parse_count(tok[0], lineno));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void save_indices(const IndexList& indices, const std::filesystem::path& path) {
    std::ostringstream out;
    for (const auto i : indices) out << i << '\n';
    auto file = open_for_write(path);
    file << out.str();
    if (!file) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace weldgroove
