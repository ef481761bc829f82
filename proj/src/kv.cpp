#include "kv.hpp"
#include "weldgroove/error.hpp"
#include "weldgroove/io.hpp"

#include <json.hpp>

#include <charconv>
#include <sstream>

namespace weldgroove::detail {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string scalar_text(const nlohmann::json& v) {
    if (v.is_null()) return "auto";
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return format_double(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
        std::string out;
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError("arrays may only hold numbers");
            if (!out.empty()) out += ' ';
            out += format_double(e.get<double>());
        }
        return out;
    }
    throw ConfigError("unsupported JSON value");
}

}  // namespace

KeyValues KeyValues::parse(std::string_view text) {
    KeyValues kv;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what());
        }
        auto flatten = [&](auto&& self, const nlohmann::json& obj, const std::string& prefix) -> void {
            for (auto it = obj.begin(); it != obj.end(); ++it) {
                const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
                if (it->is_object()) {
                    self(self, *it, key);
                } else {
                    kv.values_[key] = Entry{scalar_text(*it), 0};
                }
            }
        };
        if (!j.is_object()) throw ParseError("JSON settings must be an object");
        flatten(flatten, j, "");
        return kv;
    }
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const std::string body = trim(std::string_view(line).substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno);
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", lineno);
        if (!kv.values_.emplace(key, Entry{value, lineno}).second) {
            throw ParseError("duplicate key '" + key + "'", lineno);
        }
    }
    return kv;
}

const std::string& KeyValues::raw(const std::string& key) const {
    const auto& e = values_.at(key);
    e.used = true;
    return e.value;
}

double KeyValues::get_double(const std::string& key) const {
    const auto& s = raw(key);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError("'" + key + "' expects a number, got '" + s + "'", values_.at(key).line);
    }
    return v;
}

long long KeyValues::get_int(const std::string& key) const {
    const auto& s = raw(key);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError("'" + key + "' expects an integer, got '" + s + "'", values_.at(key).line);
    }
    return v;
}

bool KeyValues::get_bool(const std::string& key) const {
    const auto& s = raw(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ParseError("'" + key + "' expects true or false, got '" + s + "'", values_.at(key).line);
}

void KeyValues::reject_unknown() const {
    for (const auto& [key, e] : values_) {
        if (!e.used) throw ParseError("unknown key '" + key + "'", e.line);
    }
}

}  // namespace weldgroove::detail
