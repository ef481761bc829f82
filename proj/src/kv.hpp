#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>

namespace weldgroove::detail {

/// Flat key -> value settings read from "key = value" lines or from a JSON object
/// (nested objects flatten to dotted keys, 3-element arrays to "x y z", null to "auto").
class KeyValues {
public:
    static KeyValues parse(std::string_view text);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    /// Marks the key as consumed and returns its raw value.
    const std::string& raw(const std::string& key) const;

    double get_double(const std::string& key) const;
    long long get_int(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    /// Throws ConfigError naming the first key no getter asked for.
    void reject_unknown() const;

private:
    struct Entry {
        std::string value;
        std::size_t line = 0;
        mutable bool used = false;
    };
    std::map<std::string, Entry> values_;
};

}  // namespace weldgroove::detail
