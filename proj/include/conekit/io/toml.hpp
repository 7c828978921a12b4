#pragma once

#include <map>
#include <string>
#include <vector>

namespace conekit::io {

/// Minimal strict TOML subset: [section] headers, key = value lines with
/// strings, numbers, booleans and flat arrays, and # comments.  Unknown
/// syntax is an error; duplicate keys are errors.
struct TomlValue {
    enum class Kind { String, Number, Boolean, Array };
    Kind kind = Kind::Number;
    std::string str;
    double number = 0.0;
    bool boolean = false;
    std::vector<TomlValue> array;
};

struct TomlTable {
    // section -> key -> value; top-level keys live under the "" section
    std::map<std::string, std::map<std::string, TomlValue>> sections;

    bool has(const std::string& section, const std::string& key) const;
    const TomlValue& at(const std::string& section, const std::string& key) const;
};

/// Parses the text; syntax problems are collected into `errors` (with line
/// numbers) instead of failing fast.
TomlTable parse_toml(const std::string& text, std::vector<std::string>& errors);

}  // namespace conekit::io
