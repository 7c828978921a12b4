#include "conekit/io/toml.hpp"

#include <cctype>
#include <cstdlib>
#include <stdexcept>

namespace conekit::io {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool parse_scalar(const std::string& token, TomlValue& out, std::string& err) {
    std::string t = trim(token);
    if (t.empty()) {
        err = "empty value";
        return false;
    }
    if (t.front() == '"') {
        if (t.size() < 2 || t.back() != '"') {
            err = "unterminated string";
            return false;
        }
        out.kind = TomlValue::Kind::String;
        out.str = t.substr(1, t.size() - 2);
        return true;
    }
    if (t == "true" || t == "false") {
        out.kind = TomlValue::Kind::Boolean;
        out.boolean = t == "true";
        return true;
    }
    char* end = nullptr;
    double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() + t.size()) {
        out.kind = TomlValue::Kind::Number;
        out.number = v;
        return true;
    }
    err = "cannot parse value '" + t + "'";
    return false;
}

// split a flat array body on commas (strings may contain commas)
bool split_array(const std::string& body, std::vector<std::string>& parts, std::string& err) {
    std::string cur;
    bool in_string = false;
    for (char c : body) {
        if (c == '"') in_string = !in_string;
        if (c == ',' && !in_string) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (in_string) {
        err = "unterminated string in array";
        return false;
    }
    if (!trim(cur).empty() || !parts.empty()) parts.push_back(cur);
    if (!parts.empty() && trim(parts.back()).empty()) parts.pop_back();
    return true;
}

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

}  // namespace

bool TomlTable::has(const std::string& section, const std::string& key) const {
    auto it = sections.find(section);
    return it != sections.end() && it->second.count(key) > 0;
}

const TomlValue& TomlTable::at(const std::string& section, const std::string& key) const {
    auto it = sections.find(section);
    if (it == sections.end()) throw std::out_of_range("missing section [" + section + "]");
    auto kt = it->second.find(key);
    if (kt == it->second.end())
        throw std::out_of_range("missing key '" + key + "' in [" + section + "]");
    return kt->second;
}

TomlTable parse_toml(const std::string& text, std::vector<std::string>& errors) {
    TomlTable table;
    std::string section;
    size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string raw = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;

        auto fail = [&](const std::string& msg) {
            errors.push_back("line " + std::to_string(line_no) + ": " + msg);
        };

        if (line.front() == '[') {
            if (line.back() != ']') {
                fail("malformed section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) fail("empty section name");
            table.sections[section];
            continue;
        }

        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            fail("expected 'key = value'");
            continue;
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            fail("empty key");
            continue;
        }
        if (table.sections[section].count(key)) {
            fail("duplicate key '" + key + "'");
            continue;
        }

        TomlValue v;
        std::string err;
        if (!value.empty() && value.front() == '[') {
            if (value.back() != ']') {
                fail("unterminated array");
                continue;
            }
            v.kind = TomlValue::Kind::Array;
            std::vector<std::string> parts;
            if (!split_array(value.substr(1, value.size() - 2), parts, err)) {
                fail(err);
                continue;
            }
            bool ok = true;
            for (const auto& p : parts) {
                TomlValue elem;
                if (!parse_scalar(p, elem, err)) {
                    fail(err);
                    ok = false;
                    break;
                }
                v.array.push_back(elem);
            }
            if (!ok) continue;
        } else if (!parse_scalar(value, v, err)) {
            fail(err);
            continue;
        }
        table.sections[section][key] = v;
    }
    return table;
}

}  // namespace conekit::io
