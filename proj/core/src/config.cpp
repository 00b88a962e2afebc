#include "fermech/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fermech/errors.hpp"

namespace fermech::config {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double_or_throw(const std::string& key, const std::string& value) {
    const char* p = value.c_str();
    char* end = nullptr;
    double v = std::strtod(p, &end);
    if (end == p || *end != '\0') {
        throw ConfigError("config key '" + key + "': not a number: '" + value + "'");
    }
    return v;
}

}  // namespace

File File::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

File File::parse(const std::string& text, const std::string& origin) {
    File f;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected `key = value`, got '" + line + "'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        }
        f.values_[key] = value;
    }
    return f;
}

void File::set(const std::string& key, const std::string& value) { values_[key] = value; }

bool File::has(const std::string& key) const { return values_.count(key) > 0; }

std::string File::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::string File::require_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end() || it->second.empty()) {
        throw ConfigError("missing required config key '" + key + "'");
    }
    return it->second;
}

double File::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return parse_double_or_throw(key, it->second);
}

std::size_t File::get_size(const std::string& key, std::size_t fallback) const {
    return static_cast<std::size_t>(get_u64(key, fallback));
}

std::uint64_t File::get_u64(const std::string& key, std::uint64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        std::uint64_t v = std::stoull(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a nonnegative integer: '" + it->second +
                          "'");
    }
}

bool File::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "': not a boolean: '" + v + "'");
}

std::vector<double> File::get_doubles(const std::string& key) const {
    auto it = values_.find(key);
    std::vector<double> out;
    if (it == values_.end()) return out;
    std::istringstream in(it->second);
    std::string field;
    while (std::getline(in, field, ',')) {
        out.push_back(parse_double_or_throw(key, trim(field)));
    }
    return out;
}

std::vector<std::size_t> File::get_sizes(const std::string& key) const {
    std::vector<std::size_t> out;
    for (double v : get_doubles(key)) {
        if (v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
            throw ConfigError("config key '" + key + "': not a nonnegative integer list");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> File::with_prefix(
    const std::string& prefix) const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [k, v] : values_) {
        if (k.rfind(prefix, 0) == 0) out.emplace_back(k, v);
    }
    return out;
}

}  // namespace fermech::config
