#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace fermech::config {

// Flat `section.key = value` run configuration with `#` comments. Typed
// getters raise ConfigError naming the offending key.
class File {
public:
    File() = default;

    static File load(const std::filesystem::path& path);
    static File parse(const std::string& text, const std::string& origin = "<string>");

    // CLI flags override file values through this.
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::string require_string(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // comma-separated lists
    std::vector<double> get_doubles(const std::string& key) const;        // empty if absent
    std::vector<std::size_t> get_sizes(const std::string& key) const;

    // all (key, value) pairs whose key starts with `prefix`, sorted by key
    std::vector<std::pair<std::string, std::string>> with_prefix(const std::string& prefix) const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace fermech::config
