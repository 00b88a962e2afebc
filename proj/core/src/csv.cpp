#include "fermech/csv.hpp"

#include <cstdio>
#include <cstdlib>

#include "fermech/errors.hpp"

namespace fermech::csv {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

double parse_double(const std::string& field, const std::filesystem::path& path,
                    std::size_t row) {
    const char* p = field.c_str();
    char* end = nullptr;
    double v = std::strtod(p, &end);
    if (end == p || *end != '\0') {
        throw DataError(path.string() + ": row " + std::to_string(row) +
                        ": not a number: '" + field + "'");
    }
    return v;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Reader::Reader(std::filesystem::path path) : path_(std::move(path)), in_(path_) {
    if (!in_) throw DataError("cannot open file: " + path_.string());
    std::string line;
    if (!std::getline(in_, line)) {
        throw DataError(path_.string() + ": empty file (missing header)");
    }
    header_ = split(line);
}

bool Reader::next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
        ++row_;
        std::string t = trim(line);
        if (t.empty()) continue;
        fields = split(line);
        return true;
    }
    return false;
}

}  // namespace fermech::csv
