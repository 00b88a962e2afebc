#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fermech::csv {

// Comma-separated text plumbing shared by the score/feature/prediction file
// readers. Errors are DataError carrying path and row number.

std::vector<std::string> split(const std::string& line);

double parse_double(const std::string& field, const std::filesystem::path& path,
                    std::size_t row);

// Full-precision decimal text; round-trips doubles exactly.
std::string format_double(double v);

class Reader {
public:
    explicit Reader(std::filesystem::path path);

    const std::vector<std::string>& header() const { return header_; }
    // Fills `fields` with the next data row; false at end of file.
    bool next(std::vector<std::string>& fields);
    // 1-based row number of the row most recently returned (header is row 1).
    std::size_t row() const { return row_; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ifstream in_;
    std::vector<std::string> header_;
    std::size_t row_ = 1;
};

}  // namespace fermech::csv
