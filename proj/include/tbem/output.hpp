#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace tbem {

/// Shortest text that reads back to the same double ("nan", "inf", "-inf" otherwise).
std::string format_double(double v);

/// Writes through a temporary file in the same directory and renames it into place.
void write_atomic(const std::filesystem::path &path, const std::string &content);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(std::vector<std::string> row);
    std::string str() const;
    std::size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace tbem
