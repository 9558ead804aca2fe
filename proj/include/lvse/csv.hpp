#ifndef LVSE_CSV_HPP
#define LVSE_CSV_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "lvse/common.hpp"

namespace lvse::csv {

// One parsed CSV file: mandatory header row, comma separated, UTF-8,
// dot decimal separator. No quoting support; none of the grid file
// schemas need embedded commas.
class Table {
public:
    Table(std::vector<std::string> header, std::vector<std::vector<std::string>> rows,
          std::string source);

    // Throws ValidationError if a named column is missing.
    int column(const std::string& name) const;
    bool has_column(const std::string& name) const;

    std::size_t row_count() const { return rows_.size(); }
    const std::string& cell(std::size_t row, int col) const;
    const std::string& cell(std::size_t row, const std::string& col) const;

    double number(std::size_t row, const std::string& col) const;
    long long integer(std::size_t row, const std::string& col) const;

    const std::string& source() const { return source_; }
    // Human-readable locator ("file.csv:3") for error messages; row is 0-based data index.
    std::string where(std::size_t row) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
    std::string source_;
};

Table read_file(const std::filesystem::path& path);

void write_file(const std::filesystem::path& path, const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows);

std::vector<std::string> split(const std::string& s, char sep);

// Canonical number formatting for dumps: shortest round-trip representation.
std::string format_number(double v);

} // namespace lvse::csv

#endif
