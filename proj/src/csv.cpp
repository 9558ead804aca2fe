#include "lvse/csv.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace lvse::csv {

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

} // namespace

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream stream(s);
    while (std::getline(stream, field, sep)) out.push_back(trim(field));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

Table::Table(std::vector<std::string> header, std::vector<std::vector<std::string>> rows,
             std::string source)
    : header_(std::move(header)), rows_(std::move(rows)), source_(std::move(source)) {}

int Table::column(const std::string& name) const {
    auto it = std::find(header_.begin(), header_.end(), name);
    if (it == header_.end())
        throw ValidationError(source_ + ": missing column '" + name + "'");
    return static_cast<int>(it - header_.begin());
}

bool Table::has_column(const std::string& name) const {
    return std::find(header_.begin(), header_.end(), name) != header_.end();
}

const std::string& Table::cell(std::size_t row, int col) const {
    return rows_.at(row).at(static_cast<std::size_t>(col));
}

const std::string& Table::cell(std::size_t row, const std::string& col) const {
    return cell(row, column(col));
}

std::string Table::where(std::size_t row) const {
    // +2: one for the header line, one for 1-based numbering
    return source_ + ":" + std::to_string(row + 2);
}

double Table::number(std::size_t row, const std::string& col) const {
    const std::string& text = cell(row, col);
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE)
        throw ValidationError(where(row) + ": '" + text + "' is not a number (column " + col + ")");
    return v;
}

long long Table::integer(std::size_t row, const std::string& col) const {
    const std::string& text = cell(row, col);
    errno = 0;
    char* end = nullptr;
    long long v = std::strtoll(text.c_str(), &end, 10);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE)
        throw ValidationError(where(row) + ": '" + text + "' is not an integer (column " + col + ")");
    return v;
}

Table read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path.string() + ": missing header row");
    auto header = split(line, ',');

    std::vector<std::vector<std::string>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split(line, ',');
        if (fields.size() != header.size())
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " fields, got " +
                                  std::to_string(fields.size()));
        rows.push_back(std::move(fields));
    }
    return Table(std::move(header), std::move(rows), path.filename().string());
}

void write_file(const std::filesystem::path& path, const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
}

std::string format_number(double v) {
    char buf[64];
    if (v == static_cast<long long>(v) && std::abs(v) < 1e15) {
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
        return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // prefer the shortest representation that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[64];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
        if (std::strtod(shorter, nullptr) == v) return shorter;
    }
    return buf;
}

} // namespace lvse::csv
