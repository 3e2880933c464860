#include "dsmc/csv.hpp"

#include "dsmc/error.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dsmc::csv {

namespace {

std::string where(const std::filesystem::path& file, std::size_t line) {
    return file.string() + ":" + std::to_string(line);
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_double(const std::string& cell, const std::filesystem::path& file, std::size_t line) {
    if (cell.empty()) throw ValidationError(where(file, line) + ": empty cell");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(v))
        throw ValidationError(where(file, line) + ": non-numeric cell '" + cell + "'");
    return v;
}

std::vector<std::string> read_lines(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ValidationError(file.string() + ": cannot open file");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    // trailing blank lines are tolerated
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    return lines;
}

}  // namespace

Eigen::MatrixXd read_matrix(const std::filesystem::path& file) {
    const auto lines = read_lines(file);
    if (lines.empty()) throw ValidationError(file.string() + ": no rows");

    std::vector<std::vector<double>> rows;
    rows.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto cells = split_cells(lines[i]);
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(parse_double(c, file, i + 1));
        if (!rows.empty() && row.size() != rows.front().size())
            throw ValidationError(where(file, i + 1) + ": ragged row, expected " +
                                  std::to_string(rows.front().size()) + " columns, found " +
                                  std::to_string(row.size()));
        rows.push_back(std::move(row));
    }

    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    return m;
}

std::vector<long long> read_labels(const std::filesystem::path& file) {
    const auto lines = read_lines(file);
    std::vector<long long> labels;
    labels.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto cells = split_cells(lines[i]);
        if (cells.size() != 1)
            throw ValidationError(where(file, i + 1) + ": expected a single column");
        const auto& c = cells.front();
        long long v = 0;
        const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
        if (c.empty() || ec != std::errc{} || ptr != c.data() + c.size())
            throw ValidationError(where(file, i + 1) + ": non-integer label '" + c + "'");
        labels.push_back(v);
    }
    return labels;
}

std::string format_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string format_matrix(const Eigen::MatrixXd& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out += ',';
            out += format_number(m(i, j));
        }
        out += '\n';
    }
    return out;
}

std::string format_labels(const std::vector<long long>& labels) {
    std::string out;
    for (auto l : labels) {
        out += std::to_string(l);
        out += '\n';
    }
    return out;
}

void write_atomic(const std::filesystem::path& file, const std::string& contents) {
    auto tmp = file;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError(file.string() + ": cannot open for writing");
        out << contents;
        out.flush();
        if (!out) throw ValidationError(file.string() + ": write failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, file, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw ValidationError(file.string() + ": rename failed");
    }
}

}  // namespace dsmc::csv
