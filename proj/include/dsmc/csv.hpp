#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace dsmc::csv {

// Comma-separated, no header. Errors carry "<file>:<line>".
Eigen::MatrixXd read_matrix(const std::filesystem::path& file);
std::vector<long long> read_labels(const std::filesystem::path& file);

// 17 significant digits so doubles survive a write/read cycle bit-exactly.
std::string format_matrix(const Eigen::MatrixXd& m);
std::string format_labels(const std::vector<long long>& labels);
std::string format_number(double x);

/// Writes to a sibling temp file, then renames over the target.
void write_atomic(const std::filesystem::path& file, const std::string& contents);

}  // namespace dsmc::csv
