#pragma once

#include <Eigen/Dense>

#include <vector>

namespace dsmc {

/// Co-occurrence counts of predicted cluster (rows) against true class (columns),
/// built over labels canonicalised to contiguous ids in order of first appearance.
struct ContingencyTable {
    Eigen::MatrixXd counts;
    Eigen::VectorXd row_totals;
    Eigen::VectorXd col_totals;
    double total = 0;

    ContingencyTable(const std::vector<long long>& pred, const std::vector<long long>& truth);
};

/// Relabels to 0..m-1 in order of first appearance.
std::vector<int> canonicalize_labels(const std::vector<long long>& labels);

/// Minimum-cost perfect assignment on a square cost matrix; returns column per row.
std::vector<int> hungarian_min(const Eigen::MatrixXd& cost);

double accuracy(const std::vector<long long>& pred, const std::vector<long long>& truth);
double nmi(const std::vector<long long>& pred, const std::vector<long long>& truth);
double purity(const std::vector<long long>& pred, const std::vector<long long>& truth);

struct MetricTriple {
    double acc = 0;
    double nmi = 0;
    double purity = 0;
};

MetricTriple evaluate(const std::vector<long long>& pred, const std::vector<long long>& truth);

template <typename Int>
std::vector<long long> widen(const std::vector<Int>& labels) {
    return {labels.begin(), labels.end()};
}

}  // namespace dsmc
