#include "dsmc/metrics.hpp"

#include "dsmc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace dsmc {

namespace {

void check_lengths(const std::vector<long long>& pred, const std::vector<long long>& truth) {
    if (pred.size() != truth.size())
        throw ValidationError("label length mismatch: pred has " + std::to_string(pred.size()) +
                              ", truth has " + std::to_string(truth.size()));
    if (pred.empty()) throw ValidationError("labels are empty");
}

}  // namespace

std::vector<int> canonicalize_labels(const std::vector<long long>& labels) {
    std::map<long long, int> ids;
    std::vector<int> out;
    out.reserve(labels.size());
    for (auto l : labels) {
        auto [it, inserted] = ids.try_emplace(l, static_cast<int>(ids.size()));
        out.push_back(it->second);
    }
    return out;
}

ContingencyTable::ContingencyTable(const std::vector<long long>& pred,
                                   const std::vector<long long>& truth) {
    check_lengths(pred, truth);
    const auto a = canonicalize_labels(pred);
    const auto b = canonicalize_labels(truth);
    const int r = *std::max_element(a.begin(), a.end()) + 1;
    const int s = *std::max_element(b.begin(), b.end()) + 1;
    counts = Eigen::MatrixXd::Zero(r, s);
    for (std::size_t i = 0; i < a.size(); ++i) counts(a[i], b[i]) += 1.0;
    row_totals = counts.rowwise().sum();
    col_totals = counts.colwise().sum().transpose();
    total = static_cast<double>(a.size());
}

std::vector<int> hungarian_min(const Eigen::MatrixXd& cost) {
    // Potentials formulation, 1-based internally.
    const int n = static_cast<int>(cost.rows());
    if (cost.cols() != n) throw ValidationError("hungarian: cost matrix must be square");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> assignment(n, -1);
    for (int j = 1; j <= n; ++j)
        if (match[j] != 0) assignment[match[j] - 1] = j - 1;
    return assignment;
}

double accuracy(const std::vector<long long>& pred, const std::vector<long long>& truth) {
    const ContingencyTable t(pred, truth);
    const Eigen::Index n = std::max(t.counts.rows(), t.counts.cols());
    Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(n, n);
    cost.topLeftCorner(t.counts.rows(), t.counts.cols()) = -t.counts;
    const auto assignment = hungarian_min(cost);
    double matched = 0;
    for (Eigen::Index i = 0; i < n; ++i) matched -= cost(i, assignment[i]);
    return matched / t.total;
}

double nmi(const std::vector<long long>& pred, const std::vector<long long>& truth) {
    const ContingencyTable t(pred, truth);
    const double p = t.total;
    const auto entropy = [p](const Eigen::VectorXd& totals) {
        double h = 0;
        for (Eigen::Index i = 0; i < totals.size(); ++i)
            if (totals(i) > 0) h -= totals(i) / p * std::log(totals(i) / p);
        return h;
    };
    const double h_pred = entropy(t.row_totals);
    const double h_truth = entropy(t.col_totals);

    // Identical partitions (canonical ids coincide) score 1, including one cluster each.
    if (canonicalize_labels(pred) == canonicalize_labels(truth)) return 1.0;
    if (h_pred <= 0.0 || h_truth <= 0.0) return 0.0;

    double mi = 0;
    for (Eigen::Index i = 0; i < t.counts.rows(); ++i)
        for (Eigen::Index j = 0; j < t.counts.cols(); ++j) {
            const double c = t.counts(i, j);
            if (c > 0) mi += c / p * std::log(c * p / (t.row_totals(i) * t.col_totals(j)));
        }
    return std::clamp(mi / std::sqrt(h_pred * h_truth), 0.0, 1.0);
}

double purity(const std::vector<long long>& pred, const std::vector<long long>& truth) {
    const ContingencyTable t(pred, truth);
    return t.counts.rowwise().maxCoeff().sum() / t.total;
}

MetricTriple evaluate(const std::vector<long long>& pred, const std::vector<long long>& truth) {
    return {accuracy(pred, truth), nmi(pred, truth), purity(pred, truth)};
}

}  // namespace dsmc
