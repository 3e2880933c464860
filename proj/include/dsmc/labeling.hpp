#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace dsmc {

enum class LabelMethod { kmeans, argmax };

struct LabelAssignment {
    std::vector<int> labels;  // each in [0, k)
    LabelMethod method = LabelMethod::kmeans;
};

struct KMeansResult {
    LabelAssignment assignment;
    Eigen::MatrixXd centroids;
    double inertia = 0;                  // within-cluster sum of squares of the best restart
    std::vector<double> inertia_history;  // per Lloyd iteration of the best restart
    int best_restart = 0;
};

/// Lloyd's algorithm with k-means++ seeding; best of `restarts` by inertia.
KMeansResult kmeans_detailed(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                             int restarts = 10, int max_iter = 300);

LabelAssignment kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts = 10,
                       int max_iter = 300);

/// Row-wise argmax; ties go to the lowest column.
LabelAssignment argmax_labels(const Eigen::MatrixXd& Y);

double within_cluster_ss(const Eigen::MatrixXd& points, const std::vector<int>& labels, int k);

}  // namespace dsmc
