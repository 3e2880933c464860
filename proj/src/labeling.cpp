#include "dsmc/labeling.hpp"

#include "dsmc/error.hpp"

#include <limits>
#include <random>
#include <string>

namespace dsmc {

namespace {

struct Restart {
    std::vector<int> labels;
    Eigen::MatrixXd centroids;
    double inertia = 0;
    std::vector<double> history;
};

Eigen::MatrixXd seed_plus_plus(const Eigen::MatrixXd& x, int k, std::mt19937_64& rng) {
    const Eigen::Index p = x.rows();
    Eigen::MatrixXd centroids(k, x.cols());
    std::uniform_int_distribution<Eigen::Index> pick(0, p - 1);
    centroids.row(0) = x.row(pick(rng));

    Eigen::VectorXd d2(p);
    for (Eigen::Index i = 0; i < p; ++i) d2(i) = (x.row(i) - centroids.row(0)).squaredNorm();

    for (int c = 1; c < k; ++c) {
        const double total = d2.sum();
        Eigen::Index chosen = 0;
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            double target = u(rng);
            chosen = p - 1;
            for (Eigen::Index i = 0; i < p; ++i) {
                target -= d2(i);
                if (target < 0.0) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick(rng);
        }
        centroids.row(c) = x.row(chosen);
        for (Eigen::Index i = 0; i < p; ++i)
            d2(i) = std::min(d2(i), (x.row(i) - centroids.row(c)).squaredNorm());
    }
    return centroids;
}

int nearest(const Eigen::MatrixXd& centroids, const Eigen::RowVectorXd& point, double& dist) {
    int best = 0;
    dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
        const double d = (centroids.row(c) - point).squaredNorm();
        if (d < dist) {
            dist = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

// Empty clusters take the point farthest from its current centroid.
void repair_empty(const Eigen::MatrixXd& x, std::vector<int>& labels, Eigen::MatrixXd& centroids) {
    const int k = static_cast<int>(centroids.rows());
    std::vector<int> counts(k, 0);
    for (int l : labels) ++counts[l];
    for (int c = 0; c < k; ++c) {
        if (counts[c] > 0) continue;
        Eigen::Index far = -1;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            if (counts[labels[i]] <= 1) continue;
            const double d = (x.row(i) - centroids.row(labels[i])).squaredNorm();
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        if (far < 0) continue;  // fewer distinct donors than clusters
        --counts[labels[far]];
        labels[far] = c;
        counts[c] = 1;
        centroids.row(c) = x.row(far);
    }
}

void recompute_centroids(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                         Eigen::MatrixXd& centroids) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(centroids.rows(), centroids.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(centroids.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        sums.row(labels[i]) += x.row(i);
        counts(labels[i]) += 1.0;
    }
    for (Eigen::Index c = 0; c < centroids.rows(); ++c)
        if (counts(c) > 0) centroids.row(c) = sums.row(c) / counts(c);
}

Restart lloyd(const Eigen::MatrixXd& x, int k, std::mt19937_64& rng, int max_iter) {
    Restart r;
    r.centroids = seed_plus_plus(x, k, rng);
    r.labels.assign(static_cast<std::size_t>(x.rows()), 0);
    double dist = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) r.labels[i] = nearest(r.centroids, x.row(i), dist);
    repair_empty(x, r.labels, r.centroids);

    for (int it = 0; it < max_iter; ++it) {
        recompute_centroids(x, r.labels, r.centroids);
        r.history.push_back(within_cluster_ss(x, r.labels, k));

        bool changed = false;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            // keep the current label on exact ties so the loop terminates
            const double current = (x.row(i) - r.centroids.row(r.labels[i])).squaredNorm();
            const int c = nearest(r.centroids, x.row(i), dist);
            if (c != r.labels[i] && dist < current) {
                r.labels[i] = c;
                changed = true;
            }
        }
        repair_empty(x, r.labels, r.centroids);
        if (!changed) break;
    }
    recompute_centroids(x, r.labels, r.centroids);
    r.inertia = within_cluster_ss(x, r.labels, k);
    if (r.history.empty() || r.history.back() != r.inertia) r.history.push_back(r.inertia);
    return r;
}

}  // namespace

double within_cluster_ss(const Eigen::MatrixXd& points, const std::vector<int>& labels, int k) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        sums.row(labels[i]) += points.row(i);
        counts(labels[i]) += 1.0;
    }
    double total = 0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const Eigen::RowVectorXd centre = sums.row(labels[i]) / counts(labels[i]);
        total += (points.row(i) - centre).squaredNorm();
    }
    return total;
}

KMeansResult kmeans_detailed(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts,
                             int max_iter) {
    const Eigen::Index p = points.rows();
    if (k < 1) throw ValidationError("kmeans: k must be >= 1");
    if (k > p)
        throw ValidationError("kmeans: k=" + std::to_string(k) + " exceeds point count " +
                              std::to_string(p));
    if (!points.allFinite()) throw ValidationError("kmeans: non-finite input");
    if (restarts < 1 || max_iter < 1) throw ValidationError("kmeans: restarts and max_iter must be >= 1");

    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    std::mt19937_64 rng(seq);

    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        Restart run = lloyd(points, k, rng, max_iter);
        if (run.inertia < best.inertia) {
            best.inertia = run.inertia;
            best.assignment.labels = std::move(run.labels);
            best.centroids = std::move(run.centroids);
            best.inertia_history = std::move(run.history);
            best.best_restart = r;
        }
    }
    best.assignment.method = LabelMethod::kmeans;
    return best;
}

LabelAssignment kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts,
                       int max_iter) {
    return kmeans_detailed(points, k, seed, restarts, max_iter).assignment;
}

LabelAssignment argmax_labels(const Eigen::MatrixXd& Y) {
    if (!Y.allFinite()) throw ValidationError("argmax_labels: non-finite input");
    LabelAssignment out;
    out.method = LabelMethod::argmax;
    out.labels.resize(static_cast<std::size_t>(Y.rows()));
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < Y.cols(); ++j)
            if (Y(i, j) > Y(i, best)) best = j;
        out.labels[i] = static_cast<int>(best);
    }
    return out;
}

}  // namespace dsmc
