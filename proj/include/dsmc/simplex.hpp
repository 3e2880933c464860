#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <functional>

namespace dsmc {

/// Euclidean projection onto {x : x >= 0, sum(x) = 1} by sort-and-threshold.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> project_to_simplex(
    const Eigen::MatrixBase<Derived>& v) {
    using Scalar = typename Derived::Scalar;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Eigen::Index n = v.size();
    Vec sorted = v;
    std::sort(sorted.data(), sorted.data() + n, std::greater<Scalar>());

    Scalar running = 0;
    Scalar theta = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        running += sorted(j);
        const Scalar candidate = (running - Scalar(1)) / Scalar(j + 1);
        if (sorted(j) - candidate > Scalar(0)) theta = candidate;
    }
    return (v.array() - theta).cwiseMax(Scalar(0)).matrix();
}

}  // namespace dsmc
