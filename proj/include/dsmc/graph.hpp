#pragma once

#include "dsmc/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

namespace dsmc {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Bandwidth = median pairwise Euclidean distance.
struct MedianSigma {};
struct FixedSigma {
    double value;
};
using SigmaPolicy = std::variant<MedianSigma, FixedSigma>;

/// Dense Gaussian affinity, w_ij = exp(-|x_i - x_j|^2 / (2 sigma^2)).
template <typename Scalar>
struct AffinityGraph {
    Matrix<Scalar> W;
    Scalar sigma;
};

template <typename Scalar>
struct LaplacianPair {
    Vector<Scalar> degree;  // diagonal of D
    Matrix<Scalar> L;       // I - D^{-1/2} W D^{-1/2}

    Matrix<Scalar> D() const { return degree.asDiagonal(); }
};

/// k eigenvectors of L for the smallest eigenvalues, as orthonormal columns.
template <typename Scalar>
struct SpectralEmbedding {
    Matrix<Scalar> F;
    Vector<Scalar> eigenvalues;

    Eigen::Index instances() const { return F.rows(); }
    Eigen::Index dims() const { return F.cols(); }
};

namespace detail {

template <typename Scalar>
Scalar median_in_place(std::vector<Scalar>& values) {
    const auto mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    const Scalar upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const Scalar lower = *std::max_element(values.begin(), values.begin() + mid);
    return (lower + upper) / Scalar(2);
}

}  // namespace detail

template <typename Derived>
AffinityGraph<typename Derived::Scalar> build_affinity(const Eigen::MatrixBase<Derived>& X,
                                                       const SigmaPolicy& policy = MedianSigma{}) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index p = X.rows();
    if (p < 2) throw ValidationError("affinity graph needs at least 2 instances");

    // squared distances, one evaluation per unordered pair
    Matrix<Scalar> sq = Matrix<Scalar>::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i + 1; j < p; ++j) {
            const Scalar d2 = (X.row(i) - X.row(j)).squaredNorm();
            sq(i, j) = d2;
            sq(j, i) = d2;
        }

    Scalar sigma;
    if (const auto* fixed = std::get_if<FixedSigma>(&policy)) {
        if (!(fixed->value > 0.0)) throw ValidationError("fixed sigma must be > 0");
        sigma = Scalar(fixed->value);
    } else {
        std::vector<Scalar> dist;
        dist.reserve(static_cast<std::size_t>(p * (p - 1) / 2));
        for (Eigen::Index i = 0; i < p; ++i)
            for (Eigen::Index j = i + 1; j < p; ++j) dist.push_back(std::sqrt(sq(i, j)));
        sigma = detail::median_in_place(dist);
        if (!(sigma > Scalar(0)))
            throw ValidationError("median pairwise distance is 0 (instances coincide); "
                                  "pass a fixed sigma instead");
    }

    const Scalar denom = Scalar(2) * sigma * sigma;
    Matrix<Scalar> W(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        W(i, i) = Scalar(1);
        for (Eigen::Index j = i + 1; j < p; ++j) {
            const Scalar w = std::exp(-sq(i, j) / denom);
            W(i, j) = w;
            W(j, i) = w;
        }
    }
    return {std::move(W), sigma};
}

template <typename Scalar>
LaplacianPair<Scalar> build_laplacian(const AffinityGraph<Scalar>& g) {
    Vector<Scalar> degree = g.W.rowwise().sum();
    if (!(degree.minCoeff() > Scalar(0)))
        throw NumericalError("affinity graph has a zero-degree vertex");
    const Vector<Scalar> inv_sqrt = degree.cwiseSqrt().cwiseInverse();
    Matrix<Scalar> L = -(inv_sqrt.asDiagonal() * g.W * inv_sqrt.asDiagonal());
    L.diagonal().array() += Scalar(1);
    // exact symmetry; the diagonal scaling can leave 1-ulp asymmetry
    L = (L + L.transpose()).eval() / Scalar(2);
    return {std::move(degree), std::move(L)};
}

/// Flips each column so its largest-magnitude entry is positive (first such row wins ties).
template <typename Scalar>
void canonicalize_signs(Matrix<Scalar>& F) {
    for (Eigen::Index j = 0; j < F.cols(); ++j) {
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < F.rows(); ++i)
            if (std::abs(F(i, j)) > std::abs(F(best, j))) best = i;
        if (F(best, j) < Scalar(0)) F.col(j) = -F.col(j);
    }
}

template <typename Scalar>
SpectralEmbedding<Scalar> spectral_embedding(const LaplacianPair<Scalar>& lp, Eigen::Index k) {
    const Eigen::Index p = lp.L.rows();
    if (k < 1 || k > p)
        throw ValidationError("embedding dimension k=" + std::to_string(k) + " outside [1, " +
                              std::to_string(p) + "]");
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(lp.L);
    if (eig.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
    // eigenvalues come back in increasing order
    SpectralEmbedding<Scalar> out{eig.eigenvectors().leftCols(k), eig.eigenvalues().head(k)};
    canonicalize_signs(out.F);
    return out;
}

}  // namespace dsmc
