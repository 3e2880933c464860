#pragma once

// Alternating-direction solver for double self-weighted multi-view clustering.
//
// Each view v carries a fixed spectral embedding F (p x k) and learns
//   R  k x k orthogonal alignment,
//   M  p x k nonnegative feature weights, every column on the probability simplex,
//   U  p x k auxiliary copy of the alignment residual Y - F R,
//   C  p x k multiplier for the coupling U = Y - F R,
//   w  scalar view weight.
// The views share the relaxed indicator Y (p x k) and the penalty mu. The
// augmented Lagrangian that every block update descends is
//
//   J = sum_v  w_v |M_v^{1/2} . U_v|^2 + mu/2 |M_v|^2 + mu/2 |Y - F_v R_v - U_v + C_v/mu|^2
//
// One outer iteration runs Y, R, M, U, w, C in that order, then grows mu.

#include "dsmc/error.hpp"
#include "dsmc/graph.hpp"
#include "dsmc/simplex.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace dsmc {

enum class WeightMode {
    reciprocal,  // w = 1 / (2 r), guarded
    norm,        // w = r
};

struct SolverConfig {
    Eigen::Index k = 0;
    double mu0 = 0.01;
    double mu_max = 1e6;
    double rho = 1.1;
    int max_iter = 100;
    double tol_residual = 1e-4;
    double tol_objective = 1e-6;
    WeightMode w_mode = WeightMode::reciprocal;
    double w_cap = 1e8;
    double eps_w = 1e-8;
    bool ablation_uniform_M = false;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(mu0 > 0.0)) throw ValidationError("mu0 must be > 0");
        if (!(rho > 1.0)) throw ValidationError("rho must be > 1");
        if (!(mu_max >= mu0)) throw ValidationError("mu_max must be >= mu0");
        if (!(tol_residual > 0.0) || !(tol_objective > 0.0))
            throw ValidationError("tolerances must be > 0");
        if (max_iter < 1) throw ValidationError("max_iter must be >= 1");
        if (!(eps_w > 0.0) || !(w_cap > 0.0)) throw ValidationError("eps_w and w_cap must be > 0");
    }
};

template <typename Scalar>
struct ViewState {
    Matrix<Scalar> F;
    Matrix<Scalar> R;
    Matrix<Scalar> M;
    Matrix<Scalar> U;
    Matrix<Scalar> C;
    Scalar w = 0;
};

template <typename Scalar>
struct Consensus {
    Matrix<Scalar> Y;
};

struct IterationRecord {
    int iter = 0;  // 1-based
    double objective = 0;
    double primal_residual = 0;
    double mu = 0;  // penalty used during this iteration
    std::vector<double> weights;
};

using IterationTrace = std::vector<IterationRecord>;

enum class StopReason { residual, objective, max_iter };

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::residual: return "residual";
        case StopReason::objective: return "objective";
        case StopReason::max_iter: return "max_iter";
    }
    return "unknown";
}

enum class Step { Y, R, M, U, w, C };

template <typename Scalar>
struct SolverState {
    Consensus<Scalar> consensus;
    std::vector<ViewState<Scalar>> views;
    Scalar mu = 0;
};

template <typename Scalar>
struct SolverResult {
    Consensus<Scalar> consensus;
    std::vector<ViewState<Scalar>> views;
    IterationTrace trace;
    StopReason stop = StopReason::max_iter;
};

/// Called after every block update; `view` is -1 for the shared Y step.
template <typename Scalar>
using StepObserver = std::function<void(int iter, Step step, int view, const SolverState<Scalar>&)>;

template <typename Scalar>
SolverState<Scalar> init_states(const std::vector<SpectralEmbedding<Scalar>>& embeddings,
                                const SolverConfig& cfg) {
    if (embeddings.empty()) throw ValidationError("solver needs at least one view");
    const Eigen::Index p = embeddings.front().F.rows();
    const Eigen::Index k = embeddings.front().F.cols();
    for (std::size_t v = 0; v < embeddings.size(); ++v)
        if (embeddings[v].F.rows() != p || embeddings[v].F.cols() != k)
            throw ValidationError("embedding " + std::to_string(v) + " is " +
                                  std::to_string(embeddings[v].F.rows()) + "x" +
                                  std::to_string(embeddings[v].F.cols()) + ", expected " +
                                  std::to_string(p) + "x" + std::to_string(k));
    if (p < 1 || k < 1) throw ValidationError("empty embedding");

    const auto n = static_cast<Scalar>(embeddings.size());
    SolverState<Scalar> s;
    s.mu = Scalar(cfg.mu0);
    s.consensus.Y = Matrix<Scalar>::Zero(p, k);
    for (const auto& e : embeddings) {
        ViewState<Scalar> v;
        v.F = e.F;
        v.R = Matrix<Scalar>::Identity(k, k);
        v.M = Matrix<Scalar>::Constant(p, k, Scalar(1) / Scalar(p));
        v.U = Matrix<Scalar>::Zero(p, k);
        v.C = Matrix<Scalar>::Zero(p, k);
        v.w = Scalar(1) / n;
        s.consensus.Y += e.F;
        s.views.push_back(std::move(v));
    }
    s.consensus.Y /= n;
    return s;
}

/// Stationary point of the summed coupling terms: the view average of F R + U - C/mu.
template <typename Scalar>
Consensus<Scalar> update_consensus(const std::vector<ViewState<Scalar>>& views, Scalar mu) {
    Matrix<Scalar> Y = Matrix<Scalar>::Zero(views.front().F.rows(), views.front().F.cols());
    for (const auto& v : views) Y += v.F * v.R + v.U - v.C / mu;
    Y /= static_cast<Scalar>(views.size());
    return {std::move(Y)};
}

/// Orthogonal Procrustes: argmin over R^T R = I of |(Y - U + C/mu) - F R|_F.
template <typename Scalar>
Matrix<Scalar> update_rotation(const ViewState<Scalar>& s, const Consensus<Scalar>& c, Scalar mu) {
    const Matrix<Scalar> A = s.F.transpose() * (c.Y - s.U + s.C / mu);
    Eigen::JacobiSVD<Matrix<Scalar>> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success) throw NumericalError("SVD failed in rotation update");
    return svd.matrixU() * svd.matrixV().transpose();
}

/// Column-wise minimiser of w |M^{1/2} . U|^2 + mu/2 |M|^2 over the simplex.
template <typename Scalar>
Matrix<Scalar> update_feature_weights(const ViewState<Scalar>& s, Scalar mu) {
    const Eigen::Index p = s.U.rows();
    const Matrix<Scalar> K = s.w * s.U.cwiseProduct(s.U);
    Matrix<Scalar> M(p, s.U.cols());
    for (Eigen::Index j = 0; j < K.cols(); ++j) {
        const auto kj = K.col(j);
        const Scalar alpha = Scalar(1) / Scalar(p) + kj.sum() / (Scalar(p) * mu);
        Vector<Scalar> m = (Vector<Scalar>::Constant(p, alpha) - kj / mu).cwiseMax(Scalar(0));
        // Clipping breaks the closed form's column sum; fall back to the exact projection.
        if (std::abs(m.sum() - Scalar(1)) > Scalar(1e-10)) m = project_to_simplex(-kj / mu);
        M.col(j) = m;
    }
    return M;
}

/// Elementwise minimiser of w m u^2 + mu/2 (u - h)^2 with H = Y - F R + C/mu.
template <typename Scalar>
Matrix<Scalar> update_auxiliary(const ViewState<Scalar>& s, const Consensus<Scalar>& c, Scalar mu) {
    const Matrix<Scalar> H = c.Y - s.F * s.R + s.C / mu;
    return (mu * H.array() / (mu + Scalar(2) * s.w * s.M.array())).matrix();
}

/// r = |M^{1/2} . (Y - F R)|_F.
template <typename Scalar>
Scalar weighted_residual(const ViewState<Scalar>& s, const Consensus<Scalar>& c) {
    const Matrix<Scalar> E = c.Y - s.F * s.R;
    return std::sqrt((s.M.array() * E.array().square()).sum());
}

template <typename Scalar>
Scalar view_weight_from_residual(Scalar r, WeightMode mode, Scalar eps_w, Scalar w_cap) {
    if (mode == WeightMode::norm) return r;
    return std::min(Scalar(1) / (Scalar(2) * std::max(r, eps_w)), w_cap);
}

template <typename Scalar>
Scalar update_view_weight(const ViewState<Scalar>& s, const Consensus<Scalar>& c, WeightMode mode,
                          Scalar eps_w, Scalar w_cap) {
    return view_weight_from_residual(weighted_residual(s, c), mode, eps_w, w_cap);
}

template <typename Scalar>
Matrix<Scalar> update_multiplier(const ViewState<Scalar>& s, const Consensus<Scalar>& c, Scalar mu) {
    return s.C + mu * (c.Y - s.F * s.R - s.U);
}

template <typename Scalar>
Scalar advance_penalty(Scalar mu, Scalar rho, Scalar mu_max) {
    return std::min(mu_max, rho * mu);
}

template <typename Scalar>
Scalar coupling_residual(const ViewState<Scalar>& s, const Consensus<Scalar>& c) {
    return (c.Y - s.F * s.R - s.U).norm();
}

template <typename Scalar>
Scalar primal_residual(const std::vector<ViewState<Scalar>>& views, const Consensus<Scalar>& c) {
    Scalar worst = 0;
    for (const auto& v : views) worst = std::max(worst, coupling_residual(v, c));
    return worst;
}

/// Contribution of one view to the augmented Lagrangian.
template <typename Scalar>
Scalar view_lagrangian(const ViewState<Scalar>& s, const Consensus<Scalar>& c, Scalar mu) {
    const Scalar fit = s.w * (s.M.array() * s.U.array().square()).sum();
    const Scalar reg = mu / Scalar(2) * s.M.squaredNorm();
    const Scalar coupling = mu / Scalar(2) * (c.Y - s.F * s.R - s.U + s.C / mu).squaredNorm();
    return fit + reg + coupling;
}

template <typename Scalar>
Scalar augmented_lagrangian(const std::vector<ViewState<Scalar>>& views, const Consensus<Scalar>& c,
                            Scalar mu) {
    Scalar total = 0;
    for (const auto& v : views) total += view_lagrangian(v, c, mu);
    return total;
}

template <typename Scalar>
SolverResult<Scalar> run(const std::vector<SpectralEmbedding<Scalar>>& embeddings,
                         const SolverConfig& cfg, const StepObserver<Scalar>& observe = {}) {
    cfg.validate();
    SolverState<Scalar> s = init_states(embeddings, cfg);
    if (cfg.k != 0 && cfg.k != s.consensus.Y.cols())
        throw ValidationError("config k=" + std::to_string(cfg.k) + " but embeddings have " +
                              std::to_string(s.consensus.Y.cols()) + " columns");

    const auto notify = [&](int iter, Step step, int view) {
        if (observe) observe(iter, step, view, s);
    };
    const Scalar eps_w(cfg.eps_w), w_cap(cfg.w_cap);

    SolverResult<Scalar> out;
    Scalar previous_objective = std::numeric_limits<Scalar>::quiet_NaN();
    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        const Scalar mu = s.mu;
        try {
            s.consensus = update_consensus(s.views, mu);
            notify(iter, Step::Y, -1);
            for (std::size_t v = 0; v < s.views.size(); ++v) {
                auto& view = s.views[v];
                const int vi = static_cast<int>(v);
                try {
                    view.R = update_rotation(view, s.consensus, mu);
                } catch (const NumericalError& e) {
                    throw NumericalError(std::string(e.what()) + " (view " + std::to_string(v) + ")");
                }
                notify(iter, Step::R, vi);
                if (!cfg.ablation_uniform_M) {
                    view.M = update_feature_weights(view, mu);
                    notify(iter, Step::M, vi);
                }
                view.U = update_auxiliary(view, s.consensus, mu);
                notify(iter, Step::U, vi);
                view.w = update_view_weight(view, s.consensus, cfg.w_mode, eps_w, w_cap);
                notify(iter, Step::w, vi);
                view.C = update_multiplier(view, s.consensus, mu);
                notify(iter, Step::C, vi);
            }
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " at iteration " + std::to_string(iter));
        }

        IterationRecord rec;
        rec.iter = iter;
        rec.mu = static_cast<double>(mu);
        rec.objective = static_cast<double>(augmented_lagrangian(s.views, s.consensus, mu));
        rec.primal_residual = static_cast<double>(primal_residual(s.views, s.consensus));
        for (const auto& v : s.views) rec.weights.push_back(static_cast<double>(v.w));
        if (!std::isfinite(rec.objective))
            throw NumericalError("objective became non-finite at iteration " + std::to_string(iter));
        out.trace.push_back(rec);

        s.mu = advance_penalty(mu, Scalar(cfg.rho), Scalar(cfg.mu_max));

        if (rec.primal_residual <= cfg.tol_residual) {
            out.stop = StopReason::residual;
            break;
        }
        if (iter > 1) {
            const double prev = static_cast<double>(previous_objective);
            const double change = std::abs(rec.objective - prev) /
                                  std::max(std::abs(prev), std::numeric_limits<double>::min());
            if (change <= cfg.tol_objective) {
                out.stop = StopReason::objective;
                break;
            }
        }
        previous_objective = Scalar(rec.objective);
    }

    out.consensus = std::move(s.consensus);
    out.views = std::move(s.views);
    return out;
}

/// Relative objective change between consecutive trace records; entry 0 is NaN.
inline std::vector<double> relative_objective_changes(const IterationTrace& trace) {
    std::vector<double> out;
    for (std::size_t t = 0; t < trace.size(); ++t) {
        if (t == 0) {
            out.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        const double prev = trace[t - 1].objective;
        out.push_back(std::abs(trace[t].objective - prev) /
                      std::max(std::abs(prev), std::numeric_limits<double>::min()));
    }
    return out;
}

}  // namespace dsmc
