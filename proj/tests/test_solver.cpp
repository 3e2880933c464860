#include "dsmc/dataset.hpp"
#include "dsmc/pipeline.hpp"
#include "dsmc/solver.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace dsmc;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

SpectralEmbedding<double> embedding_of(MatrixXd F) { return {std::move(F), VectorXd::Zero(0)}; }

ViewState<double> plain_view(MatrixXd F) {
    const auto p = F.rows(), k = F.cols();
    ViewState<double> s;
    s.F = std::move(F);
    s.R = MatrixXd::Identity(k, k);
    s.M = MatrixXd::Constant(p, k, 1.0 / p);
    s.U = MatrixXd::Zero(p, k);
    s.C = MatrixXd::Zero(p, k);
    s.w = 1.0;
    return s;
}

double max_abs(const MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

std::vector<SpectralEmbedding<double>> synthetic_embeddings(std::vector<double> noise, std::uint64_t seed) {
    SynthSpec spec;
    spec.noise_sigma = std::move(noise);
    spec.n = static_cast<int>(spec.noise_sigma.size());
    spec.seed = seed;
    return embed_views(generate_synthetic(spec), 3, MedianSigma{}, false);
}

}  // namespace

TEST_CASE("init_states") {
    std::mt19937_64 rng(1);
    std::vector<SpectralEmbedding<double>> emb;
    for (int v = 0; v < 3; ++v) emb.push_back(embedding_of(oracle::random_orthonormal(7, 2, rng)));
    SolverConfig cfg;
    const auto s = init_states(emb, cfg);
    CHECK(s.mu == 0.01);
    REQUIRE(s.views.size() == 3);
    for (const auto& v : s.views) {
        CHECK(v.w == doctest::Approx(1.0 / 3.0));
        CHECK((v.M.array() == 1.0 / 7.0).all());
        for (Eigen::Index j = 0; j < 2; ++j) CHECK(std::abs(v.M.col(j).sum() - 1.0) < 1e-12);
        CHECK(v.U.isZero());
        CHECK(v.C.isZero());
        CHECK(v.R.isIdentity());
    }
    CHECK(max_abs(s.consensus.Y - (emb[0].F + emb[1].F + emb[2].F) / 3.0) < 1e-15);

    const auto single = init_states(std::vector{emb[0]}, cfg);
    CHECK(single.consensus.Y == emb[0].F);

    emb.push_back(embedding_of(oracle::random_orthonormal(6, 2, rng)));
    CHECK_THROWS_AS(init_states(emb, cfg), ValidationError);
    CHECK_THROWS_AS(init_states(std::vector<SpectralEmbedding<double>>{}, cfg), ValidationError);
}

TEST_CASE("consensus update") {
    std::mt19937_64 rng(2);

    SUBCASE("single view with zero auxiliaries gives F R") {
        auto v = plain_view(oracle::random_orthonormal(5, 2, rng));
        v.R = oracle::random_orthonormal(2, 2, rng);
        CHECK(max_abs(update_consensus(std::vector{v}, 0.3).Y - v.F * v.R) < 1e-15);
    }
    SUBCASE("two views match a gradient-descent minimiser") {
        auto s = oracle::random_state(4, 2, 2, rng);
        const auto Y = update_consensus(s.views, s.mu).Y;
        const auto expected = 0.5 * (s.views[0].F * s.views[0].R + s.views[0].U - s.views[0].C / s.mu +
                                     s.views[1].F * s.views[1].R + s.views[1].U - s.views[1].C / s.mu);
        CHECK(max_abs(Y - expected) < 1e-14);
        CHECK(max_abs(Y - oracle::consensus_by_descent(s.views, s.mu, MatrixXd::Zero(4, 2))) < 1e-6);
    }
    SUBCASE("local optimality probe") {
        auto s = oracle::random_state(6, 3, 3, rng);
        Consensus<double> c = update_consensus(s.views, s.mu);
        const double best = augmented_lagrangian(s.views, c, s.mu);
        for (int i = 0; i < 100; ++i) {
            MatrixXd delta = oracle::random_matrix(6, 3, rng);
            delta *= 1e-3 / delta.norm();
            Consensus<double> moved{c.Y + delta};
            CHECK(best <= augmented_lagrangian(s.views, moved, s.mu));
        }
    }
}

TEST_CASE("rotation update") {
    SUBCASE("A = I gives identity") {
        auto v = plain_view(MatrixXd::Identity(3, 3));
        Consensus<double> c{MatrixXd::Identity(3, 3)};
        CHECK(max_abs(update_rotation(v, c, 1.0) - MatrixXd::Identity(3, 3)) < 1e-12);
    }
    SUBCASE("A = diag(2, 3) gives identity") {
        auto v = plain_view(MatrixXd::Identity(2, 2));
        Consensus<double> c{Eigen::Vector2d(2, 3).asDiagonal()};
        CHECK(max_abs(update_rotation(v, c, 1.0) - MatrixXd::Identity(2, 2)) < 1e-12);
    }
    SUBCASE("recovers a planar rotation, cross-checked by grid search") {
        std::mt19937_64 rng(4);
        const double theta = 0.7;
        auto v = plain_view(oracle::random_orthonormal(10, 2, rng));
        Consensus<double> c{v.F * oracle::planar(theta, false)};
        const MatrixXd R = update_rotation(v, c, 0.5);
        CHECK(max_abs(R - oracle::planar(theta, false)) < 1e-10);

        const auto grid = oracle::rotation_grid(v.F, c.Y, 10000, false);
        const double recovered = std::atan2(R(1, 0), R(0, 0));
        CHECK(std::abs(recovered - grid.theta) < 1e-3);
    }
    SUBCASE("random instances match exhaustive search and stay orthogonal") {
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 20; ++trial) {
            auto s = oracle::random_state(4, 2, 1, rng);
            const auto& v = s.views[0];
            const MatrixXd R = update_rotation(v, s.consensus, s.mu);
            CHECK(max_abs(R.transpose() * R - MatrixXd::Identity(2, 2)) <= 1e-8);
            const MatrixXd target = s.consensus.Y - v.U + v.C / s.mu;
            CHECK(max_abs(R - oracle::procrustes_by_search(v.F, target)) < 1e-5);
        }
    }
}

TEST_CASE("feature-weight update") {
    SUBCASE("zero auxiliary gives uniform columns") {
        std::mt19937_64 rng(6);
        auto v = plain_view(oracle::random_orthonormal(5, 2, rng));
        CHECK((update_feature_weights(v, 0.2).array() == 0.2).all());
    }
    SUBCASE("interior closed form") {
        auto v = plain_view(MatrixXd::Zero(2, 1));
        v.U << 0.0, std::sqrt(0.5);
        const MatrixXd M = update_feature_weights(v, 1.0);
        CHECK(M(0, 0) == doctest::Approx(0.75).epsilon(1e-14));
        CHECK(M(1, 0) == doctest::Approx(0.25).epsilon(1e-14));
        const VectorXd ref = oracle::simplex_column_by_enumeration(v.U.col(0), 1.0, 1.0);
        CHECK(max_abs(M.col(0) - ref) < 1e-12);
    }
    SUBCASE("clipped regime falls back to the simplex projection") {
        auto v = plain_view(MatrixXd::Zero(2, 1));
        v.U << 0.0, std::sqrt(10.0);  // k = (0, 10)
        // the unguarded closed form: alpha = 1/2 + 10/2 = 5.5 -> (5.5, 0), sum 5.5
        const double alpha = 0.5 + 10.0 / 2.0;
        CHECK(std::max(alpha - 0.0, 0.0) + std::max(alpha - 10.0, 0.0) == doctest::Approx(5.5));
        const MatrixXd M = update_feature_weights(v, 1.0);
        CHECK(M(0, 0) == doctest::Approx(1.0));
        CHECK(M(1, 0) == 0.0);
        CHECK(max_abs(M.col(0) - oracle::simplex_column_by_enumeration(v.U.col(0), 1.0, 1.0)) < 1e-12);
    }
    SUBCASE("matches enumeration on random instances") {
        std::mt19937_64 rng(7);
        for (int trial = 0; trial < 40; ++trial) {
            auto s = oracle::random_state(4, 2, 1, rng);
            auto& v = s.views[0];
            v.U *= (trial % 4) + 0.1;  // mix interior and clipped columns
            const MatrixXd M = update_feature_weights(v, s.mu);
            CHECK(M.minCoeff() >= 0.0);
            for (Eigen::Index j = 0; j < 2; ++j) {
                CHECK(std::abs(M.col(j).sum() - 1.0) <= 1e-10);
                CHECK(max_abs(M.col(j) - oracle::simplex_column_by_enumeration(v.U.col(j), v.w, s.mu)) < 1e-9);
            }
        }
    }
}

TEST_CASE("simplex projection") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const VectorXd y = oracle::random_matrix(4, 1, rng, 2.0);
        const VectorXd x = project_to_simplex(y);
        CHECK(x.minCoeff() >= 0.0);
        CHECK(std::abs(x.sum() - 1.0) < 1e-12);
        // projection of y is the simplex minimiser of 0.5 |x|^2 - y.x, i.e. w=1, mu=1, u_i^2 = -y_i + c
        const double shift = y.maxCoeff();
        const VectorXd u = (shift - y.array()).sqrt().matrix();
        CHECK(max_abs(x - oracle::simplex_column_by_enumeration(u, 1.0, 1.0)) < 1e-9);
    }
    VectorXd inside(3);
    inside << 0.2, 0.3, 0.5;
    CHECK(max_abs(project_to_simplex(inside) - inside) < 1e-15);
}

TEST_CASE("auxiliary update") {
    SUBCASE("zero feature weight passes H through") {
        std::mt19937_64 rng(9);
        auto s = oracle::random_state(3, 2, 1, rng);
        auto& v = s.views[0];
        v.M.setZero();
        const MatrixXd H = s.consensus.Y - v.F * v.R + v.C / s.mu;
        CHECK(max_abs(update_auxiliary(v, s.consensus, s.mu) - H) < 1e-15);
    }
    SUBCASE("direct formula") {
        auto v = plain_view(MatrixXd::Zero(1, 1));
        v.M(0, 0) = 1.0;
        v.w = 1.0;
        Consensus<double> c{MatrixXd::Constant(1, 1, 1.0)};  // h = 1
        CHECK(update_auxiliary(v, c, 2.0)(0, 0) == doctest::Approx(0.5));
    }
    SUBCASE("matches scalar minimisation entrywise") {
        std::mt19937_64 rng(10);
        auto s = oracle::random_state(3, 2, 1, rng);
        const auto& v = s.views[0];
        const MatrixXd U = update_auxiliary(v, s.consensus, s.mu);
        const MatrixXd H = s.consensus.Y - v.F * v.R + v.C / s.mu;
        for (Eigen::Index i = 0; i < 3; ++i)
            for (Eigen::Index j = 0; j < 2; ++j)
                CHECK(std::abs(U(i, j) - oracle::auxiliary_entry_by_search(H(i, j), v.w, v.M(i, j), s.mu)) < 1e-8);
    }
}

TEST_CASE("view weight update") {
    CHECK(view_weight_from_residual(0.5, WeightMode::reciprocal, 1e-8, 1e8) == 1.0);
    CHECK(view_weight_from_residual(0.5, WeightMode::norm, 1e-8, 1e8) == 0.5);
    // guard path: min(1 / (2 eps_w), w_cap); with the defaults the eps guard binds first
    CHECK(view_weight_from_residual(0.0, WeightMode::reciprocal, 1e-8, 1e8) == doctest::Approx(5e7));
    CHECK(view_weight_from_residual(0.0, WeightMode::reciprocal, 1e-8, 1e6) == 1e6);
    CHECK(view_weight_from_residual(0.0, WeightMode::reciprocal, 1e-2, 1e8) == doctest::Approx(50.0));

    SUBCASE("residual is the M-weighted alignment error") {
        auto v = plain_view(MatrixXd::Zero(2, 1));
        v.M << 0.25, 0.75;
        Consensus<double> c{MatrixXd::Zero(2, 1)};
        c.Y << 1.0, 0.0;  // r^2 = 0.25
        CHECK(weighted_residual(v, c) == doctest::Approx(0.5));
        CHECK(update_view_weight(v, c, WeightMode::reciprocal, 1e-8, 1e8) == doctest::Approx(1.0));
        CHECK(update_view_weight(v, c, WeightMode::norm, 1e-8, 1e8) == doctest::Approx(0.5));
    }
    SUBCASE("reciprocal mode is antitone in the residual") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> r(0.0, 2.0);
        for (int i = 0; i < 200; ++i) {
            double a = r(rng), b = r(rng);
            if (i % 10 == 0) a = 0.0;
            if (a > b) std::swap(a, b);
            CHECK(view_weight_from_residual(a, WeightMode::reciprocal, 1e-8, 1e8) >=
                  view_weight_from_residual(b, WeightMode::reciprocal, 1e-8, 1e8));
        }
    }
}

TEST_CASE("multiplier and penalty update") {
    std::mt19937_64 rng(12);
    auto v = plain_view(oracle::random_orthonormal(4, 2, rng));
    v.C = oracle::random_matrix(4, 2, rng);
    Consensus<double> c{v.F * v.R + v.U};
    CHECK(update_multiplier(v, c, 0.7) == v.C);
    c.Y.array() += 1.0;
    CHECK(max_abs(update_multiplier(v, c, 0.5) - (v.C.array() + 0.5).matrix()) < 1e-15);

    CHECK(advance_penalty(0.01, 1.1, 1e6) == doctest::Approx(0.011).epsilon(1e-14));
    CHECK(advance_penalty(1e6, 1.1, 1e6) == 1e6);
}

TEST_CASE("each block update does not increase the augmented Lagrangian") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index p = 2 + trial % 5, k = 1 + trial % 3;
        auto s = oracle::random_state(p, std::min(p, k), 1 + trial % 3, rng);
        const double tol = 1e-9;

        double before = augmented_lagrangian(s.views, s.consensus, s.mu);
        s.consensus = update_consensus(s.views, s.mu);
        double after = augmented_lagrangian(s.views, s.consensus, s.mu);
        CHECK(after <= before + tol);

        for (auto& v : s.views) {
            before = augmented_lagrangian(s.views, s.consensus, s.mu);
            v.R = update_rotation(v, s.consensus, s.mu);
            after = augmented_lagrangian(s.views, s.consensus, s.mu);
            CHECK(after <= before + tol);

            before = after;
            v.M = update_feature_weights(v, s.mu);
            after = augmented_lagrangian(s.views, s.consensus, s.mu);
            CHECK(after <= before + tol);

            before = after;
            v.U = update_auxiliary(v, s.consensus, s.mu);
            after = augmented_lagrangian(s.views, s.consensus, s.mu);
            CHECK(after <= before + tol);
        }
    }
}

TEST_CASE("run: single view reaches the Y fixed point after the first update") {
    std::mt19937_64 rng(14);
    std::vector emb{embedding_of(oracle::random_orthonormal(8, 2, rng))};
    SolverConfig cfg;
    cfg.max_iter = 3;
    bool checked = false;
    run<double>(emb, cfg, [&](int iter, Step step, int, const SolverState<double>& s) {
        if (iter == 1 && step == Step::Y) {
            const auto& v = s.views[0];
            CHECK(max_abs(s.consensus.Y - v.F * v.R) < 1e-15);
            CHECK(coupling_residual(v, s.consensus) == 0.0);
            checked = true;
        }
    });
    CHECK(checked);
}

TEST_CASE("run: invariants hold after every step") {
    const auto emb = synthetic_embeddings({0.1, 0.1, 50.0}, 3);
    SolverConfig cfg;
    double last_mu = 0;
    int r_checks = 0, m_checks = 0;
    const auto res = run<double>(emb, cfg, [&](int, Step step, int view, const SolverState<double>& s) {
        CHECK(s.mu >= last_mu);
        CHECK(s.mu <= cfg.mu_max);
        last_mu = s.mu;
        if (step == Step::R) {
            const auto& R = s.views[view].R;
            CHECK(max_abs(R.transpose() * R - MatrixXd::Identity(R.rows(), R.cols())) <= 1e-8);
            ++r_checks;
        }
        if (step == Step::M) {
            const auto& M = s.views[view].M;
            CHECK(M.minCoeff() >= 0.0);
            CHECK(max_abs(M.colwise().sum().array() - 1.0) <= 1e-10);
            ++m_checks;
        }
    });
    CHECK(r_checks == 3 * static_cast<int>(res.trace.size()));
    CHECK(m_checks == r_checks);
    for (std::size_t t = 1; t < res.trace.size(); ++t) CHECK(res.trace[t].mu >= res.trace[t - 1].mu);
}

TEST_CASE("run: clean data converges on the residual criterion") {
    const auto emb = synthetic_embeddings({0.1, 0.1, 0.1}, 0);
    const auto res = run<double>(emb, SolverConfig{});
    CHECK(res.stop == StopReason::residual);
    CHECK(res.trace.size() <= 100);
    CHECK(res.trace.back().primal_residual <= 1e-4);
    CHECK(res.trace.back().weights.size() == 3);
}

TEST_CASE("run: identical inputs give identical traces") {
    const auto emb = synthetic_embeddings({0.1, 0.5, 2.0}, 4);
    SolverConfig cfg;
    cfg.max_iter = 40;
    const auto a = run<double>(emb, cfg);
    const auto b = run<double>(emb, cfg);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t t = 0; t < a.trace.size(); ++t) {
        CHECK(a.trace[t].objective == b.trace[t].objective);
        CHECK(a.trace[t].primal_residual == b.trace[t].primal_residual);
        CHECK(a.trace[t].weights == b.trace[t].weights);
    }
    CHECK(a.consensus.Y == b.consensus.Y);
}

TEST_CASE("run: uniform-M ablation never touches M") {
    const auto emb = synthetic_embeddings({0.1, 0.1}, 2);
    SolverConfig cfg;
    cfg.ablation_uniform_M = true;
    bool saw_m_step = false;
    const auto res = run<double>(emb, cfg, [&](int, Step step, int, const SolverState<double>&) {
        saw_m_step = saw_m_step || step == Step::M;
    });
    CHECK_FALSE(saw_m_step);
    for (const auto& v : res.views) CHECK((v.M.array() == 1.0 / 150.0).all());
}

TEST_CASE("run: norm mode and max_iter stop") {
    const auto emb = synthetic_embeddings({0.1, 0.1}, 2);
    SolverConfig cfg;
    cfg.w_mode = WeightMode::norm;
    cfg.max_iter = 5;
    const auto res = run<double>(emb, cfg);
    CHECK(res.trace.size() == 5);
    CHECK(res.stop == StopReason::max_iter);
    for (const auto& v : res.views) CHECK(v.w == doctest::Approx(weighted_residual(v, res.consensus)));
}

TEST_CASE("solver config validation") {
    SolverConfig cfg;
    cfg.rho = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.mu0 = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.mu_max = 1e-3;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.tol_objective = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("relative objective changes") {
    IterationTrace t(3);
    t[0].objective = 2.0;
    t[1].objective = 1.0;
    t[2].objective = 1.5;
    const auto ch = relative_objective_changes(t);
    CHECK(std::isnan(ch[0]));
    CHECK(ch[1] == doctest::Approx(0.5));
    CHECK(ch[2] == doctest::Approx(0.5));
}
