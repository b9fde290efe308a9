#pragma once

// Shared instances and independent oracles for the unit and acceptance tests.

#include "v2g/config.hpp"
#include "v2g/equilibrium.hpp"
#include "v2g/qp.hpp"
#include "v2g/studies.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <vector>

#ifndef V2G_SOURCE_DIR
#error "V2G_SOURCE_DIR must point at the repository root"
#endif

namespace fixtures {

inline std::filesystem::path source_dir() { return V2G_SOURCE_DIR; }
inline std::filesystem::path config_path() { return source_dir() / "configs" / "default.json"; }

/// The shipped default configuration: T=16, 22 kW, 50 kWh, 10 C ambient.
inline v2g::StudyConfig reference_config() {
    auto cfg = v2g::load_config(config_path());
    cfg.threads = 1;
    return cfg;
}

/// Fixed game instance for split w: one thermal profile precomputed with the charger at its
/// rating, shared by every w so that only the horizon split varies.
inline v2g::GameInstance reference_instance(std::size_t w) {
    const auto cfg = reference_config();
    const auto session = cfg.session_kwh();
    const auto profile = v2g::session_temperatures(cfg, session, cfg.ambient(), 1.0);
    return v2g::make_instance(session, v2g::assign_intervals(session.alpha, w), profile,
                              cfg.degradation);
}

/// Small instance at constant battery temperature: T=4, dt=1 h, 10 kWh band.
inline v2g::GameInstance toy_instance(std::size_t w, double T_b = 283.15) {
    v2g::SessionConfig s;
    s.T = 4;
    s.delta_t_h = 1.0;
    s.P_min = -10.0;
    s.P_max = 10.0;
    s.E_min = 10.0;
    s.E_max = 50.0;
    s.E_0 = 25.0;
    s.E_des = 40.0;
    s.epsilon = 1.0;
    s.eta_avg = 0.95;
    s.alpha = {0.31, 0.12, 0.27, 0.18};
    const std::vector<double> temps(s.T, T_b);
    return v2g::make_instance(s, v2g::assign_intervals(s.alpha, w), temps);
}

struct GridOptimum {
    double value = std::numeric_limits<double>::infinity();
    std::vector<double> x;
    double cell_variation = 0.0;  // largest objective change across one grid step
};

/// Exhaustive minimum of f over the feasible points of a `levels`-per-axis power grid.
inline GridOptimum grid_minimum(const v2g::SessionConfig& cfg, int levels,
                                const std::function<double(const std::vector<double>&)>& f) {
    GridOptimum best;
    const std::size_t T = cfg.T;
    std::vector<double> grid(static_cast<std::size_t>(levels));
    for (int i = 0; i < levels; ++i) {
        grid[static_cast<std::size_t>(i)] =
            cfg.P_min + (cfg.P_max - cfg.P_min) * i / static_cast<double>(levels - 1);
    }
    const double step = grid[1] - grid[0];
    std::vector<int> idx(T, 0);
    std::vector<double> x(T);
    for (;;) {
        for (std::size_t t = 0; t < T; ++t) x[t] = grid[static_cast<std::size_t>(idx[t])];
        if (v2g::check_feasibility(x, cfg, 1e-9).feasible()) {
            const double v = f(x);
            if (v < best.value) {
                best.value = v;
                best.x = x;
            }
        }
        std::size_t k = 0;
        while (k < T && ++idx[k] == levels) idx[k++] = 0;
        if (k == T) break;
    }
    // Objective change across one cell around the grid optimum, used as the match tolerance.
    if (!best.x.empty()) {
        for (std::size_t t = 0; t < T; ++t) {
            for (double dir : {-1.0, 1.0}) {
                auto y = best.x;
                y[t] += dir * step;
                best.cell_variation = std::max(best.cell_variation, std::abs(f(y) - best.value));
            }
        }
    }
    return best;
}

/// Minimum of a QP by enumerating every active set: solve the equality-constrained KKT
/// system for each subset of rows at each bound, keep the best feasible point.
inline double active_set_oracle(const v2g::qp::QuadraticProgram& qp, std::vector<double>* arg) {
    const std::size_t n = qp.num_vars();
    const std::size_t m = qp.num_constraints();
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> state(m, 0);  // 0 inactive, 1 at lower, 2 at upper
    for (;;) {
        std::vector<std::size_t> rows;
        std::vector<double> rhs_b;
        for (std::size_t i = 0; i < m; ++i) {
            if (state[i] == 0) continue;
            rows.push_back(i);
            rhs_b.push_back(state[i] == 1 ? qp.lower[i] : qp.upper[i]);
        }
        if (rows.size() <= n) {
            const auto k = static_cast<Eigen::Index>(rows.size());
            const auto nn = static_cast<Eigen::Index>(n);
            Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nn + k, nn + k);
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nn + k);
            for (std::size_t j = 0; j < n; ++j) {
                K(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = qp.diag_Q[j];
                rhs(static_cast<Eigen::Index>(j)) = -qp.linear_q[j];
            }
            for (Eigen::Index r = 0; r < k; ++r) {
                for (const auto& e : qp.A.row(rows[static_cast<std::size_t>(r)])) {
                    K(nn + r, static_cast<Eigen::Index>(e.col)) = e.value;
                    K(static_cast<Eigen::Index>(e.col), nn + r) = e.value;
                }
                rhs(nn + r) = rhs_b[static_cast<std::size_t>(r)];
            }
            const Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
            if (lu.isInvertible()) {
                const Eigen::VectorXd sol = lu.solve(rhs);
                std::vector<double> x(sol.data(), sol.data() + n);
                if (v2g::qp::constraint_violation(qp, x) <= 1e-9) {
                    const double f = v2g::qp::objective_value(qp, x);
                    if (f < best) {
                        best = f;
                        if (arg != nullptr) *arg = x;
                    }
                }
            }
        }
        std::size_t i = 0;
        while (i < m && ++state[i] == 3) state[i++] = 0;
        if (i == m) break;
    }
    return best;
}

}  // namespace fixtures
