#include "v2g/equilibrium.hpp"

#include "v2g/errors.hpp"
#include "v2g/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace v2g {

std::vector<SmoothLossTerms> GameInstance::loss_terms() const {
    std::vector<SmoothLossTerms> out;
    out.reserve(coeffs.size());
    for (const auto& k : coeffs) out.push_back(smooth_loss_terms(k, n_hat, params, cfg.pack));
    return out;
}

void GameInstance::validate() const {
    if (coeffs.size() != cfg.T || split.T() != cfg.T) {
        throw std::invalid_argument("game instance: coefficient and split sizes must equal T");
    }
    for (const auto& k : coeffs) {
        // Perturbed bundles may dip below kB1Floor; positivity is what keeps the QP convex.
        if (!(k.B1 > 0.0) || !std::isfinite(k.B1) || !std::isfinite(k.B2_hat)) {
            throw std::invalid_argument("game instance: B1 must be > 0 and B2_hat finite");
        }
    }
}

GameInstance make_instance(const SessionConfig& cfg, const HorizonSplit& split,
                           std::span<const double> interval_temps_K,
                           const CellDegradationParams& params) {
    if (interval_temps_K.size() != cfg.T) {
        throw std::invalid_argument("need one battery temperature per interval");
    }
    if (split.T() != cfg.T) throw std::invalid_argument("split does not cover the horizon");
    GameInstance g;
    g.cfg = cfg;
    g.split = split;
    g.params = params;
    g.n_hat = n_hat(cfg.pack.n_max, cfg.delta_t_h, cfg.horizon_h());
    g.coeffs.reserve(cfg.T);
    for (double tb : interval_temps_K) g.coeffs.push_back(cyclic_coefficients(tb, params, cfg.pack));
    return g;
}

GameInstance make_instance(const SessionConfig& cfg, const HorizonSplit& split,
                           const TemperatureProfile& profile, const CellDegradationParams& params) {
    const auto temps = profile.interval_battery_temps();
    GameInstance g = make_instance(cfg, split, temps, params);
    g.tb_profile = profile;
    return g;
}

double theta_revenue(const GameInstance& g, std::span<const double> P) {
    double s = 0.0;
    for (std::size_t t = 0; t < P.size(); ++t) s += g.cfg.alpha[t] * P[t] * g.cfg.delta_t_h;
    return s;
}

double total_cyclic_loss(const GameInstance& g, std::span<const double> P) {
    double s = 0.0;
    for (std::size_t t = 0; t < P.size(); ++t) {
        s += cyclic_loss_smooth(P[t], g.coeffs[t], g.n_hat, g.params, g.cfg.pack);
    }
    return s;
}

double theta_degradation(const GameInstance& g, std::span<const double> P) {
    return g.loss_weight() * total_cyclic_loss(g, P);
}

double potential(const GameInstance& g, std::span<const double> P) {
    double s = 0.0;
    for (auto t : g.split.v2g_set) s += g.cfg.alpha[t] * P[t] * g.cfg.delta_t_h;
    double loss = 0.0;
    for (auto t : g.split.bd_set) {
        loss += cyclic_loss_smooth(P[t], g.coeffs[t], g.n_hat, g.params, g.cfg.pack);
    }
    return s + g.loss_weight() * loss;
}

double multiobjective_value(const GameInstance& g, double rho, std::span<const double> P) {
    return rho * theta_revenue(g, P) + (1.0 - rho) * theta_degradation(g, P);
}

namespace {

void add_constraints(qp::QuadraticProgram& qp, const SessionConfig& cfg,
                     std::span<const double> lo, std::span<const double> hi) {
    const double gain = cfg.energy_gain();
    for (std::size_t t = 0; t < cfg.T; ++t) qp.add_box(t, lo[t], hi[t]);
    // Energy rows in kWh keep row activities near the box rows' magnitude, so the solver's
    // relative tolerance stays meaningful on both.
    for (std::size_t t = 0; t < cfg.T; ++t) {
        qp.add_prefix(t, gain, cfg.E_min - cfg.E_0, cfg.E_max - cfg.E_0);
    }
    qp.add_prefix(cfg.T - 1, gain, cfg.E_des - cfg.epsilon - cfg.E_0,
                  cfg.E_des + cfg.epsilon - cfg.E_0);
}

ChargingSchedule solve_program(const GameInstance& g, const qp::QuadraticProgram& qp,
                               const qp::SolverSettings& settings) {
    const auto rep = qp::solve(qp, settings);
    auto sched = make_schedule(g, rep.x);
    sched.status = rep.status;
    sched.iterations = rep.iterations;
    return sched;
}

}  // namespace

void add_session_constraints(qp::QuadraticProgram& qp, const SessionConfig& cfg) {
    const std::vector<double> lo(cfg.T, cfg.P_min);
    const std::vector<double> hi(cfg.T, cfg.P_max);
    add_constraints(qp, cfg, lo, hi);
}

qp::QuadraticProgram build_potential(const GameInstance& g) {
    g.cfg.validate();
    g.validate();
    qp::QuadraticProgram qp(g.cfg.T);
    const auto terms = g.loss_terms();
    for (auto t : g.split.v2g_set) qp.linear_q[t] = g.cfg.alpha[t] * g.cfg.delta_t_h;
    for (auto t : g.split.bd_set) qp.diag_Q[t] = 2.0 * g.loss_weight() * terms[t].quadratic;
    add_session_constraints(qp, g.cfg);
    return qp;
}

qp::QuadraticProgram build_multiobjective(const GameInstance& g, double rho) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw std::domain_error("rho must be in [0, 1]");
    g.cfg.validate();
    g.validate();
    qp::QuadraticProgram qp(g.cfg.T);
    const auto terms = g.loss_terms();
    for (std::size_t t = 0; t < g.cfg.T; ++t) {
        qp.linear_q[t] = rho * g.cfg.alpha[t] * g.cfg.delta_t_h;
        qp.diag_Q[t] = 2.0 * (1.0 - rho) * g.loss_weight() * terms[t].quadratic;
    }
    add_session_constraints(qp, g.cfg);
    return qp;
}

ChargingSchedule make_schedule(const GameInstance& g, std::vector<double> P,
                               double feasibility_tol) {
    ChargingSchedule s;
    s.energy_trace = energy_trace(P, g.cfg);
    s.revenue_cost = theta_revenue(g, P);
    s.degradation_loss = total_cyclic_loss(g, P);
    s.degradation_cost = degradation_cost(s.degradation_loss, g.cfg.pack);
    s.feasibility = check_feasibility(P, g.cfg, feasibility_tol);
    s.P_bat = std::move(P);
    return s;
}

ChargingSchedule solve_gne(const GameInstance& g, const qp::SolverSettings& settings) {
    return solve_program(g, build_potential(g), settings);
}

ChargingSchedule solve_mo(const GameInstance& g, double rho, const qp::SolverSettings& settings) {
    return solve_program(g, build_multiobjective(g, rho), settings);
}

namespace {

// Largest t >= 0 keeping u + t d inside the session polytope.
double max_feasible_step(const qp::QuadraticProgram& qp, std::span<const double> u,
                         std::span<const double> d) {
    std::vector<double> au(qp.num_constraints());
    std::vector<double> ad(qp.num_constraints());
    qp.A.multiply(u, au);
    qp.A.multiply(d, ad);
    double t = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < au.size(); ++i) {
        if (ad[i] > 1e-14) t = std::min(t, (qp.upper[i] - au[i]) / ad[i]);
        if (ad[i] < -1e-14) t = std::min(t, (qp.lower[i] - au[i]) / ad[i]);
    }
    return std::max(0.0, t);
}

}  // namespace

double verify_potential_identity(const GameInstance& g, int trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    g.cfg.validate();
    g.validate();
    const std::size_t T = g.cfg.T;

    // Feasible anchors: minimizers of random linear costs over the session polytope.
    constexpr int kAnchors = 6;
    std::vector<std::vector<double>> anchors;
    Rng anchor_rng(seed, 0);
    for (int k = 0; k < kAnchors; ++k) {
        qp::QuadraticProgram qp(T);
        for (std::size_t t = 0; t < T; ++t) {
            qp.linear_q[t] = anchor_rng.uniform(-1.0, 1.0);
            qp.diag_Q[t] = 1e-3;
        }
        add_session_constraints(qp, g.cfg);
        auto rep = qp::solve(qp);
        if (rep.optimal()) anchors.push_back(std::move(rep.x));
    }
    if (anchors.empty()) throw InfeasibleSession("no feasible anchor point for identity check");

    qp::QuadraticProgram polytope(T);
    add_session_constraints(polytope, g.cfg);

    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        Rng rng(seed, static_cast<std::uint64_t>(trial) + 1);
        std::vector<double> u(T, 0.0);
        std::vector<double> weights(anchors.size());
        double wsum = 0.0;
        for (auto& w : weights) wsum += (w = rng.uniform() + 1e-3);
        for (std::size_t k = 0; k < anchors.size(); ++k)
            for (std::size_t t = 0; t < T; ++t) u[t] += weights[k] / wsum * anchors[k][t];

        const bool v2g_player = (trial % 2) == 0;
        const auto& block = v2g_player ? g.split.v2g_set : g.split.bd_set;
        if (block.empty()) continue;
        std::vector<double> d(T, 0.0);
        for (auto t : block) d[t] = rng.normal();
        double step = max_feasible_step(polytope, u, d);
        if (step == 0.0) {
            for (auto& x : d) x = -x;
            step = max_feasible_step(polytope, u, d);
        }
        const double tau = rng.uniform() * std::min(step, 1e6);
        std::vector<double> y = u;
        for (auto t : block) y[t] += tau * d[t];

        const double dP = potential(g, u) - potential(g, y);
        const double dTheta = v2g_player ? theta_revenue(g, u) - theta_revenue(g, y)
                                         : theta_degradation(g, u) - theta_degradation(g, y);
        worst = std::max(worst, std::abs(dP - dTheta));
    }
    return worst;
}

GneCheck verify_gne(const GameInstance& g, std::span<const double> P,
                    const qp::SolverSettings& settings) {
    g.cfg.validate();
    g.validate();
    const std::size_t T = g.cfg.T;
    if (P.size() != T) throw std::invalid_argument("schedule length must equal T");
    const auto mask = g.split.v2g_mask();
    const auto terms = g.loss_terms();

    auto best_response = [&](bool v2g_player) {
        std::vector<double> lo(T);
        std::vector<double> hi(T);
        qp::QuadraticProgram qp(T);
        for (std::size_t t = 0; t < T; ++t) {
            const bool own = mask[t] == v2g_player;
            lo[t] = own ? g.cfg.P_min : P[t];
            hi[t] = own ? g.cfg.P_max : P[t];
            if (v2g_player) {
                qp.linear_q[t] = g.cfg.alpha[t] * g.cfg.delta_t_h;
            } else {
                qp.diag_Q[t] = 2.0 * g.loss_weight() * terms[t].quadratic;
            }
        }
        add_constraints(qp, g.cfg, lo, hi);
        const auto rep = qp::solve(qp, settings);
        if (rep.status != qp::SolveStatus::Optimal) {
            throw std::runtime_error("best-response solve failed: " + qp::to_string(rep.status));
        }
        // Unowned variables are pinned; copy them exactly so only the player's block moves.
        std::vector<double> x(P.begin(), P.end());
        for (std::size_t t = 0; t < T; ++t)
            if (mask[t] == v2g_player) x[t] = rep.x[t];
        return x;
    };

    auto relative = [](double gain, double reference) {
        return gain / std::max(std::abs(reference), 1e-9);
    };

    GneCheck out;
    if (!g.split.v2g_set.empty()) {
        const auto x = best_response(true);
        const double now = theta_revenue(g, P);
        out.improvement_v2g = now - theta_revenue(g, x);
        out.relative_v2g = relative(out.improvement_v2g, now);
    }
    if (!g.split.bd_set.empty()) {
        const auto x = best_response(false);
        const double now = theta_degradation(g, P);
        out.improvement_bd = now - theta_degradation(g, x);
        out.relative_bd = relative(out.improvement_bd, now);
    }
    return out;
}

TradeoffPoint tradeoff_point(const GameInstance& g, double hyper, ChargingSchedule schedule) {
    TradeoffPoint p;
    p.hyper = hyper;
    p.charging_cost = theta_revenue(g, schedule.P_bat);
    p.degradation_loss = total_cyclic_loss(g, schedule.P_bat);
    p.degradation_cost = degradation_cost(p.degradation_loss, g.cfg.pack);
    p.schedule = std::move(schedule);
    return p;
}

std::vector<double> rho_grid(std::size_t count) {
    if (count == 0) return {};
    if (count == 1) return {1.0};
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return out;
}

}  // namespace v2g
