#pragma once

#include "v2g/degradation.hpp"
#include "v2g/qp.hpp"
#include "v2g/session.hpp"
#include "v2g/thermal.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace v2g {

/// Two-player charging game: the revenue (V2G) player owns `split.v2g_set`, the battery
/// degradation (BD) player owns `split.bd_set`. Both share the session constraints.
struct GameInstance {
    SessionConfig cfg;
    HorizonSplit split;
    CellDegradationParams params;
    TemperatureProfile tb_profile;             // may be empty when temperatures are given directly
    std::vector<CyclicCoefficients> coeffs;    // one per interval
    double n_hat = 0.0;

    /// Per-interval smooth loss: constant + quadratic * P^2 (capacity fraction).
    [[nodiscard]] std::vector<SmoothLossTerms> loss_terms() const;
    /// EUR per unit of capacity fraction lost.
    [[nodiscard]] double loss_weight() const { return cfg.pack.gamma * cfg.pack.capacity_kwh; }

    void validate() const;
};

/// Instance from per-interval battery temperatures (K).
GameInstance make_instance(const SessionConfig& cfg, const HorizonSplit& split,
                           std::span<const double> interval_temps_K,
                           const CellDegradationParams& params = {});

/// Instance whose temperatures come from a thermal simulation of the session.
GameInstance make_instance(const SessionConfig& cfg, const HorizonSplit& split,
                           const TemperatureProfile& profile,
                           const CellDegradationParams& params = {});

/// Revenue objective: sum over all intervals of alpha P dt (EUR; negative is income).
double theta_revenue(const GameInstance& g, std::span<const double> P);
/// Degradation objective: gamma-weighted smooth cyclic loss over all intervals (EUR).
double theta_degradation(const GameInstance& g, std::span<const double> P);
/// Cyclic loss over all intervals (capacity fraction).
double total_cyclic_loss(const GameInstance& g, std::span<const double> P);
/// Exact potential: revenue terms on the V2G block plus degradation terms on the BD block.
double potential(const GameInstance& g, std::span<const double> P);
/// rho * revenue + (1 - rho) * degradation, all intervals.
double multiobjective_value(const GameInstance& g, double rho, std::span<const double> P);

/// Adds box, energy corridor and terminal band rows for the session.
void add_session_constraints(qp::QuadraticProgram& qp, const SessionConfig& cfg);

/// Potential minimization as a QP. Constant loss offsets are dropped.
qp::QuadraticProgram build_potential(const GameInstance& g);
qp::QuadraticProgram build_multiobjective(const GameInstance& g, double rho);

struct ChargingSchedule {
    std::vector<double> P_bat;
    std::vector<double> energy_trace;
    double revenue_cost = 0.0;
    double degradation_loss = 0.0;
    double degradation_cost = 0.0;
    FeasibilityReport feasibility;
    qp::SolveStatus status = qp::SolveStatus::Optimal;
    int iterations = 0;
};

/// Evaluates costs and feasibility of a power vector against the instance.
ChargingSchedule make_schedule(const GameInstance& g, std::vector<double> P,
                               double feasibility_tol = 1e-6);

/// Potential minimizer, which is a generalized Nash equilibrium of the game.
/// Throws InfeasibleSession before solving when the target is unreachable.
ChargingSchedule solve_gne(const GameInstance& g, const qp::SolverSettings& settings = {});
ChargingSchedule solve_mo(const GameInstance& g, double rho,
                          const qp::SolverSettings& settings = {});

/// Largest |dP - dtheta_i| over random feasible points and feasible unilateral deviations.
double verify_potential_identity(const GameInstance& g, int trials, std::uint64_t seed);

struct GneCheck {
    double improvement_v2g = 0.0;  // EUR gained by the best unilateral V2G response
    double improvement_bd = 0.0;
    double relative_v2g = 0.0;
    double relative_bd = 0.0;

    [[nodiscard]] bool is_equilibrium(double tol) const {
        return relative_v2g <= tol && relative_bd <= tol;
    }
};

/// Best-response check: each player re-optimizes its own block with the other's fixed.
GneCheck verify_gne(const GameInstance& g, std::span<const double> P,
                    const qp::SolverSettings& settings = {});

struct TradeoffPoint {
    double hyper = 0.0;  // w or rho
    double charging_cost = 0.0;
    double degradation_cost = 0.0;
    double degradation_loss = 0.0;
    ChargingSchedule schedule;
};

TradeoffPoint tradeoff_point(const GameInstance& g, double hyper, ChargingSchedule schedule);

/// Uniform grid of `count` weights in [0, 1].
std::vector<double> rho_grid(std::size_t count);

}  // namespace v2g
