#pragma once

// Monte Carlo comparison of the game-theoretic and multi-objective schedulers when the
// per-interval degradation coefficients (B1_t, B2_hat_t) are uncertain.

#include "v2g/equilibrium.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace v2g {

enum class Approach { GameTheoretic, MultiObjective };

std::string to_string(Approach a);

/// Coefficient bundle zeta = (B1_0..B1_{T-1}, B2_hat_0..B2_hat_{T-1}).
std::vector<double> zeta_of(const GameInstance& g);
/// Copy of `g` with its coefficient bundle replaced.
GameInstance with_zeta(const GameInstance& g, std::span<const double> zeta);

struct PerturbationSpec {
    std::vector<double> zeta0;
    double low_factor = 0.9;
    double high_factor = 1.1;
    std::size_t sample_count = 100;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

/// Each coordinate uniform in [low * zeta0, high * zeta0]; a pure function of (seed, index).
std::vector<double> draw_zeta(const PerturbationSpec& spec, std::size_t index);

/// Schedule chosen by one approach: w-split potential minimizer or rho-weighted optimum.
std::vector<double> solve_approach(const GameInstance& g, Approach a, double rho,
                                   const qp::SolverSettings& settings = {});
/// The objective each approach minimizes (full potential or weighted sum), EUR.
double approach_objective(const GameInstance& g, Approach a, double rho,
                          std::span<const double> P);

/// ||u(zeta0) - u(zeta)|| / ||zeta - zeta0||, from precomputed schedules.
double sensitivity(std::span<const double> u0, std::span<const double> u,
                   std::span<const double> zeta0, std::span<const double> zeta);

struct RegretSample {
    double numerator = 0.0;    // f_zeta(u(zeta0)) - f_zeta(u(zeta))
    double denominator = 0.0;  // f_zeta(u(zeta))
    bool excluded = false;     // denominator too close to zero for a meaningful ratio
    /// numerator / |denominator|.
    [[nodiscard]] double value() const;
};

/// Guarded relative regret from objective values.
RegretSample make_regret(double f_nominal_at_zeta, double f_optimal_at_zeta);

/// The instance carries its own split; `zeta` replaces its coefficients.
double sensitivity_gt(const GameInstance& nominal, std::span<const double> zeta);
double sensitivity_mo(const GameInstance& nominal, double rho, std::span<const double> zeta);
RegretSample regret_gt(const GameInstance& nominal, std::span<const double> zeta);
RegretSample regret_mo(const GameInstance& nominal, double rho, std::span<const double> zeta);

struct Quantiles {
    double min = 0.0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    double max = 0.0;
};

/// Linear-interpolation quantiles of a sample; throws on empty input.
Quantiles quantiles(std::vector<double> samples);

struct HyperSamples {
    double hyper = 0.0;
    std::vector<double> sensitivity;
    std::vector<double> regret;
    std::vector<double> regret_numerator;
    std::size_t excluded_regret = 0;
    std::size_t excluded_sensitivity = 0;
};

struct ApproachSummary {
    Approach approach = Approach::GameTheoretic;
    std::vector<HyperSamples> per_hyper;

    [[nodiscard]] std::vector<double> pooled_sensitivity() const;
    [[nodiscard]] std::vector<double> pooled_regret() const;
};

struct RobustnessSummary {
    ApproachSummary game;
    ApproachSummary multiobjective;
    std::size_t draws = 0;
    std::uint64_t seed = 0;
};

/// Builds the nominal instance for an approach and hyperparameter (w for the game, rho for
/// the multi-objective problem).
using InstanceFactory = std::function<GameInstance(Approach, double)>;

/// Full cross of hyperparameters and draws. Draw i uses the same multiplicative factors
/// for every hyperparameter value.
RobustnessSummary run_comparison(const InstanceFactory& factory, const std::vector<double>& w_grid,
                                 const std::vector<double>& rho_grid,
                                 const PerturbationSpec& spec, unsigned threads = 1,
                                 const qp::SolverSettings& settings = {});

/// `approach,hyper,stat,value` rows; hyper "all" pools every hyperparameter value.
void write_summary_csv(std::ostream& out, const RobustnessSummary& s);
/// One row per (approach, hyper, draw).
void write_samples_csv(std::ostream& out, const RobustnessSummary& s);

}  // namespace v2g
