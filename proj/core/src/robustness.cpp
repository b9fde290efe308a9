#include "v2g/robustness.hpp"

#include "v2g/csv_io.hpp"
#include "v2g/parallel.hpp"
#include "v2g/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace v2g {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string to_string(Approach a) {
    return a == Approach::GameTheoretic ? "game" : "multiobjective";
}

std::vector<double> zeta_of(const GameInstance& g) {
    const std::size_t T = g.coeffs.size();
    std::vector<double> z(2 * T);
    for (std::size_t t = 0; t < T; ++t) {
        z[t] = g.coeffs[t].B1;
        z[T + t] = g.coeffs[t].B2_hat;
    }
    return z;
}

GameInstance with_zeta(const GameInstance& g, std::span<const double> zeta) {
    const std::size_t T = g.coeffs.size();
    if (zeta.size() != 2 * T) throw std::invalid_argument("zeta must have 2T coordinates");
    GameInstance out = g;
    for (std::size_t t = 0; t < T; ++t) {
        out.coeffs[t].B1 = zeta[t];
        out.coeffs[t].B2_hat = zeta[T + t];
    }
    return out;
}

void PerturbationSpec::validate() const {
    if (!(low_factor > 0.0 && low_factor <= 1.0 && 1.0 <= high_factor)) {
        throw std::invalid_argument("perturbation factors must satisfy 0 < low <= 1 <= high");
    }
    if (sample_count == 0) throw std::invalid_argument("sample_count must be >= 1");
}

std::vector<double> draw_zeta(const PerturbationSpec& spec, std::size_t index) {
    spec.validate();
    if (index >= spec.sample_count) throw std::out_of_range("draw index >= sample_count");
    const bool degenerate = spec.low_factor == spec.high_factor;
    std::vector<double> z(spec.zeta0.size());
    for (std::uint64_t attempt = 0;; ++attempt) {
        Rng rng(spec.rng_seed, (static_cast<std::uint64_t>(index) << 16) + attempt);
        for (std::size_t k = 0; k < z.size(); ++k) {
            z[k] = spec.zeta0[k] * rng.uniform(spec.low_factor, spec.high_factor);
        }
        if (degenerate || z != spec.zeta0) return z;
    }
}

std::vector<double> solve_approach(const GameInstance& g, Approach a, double rho,
                                   const qp::SolverSettings& settings) {
    const auto qp = a == Approach::GameTheoretic ? build_potential(g) : build_multiobjective(g, rho);
    auto rep = qp::solve(qp, settings);
    if (!rep.optimal()) {
        throw std::runtime_error("robustness solve ended with status " + qp::to_string(rep.status));
    }
    return std::move(rep.x);
}

double approach_objective(const GameInstance& g, Approach a, double rho,
                          std::span<const double> P) {
    return a == Approach::GameTheoretic ? potential(g, P) : multiobjective_value(g, rho, P);
}

double sensitivity(std::span<const double> u0, std::span<const double> u,
                   std::span<const double> zeta0, std::span<const double> zeta) {
    double du = 0.0;
    for (std::size_t i = 0; i < u0.size(); ++i) du += (u0[i] - u[i]) * (u0[i] - u[i]);
    double dz = 0.0;
    for (std::size_t i = 0; i < zeta0.size(); ++i) dz += (zeta0[i] - zeta[i]) * (zeta0[i] - zeta[i]);
    if (dz == 0.0) throw std::domain_error("sensitivity undefined for zeta == zeta0");
    return std::sqrt(du) / std::sqrt(dz);
}

RegretSample make_regret(double f_nominal_at_zeta, double f_optimal_at_zeta) {
    RegretSample r;
    r.numerator = f_nominal_at_zeta - f_optimal_at_zeta;
    r.denominator = f_optimal_at_zeta;
    r.excluded = std::abs(r.denominator) < 1e-6 * (1.0 + std::abs(r.numerator));
    return r;
}

double RegretSample::value() const {
    // Objectives turn negative when V2G income dominates; normalize by magnitude so the
    // ratio keeps the sign of the (non-negative) numerator.
    return numerator / std::abs(denominator);
}

namespace {

struct DrawResult {
    double sensitivity = kNaN;
    RegretSample regret;
};

DrawResult evaluate_draw(const GameInstance& nominal, Approach a, double rho,
                         std::span<const double> u0, std::span<const double> zeta,
                         const qp::SolverSettings& settings) {
    const auto zeta0 = zeta_of(nominal);
    const GameInstance perturbed = with_zeta(nominal, zeta);
    const auto u = solve_approach(perturbed, a, rho, settings);
    DrawResult r;
    if (!std::equal(zeta0.begin(), zeta0.end(), zeta.begin(), zeta.end())) {
        r.sensitivity = sensitivity(u0, u, zeta0, zeta);
    }
    r.regret = make_regret(approach_objective(perturbed, a, rho, u0),
                           approach_objective(perturbed, a, rho, u));
    return r;
}

}  // namespace

double sensitivity_gt(const GameInstance& nominal, std::span<const double> zeta) {
    const auto u0 = solve_approach(nominal, Approach::GameTheoretic, 0.0);
    return evaluate_draw(nominal, Approach::GameTheoretic, 0.0, u0, zeta, {}).sensitivity;
}

double sensitivity_mo(const GameInstance& nominal, double rho, std::span<const double> zeta) {
    const auto u0 = solve_approach(nominal, Approach::MultiObjective, rho);
    return evaluate_draw(nominal, Approach::MultiObjective, rho, u0, zeta, {}).sensitivity;
}

RegretSample regret_gt(const GameInstance& nominal, std::span<const double> zeta) {
    const auto u0 = solve_approach(nominal, Approach::GameTheoretic, 0.0);
    return evaluate_draw(nominal, Approach::GameTheoretic, 0.0, u0, zeta, {}).regret;
}

RegretSample regret_mo(const GameInstance& nominal, double rho, std::span<const double> zeta) {
    const auto u0 = solve_approach(nominal, Approach::MultiObjective, rho);
    return evaluate_draw(nominal, Approach::MultiObjective, rho, u0, zeta, {}).regret;
}

Quantiles quantiles(std::vector<double> samples) {
    if (samples.empty()) throw std::invalid_argument("quantiles of an empty sample");
    std::sort(samples.begin(), samples.end());
    auto at = [&](double p) {
        const double pos = p * static_cast<double>(samples.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, samples.size() - 1);
        return samples[lo] + (pos - static_cast<double>(lo)) * (samples[hi] - samples[lo]);
    };
    return {samples.front(), at(0.25), at(0.5), at(0.75), samples.back()};
}

namespace {

std::vector<double> pooled(const std::vector<HyperSamples>& hs,
                           std::vector<double> HyperSamples::*field) {
    std::vector<double> out;
    for (const auto& h : hs)
        for (double v : h.*field)
            if (!std::isnan(v)) out.push_back(v);
    return out;
}

}  // namespace

std::vector<double> ApproachSummary::pooled_sensitivity() const {
    return pooled(per_hyper, &HyperSamples::sensitivity);
}

std::vector<double> ApproachSummary::pooled_regret() const {
    return pooled(per_hyper, &HyperSamples::regret);
}

RobustnessSummary run_comparison(const InstanceFactory& factory, const std::vector<double>& w_grid,
                                 const std::vector<double>& rho_values,
                                 const PerturbationSpec& spec, unsigned threads,
                                 const qp::SolverSettings& settings) {
    spec.validate();
    if (w_grid.empty() || rho_values.empty()) {
        throw std::invalid_argument("robustness grids must be non-empty");
    }
    struct Cell {
        Approach approach;
        double hyper;
        GameInstance nominal;
        std::vector<double> u0;
        PerturbationSpec draw_spec;
    };
    std::vector<Cell> cells;
    for (double w : w_grid) cells.push_back({Approach::GameTheoretic, w, {}, {}, spec});
    for (double r : rho_values) cells.push_back({Approach::MultiObjective, r, {}, {}, spec});

    parallel_for(cells.size(), threads, [&](std::size_t i) {
        auto& c = cells[i];
        c.nominal = factory(c.approach, c.hyper);
        c.u0 = solve_approach(c.nominal, c.approach, c.hyper, settings);
        c.draw_spec.zeta0 = zeta_of(c.nominal);
    });

    const std::size_t draws = spec.sample_count;
    std::vector<DrawResult> results(cells.size() * draws);
    parallel_for(results.size(), threads, [&](std::size_t k) {
        const auto& c = cells[k / draws];
        const auto zeta = draw_zeta(c.draw_spec, k % draws);
        results[k] = evaluate_draw(c.nominal, c.approach, c.hyper, c.u0, zeta, settings);
    });

    RobustnessSummary out;
    out.draws = draws;
    out.seed = spec.rng_seed;
    out.game.approach = Approach::GameTheoretic;
    out.multiobjective.approach = Approach::MultiObjective;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        HyperSamples hs;
        hs.hyper = cells[i].hyper;
        for (std::size_t d = 0; d < draws; ++d) {
            const auto& r = results[i * draws + d];
            hs.sensitivity.push_back(r.sensitivity);
            if (std::isnan(r.sensitivity)) ++hs.excluded_sensitivity;
            hs.regret_numerator.push_back(r.regret.numerator);
            if (r.regret.excluded) {
                ++hs.excluded_regret;
                hs.regret.push_back(kNaN);
            } else {
                hs.regret.push_back(r.regret.value());
            }
        }
        auto& target = cells[i].approach == Approach::GameTheoretic ? out.game : out.multiobjective;
        target.per_hyper.push_back(std::move(hs));
    }
    return out;
}

namespace {

void write_quantiles(std::ostream& out, const std::string& approach, const std::string& hyper,
                     const std::string& name, const std::vector<double>& values) {
    std::vector<double> finite;
    for (double v : values)
        if (!std::isnan(v)) finite.push_back(v);
    if (finite.empty()) return;
    const auto q = quantiles(finite);
    const std::pair<const char*, double> stats[] = {
        {"min", q.min}, {"q25", q.q25}, {"median", q.median}, {"q75", q.q75}, {"max", q.max}};
    for (const auto& [stat, v] : stats) {
        out << approach << ',' << hyper << ',' << name << '_' << stat << ',' << format_double(v)
            << '\n';
    }
}

}  // namespace

void write_summary_csv(std::ostream& out, const RobustnessSummary& s) {
    out << "approach,hyper,stat,value\n";
    for (const auto* a : {&s.game, &s.multiobjective}) {
        const auto name = to_string(a->approach);
        for (const auto& h : a->per_hyper) {
            const auto hyper = format_double(h.hyper);
            write_quantiles(out, name, hyper, "sensitivity", h.sensitivity);
            write_quantiles(out, name, hyper, "regret", h.regret);
            out << name << ',' << hyper << ",regret_excluded," << h.excluded_regret << '\n';
        }
        write_quantiles(out, name, "all", "sensitivity", a->pooled_sensitivity());
        write_quantiles(out, name, "all", "regret", a->pooled_regret());
    }
}

void write_samples_csv(std::ostream& out, const RobustnessSummary& s) {
    out << "approach,hyper,draw,sensitivity,regret,regret_numerator\n";
    for (const auto* a : {&s.game, &s.multiobjective}) {
        const auto name = to_string(a->approach);
        for (const auto& h : a->per_hyper) {
            for (std::size_t d = 0; d < h.regret.size(); ++d) {
                out << name << ',' << format_double(h.hyper) << ',' << d << ','
                    << format_double(h.sensitivity[d]) << ',' << format_double(h.regret[d]) << ','
                    << format_double(h.regret_numerator[d]) << '\n';
            }
        }
    }
}

}  // namespace v2g
