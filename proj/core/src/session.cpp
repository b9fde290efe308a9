#include "v2g/session.hpp"

#include "v2g/csv_io.hpp"
#include "v2g/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace v2g {

std::vector<std::string> SessionConfig::violations() const {
    std::vector<std::string> v;
    auto check = [&](bool ok, const char* msg) {
        if (!ok) v.emplace_back(msg);
    };
    check(T > 0, "session.T must be > 0");
    check(delta_t_h > 0.0, "session.delta_t_h must be > 0");
    check(P_min <= 0.0, "session.P_min must be <= 0");
    check(P_max >= 0.0, "session.P_max must be >= 0");
    check(E_min <= E_0 && E_0 <= E_max, "session.E_0 must lie in [E_min, E_max]");
    check(E_min <= E_des && E_des <= E_max, "session.E_des must lie in [E_min, E_max]");
    check(epsilon >= 0.0, "session.epsilon must be >= 0");
    check(eta_avg > 0.0 && eta_avg <= 1.0, "session.eta_avg must be in (0, 1]");
    check(alpha.size() == T, "session tariff length must equal T");
    check(std::all_of(alpha.begin(), alpha.end(), [](double a) { return std::isfinite(a); }),
          "session tariff must be finite");
    try {
        pack.validate();
    } catch (const std::invalid_argument& e) {
        v.emplace_back(e.what());
    }
    return v;
}

void SessionConfig::validate() const {
    if (auto v = violations(); !v.empty()) throw ConfigError(std::move(v));
    // Largest charge and discharge the charger can deliver over the horizon.
    const double up = energy_gain() * static_cast<double>(T) * P_max;
    const double down = energy_gain() * static_cast<double>(T) * P_min;
    const double need_lo = E_des - epsilon - E_0;
    const double need_hi = E_des + epsilon - E_0;
    if (need_lo > up || need_hi < down) {
        std::ostringstream msg;
        msg << "session infeasible: terminal band needs an energy change in [" << need_lo << ", "
            << need_hi << "] kWh, the charger reaches [" << down << ", " << up << "] kWh";
        throw InfeasibleSession(msg.str());
    }
}

SessionConfig per_unit_to_kwh(const SessionConfigPu& pu, const BatteryPackSpec& pack) {
    if (!(pack.capacity_kwh > 0.0)) throw std::invalid_argument("pack capacity must be > 0");
    const double cap = pack.capacity_kwh;
    SessionConfig cfg;
    cfg.T = pu.T;
    cfg.delta_t_h = pu.delta_t_h;
    cfg.P_min = pu.P_min;
    cfg.P_max = pu.P_max;
    cfg.E_min = pu.E_min_pu * cap;
    cfg.E_max = pu.E_max_pu * cap;
    cfg.E_0 = pu.E_0_pu * cap;
    cfg.E_des = pu.E_des_pu * cap;
    cfg.epsilon = pu.epsilon_pu * cap;
    cfg.eta_avg = pu.eta_avg;
    cfg.alpha = pu.alpha;
    cfg.pack = pack;
    return cfg;
}

std::vector<bool> HorizonSplit::v2g_mask() const {
    std::vector<bool> mask(T(), false);
    for (auto i : v2g_set) mask[i] = true;
    return mask;
}

HorizonSplit assign_intervals(std::span<const double> alpha, std::size_t w) {
    if (w > alpha.size()) {
        throw std::out_of_range("w = " + std::to_string(w) + " exceeds horizon length " +
                                std::to_string(alpha.size()));
    }
    std::vector<std::size_t> order(alpha.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return alpha[a] > alpha[b]; });
    HorizonSplit split;
    split.v2g_set.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(w));
    split.bd_set.assign(order.begin() + static_cast<std::ptrdiff_t>(w), order.end());
    std::sort(split.v2g_set.begin(), split.v2g_set.end());
    std::sort(split.bd_set.begin(), split.bd_set.end());
    return split;
}

HorizonSplit make_split(std::size_t T, std::vector<std::size_t> v2g_set) {
    std::sort(v2g_set.begin(), v2g_set.end());
    if (std::adjacent_find(v2g_set.begin(), v2g_set.end()) != v2g_set.end()) {
        throw std::invalid_argument("split contains duplicate intervals");
    }
    if (!v2g_set.empty() && v2g_set.back() >= T) {
        throw std::out_of_range("split interval index out of range");
    }
    HorizonSplit split;
    split.v2g_set = std::move(v2g_set);
    std::vector<bool> owned(T, false);
    for (auto i : split.v2g_set) owned[i] = true;
    for (std::size_t i = 0; i < T; ++i)
        if (!owned[i]) split.bd_set.push_back(i);
    return split;
}

std::vector<double> energy_trace(std::span<const double> P_kw, const SessionConfig& cfg) {
    std::vector<double> e(P_kw.size());
    double sum = 0.0;
    for (std::size_t t = 0; t < P_kw.size(); ++t) {
        sum += P_kw[t];
        e[t] = cfg.E_0 + cfg.energy_gain() * sum;
    }
    return e;
}

double FeasibilityReport::max_violation() const { return std::max({box, corridor, terminal}); }

FeasibilityReport check_feasibility(std::span<const double> P_kw, const SessionConfig& cfg,
                                    double tol) {
    if (P_kw.size() != cfg.T) {
        throw std::invalid_argument("schedule length " + std::to_string(P_kw.size()) +
                                    " does not match T = " + std::to_string(cfg.T));
    }
    FeasibilityReport r;
    r.tolerance = tol;
    for (double p : P_kw) r.box = std::max({r.box, p - cfg.P_max, cfg.P_min - p});
    const auto e = energy_trace(P_kw, cfg);
    for (double x : e) r.corridor = std::max({r.corridor, x - cfg.E_max, cfg.E_min - x});
    const double final_energy = e.empty() ? cfg.E_0 : e.back();
    r.terminal = std::max(0.0, std::abs(final_energy - cfg.E_des) - cfg.epsilon);
    return r;
}

std::vector<double> load_tariff_csv(const std::filesystem::path& path) {
    const auto table = read_csv(path, {"interval", "alpha_eur_per_kwh"});
    std::vector<double> alpha;
    alpha.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (table.rows[i][0] != static_cast<double>(i + 1)) {
            throw IoError(path.string() + ": intervals must be numbered 1..T consecutively");
        }
        alpha.push_back(table.rows[i][1]);
    }
    if (alpha.empty()) throw IoError(path.string() + ": tariff has no rows");
    return alpha;
}

}  // namespace v2g
