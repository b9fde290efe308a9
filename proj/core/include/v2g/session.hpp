#pragma once

#include "v2g/degradation.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace v2g {

/// One parking session. Energies in kWh, powers in kW, time in hours, prices in EUR/kWh.
struct SessionConfig {
    std::size_t T = 16;
    double delta_t_h = 0.25;
    double P_min = -22.0;
    double P_max = 22.0;
    double E_min = 10.0;
    double E_max = 50.0;
    double E_0 = 25.0;
    double E_des = 45.0;
    double epsilon = 1.0;
    double eta_avg = 0.95;
    std::vector<double> alpha;
    BatteryPackSpec pack;

    [[nodiscard]] double horizon_h() const { return static_cast<double>(T) * delta_t_h; }
    /// Energy gained per kW of power held for one interval.
    [[nodiscard]] double energy_gain() const { return eta_avg * delta_t_h; }

    /// Every invariant violation, empty when valid.
    [[nodiscard]] std::vector<std::string> violations() const;
    /// Throws ConfigError on invariant violations and InfeasibleSession when the
    /// energy target is out of reach.
    void validate() const;
};

/// Energy quantities expressed per unit of pack capacity.
struct SessionConfigPu {
    std::size_t T = 16;
    double delta_t_h = 0.25;
    double P_min = -22.0;
    double P_max = 22.0;
    double E_min_pu = 0.2;
    double E_max_pu = 1.0;
    double E_0_pu = 0.5;
    double E_des_pu = 0.9;
    double epsilon_pu = 0.02;
    double eta_avg = 0.95;
    std::vector<double> alpha;
};

SessionConfig per_unit_to_kwh(const SessionConfigPu& pu, const BatteryPackSpec& pack);

/// Partition of the interval indices (0-based) between the revenue player and the
/// degradation player.
struct HorizonSplit {
    std::vector<std::size_t> v2g_set;
    std::vector<std::size_t> bd_set;

    [[nodiscard]] std::size_t w() const { return v2g_set.size(); }
    [[nodiscard]] std::size_t T() const { return v2g_set.size() + bd_set.size(); }
    /// Per-interval ownership mask, true for the revenue player.
    [[nodiscard]] std::vector<bool> v2g_mask() const;
};

/// The `w` highest-priced intervals go to the revenue player; ties favor earlier intervals.
HorizonSplit assign_intervals(std::span<const double> alpha, std::size_t w);

/// Split from an explicit set of revenue-player intervals.
HorizonSplit make_split(std::size_t T, std::vector<std::size_t> v2g_set);

/// Stored energy after each interval.
std::vector<double> energy_trace(std::span<const double> P_kw, const SessionConfig& cfg);

struct FeasibilityReport {
    double box = 0.0;       // kW over/under the charger limits
    double corridor = 0.0;  // kWh outside [E_min, E_max] after any interval
    double terminal = 0.0;  // kWh beyond the E_des +- epsilon band
    double tolerance = 0.0;

    [[nodiscard]] double max_violation() const;
    [[nodiscard]] bool feasible() const { return max_violation() <= tolerance; }
};

FeasibilityReport check_feasibility(std::span<const double> P_kw, const SessionConfig& cfg,
                                    double tol = 1e-6);

/// Loads a `interval,alpha_eur_per_kwh` CSV with consecutive 1-based intervals.
std::vector<double> load_tariff_csv(const std::filesystem::path& path);

}  // namespace v2g
