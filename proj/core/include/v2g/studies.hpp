#pragma once

// Scenario orchestration: parameter sweeps over the charging game and their CSV/JSON output.

#include "v2g/config.hpp"
#include "v2g/csv_io.hpp"
#include "v2g/equilibrium.hpp"
#include "v2g/robustness.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace v2g {

/// A scenario cell failed (solver status or feasibility); the message names the cell.
class StudyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One equilibrium of a w sweep.
struct SweepRow {
    double key = 0.0;  // the swept scenario value (T_a in C, rating in kW, variance scale)
    std::size_t w = 0;
    double charging_cost = 0.0;     // EUR, negative when V2G pays out
    double degradation_cost = 0.0;  // EUR
    double cyclic_loss_pct = 0.0;   // % of capacity
    double max_violation = 0.0;
    std::size_t clamped_intervals = 0;
    std::vector<double> P;
};

struct Sweep {
    double key = 0.0;
    std::vector<SweepRow> rows;  // ordered as the w grid
};

/// Session T_b from a thermal run at participation level rho = share of the charger rating.
TemperatureProfile session_temperatures(const StudyConfig& cfg, const SessionConfig& session,
                                        const AmbientSeries& ambient, double rho);

/// Equilibrium for one w with the thermal precompute at rho = w / T.
SweepRow solve_cell(const StudyConfig& cfg, const SessionConfig& session,
                    const AmbientSeries& ambient, std::size_t w, double key = 0.0);

struct TemperatureStudy {
    std::vector<Sweep> sweeps;                 // one per T_a
    std::vector<double> slopes;                // least-squares d(loss %)/d(w/T)
    std::vector<std::size_t> clamped_intervals;  // B1 floor hits over the sweep
};

struct TariffVarianceStudy {
    std::vector<Sweep> sweeps;                // one per variance scale
    std::vector<std::vector<double>> tariffs;  // synthesized alpha per scale
};

struct ChargerStudy {
    std::vector<Sweep> sweeps;  // one per rating
    std::vector<double> charging_span;
    std::vector<double> degradation_span;
};

struct ProfileExport {
    std::size_t w = 0;
    ChargingSchedule schedule;
    std::vector<double> alpha;
};

struct ProjectionRow {
    double capacity_kwh = 0.0;
    std::size_t w = 0;
    std::size_t sessions = 0;
    double charging_cost = 0.0;
    double cyclic_loss_pct = 0.0;
    double degradation_cost = 0.0;
    double max_violation = 0.0;
};

struct ProjectionStudy {
    std::vector<ProjectionRow> rows;  // capacity-major
};

/// Least-squares slope of y against x.
double fitted_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Largest minus smallest value.
double span(const std::vector<double>& v);

TemperatureStudy run_temperature_study(const StudyConfig& cfg);
TariffVarianceStudy run_tariff_variance_study(const StudyConfig& cfg);
ChargerStudy run_charger_study(const StudyConfig& cfg);
std::vector<ProfileExport> run_profile_export(const StudyConfig& cfg);
RobustnessSummary run_robustness(const StudyConfig& cfg);
ProjectionStudy run_projection_year(const StudyConfig& cfg);

/// Output writers return the files they created below `dir`.
using FileList = std::vector<std::filesystem::path>;

FileList write_temperature_study(const TemperatureStudy& s, const StudyConfig& cfg,
                                 const std::filesystem::path& dir);
FileList write_tariff_variance_study(const TariffVarianceStudy& s, const StudyConfig& cfg,
                                     const std::filesystem::path& dir);
FileList write_charger_study(const ChargerStudy& s, const StudyConfig& cfg,
                             const std::filesystem::path& dir);
FileList write_profiles(const std::vector<ProfileExport>& p, const StudyConfig& cfg,
                        const std::filesystem::path& dir);
FileList write_robustness(const RobustnessSummary& s, const StudyConfig& cfg,
                          const std::filesystem::path& dir);
FileList write_projection(const ProjectionStudy& s, const StudyConfig& cfg,
                          const std::filesystem::path& dir);

/// Power column of an exported `interval,p_kw,energy_kwh[,...]` schedule CSV.
std::vector<double> read_schedule_csv(const std::filesystem::path& path);

/// Standard header block: tool, version, config hash, seed, study.
Metadata output_metadata(const StudyConfig& cfg, const std::string& study);

const char* tool_version();

}  // namespace v2g
