#pragma once

#include "v2g/degradation.hpp"
#include "v2g/session.hpp"
#include "v2g/thermal.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace v2g {

/// Gaussian perturbation of a mean tariff: alpha_t = max(0, m_t (1 + scale * std * z_t)).
struct TariffSynthesisSpec {
    std::vector<double> mean;
    double relative_std = 0.10;
    double scale = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// z_t are standard normal, drawn from (seed, stream); equal streams share z across scales.
std::vector<double> synthesize_tariff(const TariffSynthesisSpec& spec, std::uint64_t stream = 0);

struct ProjectionSettings {
    int days = 365;
    std::vector<int> session_weekdays{0, 2, 4};  // day % 7
    double session_start_h = 8.0;                // hour of day
    std::size_t session_T = 48;                  // 12 h at 15 min
    double daily_drive_kwh = 5.0;
    std::vector<double> capacities_kwh{50.0, 75.0, 100.0};
    std::vector<std::size_t> w_grid{0, 12, 24, 36, 48};
    std::filesystem::path tariff_csv;       // mean profile, session_T rows
    std::filesystem::path temperature_csv;  // time_h,temp_C covering `days`
};

struct RobustnessSettings {
    std::size_t draws = 100;
    double low_factor = 0.9;
    double high_factor = 1.1;
    std::size_t rho_count = 0;  // 0: T + 1 values matched to the w grid
};

struct StudyConfig {
    SessionConfigPu session;
    std::filesystem::path tariff_csv;  // empty when session.alpha is given inline
    BatteryPackSpec pack;
    CellDegradationParams degradation;
    ThermalParams thermal;
    ThermalSimOptions thermal_sim;

    double ambient_c = 10.0;
    std::filesystem::path ambient_csv;  // overrides ambient_c when set

    std::vector<double> ta_values_c{10.0, 20.0, 40.0};
    std::vector<double> charger_ratings_kw{6.6, 22.0, 50.0};
    std::vector<double> variance_scales{0.0, 1.0, 2.0};
    std::vector<std::size_t> w_grid;  // filled with 0..T when absent
    std::vector<std::size_t> profile_w;
    double tariff_relative_std = 0.10;

    RobustnessSettings robustness;
    ProjectionSettings projection;

    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 42;   // drives every stochastic stream (tariffs, perturbations)
    unsigned threads = 0;  // 0: hardware concurrency

    /// Canonical JSON of the effective configuration and its FNV-1a hash.
    std::string canonical_json;
    std::string hash;

    /// Session in kWh for the configured pack.
    [[nodiscard]] SessionConfig session_kwh() const;
    [[nodiscard]] AmbientSeries ambient() const;
};

/// Key/value environment entries such as {"V2GSCHED_SESSION__P_MAX", "50"}.
using EnvEntries = std::vector<std::pair<std::string, std::string>>;

inline constexpr const char* kEnvPrefix = "V2GSCHED_";

/// Entries of the process environment that carry the override prefix.
EnvEntries environment_overrides();

/// Parses JSON text; relative paths resolve against `base_dir`. Throws ConfigError listing
/// every violation, including unreadable referenced files.
StudyConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir,
                         const EnvEntries& env = {});

/// Reads and validates a config file. An empty path yields the built-in defaults.
StudyConfig load_config(const std::filesystem::path& path, const EnvEntries& env = {});

/// Every violation in an already parsed config; empty when valid.
std::vector<std::string> validate_config(const StudyConfig& cfg);

/// Recomputes canonical_json and hash after fields were changed in code (e.g. CLI flags).
void rehash(StudyConfig& cfg);

std::string fnv1a_hex(const std::string& text);

}  // namespace v2g
