#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace v2g {

/// Lumped cabin/battery thermal network of a parked vehicle.
struct ThermalParams {
    double M_c = 1.0e5;    // J/K, cabin thermal mass
    double M_b = 2.4e5;    // J/K, battery thermal mass
    double K_ac = 60.0;    // W/K, ambient <-> cabin
    double K_ab = 40.0;    // W/K, ambient <-> battery
    double K_bc = 15.0;    // W/K, battery <-> cabin
    double q_rad = 0.0;    // W, solar load (vehicle parked in shade)
    double q_hvac = 0.0;   // W, HVAC off while parked
    double btms_efficiency = 0.9;  // share of battery heat removed by the BTMS

    void validate() const;
};

/// Piecewise-linear ambient temperature, held constant beyond its end points.
class AmbientSeries {
public:
    AmbientSeries() = default;
    AmbientSeries(std::vector<double> times_h, std::vector<double> temps_K);

    static AmbientSeries constant(double temp_K);

    [[nodiscard]] double at(double t_h) const;
    [[nodiscard]] bool covers(double t0_h, double t1_h) const;
    [[nodiscard]] std::span<const double> times() const { return times_h_; }
    [[nodiscard]] std::span<const double> temps() const { return temps_K_; }
    [[nodiscard]] bool empty() const { return times_h_.empty(); }

    /// Window [t0, t0 + duration] shifted to start at time 0.
    [[nodiscard]] AmbientSeries window(double t0_h, double duration_h) const;

private:
    std::vector<double> times_h_;
    std::vector<double> temps_K_;
};

/// Reads a `time_h,temp_C` CSV and converts to Kelvin.
AmbientSeries load_ambient_csv(const std::filesystem::path& path);

inline constexpr double kCelsiusOffset = 273.15;

struct TemperatureProfile {
    std::vector<double> times_h;
    std::vector<double> T_a;
    std::vector<double> T_b;
    std::vector<double> T_c;

    [[nodiscard]] std::size_t size() const { return times_h.size(); }
    /// Mean of the two end samples of every interval (size() - 1 values).
    [[nodiscard]] std::vector<double> interval_battery_temps() const;
};

/// Current drawn when a share `rho` of the charger rating is used.
double representative_current(double rho, double P_max_kw, double V_pack);

/// Joule heat I^2 R.
double heat_generation(double I_hat, double R_int);

struct ThermalSimOptions {
    double step_s = 1.0;
    double sample_interval_h = 0.25;
};

/// Classical RK4 integration of the cabin/battery temperatures under a constant heat load
/// `Q_w`. The result is sampled every `sample_interval_h` from 0 to `duration_h`.
/// Throws IntegrationError when the state blows up.
TemperatureProfile simulate_temperatures(const AmbientSeries& ambient, const ThermalParams& params,
                                         double Q_w, double duration_h, double T_b0, double T_c0,
                                         const ThermalSimOptions& options = {});

/// Steady state (T_c, T_b) for constant ambient and heat load, from the 2x2 linear balance.
std::array<double, 2> thermal_steady_state(double T_a, const ThermalParams& params, double Q_w);

namespace ode {

using State2 = std::array<double, 2>;
using Rhs2 = std::function<State2(double, const State2&)>;

/// One classical fourth-order Runge-Kutta step.
State2 rk4_step(const Rhs2& f, double t, const State2& y, double h);

}  // namespace ode

}  // namespace v2g
