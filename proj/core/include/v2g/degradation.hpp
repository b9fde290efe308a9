#pragma once

// Semi-empirical Li-ion capacity fade: calendar aging, cyclic aging and the
// quadratic-in-power cyclic loss used by the schedulers.

namespace v2g {

/// Empirical fit constants of the cell aging model.
struct CellDegradationParams {
    double a = 8.61e-6;     // 1/(Ah K^2)
    double b = -5.13e-3;    // 1/(Ah K)
    double c = 7.63e-1;     // 1/Ah
    double d = -6.7e-3;     // 1/(K C-rate)
    double e = 2.35;        // 1/C-rate
    double A_cal = 14867.0; // 1/day^0.5
    double E_a = 24500.0;   // J/mol
    double R_gas = 8.314;   // J/(mol K)
    double h = 0.0465;      // curve fit parameter of the smooth loss

    /// Throws std::invalid_argument when a physical constant is non-positive.
    void validate() const;
};

/// Lower bound applied to the B1 polynomial so the smooth loss stays convex.
inline constexpr double kB1Floor = 1e-6;

struct BatteryPackSpec {
    double C_rated = 1.5;        // Ah, one cell
    int n_series = 83;
    int n_parallel = 94;
    double V_pack = 350.0;       // V, pack terminal voltage
    double capacity_kwh = 50.0;
    double R_int = 0.1;          // ohm
    double gamma = 585.0;        // EUR per kWh of lost capacity
    double n_max = 5.28;         // full cycles over the horizon

    [[nodiscard]] double scale() const { return static_cast<double>(n_series) * n_parallel; }
    [[nodiscard]] double cell_voltage() const { return V_pack / n_series; }

    void validate() const;

    /// Same cells, with the parallel string count scaled to a new pack capacity.
    [[nodiscard]] BatteryPackSpec with_capacity(double kwh) const;
};

struct CyclicCoefficients {
    double B1 = 0.0;       // 1/Ah, floored at kB1Floor
    double B2 = 0.0;       // 1/C-rate
    double B2_hat = 0.0;   // 1/kW of cell power: B2 * C-rate per cell kW
    bool clamped = false;  // raw B1 polynomial fell below kB1Floor
};

/// Calendar capacity loss in percent after `days` at battery temperature `T_b` (K).
double calendar_loss(double T_b, double days, const CellDegradationParams& params = {});

/// Raw quadratic a T^2 + b T + c, before flooring.
double b1_polynomial(double T_b, const CellDegradationParams& params);

CyclicCoefficients cyclic_coefficients(double T_b, const CellDegradationParams& params,
                                       const BatteryPackSpec& pack);

/// Cyclic loss in percent of capacity: B1 exp(B2 |I_rate|) C_rated n_cycle.
double cyclic_loss_exact(double I_rate, double n_cycle, double T_b,
                         const CellDegradationParams& params, const BatteryPackSpec& pack);

/// Per-interval cycle weight n_max * dt / (T * 100). The /100 turns percent into a fraction.
double n_hat(double n_max, double delta_t_h, double horizon_h);

/// Smooth per-interval cyclic loss as a capacity fraction, for pack power `P_kw`.
double cyclic_loss_smooth(double P_kw, const CyclicCoefficients& coeffs, double n_hat_value,
                          const CellDegradationParams& params, const BatteryPackSpec& pack);

/// Convenience overload that evaluates the coefficients at `T_b`.
double cyclic_loss_smooth(double P_kw, double T_b, double n_hat_value,
                          const CellDegradationParams& params, const BatteryPackSpec& pack);

/// Loss = constant + quadratic * P^2. Both parts of cyclic_loss_smooth, split for the optimizer.
struct SmoothLossTerms {
    double constant = 0.0;
    double quadratic = 0.0;
};

SmoothLossTerms smooth_loss_terms(const CyclicCoefficients& coeffs, double n_hat_value,
                                  const CellDegradationParams& params, const BatteryPackSpec& pack);

/// EUR cost of losing `loss_fraction` of the pack.
double degradation_cost(double loss_fraction, const BatteryPackSpec& pack);

}  // namespace v2g
