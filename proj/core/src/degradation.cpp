#include "v2g/degradation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace v2g {

namespace {

void require_temperature(double T_b) {
    if (!std::isfinite(T_b) || T_b <= 0.0) {
        throw std::domain_error("battery temperature must be finite and > 0 K, got " +
                                std::to_string(T_b));
    }
}

}  // namespace

void CellDegradationParams::validate() const {
    if (!(R_gas > 0.0) || !(E_a > 0.0) || !(A_cal > 0.0) || !(h > 0.0)) {
        throw std::invalid_argument("degradation params: R_gas, E_a, A_cal and h must be > 0");
    }
}

void BatteryPackSpec::validate() const {
    if (!(C_rated > 0.0) || n_series <= 0 || n_parallel <= 0 || !(V_pack > 0.0) ||
        !(capacity_kwh > 0.0) || !(R_int > 0.0) || !(gamma > 0.0) || !(n_max > 0.0)) {
        throw std::invalid_argument("battery pack: all fields must be strictly positive");
    }
}

BatteryPackSpec BatteryPackSpec::with_capacity(double kwh) const {
    if (!(kwh > 0.0)) throw std::invalid_argument("pack capacity must be > 0");
    BatteryPackSpec out = *this;
    out.n_parallel = static_cast<int>(std::lround(n_parallel * kwh / capacity_kwh));
    if (out.n_parallel < 1) out.n_parallel = 1;
    out.capacity_kwh = kwh;
    return out;
}

double calendar_loss(double T_b, double days, const CellDegradationParams& params) {
    require_temperature(T_b);
    if (!(days >= 0.0)) throw std::domain_error("calendar time must be >= 0");
    return params.A_cal * std::exp(-params.E_a / (params.R_gas * T_b)) * std::sqrt(days);
}

double b1_polynomial(double T_b, const CellDegradationParams& params) {
    return params.a * T_b * T_b + params.b * T_b + params.c;
}

CyclicCoefficients cyclic_coefficients(double T_b, const CellDegradationParams& params,
                                       const BatteryPackSpec& pack) {
    require_temperature(T_b);
    CyclicCoefficients out;
    const double raw = b1_polynomial(T_b, params);
    out.clamped = raw < kB1Floor;
    out.B1 = out.clamped ? kB1Floor : raw;
    out.B2 = params.d * T_b + params.e;
    // C-rate of one cell drawing p kW: 1000 p / (V_cell C_rated).
    out.B2_hat = out.B2 * 1000.0 / (pack.cell_voltage() * pack.C_rated);
    return out;
}

double cyclic_loss_exact(double I_rate, double n_cycle, double T_b,
                         const CellDegradationParams& params, const BatteryPackSpec& pack) {
    if (!(n_cycle >= 0.0)) throw std::domain_error("cycle count must be >= 0");
    const auto k = cyclic_coefficients(T_b, params, pack);
    return k.B1 * std::exp(k.B2 * std::abs(I_rate)) * pack.C_rated * n_cycle;
}

double n_hat(double n_max, double delta_t_h, double horizon_h) {
    if (!(n_max > 0.0) || !(delta_t_h > 0.0) || !(horizon_h > 0.0)) {
        throw std::domain_error("n_hat inputs must be > 0");
    }
    return n_max * delta_t_h / (horizon_h * 100.0);
}

SmoothLossTerms smooth_loss_terms(const CyclicCoefficients& coeffs, double n_hat_value,
                                  const CellDegradationParams& params,
                                  const BatteryPackSpec& pack) {
    const double s = pack.scale();
    SmoothLossTerms t;
    t.constant = coeffs.B1 * pack.C_rated * pack.C_rated * n_hat_value;
    t.quadratic = t.constant * coeffs.B2_hat * coeffs.B2_hat / (params.h * s * s);
    return t;
}

double cyclic_loss_smooth(double P_kw, const CyclicCoefficients& coeffs, double n_hat_value,
                          const CellDegradationParams& params, const BatteryPackSpec& pack) {
    if (!std::isfinite(P_kw)) throw std::domain_error("battery power must be finite");
    const double s = pack.scale();
    const double x = coeffs.B2_hat * P_kw;
    return coeffs.B1 * pack.C_rated * pack.C_rated * n_hat_value *
           (1.0 + x * x / (params.h * s * s));
}

double cyclic_loss_smooth(double P_kw, double T_b, double n_hat_value,
                          const CellDegradationParams& params, const BatteryPackSpec& pack) {
    return cyclic_loss_smooth(P_kw, cyclic_coefficients(T_b, params, pack), n_hat_value, params,
                              pack);
}

double degradation_cost(double loss_fraction, const BatteryPackSpec& pack) {
    if (!(loss_fraction >= 0.0)) throw std::domain_error("loss fraction must be >= 0");
    return pack.gamma * pack.capacity_kwh * loss_fraction;
}

}  // namespace v2g
