#include "v2g/thermal.hpp"

#include "v2g/csv_io.hpp"
#include "v2g/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace v2g {

void ThermalParams::validate() const {
    if (!(M_c > 0.0) || !(M_b > 0.0) || !(K_ac > 0.0) || !(K_ab > 0.0) || !(K_bc > 0.0)) {
        throw std::invalid_argument("thermal params: masses and conductances must be > 0");
    }
    if (!(btms_efficiency >= 0.0 && btms_efficiency <= 1.0)) {
        throw std::invalid_argument("thermal params: btms_efficiency must be in [0, 1]");
    }
}

AmbientSeries::AmbientSeries(std::vector<double> times_h, std::vector<double> temps_K)
    : times_h_(std::move(times_h)), temps_K_(std::move(temps_K)) {
    if (times_h_.size() != temps_K_.size() || times_h_.empty()) {
        throw std::invalid_argument("ambient series needs equal, non-empty time and value arrays");
    }
    for (std::size_t i = 0; i < times_h_.size(); ++i) {
        if (!std::isfinite(temps_K_[i]) || temps_K_[i] <= 0.0) {
            throw std::invalid_argument("ambient temperature must be finite and > 0 K");
        }
        if (i > 0 && !(times_h_[i] > times_h_[i - 1])) {
            throw std::invalid_argument("ambient sample times must be strictly increasing");
        }
    }
}

AmbientSeries AmbientSeries::constant(double temp_K) { return AmbientSeries({0.0}, {temp_K}); }

double AmbientSeries::at(double t_h) const {
    if (times_h_.size() == 1 || t_h <= times_h_.front()) return temps_K_.front();
    if (t_h >= times_h_.back()) return temps_K_.back();
    const auto it = std::upper_bound(times_h_.begin(), times_h_.end(), t_h);
    const auto i = static_cast<std::size_t>(it - times_h_.begin());
    const double w = (t_h - times_h_[i - 1]) / (times_h_[i] - times_h_[i - 1]);
    return temps_K_[i - 1] + w * (temps_K_[i] - temps_K_[i - 1]);
}

bool AmbientSeries::covers(double t0_h, double t1_h) const {
    if (times_h_.size() == 1) return true;
    constexpr double slack = 1e-9;
    return times_h_.front() <= t0_h + slack && times_h_.back() >= t1_h - slack;
}

AmbientSeries AmbientSeries::window(double t0_h, double duration_h) const {
    if (times_h_.size() == 1) return *this;
    std::vector<double> t{0.0};
    std::vector<double> v{at(t0_h)};
    for (std::size_t i = 0; i < times_h_.size(); ++i) {
        if (times_h_[i] > t0_h && times_h_[i] < t0_h + duration_h) {
            t.push_back(times_h_[i] - t0_h);
            v.push_back(temps_K_[i]);
        }
    }
    t.push_back(duration_h);
    v.push_back(at(t0_h + duration_h));
    return AmbientSeries(std::move(t), std::move(v));
}

AmbientSeries load_ambient_csv(const std::filesystem::path& path) {
    const auto table = read_csv(path, {"time_h", "temp_C"});
    std::vector<double> t;
    std::vector<double> v;
    t.reserve(table.rows.size());
    v.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        t.push_back(row[0]);
        v.push_back(row[1] + kCelsiusOffset);
    }
    return AmbientSeries(std::move(t), std::move(v));
}

std::vector<double> TemperatureProfile::interval_battery_temps() const {
    std::vector<double> out;
    if (T_b.size() < 2) return out;
    out.reserve(T_b.size() - 1);
    for (std::size_t i = 1; i < T_b.size(); ++i) out.push_back(0.5 * (T_b[i - 1] + T_b[i]));
    return out;
}

double representative_current(double rho, double P_max_kw, double V_pack) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw std::domain_error("rho must be in [0, 1]");
    if (!(P_max_kw > 0.0) || !(V_pack > 0.0)) {
        throw std::domain_error("charger rating and pack voltage must be > 0");
    }
    return rho * (P_max_kw * 1000.0 / V_pack);
}

double heat_generation(double I_hat, double R_int) {
    if (!(R_int >= 0.0)) throw std::domain_error("internal resistance must be >= 0");
    return I_hat * I_hat * R_int;
}

namespace ode {

State2 rk4_step(const Rhs2& f, double t, const State2& y, double h) {
    auto axpy = [](const State2& base, double s, const State2& k) {
        return State2{base[0] + s * k[0], base[1] + s * k[1]};
    };
    const State2 k1 = f(t, y);
    const State2 k2 = f(t + 0.5 * h, axpy(y, 0.5 * h, k1));
    const State2 k3 = f(t + 0.5 * h, axpy(y, 0.5 * h, k2));
    const State2 k4 = f(t + h, axpy(y, h, k3));
    return {y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])};
}

}  // namespace ode

TemperatureProfile simulate_temperatures(const AmbientSeries& ambient, const ThermalParams& params,
                                         double Q_w, double duration_h, double T_b0, double T_c0,
                                         const ThermalSimOptions& options) {
    params.validate();
    if (ambient.empty()) throw std::invalid_argument("ambient series is empty");
    if (!(options.step_s > 0.0)) throw std::invalid_argument("integration step must be > 0");
    if (!(options.sample_interval_h > 0.0) || !(duration_h > 0.0)) {
        throw std::invalid_argument("duration and sample interval must be > 0");
    }
    if (!ambient.covers(0.0, duration_h)) {
        throw std::invalid_argument("ambient series does not cover the simulated window");
    }
    const double ratio = duration_h / options.sample_interval_h;
    const auto n_samples = static_cast<std::size_t>(std::llround(ratio));
    if (n_samples == 0 || std::abs(ratio - static_cast<double>(n_samples)) > 1e-9 * ratio) {
        throw std::invalid_argument("duration must be a whole number of sample intervals");
    }

    // Q enters the battery balance net of the BTMS share that is pumped out.
    const double q_btms = -params.btms_efficiency * Q_w;
    // State is (T_c, T_b); time in seconds.
    const ode::Rhs2 rhs = [&](double t_s, const ode::State2& y) {
        const double Ta = ambient.at(t_s / 3600.0);
        const double Tc = y[0];
        const double Tb = y[1];
        return ode::State2{
            (params.K_ac * (Ta - Tc) + params.K_bc * (Tb - Tc) + params.q_rad + params.q_hvac) /
                params.M_c,
            (params.K_ab * (Ta - Tb) + params.K_bc * (Tc - Tb) + q_btms + Q_w) / params.M_b};
    };

    const double interval_s = options.sample_interval_h * 3600.0;
    const auto substeps = static_cast<long>(std::ceil(interval_s / options.step_s - 1e-12));
    const double h = interval_s / static_cast<double>(substeps);

    TemperatureProfile out;
    out.times_h.reserve(n_samples + 1);
    ode::State2 y{T_c0, T_b0};
    auto record = [&](std::size_t k) {
        const double t_h = static_cast<double>(k) * options.sample_interval_h;
        out.times_h.push_back(t_h);
        out.T_a.push_back(ambient.at(t_h));
        out.T_c.push_back(y[0]);
        out.T_b.push_back(y[1]);
    };
    record(0);
    for (std::size_t k = 0; k < n_samples; ++k) {
        const double t0 = static_cast<double>(k) * interval_s;
        for (long j = 0; j < substeps; ++j) {
            const double t = t0 + static_cast<double>(j) * h;
            y = ode::rk4_step(rhs, t, y, h);
            if (!std::isfinite(y[0]) || !std::isfinite(y[1]) || y[0] <= 0.0 || y[1] <= 0.0) {
                std::ostringstream msg;
                msg << "thermal integration diverged at t = " << (t + h) / 3600.0
                    << " h (step " << h << " s)";
                throw IntegrationError(msg.str(), (t + h) / 3600.0);
            }
        }
        record(k + 1);
    }
    return out;
}

std::array<double, 2> thermal_steady_state(double T_a, const ThermalParams& params, double Q_w) {
    // K_ac (Ta - Tc) + K_bc (Tb - Tc) + q_rad + q_hvac = 0
    // K_ab (Ta - Tb) + K_bc (Tc - Tb) + (1 - eff) Q = 0
    const double a11 = -(params.K_ac + params.K_bc);
    const double a12 = params.K_bc;
    const double a21 = params.K_bc;
    const double a22 = -(params.K_ab + params.K_bc);
    const double r1 = -(params.K_ac * T_a + params.q_rad + params.q_hvac);
    const double r2 = -(params.K_ab * T_a + (1.0 - params.btms_efficiency) * Q_w);
    const double det = a11 * a22 - a12 * a21;
    return {(r1 * a22 - a12 * r2) / det, (a11 * r2 - a21 * r1) / det};
}

}  // namespace v2g
