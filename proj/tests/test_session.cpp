#include "v2g/errors.hpp"
#include "v2g/session.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace v2g;

namespace {
SessionConfig reference_session() {
    SessionConfigPu pu;
    pu.alpha.assign(pu.T, 0.2);
    return per_unit_to_kwh(pu, BatteryPackSpec{});
}
}  // namespace

TEST_CASE("per-unit energies scale with the pack") {
    const auto s = reference_session();
    CHECK(s.E_min == doctest::Approx(10.0));
    CHECK(s.E_max == doctest::Approx(50.0));
    CHECK(s.E_0 == doctest::Approx(25.0));
    CHECK(s.E_des == doctest::Approx(45.0));
    CHECK(s.epsilon == doctest::Approx(1.0));
}

TEST_CASE("price-based split gives the w dearest intervals to the revenue player") {
    const std::vector<double> alpha{0.1, 0.4, 0.3, 0.4, 0.2};
    const auto s = assign_intervals(alpha, 2);
    CHECK(s.v2g_set == std::vector<std::size_t>{1, 3});
    CHECK(s.bd_set == std::vector<std::size_t>{0, 2, 4});
    CHECK(assign_intervals(alpha, 0).v2g_set.empty());
    CHECK(assign_intervals(alpha, 5).bd_set.empty());
    CHECK_THROWS(assign_intervals(alpha, 6));
    const auto mask = s.v2g_mask();
    CHECK(mask == std::vector<bool>{false, true, false, true, false});
}

TEST_CASE("energy trace and feasibility report") {
    auto s = reference_session();
    std::vector<double> P(s.T, 0.0);
    // 20 kWh at 0.95 * 0.25 h per kW-interval.
    const double per = 20.0 / (s.energy_gain() * 16.0);
    std::fill(P.begin(), P.end(), per);
    const auto e = energy_trace(P, s);
    CHECK(e.back() == doctest::Approx(45.0).epsilon(1e-12));
    CHECK(check_feasibility(P, s).feasible());

    P[0] = 30.0;
    const auto bad = check_feasibility(P, s);
    CHECK(bad.box == doctest::Approx(8.0));
    CHECK_FALSE(bad.feasible());

    std::fill(P.begin(), P.end(), 0.0);
    const auto short_target = check_feasibility(P, s);
    CHECK(short_target.terminal == doctest::Approx(19.0));
}

TEST_CASE("the terminal band is reachable from E_0") {
    // 4 h at 22 kW and 0.95 reach 83.6 kWh, so from 25 kWh the band [80.0, 88.42] of P sums
    // (in kW-intervals) is inside the charger's 352 kW-interval budget.
    const auto s = reference_session();
    const double lo = (s.E_des - s.epsilon - s.E_0) / s.energy_gain();
    const double hi = (s.E_des + s.epsilon - s.E_0) / s.energy_gain();
    CHECK(lo == doctest::Approx(80.0).epsilon(1e-12));
    CHECK(hi == doctest::Approx(88.421052631578947).epsilon(1e-12));
    CHECK_NOTHROW(s.validate());
}

TEST_CASE("unreachable targets and broken bounds are reported") {
    auto s = reference_session();
    s.P_max = 1.0;
    s.P_min = -1.0;
    CHECK_THROWS_AS(s.validate(), InfeasibleSession);

    auto t = reference_session();
    t.epsilon = -1.0;
    t.E_0 = 60.0;
    const auto v = t.violations();
    CHECK(v.size() >= 2);
    CHECK_THROWS_AS(t.validate(), ConfigError);
}

TEST_CASE("tariff CSV loading") {
    const auto dir = std::filesystem::temp_directory_path() / "v2g_session_test";
    std::filesystem::create_directories(dir);
    const auto good = dir / "tariff.csv";
    std::ofstream(good) << "# synthetic\ninterval,alpha_eur_per_kwh\n1,0.2\n2,0.25\n";
    CHECK(load_tariff_csv(good) == std::vector<double>{0.2, 0.25});
    const auto gap = dir / "gap.csv";
    std::ofstream(gap) << "interval,alpha_eur_per_kwh\n1,0.2\n3,0.25\n";
    CHECK_THROWS_AS(load_tariff_csv(gap), IoError);
    CHECK_THROWS_AS(load_tariff_csv(dir / "missing.csv"), IoError);
}
