#include "fixtures.hpp"

#include "v2g/robustness.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

using namespace v2g;

namespace {
PerturbationSpec spec_for(const GameInstance& g, std::size_t draws, std::uint64_t seed) {
    PerturbationSpec s;
    s.zeta0 = zeta_of(g);
    s.sample_count = draws;
    s.rng_seed = seed;
    return s;
}
}  // namespace

TEST_CASE("perturbation draws stay in the box and are reproducible") {
    const auto g = fixtures::reference_instance(8);
    auto spec = spec_for(g, 10, 5);
    const auto a = draw_zeta(spec, 3);
    CHECK(a == draw_zeta(spec, 3));
    CHECK(a != draw_zeta(spec, 4));
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] >= 0.9 * spec.zeta0[i] - 1e-15);
        CHECK(a[i] <= 1.1 * spec.zeta0[i] + 1e-15);
    }
    spec.low_factor = spec.high_factor = 1.0;
    CHECK(draw_zeta(spec, 0) == spec.zeta0);
}

TEST_CASE("perturbation factors average to one") {
    PerturbationSpec spec;
    spec.zeta0 = {1.0};
    spec.rng_seed = 9;
    double sum = 0.0;
    const std::size_t n = 100000;
    spec.sample_count = n;
    for (std::size_t i = 0; i < n; ++i) sum += draw_zeta(spec, i)[0];
    CHECK(std::abs(sum / n - 1.0) <= 0.005);
}

TEST_CASE("zeta round trip") {
    const auto g = fixtures::reference_instance(4);
    const auto z = zeta_of(g);
    REQUIRE(z.size() == 2 * g.cfg.T);
    CHECK(zeta_of(with_zeta(g, z)) == z);
}

TEST_CASE("pure revenue objectives ignore the coefficients") {
    const auto g16 = fixtures::reference_instance(16);
    const auto spec = spec_for(g16, 1, 1);
    const auto zeta = draw_zeta(spec, 0);
    CHECK(sensitivity_gt(g16, zeta) <= 1e-6);
    const auto g0 = fixtures::reference_instance(0);
    CHECK(sensitivity_mo(g0, 1.0, draw_zeta(spec_for(g0, 1, 1), 0)) <= 1e-6);
}

TEST_CASE("regret at the nominal coefficients is zero") {
    const auto g = fixtures::reference_instance(8);
    const auto zeta0 = zeta_of(g);
    const auto r = regret_gt(g, zeta0);
    CHECK(std::abs(r.numerator) <= 1e-12);
    const auto m = regret_mo(g, 0.5, zeta0);
    CHECK(std::abs(m.numerator) <= 1e-12);
}

TEST_CASE("regret normalizes by the optimum's magnitude") {
    const auto r = make_regret(-9.0, -10.0);
    CHECK_FALSE(r.excluded);
    CHECK(r.value() == doctest::Approx(0.1));
    CHECK(make_regret(1.0, 0.0).excluded);
    CHECK(sensitivity(std::vector<double>{1.0, 1.0}, std::vector<double>{1.0, 4.0},
                      std::vector<double>{0.0, 0.0}, std::vector<double>{3.0, 4.0}) ==
          doctest::Approx(0.6));
}

TEST_CASE("quantiles interpolate linearly") {
    const auto q = quantiles({5.0, 1.0, 3.0, 2.0, 4.0});
    CHECK(q.min == 1.0);
    CHECK(q.q25 == 2.0);
    CHECK(q.median == 3.0);
    CHECK(q.q75 == 4.0);
    CHECK(q.max == 5.0);
    const auto e = quantiles({0.0, 10.0});
    CHECK(e.q25 == doctest::Approx(2.5));
    CHECK(e.median == doctest::Approx(5.0));
    CHECK_THROWS(quantiles({}));
}

TEST_CASE("parallel comparison is identical to the serial one") {
    const auto cfg = fixtures::reference_config();
    const auto session = cfg.session_kwh();
    const auto ambient = cfg.ambient();
    const InstanceFactory factory = [&](Approach a, double h) {
        const double rho = a == Approach::GameTheoretic ? h / session.T : h;
        const auto profile = session_temperatures(cfg, session, ambient, rho);
        const std::size_t w = a == Approach::GameTheoretic ? static_cast<std::size_t>(h) : 0;
        return make_instance(session, assign_intervals(session.alpha, w), profile,
                             cfg.degradation);
    };
    PerturbationSpec spec;
    spec.sample_count = 6;
    spec.rng_seed = 17;
    const std::vector<double> w{0.0, 8.0, 16.0};
    const std::vector<double> rho{0.0, 0.5, 1.0};
    const auto serial = run_comparison(factory, w, rho, spec, 1);
    const auto parallel = run_comparison(factory, w, rho, spec, 4);
    std::ostringstream a;
    std::ostringstream b;
    write_samples_csv(a, serial);
    write_samples_csv(b, parallel);
    CHECK(a.str() == b.str());
    CHECK(serial.game.pooled_sensitivity().size() == 18);
}
