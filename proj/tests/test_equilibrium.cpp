#include "fixtures.hpp"

#include "v2g/equilibrium.hpp"
#include "v2g/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace v2g;

TEST_CASE("potential differences equal each player's own cost differences") {
    for (std::size_t w : {0u, 1u, 2u, 4u}) {
        const auto g = fixtures::toy_instance(w, 300.0);
        CHECK(verify_potential_identity(g, 200, 11) <= 1e-12);
    }
    const auto ref = fixtures::reference_instance(8);
    CHECK(verify_potential_identity(ref, 200, 3) <= 1e-10);
}

TEST_CASE("potential minimizer matches a 21-level brute force on the toy session") {
    for (std::size_t w : {0u, 1u, 2u, 3u, 4u}) {
        CAPTURE(w);
        const auto g = fixtures::toy_instance(w, 300.0);
        const auto sched = solve_gne(g);
        REQUIRE(sched.status == qp::SolveStatus::Optimal);
        REQUIRE(sched.feasibility.feasible());
        const auto grid = fixtures::grid_minimum(
            g.cfg, 21, [&](const std::vector<double>& P) { return potential(g, P); });
        const double found = potential(g, sched.P_bat);
        CHECK(found <= grid.value + 1e-9);
        CHECK(grid.value - found <= grid.cell_variation);
    }
}

TEST_CASE("weighted-sum optimum matches a 21-level brute force") {
    const auto g = fixtures::toy_instance(0, 300.0);
    for (double rho : {0.0, 0.5, 1.0}) {
        CAPTURE(rho);
        const auto sched = solve_mo(g, rho);
        REQUIRE(sched.status == qp::SolveStatus::Optimal);
        const auto grid = fixtures::grid_minimum(g.cfg, 21, [&](const std::vector<double>& P) {
            return multiobjective_value(g, rho, P);
        });
        const double found = multiobjective_value(g, rho, sched.P_bat);
        CHECK(found <= grid.value + 1e-9);
        CHECK(grid.value - found <= grid.cell_variation);
    }
}

TEST_CASE("potential minimizer is a generalized Nash equilibrium") {
    for (std::size_t w : {0u, 4u, 8u, 12u, 16u}) {
        CAPTURE(w);
        const auto g = fixtures::reference_instance(w);
        const auto sched = solve_gne(g);
        REQUIRE(sched.status == qp::SolveStatus::Optimal);
        CHECK(sched.feasibility.max_violation() <= 1e-6);
        const auto check = verify_gne(g, sched.P_bat);
        CHECK(check.is_equilibrium(1e-6));
    }
}

TEST_CASE("a perturbed schedule is not an equilibrium") {
    const auto g = fixtures::reference_instance(8);
    auto P = solve_gne(g).P_bat;
    // Shift charge from the cheapest V2G interval into a BD interval keeps the band but
    // hands the V2G player a profitable deviation.
    const std::size_t v = g.split.v2g_set.front();
    const std::size_t b = g.split.bd_set.front();
    P[v] += 2.0;
    P[b] -= 2.0;
    if (check_feasibility(P, g.cfg).feasible()) {
        CHECK_FALSE(verify_gne(g, P).is_equilibrium(1e-6));
    }
}

TEST_CASE("more V2G intervals trade charging cost for degradation") {
    std::vector<double> charging;
    std::vector<double> degradation;
    for (std::size_t w = 0; w <= 16; w += 4) {
        const auto g = fixtures::reference_instance(w);
        const auto s = solve_gne(g);
        REQUIRE(s.status == qp::SolveStatus::Optimal);
        charging.push_back(s.revenue_cost);
        degradation.push_back(s.degradation_cost);
    }
    for (std::size_t i = 1; i < charging.size(); ++i) {
        CHECK(charging[i] <= charging[i - 1] + 1e-6);
        CHECK(degradation[i] >= degradation[i - 1] - 1e-6);
    }
}

TEST_CASE("weighted sum at the extremes") {
    const auto g = fixtures::reference_instance(0);
    const auto pure_cost = solve_mo(g, 1.0);
    const auto pure_deg = solve_mo(g, 0.0);
    REQUIRE(pure_cost.status == qp::SolveStatus::Optimal);
    REQUIRE(pure_deg.status == qp::SolveStatus::Optimal);
    CHECK(pure_cost.revenue_cost <= pure_deg.revenue_cost + 1e-6);
    CHECK(pure_deg.degradation_cost <= pure_cost.degradation_cost + 1e-9);
}

TEST_CASE("unreachable target is refused before solving") {
    auto g = fixtures::toy_instance(2);
    g.cfg.E_des = 49.5;
    g.cfg.P_max = 3.0;
    CHECK_THROWS_AS(solve_gne(g), InfeasibleSession);
}

TEST_CASE("rho grid") {
    CHECK(rho_grid(5) == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK(rho_grid(1) == std::vector<double>{1.0});
}
