// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 fleetdp contributors

#include "doctest.h"

#include "error.hpp"
#include "market.hpp"
#include "support.hpp"
#include "text.hpp"

#include <cmath>
#include <random>

using namespace fleetdp;

namespace {

Scenario flat(int n, double v, double rho, double sigma)
{
    Scenario s;
    s.n_slots = n;
    s.rho.assign(n, rho);
    s.sigma.assign(n, sigma);
    s.volumes.assign(n, v);
    s.fleet = {{0, 100.0, 10.0, 10.0, 30.0, 30.0}};
    s.level.level = Level::L1;
    return s;
}

ErrorCode code_of(auto&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::Internal;
}

} // namespace

TEST_CASE("stage cost buys shortfall and pays for excess")
{
    auto s = flat(1, 100.0, 0.10, 0.05);
    auto c = stage_cost(0, -40.0, s);
    CHECK(c.cost_eur == doctest::Approx(6.0));
    CHECK(c.bought_kwh == 60.0);
    CHECK(c.excess_kwh == 0.0);

    s.volumes[0] = -50.0;
    c = stage_cost(0, 20.0, s);
    CHECK(c.cost_eur == doctest::Approx(1.5));
    CHECK(c.bought_kwh == 0.0);
    CHECK(c.excess_kwh == 30.0);

    s.volumes[0] = 0.0;
    CHECK(stage_cost(0, 0.0, s).cost_eur == 0.0);
    CHECK(code_of([&] { stage_cost(1, 0.0, s); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { stage_cost(-1, 0.0, s); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("total cost sums the slots")
{
    const auto s = flat(4, 10.0, 0.1, 0.05);
    const ActionMatrix idle(4, PerEvAction{0.0});
    const auto c = total_cost(idle, s);
    CHECK(c.total_eur == doctest::Approx(4.0));
    CHECK(c.per_slot.size() == 4);

    auto offset = s;
    offset.volumes.assign(4, 2.5);
    const ActionMatrix discharge(4, PerEvAction{-2.5});
    CHECK(total_cost(discharge, offset).total_eur == 0.0);

    CHECK(code_of([&] { total_cost(ActionMatrix(3, PerEvAction{0.0}), s); }) == ErrorCode::DimensionMismatch);
    CHECK(code_of([&] { total_cost(ActionMatrix(4, PerEvAction{0.0, 0.0}), s); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("discharging into a shortfall and recharging from a surplus costs nothing")
{
    auto s = flat(2, 0.0, 0.2, 0.1);
    s.volumes = {2.5, -2.5};
    const auto brute = testing::brute_force(s);
    CHECK(brute.sequences <= 9);
    REQUIRE(brute.min_cost);
    CHECK(*brute.min_cost == 0.0);
    CHECK(brute.argmin == std::vector<std::vector<int>>{{-1}, {1}});
    CHECK(total_cost({{-2.5}, {2.5}}, s).total_eur == 0.0);
}

TEST_CASE("price CSV ingestion")
{
    const auto dir = testing::temp_dir("prices");
    const auto hourly = dir + "/hourly.csv";
    text::write_file(hourly, "timestamp,price_eur_per_mwh\n2018-03-01T18:00,45.0\n");
    const auto p = ingest_prices(hourly, Granularity::Hourly);
    REQUIRE(p.size() == 4);
    for (double v : p)
        CHECK(v == doctest::Approx(0.045));
    CHECK(ingest_prices(hourly, Granularity::Quarter).size() == 1);

    const auto negative = dir + "/negative.csv";
    text::write_file(negative, "timestamp,price_eur_per_mwh\n2018-03-01T18:00,-5\n");
    CHECK(ingest_prices(negative, Granularity::Quarter).front() == doctest::Approx(-0.005));

    const auto bad = dir + "/bad.csv";
    text::write_file(bad, "timestamp,price_eur_per_mwh\n2018-03-01T18:00,45.0\n2018-03-01T19:00,abc\n");
    try {
        ingest_prices(bad, Granularity::Hourly);
        FAIL("malformed row accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Parse);
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }

    const auto nan = dir + "/nan.csv";
    text::write_file(nan, "timestamp,price_eur_per_mwh\n2018-03-01T18:00,nan\n");
    CHECK(code_of([&] { ingest_prices(nan, Granularity::Hourly); }) == ErrorCode::Parse);

    const auto empty = dir + "/empty.csv";
    text::write_file(empty, "");
    CHECK(code_of([&] { ingest_prices(empty, Granularity::Hourly); }) == ErrorCode::EmptyScenario);
}

TEST_CASE("applying prices clamps negatives and derives sigma")
{
    auto s = generate_scenario({Level::L1, 2, 4, 1});
    const int clamped = apply_prices(s, {0.05, -0.01, 0.02, 0.03}, "trace");
    CHECK(clamped == 1);
    CHECK(s.rho[1] == 0.0);
    CHECK(s.sigma[1] > 0.0);
    CHECK(s.sigma[0] == doctest::Approx(0.025));
    CHECK(s.source == "trace");
    CHECK(code_of([&] { apply_prices(s, {0.05}, "short"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("level 0 generation gives identical vehicles from 30 to 80 kWh")
{
    const auto s = generate_scenario({Level::L0, 5, 48, 42});
    REQUIRE(s.fleet.size() == 5);
    for (const auto& ev : s.fleet) {
        CHECK(ev.initial_soc_kwh == 30.0);
        CHECK(ev.target_soc_kwh == 80.0);
        CHECK(ev.capacity_kwh == 100.0);
        CHECK(ev.min_soc_kwh == 10.0);
        CHECK(ev.max_rate_kw == 10.0);
    }
    CHECK_FALSE(s.level.site_charge_cap_kw);
}

TEST_CASE("site caps are 90 percent of the fleet rate")
{
    const auto s = generate_scenario({Level::L2, 200, 48, 3});
    CHECK(*s.level.site_charge_cap_kw == 1800.0);
    CHECK(*s.level.site_discharge_cap_kw == 1800.0);
}

TEST_CASE("heterogeneous draws stay in range")
{
    const auto s = generate_scenario({Level::L1, 300, 48, 9});
    for (const auto& ev : s.fleet) {
        CHECK(ev.initial_soc_kwh >= 10.0);
        CHECK(ev.initial_soc_kwh <= 50.0);
        CHECK(ev.target_soc_kwh >= 70.0 - 1e-9);
        CHECK(ev.target_soc_kwh <= 100.0);
    }
    CHECK(s.rho.size() == 48);
    CHECK(s.sigma.size() == 48);
    CHECK(s.volumes.size() == 48);
    for (int k = 0; k < 48; ++k) {
        CHECK(s.rho[k] >= 0.0);
        CHECK(s.sigma[k] > 0.0);
    }
}

TEST_CASE("generation is deterministic and JSON round trips exactly")
{
    const auto a = generate_scenario({Level::L3, 20, 48, 7});
    const auto b = generate_scenario({Level::L3, 20, 48, 7});
    CHECK(scenario_to_json(a) == scenario_to_json(b));
    CHECK(scenario_to_json(a) != scenario_to_json(generate_scenario({Level::L3, 20, 48, 8})));

    const auto back = scenario_from_json(scenario_to_json(a));
    CHECK(back == a);

    const auto dir = testing::temp_dir("scenario-io");
    save_scenario(a, dir + "/s.json");
    CHECK(load_scenario(dir + "/s.json") == a);
    CHECK(code_of([&] { scenario_from_json("{\"n_slots\": 1"); }) == ErrorCode::Parse);
}

TEST_CASE("roster CSV round trip")
{
    const auto s = generate_scenario({Level::L1, 6, 8, 2});
    const auto dir = testing::temp_dir("roster");
    text::write_file(dir + "/r.csv", roster_to_csv(s.fleet));
    CHECK(roster_from_csv(dir + "/r.csv") == s.fleet);
    text::write_file(dir + "/bad.csv", "id,capacity\n0,100\n");
    CHECK(code_of([&] { roster_from_csv(dir + "/bad.csv"); }) == ErrorCode::Parse);
}

TEST_CASE("derived seeds differ across sizes and indices")
{
    CHECK(derive_seed(1, 50, 0) != derive_seed(1, 50, 1));
    CHECK(derive_seed(1, 50, 0) != derive_seed(1, 100, 0));
    CHECK(derive_seed(1, 50, 0) != derive_seed(2, 50, 0));
    CHECK(derive_seed(1, 50, 0) == derive_seed(1, 50, 0));
}

// ---- properties ----

TEST_CASE("property: stage cost is nonnegative, convex and never both buys and sells")
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-200.0, 200.0);
    std::uniform_real_distribution<double> price(0.0, 0.2);
    for (int trial = 0; trial < 2000; ++trial) {
        auto s = flat(1, u(rng), price(rng), 1e-4 + price(rng));
        const double a = u(rng), b = u(rng);
        const double t = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const auto ca = stage_cost(0, a, s), cb = stage_cost(0, b, s);
        const auto cm = stage_cost(0, t * a + (1 - t) * b, s);
        CHECK(ca.cost_eur >= 0.0);
        CHECK(ca.bought_kwh * ca.excess_kwh == 0.0);
        CHECK(cm.cost_eur <= t * ca.cost_eur + (1 - t) * cb.cost_eur + 1e-9);
    }
}

TEST_CASE("property: cost breakdown totals match the per-slot sum")
{
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const auto s = generate_scenario({Level::L1, 3, 12, rng()});
        ActionMatrix m(12, PerEvAction(3));
        for (auto& row : m)
            for (auto& x : row)
                x = 2.5 * (static_cast<int>(rng() % 3) - 1);
        const auto c = total_cost(m, s);
        double sum = 0;
        for (const auto& p : c.per_slot) {
            sum += p.cost_eur;
            CHECK(p.bought_kwh * p.excess_kwh == 0.0);
        }
        CHECK(c.total_eur == doctest::Approx(sum).epsilon(1e-9));
    }
}
