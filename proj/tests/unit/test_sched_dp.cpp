// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 fleetdp contributors

#include "doctest.h"

#include "error.hpp"
#include "oracle.hpp"
#include "rollout.hpp"
#include "sched_dp.hpp"
#include "support.hpp"

#include <algorithm>
#include <random>

using namespace fleetdp;

namespace {

Scenario single(int n, double initial, double target, std::vector<double> v, double rho, double sigma)
{
    Scenario s;
    s.n_slots = n;
    s.rho.assign(n, rho);
    s.sigma.assign(n, sigma);
    s.volumes = std::move(v);
    s.fleet = {{0, 100.0, 10.0, 10.0, initial, target}};
    s.level.level = Level::L1;
    return s;
}

FleetModel caps_model(std::vector<EvSpec> specs, double cap_kw)
{
    FleetModel m;
    m.specs = std::move(specs);
    m.level = {Level::L2, cap_kw, cap_kw};
    return m;
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

// Every state in the table must satisfy the Bellman equation over the full
// lattice; absent successors count as infinite.
void check_bellman_exact(const Scenario& sc, const DpTable& table)
{
    const auto m = sc.fleet_model();
    const std::size_t d = m.size();
    int n_actions = 1;
    for (std::size_t j = 0; j < d; ++j)
        n_actions *= 3;
    for (const auto& layer : table.layers) {
        for (const auto& [key, entry] : layer) {
            if (entry.state.slot == sc.n_slots) {
                CHECK(entry.cost_to_go == (terminal_ok(m, entry.state, sc.n_slots) ? 0.0 : kInfiniteCost));
                continue;
            }
            double best = kInfiniteCost;
            for (int code = 0; code < n_actions; ++code) {
                PerEvAction a(d);
                int rest = code;
                for (std::size_t j = 0; j < d; ++j, rest /= 3)
                    a[j] = (rest % 3 - 1) * m.step_kwh(j);
                if (!is_admissible(m, entry.state, a))
                    continue;
                const auto next = transition(m, entry.state, a);
                const double c = stage_cost(entry.state.slot, action_sum(a), sc).cost_eur;
                best = std::min(best, c + table.cost_to_go(m, next));
            }
            CHECK(entry.cost_to_go == best);
        }
    }
}

} // namespace

TEST_CASE("exact DP: a single forced charge")
{
    const auto s = single(1, 30.0, 32.5, {0.0}, 0.1, 0.05);
    const auto sch = solve_exact(s);
    CHECK(sch.objective_eur == doctest::Approx(0.25));
    CHECK(sch.actions == ActionMatrix{{2.5}});
}

TEST_CASE("exact DP: charge into a surplus then discharge into a shortfall")
{
    const auto s = single(2, 30.0, 30.0, {-2.5, 2.5}, 0.1, 0.05);
    const auto sch = solve_exact(s);
    CHECK(sch.objective_eur == 0.0);
    CHECK(sch.actions == ActionMatrix{{2.5}, {-2.5}});
    const auto brute = testing::brute_force(s);
    CHECK(brute.sequences == 9);
    REQUIRE(brute.min_cost);
    CHECK(*brute.min_cost == sch.objective_eur);
}

TEST_CASE("exact DP matches the enumeration oracle on two vehicles over four slots")
{
    for (int lv = 0; lv <= 3; ++lv) {
        const auto s = testing::small_scenario(Level(lv), 2, 4, 500 + lv);
        CHECK(solve_exact(s).objective_eur == oracle::enumerate(s).min_cost);
    }
}

TEST_CASE("exact DP reports size limits and infeasibility")
{
    const auto big = testing::small_scenario(Level::L1, 5, 4, 1);
    CHECK(code_of([&] { solve_exact(big); }) == ErrorCode::SizeLimit);
    const auto longer = testing::small_scenario(Level::L1, 1, 13, 1);
    CHECK(code_of([&] { solve_exact(longer); }) == ErrorCode::SizeLimit);
    const auto hopeless = single(2, 30.0, 40.0, {0.0, 0.0}, 0.1, 0.05);
    CHECK(code_of([&] { solve_exact(hopeless); }) == ErrorCode::Infeasible);
    CHECK(code_of([&] { solve_approx(hopeless); }) == ErrorCode::Infeasible);
}

TEST_CASE("approximate DP in a free environment charges to target at no cost")
{
    auto s = generate_scenario({Level::L0, 3, 8, 4});
    for (auto& ev : s.fleet) {
        ev.initial_soc_kwh = 30.0;
        ev.target_soc_kwh = 40.0;
    }
    s.rho.assign(8, 0.0);
    s.sigma.assign(8, 1e-4);
    s.volumes.assign(8, 0.0);
    const auto sch = solve_approx(s, ApproxOptions{0});
    CHECK(sch.objective_eur == 0.0);
    for (int k = 0; k < 4; ++k)
        CHECK(sch.labels[k] == AggregateAction::C);
}

TEST_CASE("approximate DP idles when targets are already met and every slot is short")
{
    auto s = generate_scenario({Level::L1, 3, 1, 4});
    for (auto& ev : s.fleet)
        ev.target_soc_kwh = ev.initial_soc_kwh;
    s.volumes = {500.0};
    const auto sch = solve_approx(s);
    CHECK(sch.labels == std::vector<AggregateAction>{AggregateAction::I});
    CHECK(sch.actions.front() == PerEvAction(3, 0.0));
}

TEST_CASE("C expansion charges the emptiest vehicles first within the site cap")
{
    // 20 kW for 15 minutes admits two 2.5 kWh steps.
    const auto m = caps_model({{0, 100, 10, 10, 10, 10}, {1, 100, 10, 10, 50, 10}, {2, 100, 10, 10, 30, 10}}, 20.0);
    const auto a = expand_aggregate(AggregateAction::C, initial_state(m), m, 48);
    CHECK(a == PerEvAction{2.5, 0.0, 2.5});
}

TEST_CASE("C expansion skips full vehicles and breaks SoC ties by id")
{
    const auto m = caps_model({{0, 100, 10, 10, 30, 10}, {1, 100, 10, 10, 100, 10}, {2, 100, 10, 10, 30, 10}}, 10.0);
    CHECK(expand_aggregate(AggregateAction::C, initial_state(m), m, 48) == PerEvAction{2.5, 0.0, 0.0});
}

TEST_CASE("D expansion keeps vehicles that have no slack")
{
    const auto m = caps_model({{0, 100, 10, 10, 80, 80}, {1, 100, 10, 10, 80, 80}}, 100.0);
    FleetState s = initial_state(m);
    s.slot = 47;
    CHECK(expand_aggregate(AggregateAction::D, s, m, 48) == PerEvAction{0.0, 0.0});
    // With slack both discharge, fullest first.
    s.slot = 0;
    CHECK(expand_aggregate(AggregateAction::D, s, m, 48) == PerEvAction{-2.5, -2.5});
}

TEST_CASE("I expansion still charges a vehicle without slack and the replay reaches its target")
{
    // Vehicle 0 needs 4 steps with 4 slots left; vehicle 1 is done.
    const auto m = caps_model({{0, 100, 10, 10, 30, 40}, {1, 100, 10, 10, 50, 50}}, 100.0);
    FleetState s = initial_state(m);
    s.slot = 44;
    CHECK(required_charge_slots(m, 0, 30.0) == 4);
    for (int k = 44; k < 48; ++k) {
        const auto a = expand_aggregate(AggregateAction::I, s, m, 48);
        CHECK(a == PerEvAction{2.5, 0.0});
        s = transition(m, s, a);
    }
    CHECK(terminal_ok(m, s, 48));
}

TEST_CASE("forced charging follows the fleet need under a site cap")
{
    // One step per slot fits the cap; three vehicles each need one step in three slots.
    auto m = caps_model({{0, 100, 10, 10, 30, 32.5}, {1, 100, 10, 10, 30, 32.5}, {2, 100, 10, 10, 30, 32.5}}, 10.0);
    FleetState s = initial_state(m);
    s.slot = 45;
    CHECK(viable(m, s, 48));
    const auto mask = forced_charge_mask(m, s, 48);
    CHECK(std::count(mask.begin(), mask.end(), true) == 1);
    CHECK(mask[0]); // ties by id
    s.slot = 46;
    CHECK_FALSE(viable(m, s, 48));
}

TEST_CASE("replanning from a later start state")
{
    const auto s = testing::small_scenario(Level::L3, 10, 16, 2);
    const auto full = solve_approx(s);
    const auto m = s.fleet_model();
    FleetState st = initial_state(m);
    for (int k = 0; k < 8; ++k)
        st = transition(m, st, full.actions[static_cast<std::size_t>(k)]);
    const auto tail = solve_approx(s, st);
    CHECK(tail.start_slot == 8);
    CHECK(tail.actions.size() == 8);
    CHECK(tail.labels.size() == 8);
}

TEST_CASE("schedule files")
{
    const auto s = single(2, 30.0, 30.0, {-2.5, 2.5}, 0.1, 0.05);
    const auto sch = solve_approx(s);
    const auto csv = schedule_to_csv(sch, s);
    CHECK(csv.rfind("slot,ev_id,delta_kwh,aggregate_label\n", 0) == 0);
    CHECK(csv.find("0,0,2.5,C\n") != std::string::npos);
    CHECK(csv.find("1,0,-2.5,D\n") != std::string::npos);
    const auto side = schedule_sidecar_json(sch, s, "approx");
    CHECK(side.find("\"objective_eur\"") != std::string::npos);
    CHECK(side.find("\"approx\"") != std::string::npos);
}

// ---- properties ----

TEST_CASE("property: Bellman equation holds on every exact table entry")
{
    for (int lv = 0; lv <= 3; ++lv)
        for (int seed = 0; seed < 3; ++seed) {
            const auto s = testing::small_scenario(Level(lv), 2, 6, 40 + seed);
            DpTable table;
            solve_exact(s, {}, &table);
            check_bellman_exact(s, table);
        }
}

TEST_CASE("property: approximate table entries satisfy the restricted Bellman equation")
{
    const auto s = testing::small_scenario(Level::L3, 3, 8, 77);
    const auto m = s.fleet_model();
    DpTable table;
    solve_approx(s, ApproxOptions{0}, &table);
    for (const auto& layer : table.layers)
        for (const auto& [key, e] : layer) {
            if (e.state.slot == s.n_slots)
                continue;
            double best = kInfiniteCost;
            for (auto kind : kAllAggregateActions) {
                const auto a = expand_aggregate(kind, e.state, m, s.n_slots);
                if (!is_admissible(m, e.state, a))
                    continue;
                best = std::min(best, stage_cost(e.state.slot, action_sum(a), s).cost_eur +
                                          table.cost_to_go(m, transition(m, e.state, a)));
            }
            CHECK(e.cost_to_go == best);
        }
}

TEST_CASE("property: schedules replay to their objective and labels reproduce the actions")
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 24; ++trial) {
        const auto lv = Level(trial % 4);
        const auto s = testing::small_scenario(lv, 5 + trial, 24, rng());
        const auto sch = solve_approx(s);
        const auto audit = rollout::audit_schedule(s, sch);
        CHECK(audit.ok());
        CHECK(audit.replayed_cost_eur == doctest::Approx(sch.objective_eur).epsilon(1e-9));

        const auto m = s.fleet_model();
        FleetState st = initial_state(m);
        for (int k = 0; k < s.n_slots; ++k) {
            const auto a = expand_aggregate(sch.labels[k], st, s);
            CHECK(a == sch.actions[k]);
            st = transition(m, st, a);
        }
    }
}

TEST_CASE("property: exact <= approximate <= idle baseline")
{
    for (int lv = 0; lv <= 3; ++lv)
        for (int seed = 0; seed < 6; ++seed) {
            const auto s = testing::small_scenario(Level(lv), 3, 6, 900 + seed);
            const double exact = solve_exact(s).objective_eur;
            const double approx = solve_approx(s).objective_eur;
            const double idle = rollout::run_policy(rollout::PolicyKind::IdleBaseline, s).row.objective_eur;
            CHECK(exact <= approx);
            CHECK(approx <= idle);
        }
}

TEST_CASE("property: tightening targets keeps an infeasible instance infeasible")
{
    std::mt19937_64 rng(17);
    int infeasible = 0;
    for (int trial = 0; trial < 120; ++trial) {
        auto s = testing::small_scenario(Level(1 + trial % 3), 3, 6, rng());
        // Push targets toward the reachability limit so that some instances fail.
        for (auto& ev : s.fleet)
            ev.target_soc_kwh = std::min(ev.capacity_kwh, ev.target_soc_kwh + 2.5 * static_cast<double>(rng() % 5));
        bool first_infeasible = false;
        try {
            solve_approx(s);
        } catch (const Error& e) {
            REQUIRE(e.code() == ErrorCode::Infeasible);
            first_infeasible = true;
        }
        if (!first_infeasible)
            continue;
        ++infeasible;
        auto tighter = s;
        tighter.fleet[rng() % 3].target_soc_kwh += 2.5;
        for (auto& ev : tighter.fleet)
            ev.target_soc_kwh = std::min(ev.target_soc_kwh, ev.capacity_kwh);
        CHECK(code_of([&] { solve_approx(tighter); }) == ErrorCode::Infeasible);
    }
    CHECK(infeasible >= 10);
}
