// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 fleetdp contributors

#include "rollout.hpp"

#include "error.hpp"
#include "text.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace fleetdp::rollout {

const char* to_string(PolicyKind p)
{
    switch (p) {
    case PolicyKind::Adp: return "adp";
    case PolicyKind::Svc: return "svc";
    case PolicyKind::IdleBaseline: return "idle";
    case PolicyKind::GreedyPriceBaseline: return "greedy";
    }
    return "?";
}

PolicyKind policy_from_string(const std::string& name)
{
    for (PolicyKind p : {PolicyKind::Adp, PolicyKind::Svc, PolicyKind::IdleBaseline, PolicyKind::GreedyPriceBaseline})
        if (name == to_string(p))
            return p;
    fail(ErrorCode::InvalidArgument, "unknown policy '" + name + "' (expected adp, svc, idle or greedy)");
}

std::vector<AggregateAction> repair_ladder(AggregateAction proposed)
{
    using A = AggregateAction;
    switch (proposed) {
    case A::D: return {A::D, A::I, A::C};
    case A::I: return {A::I, A::C, A::D};
    case A::C: return {A::C, A::I, A::D};
    }
    return {A::I, A::C, A::D};
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double nested_sum(const std::vector<double>& stage_costs)
{
    double acc = 0.0;
    for (std::size_t k = stage_costs.size(); k-- > 0;)
        acc = stage_costs[k] + acc;
    return acc;
}

AggregateAction greedy_kind(const Scenario& sc, int k)
{
    double mean = 0.0;
    for (int t = k; t < sc.n_slots; ++t)
        mean += sc.rho[static_cast<std::size_t>(t)];
    mean /= sc.n_slots - k;
    const double rho = sc.rho[static_cast<std::size_t>(k)];
    if (rho < mean)
        return AggregateAction::C;
    if (rho > mean)
        return AggregateAction::D;
    return AggregateAction::I;
}

} // namespace

RunResult run_policy(PolicyKind policy, const Scenario& sc, const RunOptions& options, int scenario_id)
{
    validate(sc);
    if (policy == PolicyKind::Svc && options.model == nullptr)
        fail(ErrorCode::InvalidArgument, "the svc policy needs a trained model");
    if (options.replan_every < 0)
        fail(ErrorCode::InvalidArgument, "replan_every must be >= 0");

    const FleetModel model = sc.fleet_model();
    RunResult out;
    out.row.scenario_id = scenario_id;
    out.row.fleet_size = static_cast<int>(sc.fleet.size());
    out.row.policy = policy;
    out.row.seed = sc.seed;
    out.schedule.start_slot = 0;

    FleetState st = initial_state(model);
    Schedule plan;
    double wall = 0.0;
    std::vector<double> costs;
    for (int k = 0; k < sc.n_slots; ++k) {
        const auto t0 = Clock::now();
        AggregateAction proposed = AggregateAction::I;
        switch (policy) {
        case PolicyKind::Adp:
            if (k == 0 || (options.replan_every > 0 && k % options.replan_every == 0)) {
                plan = solve_approx(sc, st, options.approx);
                out.schedule.states_explored += plan.states_explored;
                out.schedule.truncated = out.schedule.truncated || plan.truncated;
            }
            proposed = plan.labels[static_cast<std::size_t>(k - plan.start_slot)];
            break;
        case PolicyKind::Svc: proposed = learner::predict(*options.model, st, sc, k); break;
        case PolicyKind::IdleBaseline: proposed = AggregateAction::I; break;
        case PolicyKind::GreedyPriceBaseline: proposed = greedy_kind(sc, k); break;
        }
        wall += seconds_since(t0);

        bool moved = false;
        PerEvAction deltas;
        FleetState next;
        AggregateAction executed = proposed;
        for (AggregateAction kind : repair_ladder(proposed)) {
            deltas = expand_aggregate(kind, st, model, sc.n_slots);
            if (!is_admissible(model, st, deltas))
                continue;
            next = lattice_state(model, transition(model, st, deltas));
            if (!viable(model, next, sc.n_slots))
                continue;
            executed = kind;
            moved = true;
            break;
        }
        if (!moved)
            fail(ErrorCode::Infeasible, std::string(to_string(policy)) + " policy: no aggregate action keeps the fleet "
                                                                         "able to meet its targets at slot " +
                                            std::to_string(k));
        if (executed != proposed)
            ++out.row.repairs;
        costs.push_back(stage_cost(k, action_sum(deltas), sc).cost_eur);
        out.schedule.actions.push_back(std::move(deltas));
        out.schedule.labels.push_back(executed);
        st = std::move(next);
    }
    out.schedule.objective_eur = nested_sum(costs);
    out.row.objective_eur = out.schedule.objective_eur;
    out.row.wall_time_s = wall;
    out.row.violations = static_cast<int>(audit_schedule(sc, out.schedule).violations.size());
    return out;
}

AuditResult audit_schedule(const Scenario& sc, const Schedule& schedule)
{
    AuditResult res;
    const FleetModel model = sc.fleet_model();
    const int expected = sc.n_slots - schedule.start_slot;
    if (schedule.start_slot != 0) {
        res.violations.push_back("audit replays from slot 0 but the schedule starts at slot " +
                                 std::to_string(schedule.start_slot));
        return res;
    }
    if (static_cast<int>(schedule.actions.size()) != expected) {
        res.violations.push_back("schedule has " + std::to_string(schedule.actions.size()) + " slots, expected " +
                                 std::to_string(expected));
        return res;
    }
    FleetState st = initial_state(model);
    std::vector<double> costs;
    for (int k = 0; k < sc.n_slots; ++k) {
        const auto& a = schedule.actions[static_cast<std::size_t>(k)];
        const auto adm = is_admissible(model, st, a);
        for (const auto& v : adm.violations)
            res.violations.push_back("slot " + std::to_string(k) + ": " + v.describe());
        if (a.size() != sc.fleet.size())
            return res;
        // keep replaying past a violation so every broken slot is reported
        FleetState next = st;
        next.slot = k + 1;
        for (std::size_t j = 0; j < a.size(); ++j)
            next.evs[j].soc_kwh += a[j];
        if (adm.ok())
            next = transition(model, st, a);
        st = lattice_state(model, next);
        costs.push_back(stage_cost(k, action_sum(a), sc).cost_eur);
    }
    for (std::size_t j = 0; j < sc.fleet.size(); ++j) {
        if (st.evs[j].soc_kwh < sc.fleet[j].target_soc_kwh - kEnergyTol)
            res.violations.push_back("terminal: vehicle " + std::to_string(sc.fleet[j].id) + " ends at " +
                                     text::format_double(st.evs[j].soc_kwh) + " kWh below its target " +
                                     text::format_double(sc.fleet[j].target_soc_kwh));
    }
    res.replayed_cost_eur = nested_sum(costs);
    const double tol = 1e-9 * std::max(1.0, std::abs(res.replayed_cost_eur));
    if (std::abs(res.replayed_cost_eur - schedule.objective_eur) > tol)
        res.violations.push_back("reported objective " + text::format_double(schedule.objective_eur) +
                                 " differs from replayed cost " + text::format_double(res.replayed_cost_eur));
    return res;
}

EvalReport benchmark(const BenchmarkConfig& cfg)
{
    if (cfg.fleet_sizes.empty() || cfg.n_scenarios < 1 || cfg.policies.empty())
        fail(ErrorCode::InvalidArgument, "benchmark needs at least one fleet size, scenario and policy");
    if (cfg.jobs < 1)
        fail(ErrorCode::InvalidArgument, "jobs must be >= 1");
    for (PolicyKind p : cfg.policies)
        if (p == PolicyKind::Svc && cfg.run.model == nullptr)
            fail(ErrorCode::InvalidArgument, "the svc policy needs a trained model");

    struct Task {
        int fleet_size;
        int index;
    };
    std::vector<Task> tasks;
    for (int d : cfg.fleet_sizes)
        for (int i = 0; i < cfg.n_scenarios; ++i)
            tasks.push_back({d, i});
    const std::size_t np = cfg.policies.size();
    EvalReport report;
    report.rows.resize(tasks.size() * np);

    auto run_task = [&](std::size_t t) {
        const Task task = tasks[t];
        const std::uint64_t seed = derive_seed(cfg.seed, task.fleet_size, task.index);
        Scenario sc;
        std::string gen_error;
        try {
            sc = generate_scenario({cfg.level, task.fleet_size, cfg.n_slots, seed});
        } catch (const std::exception& e) {
            gen_error = e.what();
        }
        for (std::size_t p = 0; p < np; ++p) {
            RunRow& row = report.rows[t * np + p];
            row.scenario_id = task.index;
            row.fleet_size = task.fleet_size;
            row.policy = cfg.policies[p];
            row.seed = seed;
            if (!gen_error.empty()) {
                row.status = "error";
                row.message = gen_error;
                continue;
            }
            try {
                row = run_policy(cfg.policies[p], sc, cfg.run, task.index).row;
            } catch (const Error& e) {
                row.status = e.code() == ErrorCode::Infeasible ? "infeasible" : "error";
                row.message = e.what();
            } catch (const std::exception& e) {
                row.status = "error";
                row.message = e.what();
            }
        }
    };

    const int workers = std::min<int>(cfg.jobs, static_cast<int>(tasks.size()));
    if (workers <= 1) {
        for (std::size_t t = 0; t < tasks.size(); ++t)
            run_task(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t t = next++; t < tasks.size(); t = next++)
                    run_task(t);
            });
        for (auto& th : pool)
            th.join();
    }
    return report;
}

std::vector<GroupStats> summarize(const EvalReport& report)
{
    std::vector<GroupStats> groups;
    std::vector<std::vector<double>> objectives;
    for (const auto& r : report.rows) {
        std::size_t g = 0;
        while (g < groups.size() && !(groups[g].fleet_size == r.fleet_size && groups[g].policy == r.policy))
            ++g;
        if (g == groups.size()) {
            groups.push_back({});
            groups.back().fleet_size = r.fleet_size;
            groups.back().policy = r.policy;
            objectives.emplace_back();
        }
        auto& s = groups[g];
        ++s.runs;
        s.violations += r.violations;
        if (r.status != "ok")
            continue;
        ++s.ok;
        s.repairs += r.repairs;
        s.mean_wall_s += r.wall_time_s;
        objectives[g].push_back(r.objective_eur);
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
        auto& s = groups[g];
        const auto& o = objectives[g];
        if (o.empty())
            continue;
        double sum = 0.0;
        for (double v : o)
            sum += v;
        s.mean_objective_eur = sum / static_cast<double>(o.size());
        s.mean_wall_s /= static_cast<double>(o.size());
        if (o.size() > 1) {
            double ss = 0.0;
            for (double v : o)
                ss += (v - s.mean_objective_eur) * (v - s.mean_objective_eur);
            s.std_objective_eur = std::sqrt(ss / static_cast<double>(o.size() - 1));
        }
    }
    return groups;
}

std::string report_csv(const EvalReport& report)
{
    std::string out = "scenario_id,fleet_size,policy,seed,status,objective_eur,repairs,violations\n";
    for (const auto& r : report.rows) {
        out += std::to_string(r.scenario_id) + "," + std::to_string(r.fleet_size) + "," + to_string(r.policy) + "," +
               std::to_string(r.seed) + "," + r.status + "," +
               (r.status == "ok" ? text::format_double(r.objective_eur) : std::string()) + "," +
               std::to_string(r.repairs) + "," + std::to_string(r.violations) + "\n";
    }
    return out;
}

std::string summary_json(const EvalReport& report)
{
    using nlohmann::json;
    json groups = json::array();
    long long violations = 0, failed = 0;
    for (const auto& s : summarize(report)) {
        groups.push_back({{"fleet_size", s.fleet_size},
                          {"policy", to_string(s.policy)},
                          {"runs", s.runs},
                          {"ok", s.ok},
                          {"failed", s.runs - s.ok},
                          {"mean_objective_eur", s.mean_objective_eur},
                          {"std_objective_eur", s.std_objective_eur},
                          {"repairs", s.repairs},
                          {"violations", s.violations}});
        violations += s.violations;
        failed += s.runs - s.ok;
    }
    json failures = json::array();
    for (const auto& r : report.rows)
        if (r.status != "ok")
            failures.push_back({{"scenario_id", r.scenario_id},
                                {"fleet_size", r.fleet_size},
                                {"policy", to_string(r.policy)},
                                {"status", r.status},
                                {"message", r.message}});
    json j = {{"format_version", 1},
              {"runs", report.rows.size()},
              {"failed", failed},
              {"violations", violations},
              {"groups", groups},
              {"failures", failures}};
    return j.dump(2) + "\n";
}

std::string plot_csv(const EvalReport& report)
{
    std::string out = "fleet_size,policy,mean_objective_eur,std_objective_eur,mean_wall_s\n";
    for (const auto& s : summarize(report)) {
        out += std::to_string(s.fleet_size) + "," + to_string(s.policy) + "," +
               text::format_double(s.mean_objective_eur) + "," + text::format_double(s.std_objective_eur) + "," +
               text::format_double(s.mean_wall_s) + "\n";
    }
    return out;
}

std::string timings_csv(const EvalReport& report)
{
    std::string out = "scenario_id,fleet_size,policy,status,wall_time_s\n";
    for (const auto& r : report.rows)
        out += std::to_string(r.scenario_id) + "," + std::to_string(r.fleet_size) + "," + to_string(r.policy) + "," +
               r.status + "," + text::format_double(r.wall_time_s) + "\n";
    return out;
}

} // namespace fleetdp::rollout
