// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 fleetdp contributors

// Closed-loop evaluation of scheduling policies and batch benchmarks.

#pragma once

#include "learner.hpp"
#include "market.hpp"
#include "sched_dp.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fleetdp::rollout {

enum class PolicyKind { Adp, Svc, IdleBaseline, GreedyPriceBaseline };

const char* to_string(PolicyKind p); // adp, svc, idle, greedy
PolicyKind policy_from_string(const std::string& name); // InvalidArgument

struct RunOptions {
    /// Re-solve the ADP plan from the current state every this many slots;
    /// 0 solves once. Classifier and baseline policies decide every slot.
    int replan_every = 0;
    ApproxOptions approx;
    const learner::SvcModel* model = nullptr; // required for Svc
};

struct RunRow {
    int scenario_id = 0;
    int fleet_size = 0;
    PolicyKind policy = PolicyKind::Adp;
    std::uint64_t seed = 0;
    std::string status = "ok"; // ok, infeasible, error
    double objective_eur = 0.0;
    double wall_time_s = 0.0; // producing aggregate decisions; expansion and repair excluded
    int repairs = 0;          // slots whose executed kind differs from the proposed one
    int violations = 0;
    std::string message;
};

struct RunResult {
    Schedule schedule;
    RunRow row;
};

/// Kinds tried in order for a proposed kind: D -> D, I, C; I -> I, C, D; C -> C, I, D.
std::vector<AggregateAction> repair_ladder(AggregateAction proposed);

/// Steps the policy through every slot, repairing proposals that are
/// inadmissible or strand a target. Throws Infeasible when no kind works.
RunResult run_policy(PolicyKind policy, const Scenario& scenario, const RunOptions& options = {},
                     int scenario_id = 0);

struct AuditResult {
    std::vector<std::string> violations;
    double replayed_cost_eur = 0.0;
    bool ok() const { return violations.empty(); }
};

/// Replays the schedule from the initial state checking every constraint of
/// the scenario's level, the terminal targets, and the reported objective.
AuditResult audit_schedule(const Scenario& scenario, const Schedule& schedule);

struct BenchmarkConfig {
    std::vector<int> fleet_sizes;
    int n_scenarios = 0;
    std::vector<PolicyKind> policies;
    Level level = Level::L3;
    int n_slots = 48;
    std::uint64_t seed = 0;
    int jobs = 1;
    RunOptions run;
};

struct EvalReport {
    std::vector<RunRow> rows; // ordered by fleet size, scenario, policy
};

/// Full cross product; per-run failures become rows with a non-ok status.
EvalReport benchmark(const BenchmarkConfig& config);

struct GroupStats {
    int fleet_size = 0;
    PolicyKind policy = PolicyKind::Adp;
    int runs = 0;
    int ok = 0;
    double mean_objective_eur = 0.0;
    double std_objective_eur = 0.0; // sample standard deviation, 0 for one run
    double mean_wall_s = 0.0;
    long long repairs = 0;
    long long violations = 0;
};

/// Groups in order of first appearance; statistics over ok runs.
std::vector<GroupStats> summarize(const EvalReport& report);

/// Deterministic report files (no wall-clock values).
std::string report_csv(const EvalReport& report);
std::string summary_json(const EvalReport& report);
/// Wall-clock dependent files.
std::string plot_csv(const EvalReport& report);
std::string timings_csv(const EvalReport& report);

} // namespace fleetdp::rollout
