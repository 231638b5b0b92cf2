// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 fleetdp contributors

#pragma once

#include "fleet.hpp"
#include "market.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace fleetdp {

/// Fleet-level decision: charge as many vehicles as possible, idle, or
/// discharge as many as possible. Class order C < I < D is used for every
/// tie-break.
enum class AggregateAction : std::uint8_t { C = 0, I = 1, D = 2 };

inline constexpr AggregateAction kAllAggregateActions[] = {AggregateAction::C, AggregateAction::I,
                                                           AggregateAction::D};

char to_char(AggregateAction a);
AggregateAction aggregate_from_char(char c);

struct Schedule {
    int start_slot = 0;
    ActionMatrix actions;                  // one row per slot from start_slot to N-1
    std::vector<AggregateAction> labels;   // empty for lattice-level solvers
    double objective_eur = 0.0;
    std::size_t states_explored = 0;
    bool truncated = false; // some layer hit the beam width
};

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

/// Cost-to-go table recorded by the layered solvers. Keys are lattice state keys
/// (see `state_key`); absent states are non-viable and have infinite cost.
struct DpTable {
    struct Entry {
        FleetState state;
        double cost_to_go = kInfiniteCost;
        int best_action = -1; // aggregate kind or lattice action code, -1 if none
    };
    int first_slot = 0;
    std::vector<std::unordered_map<std::string, Entry>> layers;

    double cost_to_go(const FleetModel& model, const FleetState& state) const;
};

/// Canonical key of a fleet state on the per-vehicle step lattice. Direction
/// and reversal bookkeeping are only part of the key at Level 3.
std::string state_key(const FleetModel& model, const FleetState& state);

/// Reconstructs a state from its initial-SoC step offsets (exact lattice SoC).
FleetState lattice_state(const FleetModel& model, const FleetState& approx);

/// Necessary condition for reaching the terminal set from `state`: every
/// vehicle can still reach its target and, under site caps, the total charge
/// still needed fits into the remaining slots, counting only unblocked
/// vehicles before the next hour boundary at Level 3.
bool viable(const FleetModel& model, const FleetState& state, int n_slots);

/// Total lattice charge (kWh) the fleet still needs to meet all targets.
double required_charge_kwh(const FleetModel& model, const FleetState& state);

/// Charge the site cap admits per slot in whole full-rate steps (the cap
/// itself for mixed rates, infinite below Level 2).
double charge_step_capacity_kwh(const FleetModel& model);

/// Vehicles that must charge in this slot: those whose own target would
/// become unreachable by idling and, under a site cap, the vehicles with the
/// largest remaining need until the fleet's total need fits the slots left.
std::vector<bool> forced_charge_mask(const FleetModel& model, const FleetState& state, int n_slots);

/// Expands a fleet-level decision into per-vehicle deltas with the
/// lowest-battery-first rule. Never fails; may return all idle.
PerEvAction expand_aggregate(AggregateAction kind, const FleetState& state, const FleetModel& model, int n_slots);
PerEvAction expand_aggregate(AggregateAction kind, const FleetState& state, const Scenario& scenario);

struct ExactOptions {
    int max_evs = 4;
    int max_slots = 12;
};

struct ApproxOptions {
    /// Most states kept per slot layer; 0 keeps every reachable state. Layers
    /// are trimmed by forward cost plus the value of stored energy at the mean
    /// remaining price, and the idle baseline trajectory is always kept.
    std::size_t beam_width = 256;
};

/// Per-slot kinds of the idle baseline: I, or the first of C, D that keeps
/// the fleet viable. Empty if the baseline strands the fleet.
std::vector<AggregateAction> idle_baseline_labels(const Scenario& scenario, const FleetState& start);

/// Backward DP over the full lattice {-r, 0, +r}^d. Throws Infeasible or SizeLimit.
Schedule solve_exact(const Scenario& scenario, const ExactOptions& options = {}, DpTable* table = nullptr);

/// Backward DP restricted to the three aggregate actions, from the scenario's
/// initial state or from `start` (slot > 0 for re-planning). Throws Infeasible.
Schedule solve_approx(const Scenario& scenario, const ApproxOptions& options = {}, DpTable* table = nullptr);
Schedule solve_approx(const Scenario& scenario, const FleetState& start, const ApproxOptions& options = {},
                      DpTable* table = nullptr);

/// Schedule CSV (`slot,ev_id,delta_kwh,aggregate_label`) and its JSON sidecar.
std::string schedule_to_csv(const Schedule& schedule, const Scenario& scenario);
std::string schedule_sidecar_json(const Schedule& schedule, const Scenario& scenario, const std::string& method);

} // namespace fleetdp
