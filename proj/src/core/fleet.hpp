// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 fleetdp contributors

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fleetdp {

/// Absolute tolerance (kWh) for every energy comparison in the library.
inline constexpr double kEnergyTol = 1e-9;

enum class Direction : std::uint8_t { None, Charging, Discharging };

enum class Level : std::uint8_t { L0 = 0, L1 = 1, L2 = 2, L3 = 3 };

struct EvSpec {
    int id = 0;
    double capacity_kwh = 0.0;
    double min_soc_kwh = 0.0;
    double max_rate_kw = 0.0;
    double initial_soc_kwh = 0.0;
    double target_soc_kwh = 0.0;

    bool operator==(const EvSpec&) const = default;
};

struct EvState {
    double soc_kwh = 0.0;
    Direction last_direction = Direction::None;
    bool reversal_used_in_hour = false;

    bool operator==(const EvState&) const = default;
};

struct FleetState {
    int slot = 0;
    std::vector<EvState> evs;

    bool operator==(const FleetState&) const = default;
};

struct ConstraintLevel {
    Level level = Level::L0;
    std::optional<double> site_charge_cap_kw;
    std::optional<double> site_discharge_cap_kw;

    bool operator==(const ConstraintLevel&) const = default;
};

/// Static description of the controlled system: vehicles, constraint level and
/// slot timing. Everything the admissibility rules need besides the state.
struct FleetModel {
    std::vector<EvSpec> specs;
    ConstraintLevel level;
    double slot_hours = 0.25;
    int slots_per_hour = 4;

    std::size_t size() const { return specs.size(); }
    /// Energy moved by one full-rate slot for vehicle `j`.
    double step_kwh(std::size_t j) const { return specs[j].max_rate_kw * slot_hours; }
    bool site_caps_apply() const { return level.level >= Level::L2; }
    bool reversal_cap_applies() const { return level.level >= Level::L3; }
    double charge_cap_kwh() const;
    double discharge_cap_kwh() const;
};

/// Per-slot energy deltas, one per vehicle. Positive charges, negative discharges.
using PerEvAction = std::vector<double>;
/// Slot-major action matrix: `actions[k][j]` is the delta of vehicle j in slot k.
using ActionMatrix = std::vector<PerEvAction>;

enum class ViolationKind {
    Dimension,
    SocLower,
    SocUpper,
    Rate,
    SiteChargeCap,
    SiteDischargeCap,
    Reversal,
};

const char* to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    int ev_id = -1; // -1 for fleet-wide constraints
    std::string describe() const;
};

struct Admissibility {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    explicit operator bool() const { return ok(); }
};

/// Throws InvalidArgument when a spec or the level definition is malformed.
void validate(const FleetModel& model);

FleetState initial_state(const FleetModel& model);

/// Whether the vehicle's reversal flag still counts at `slot`. Flags reset at
/// every aligned hour boundary.
bool reversal_flag_active(const FleetModel& model, const EvState& ev, int slot);

/// True when a nonzero delta in direction `dir` would be a second reversal
/// within the current hour window.
bool reversal_blocked(const FleetModel& model, const EvState& ev, int slot, Direction dir);

Admissibility is_admissible(const FleetModel& model, const FleetState& state, std::span<const double> deltas);

/// Applies one slot. Throws ConstraintViolation naming the vehicle and rule
/// when the action is not admissible.
FleetState transition(const FleetModel& model, const FleetState& state, std::span<const double> deltas);

/// Throws InvalidArgument unless `state.slot == n_slots`.
bool terminal_ok(const FleetModel& model, const FleetState& state, int n_slots);

/// Highest state of charge vehicle `j` can still hold after `slots_remaining`
/// more slots, starting at absolute slot `next_slot`. Accounts for the lattice
/// of full-rate steps and, at Level 3, for slots in which a spent reversal
/// keeps the vehicle from charging.
double reachability_bound(const FleetModel& model, std::size_t j, const EvState& ev, int next_slot,
                          int slots_remaining);

/// Number of full-rate charging slots vehicle `j` still needs to reach its target.
int required_charge_slots(const FleetModel& model, std::size_t j, double soc_kwh);

} // namespace fleetdp
