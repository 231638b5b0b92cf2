// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 fleetdp contributors

// Test-side helpers. The brute force and the LP checker deliberately share no
// code with the library: they re-derive dynamics, costs and syntax from the
// problem statement so that they can catch library mistakes.

#pragma once

#include "market.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fleetdp::testing {

/// Small feasible instance on the step lattice: targets are initial SoC plus a
/// whole number of steps that fits both the horizon and the site cap.
Scenario small_scenario(Level level, int n_evs, int n_slots, std::uint64_t seed);

struct BruteForce {
    std::optional<double> min_cost; // nullopt if no sequence is feasible
    std::vector<std::vector<int>> argmin; // per slot, per vehicle step in {-1, 0, 1}
    long long sequences = 0;
};

/// Plain enumeration of every step sequence with its own admissibility rules
/// (reversals counted per aligned window from the sign history). Costs are
/// summed front to back, so compare with a tolerance.
BruteForce brute_force(const Scenario& scenario);

/// Cost of a step sequence under the brute-force rules; nullopt if inadmissible.
std::optional<double> brute_cost(const Scenario& scenario, const std::vector<std::vector<int>>& steps);

struct LpCheck {
    std::vector<std::string> errors;
    std::map<std::string, std::string> header; // "\ key: value" comment lines
    long long variables = 0;   // distinct names referenced anywhere
    long long binaries = 0;    // names in the Binaries section
    long long rows = 0;        // named constraints
    long long bounded = 0;     // variables with a Bounds entry
    bool ok() const { return errors.empty(); }
};

/// Independent reader for the CPLEX LP subset: sections, names, linear
/// expressions, comparison operators, bounds and the binary list.
LpCheck check_lp(const std::string& text);

/// Fresh directory under the build tree's temporary area.
std::string temp_dir(const std::string& name);

} // namespace fleetdp::testing
