// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 fleetdp contributors

// Ground truth for small instances: exhaustive enumeration of the action
// lattice, and a MILP export in CPLEX LP syntax for external solvers.

#pragma once

#include "fleet.hpp"
#include "market.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace fleetdp::oracle {

struct EnumerateOptions {
    double budget = 1e7; // upper bound on 3^(N*d)
};

struct EnumerationResult {
    double min_cost = 0.0;
    ActionMatrix actions;
    std::uint64_t sequences_evaluated = 0; // complete sequences reached after pruning
};

/// Throws BudgetExceeded when 3^(N*d) exceeds the budget and Infeasible when
/// no admissible sequence ends in the terminal set.
EnumerationResult enumerate(const Scenario& scenario, const EnumerateOptions& options = {});

/// Cost of a full lattice sequence summed back to front (the association the
/// DP solvers use), or nullopt when a step is inadmissible or the final state
/// misses a target.
std::optional<double> evaluate_sequence(const Scenario& scenario, const ActionMatrix& actions);

inline constexpr const char* kLpGenerator = "fleetdp-milp 1";

struct LpCounts {
    long long continuous = 0;
    long long binaries = 0;
    long long rows = 0;
};

/// Closed-form variable/row counts of the exported model.
LpCounts expected_lp_counts(const Scenario& scenario);

std::string milp_lp_text(const Scenario& scenario);
void emit_milp_lp(const Scenario& scenario, const std::string& out_path);

} // namespace fleetdp::oracle
