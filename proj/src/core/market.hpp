// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 fleetdp contributors

#pragma once

#include "fleet.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fleetdp {

/// One operating horizon: market prices, committed volumes and the fleet.
struct Scenario {
    int n_slots = 0;
    double slot_hours = 0.25;
    std::vector<double> rho;     // shortfall purchase price, EUR/kWh
    std::vector<double> sigma;   // cost of excess energy, EUR/kWh
    std::vector<double> volumes; // committed shortfall, kWh (negative = surplus)
    std::vector<EvSpec> fleet;
    ConstraintLevel level;
    std::uint64_t seed = 0;
    std::string source = "synthetic";

    int slots_per_hour() const;
    FleetModel fleet_model() const;
    bool operator==(const Scenario&) const = default;
};

/// Throws InvalidArgument when a vector length, price sign or fleet
/// invariant does not hold.
void validate(const Scenario& scenario);

struct StageCost {
    double cost_eur = 0.0;
    double bought_kwh = 0.0;
    double excess_kwh = 0.0;
};

struct CostBreakdown {
    double total_eur = 0.0;
    std::vector<StageCost> per_slot;
};

StageCost stage_cost(int k, double action_sum_kwh, const Scenario& scenario);

/// Sum of the per-vehicle deltas in vehicle order; every cost path uses it so
/// that equal schedules produce bit-identical costs.
double action_sum(std::span<const double> deltas);

CostBreakdown total_cost(const ActionMatrix& actions, const Scenario& scenario);

enum class Granularity { Hourly, Quarter };

/// Reads `timestamp,price_eur_per_mwh` rows and returns EUR/kWh per slot.
/// Hourly rows are repeated `slots_per_hour` times.
std::vector<double> ingest_prices(const std::string& csv_path, Granularity granularity, int slots_per_hour = 4);

/// Replaces rho (and sigma = rho / 2) with the first n_slots entries of `prices`.
/// Negative prices are clamped to zero; returns how many were clamped.
int apply_prices(Scenario& scenario, const std::vector<double>& prices_eur_per_kwh, const std::string& source);

struct GeneratorParams {
    Level level = Level::L0;
    int n_evs = 1;
    int n_slots = 48;
    std::uint64_t seed = 0;
    double slot_hours = 0.25;
};

Scenario generate_scenario(const GeneratorParams& params);

/// Seed of batch scenario `index` at fleet size `fleet_size` derived from `base`.
std::uint64_t derive_seed(std::uint64_t base, int fleet_size, int index);

/// Sigma derived from rho when a scenario carries no explicit excess cost.
double default_sigma(double rho);

std::string scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const std::string& json_text);
void save_scenario(const Scenario& scenario, const std::string& path);
Scenario load_scenario(const std::string& path);

std::string roster_to_csv(const std::vector<EvSpec>& fleet);
std::vector<EvSpec> roster_from_csv(const std::string& path);

} // namespace fleetdp
