// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 fleetdp contributors

#include "sched_dp.hpp"

#include "error.hpp"
#include "text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

namespace fleetdp {

char to_char(AggregateAction a)
{
    switch (a) {
    case AggregateAction::C: return 'C';
    case AggregateAction::I: return 'I';
    case AggregateAction::D: return 'D';
    }
    return '?';
}

AggregateAction aggregate_from_char(char c)
{
    switch (c) {
    case 'C': return AggregateAction::C;
    case 'I': return AggregateAction::I;
    case 'D': return AggregateAction::D;
    default: fail(ErrorCode::Parse, std::string("unknown aggregate label '") + c + "'");
    }
}

// ---- lattice keys ------------------------------------------------------------

namespace {

int lattice_steps(const FleetModel& model, std::size_t j, double soc)
{
    return static_cast<int>(std::lround((soc - model.specs[j].initial_soc_kwh) / model.step_kwh(j)));
}

std::size_t bytes_per_ev(const FleetModel& model) { return model.reversal_cap_applies() ? 3 : 2; }

FleetState decode_key(const FleetModel& model, const std::string& key, int slot)
{
    const std::size_t stride = bytes_per_ev(model);
    FleetState st;
    st.slot = slot;
    st.evs.resize(model.size());
    for (std::size_t j = 0; j < model.size(); ++j) {
        std::int16_t steps = 0;
        std::memcpy(&steps, key.data() + j * stride, sizeof steps);
        auto& ev = st.evs[j];
        ev.soc_kwh = model.specs[j].initial_soc_kwh + steps * model.step_kwh(j);
        if (stride == 3) {
            const auto meta = static_cast<unsigned char>(key[j * stride + 2]);
            ev.last_direction = static_cast<Direction>(meta & 0x3);
            ev.reversal_used_in_hour = (meta & 0x4) != 0;
        }
    }
    return st;
}

} // namespace

std::string state_key(const FleetModel& model, const FleetState& state)
{
    const std::size_t stride = bytes_per_ev(model);
    std::string key(model.size() * stride, '\0');
    for (std::size_t j = 0; j < model.size(); ++j) {
        const int steps = lattice_steps(model, j, state.evs[j].soc_kwh);
        if (steps < INT16_MIN || steps > INT16_MAX)
            fail(ErrorCode::SizeLimit, "state of charge outside the step lattice range");
        const auto s16 = static_cast<std::int16_t>(steps);
        std::memcpy(key.data() + j * stride, &s16, sizeof s16);
        if (stride == 3) {
            const auto& ev = state.evs[j];
            // the flag only matters while its hour window is still open
            const bool flag = reversal_flag_active(model, ev, state.slot);
            key[j * stride + 2] = static_cast<char>(static_cast<unsigned>(ev.last_direction) | (flag ? 0x4u : 0u));
        }
    }
    return key;
}

FleetState lattice_state(const FleetModel& model, const FleetState& approx)
{
    return decode_key(model, state_key(model, approx), approx.slot);
}

double DpTable::cost_to_go(const FleetModel& model, const FleetState& state) const
{
    const int layer = state.slot - first_slot;
    if (layer < 0 || layer >= static_cast<int>(layers.size()))
        return kInfiniteCost;
    const auto& m = layers[static_cast<std::size_t>(layer)];
    auto it = m.find(state_key(model, state));
    return it == m.end() ? kInfiniteCost : it->second.cost_to_go;
}

// ---- feasibility -------------------------------------------------------------

double required_charge_kwh(const FleetModel& model, const FleetState& state)
{
    double need = 0.0;
    for (std::size_t j = 0; j < model.size(); ++j)
        need += required_charge_slots(model, j, state.evs[j].soc_kwh) * model.step_kwh(j);
    return need;
}

bool viable(const FleetModel& model, const FleetState& state, int n_slots)
{
    const int remaining = n_slots - state.slot;
    for (std::size_t j = 0; j < model.size(); ++j) {
        if (reachability_bound(model, j, state.evs[j], state.slot, remaining) <
            model.specs[j].target_soc_kwh - kEnergyTol)
            return false;
    }
    if (!model.site_caps_apply())
        return true;
    const double cap = charge_step_capacity_kwh(model);
    const double need = required_charge_kwh(model, state);
    if (need > remaining * cap + kEnergyTol)
        return false;
    if (!model.reversal_cap_applies() || remaining == 0)
        return true;
    // Vehicles blocked by a spent reversal cannot charge before the next hour
    // boundary, so only the others can work off need until then.
    const int boundary = std::min(n_slots, (state.slot / model.slots_per_hour + 1) * model.slots_per_hour);
    const int before = boundary - state.slot;
    double usable_before = 0.0;
    for (std::size_t j = 0; j < model.size(); ++j) {
        const int n = required_charge_slots(model, j, state.evs[j].soc_kwh);
        if (n > 0 && !reversal_blocked(model, state.evs[j], state.slot, Direction::Charging))
            usable_before += std::min(n, before) * model.step_kwh(j);
    }
    return need - std::min(usable_before, before * cap) <= (n_slots - boundary) * cap + kEnergyTol;
}

double charge_step_capacity_kwh(const FleetModel& model)
{
    if (!model.site_caps_apply())
        return kInfiniteCost;
    const double cap = model.charge_cap_kwh();
    if (model.size() == 0)
        return cap;
    const double r = model.step_kwh(0);
    for (std::size_t j = 1; j < model.size(); ++j)
        if (model.step_kwh(j) != r)
            return cap;
    return std::floor(cap / r + kEnergyTol) * r;
}

namespace {

/// Vehicle state after one slot with `delta`, window reset included.
EvState step_ev(const FleetModel& model, EvState ev, int slot, double delta)
{
    if (slot % model.slots_per_hour == 0)
        ev.reversal_used_in_hour = false;
    if (std::abs(delta) > kEnergyTol) {
        const Direction dir = delta > 0.0 ? Direction::Charging : Direction::Discharging;
        if (ev.last_direction != Direction::None && ev.last_direction != dir)
            ev.reversal_used_in_hour = true;
        ev.last_direction = dir;
    }
    ev.soc_kwh += delta;
    return ev;
}

/// Applies an admissible action without re-checking it.
FleetState apply_unchecked(const FleetModel& model, const FleetState& state, std::span<const double> deltas)
{
    FleetState next;
    next.slot = state.slot + 1;
    next.evs.resize(state.evs.size());
    for (std::size_t j = 0; j < state.evs.size(); ++j)
        next.evs[j] = step_ev(model, state.evs[j], state.slot, deltas[j]);
    return next;
}

std::vector<std::size_t> by_id(const FleetModel& model)
{
    std::vector<std::size_t> order(model.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return model.specs[a].id < model.specs[b].id; });
    return order;
}

} // namespace

std::vector<bool> forced_charge_mask(const FleetModel& model, const FleetState& state, int n_slots)
{
    const int k = state.slot;
    const int remaining_after = n_slots - k - 1;
    std::vector<bool> forced(model.size(), false);
    for (std::size_t j = 0; j < model.size(); ++j) {
        const auto& ev = state.evs[j];
        const double target = model.specs[j].target_soc_kwh;
        if (ev.soc_kwh >= target - kEnergyTol)
            continue;
        const EvState idle = step_ev(model, ev, k, 0.0);
        forced[j] = reachability_bound(model, j, idle, k + 1, remaining_after) < target - kEnergyTol;
    }
    if (!model.site_caps_apply() || remaining_after < 0)
        return forced;

    // Under a site cap the fleet also falls behind when the total remaining
    // need outgrows the slots left; the neediest vehicles absorb the excess.
    const double budget = remaining_after * charge_step_capacity_kwh(model);
    double need_after = 0.0;
    std::vector<std::size_t> extra;
    for (std::size_t j = 0; j < model.size(); ++j) {
        const auto& ev = state.evs[j];
        const double r = model.step_kwh(j);
        need_after += required_charge_slots(model, j, ev.soc_kwh + (forced[j] ? r : 0.0)) * r;
        if (!forced[j] && required_charge_slots(model, j, ev.soc_kwh) > 0 &&
            ev.soc_kwh + r <= model.specs[j].capacity_kwh + kEnergyTol &&
            !reversal_blocked(model, ev, k, Direction::Charging))
            extra.push_back(j);
    }
    if (need_after <= budget + kEnergyTol)
        return forced;
    std::stable_sort(extra.begin(), extra.end(), [&](std::size_t a, std::size_t b) {
        const int na = required_charge_slots(model, a, state.evs[a].soc_kwh);
        const int nb = required_charge_slots(model, b, state.evs[b].soc_kwh);
        if (na != nb)
            return na > nb;
        return model.specs[a].id < model.specs[b].id;
    });
    for (std::size_t j : extra) {
        if (need_after <= budget + kEnergyTol)
            break;
        const double r = model.step_kwh(j);
        const double soc = state.evs[j].soc_kwh;
        need_after -= (required_charge_slots(model, j, soc) - required_charge_slots(model, j, soc + r)) * r;
        forced[j] = true;
    }
    return forced;
}

PerEvAction expand_aggregate(AggregateAction kind, const FleetState& state, const FleetModel& model, int n_slots)
{
    const int k = state.slot;
    const std::size_t d = model.size();
    const int remaining_after = n_slots - k - 1;
    PerEvAction deltas(d, 0.0);
    double charge_budget = model.charge_cap_kwh();
    double discharge_budget = model.discharge_cap_kwh();

    auto can_charge = [&](std::size_t j) {
        const auto& ev = state.evs[j];
        const double r = model.step_kwh(j);
        return ev.soc_kwh + r <= model.specs[j].capacity_kwh + kEnergyTol &&
               !reversal_blocked(model, ev, k, Direction::Charging) && charge_budget >= r - kEnergyTol;
    };

    const auto ids = by_id(model);
    const auto forced = forced_charge_mask(model, state, n_slots);
    for (std::size_t j : ids) {
        if (forced[j] && can_charge(j)) {
            deltas[j] = model.step_kwh(j);
            charge_budget -= deltas[j];
        }
    }

    if (kind == AggregateAction::C) {
        auto order = ids;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return state.evs[a].soc_kwh < state.evs[b].soc_kwh;
        });
        for (std::size_t j : order) {
            if (deltas[j] == 0.0 && can_charge(j)) {
                deltas[j] = model.step_kwh(j);
                charge_budget -= deltas[j];
            }
        }
    } else if (kind == AggregateAction::D) {
        auto order = ids;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return state.evs[a].soc_kwh > state.evs[b].soc_kwh;
        });
        const bool joint = model.site_caps_apply();
        double need = 0.0;
        if (joint) {
            for (std::size_t j = 0; j < d; ++j)
                need += required_charge_slots(model, j, state.evs[j].soc_kwh + deltas[j]) * model.step_kwh(j);
        }
        const double need_budget = remaining_after * charge_step_capacity_kwh(model);
        for (std::size_t j : order) {
            if (forced[j] || deltas[j] != 0.0)
                continue;
            const auto& ev = state.evs[j];
            const auto& spec = model.specs[j];
            const double r = model.step_kwh(j);
            if (ev.soc_kwh - r < spec.min_soc_kwh - kEnergyTol)
                continue;
            if (reversal_blocked(model, ev, k, Direction::Discharging) || discharge_budget < r - kEnergyTol)
                continue;
            const EvState after = step_ev(model, ev, k, -r);
            if (reachability_bound(model, j, after, k + 1, remaining_after) < spec.target_soc_kwh - kEnergyTol)
                continue;
            if (joint) {
                const double added = (required_charge_slots(model, j, ev.soc_kwh - r) -
                                      required_charge_slots(model, j, ev.soc_kwh)) * r;
                if (need + added > need_budget + kEnergyTol)
                    continue;
                need += added;
            }
            deltas[j] = -r;
            discharge_budget -= r;
        }
    }
    return deltas;
}

PerEvAction expand_aggregate(AggregateAction kind, const FleetState& state, const Scenario& scenario)
{
    return expand_aggregate(kind, state, scenario.fleet_model(), scenario.n_slots);
}

// ---- layered DP engine ---------------------------------------------------------

namespace {

struct CandidateAction {
    int code;
    PerEvAction deltas;
};

struct Edge {
    int code;
    int child; // -1 once the child was trimmed from its layer
    double cost;
};

struct Layer {
    std::unordered_map<std::string, int> index;
    std::vector<const std::string*> keys;
    std::vector<double> cost_so_far;
    std::vector<std::size_t> edge_begin; // size = states + 1 once expanded
    std::vector<Edge> edges;
    std::vector<double> cost_to_go;
    std::vector<int> best_edge;

    int insert(const std::string& key, double reach_cost)
    {
        auto [it, added] = index.try_emplace(key, static_cast<int>(keys.size()));
        if (added) {
            keys.push_back(&it->first);
            cost_so_far.push_back(reach_cost);
        } else if (reach_cost < cost_so_far[static_cast<std::size_t>(it->second)]) {
            cost_so_far[static_cast<std::size_t>(it->second)] = reach_cost;
        }
        return it->second;
    }
};

struct Beam {
    std::size_t width = 0;                // 0 = unlimited
    std::vector<std::string> pinned;      // key kept at each layer, may be shorter than the horizon
    std::vector<double> energy_value;     // EUR/kWh of stored energy per layer
};

/// Keeps the `beam.width` best states of `layer` (plus the pinned one) and
/// returns the old-to-new index map (-1 = dropped).
std::vector<int> trim_layer(Layer& layer, const FleetModel& model, const Beam& beam, std::size_t t, int slot)
{
    const std::size_t n = layer.keys.size();
    std::vector<double> score(n);
    for (std::size_t s = 0; s < n; ++s) {
        const FleetState st = decode_key(model, *layer.keys[s], slot);
        double stored = 0.0;
        for (const auto& ev : st.evs)
            stored += ev.soc_kwh;
        score[s] = layer.cost_so_far[s] - beam.energy_value[t] * stored;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (score[a] != score[b])
            return score[a] < score[b];
        return *layer.keys[a] < *layer.keys[b];
    });

    std::vector<bool> keep(n, false);
    for (std::size_t i = 0; i < beam.width && i < n; ++i)
        keep[order[i]] = true;
    if (t < beam.pinned.size()) {
        auto it = layer.index.find(beam.pinned[t]);
        if (it != layer.index.end())
            keep[static_cast<std::size_t>(it->second)] = true;
    }

    Layer trimmed;
    std::vector<int> remap(n, -1);
    for (std::size_t s = 0; s < n; ++s) { // original insertion order keeps results deterministic
        if (keep[s])
            remap[s] = trimmed.insert(*layer.keys[s], layer.cost_so_far[s]);
    }
    layer = std::move(trimmed);
    return remap;
}

/// Backward DP over the states reachable from `start`. `generate` lists the
/// candidate actions of a state; inadmissible and non-viable successors are
/// dropped before their cost is evaluated.
template <class Generate>
Schedule solve_layered(const Scenario& scenario, const FleetModel& model, const FleetState& start, Generate generate,
                       const Beam& beam, bool aggregate_labels, DpTable* table)
{
    const int n = scenario.n_slots;
    const int k0 = start.slot;
    if (k0 < 0 || k0 > n)
        fail(ErrorCode::InvalidArgument, "start slot outside horizon");
    const auto horizon = static_cast<std::size_t>(n - k0);

    Schedule out;
    out.start_slot = k0;

    std::vector<Layer> layers(horizon + 1);
    const FleetState root = lattice_state(model, start);
    if (viable(model, root, n))
        layers[0].insert(state_key(model, root), 0.0);

    std::vector<CandidateAction> candidates;
    for (std::size_t t = 0; t < horizon; ++t) {
        const int k = k0 + static_cast<int>(t);
        auto& cur = layers[t];
        auto& next = layers[t + 1];
        cur.edge_begin.reserve(cur.keys.size() + 1);
        for (std::size_t s = 0; s < cur.keys.size(); ++s) {
            cur.edge_begin.push_back(cur.edges.size());
            const FleetState st = decode_key(model, *cur.keys[s], k);
            candidates.clear();
            generate(st, candidates);
            for (const auto& cand : candidates) {
                if (!is_admissible(model, st, cand.deltas))
                    continue;
                const FleetState nxt = apply_unchecked(model, st, cand.deltas);
                if (!viable(model, nxt, n))
                    continue;
                const double cost = stage_cost(k, action_sum(cand.deltas), scenario).cost_eur;
                const int child = next.insert(state_key(model, nxt), cur.cost_so_far[s] + cost);
                cur.edges.push_back({cand.code, child, cost});
            }
        }
        cur.edge_begin.push_back(cur.edges.size());
        out.states_explored += next.keys.size();

        if (beam.width != 0 && next.keys.size() > beam.width) {
            out.truncated = true;
            const auto remap = trim_layer(next, model, beam, t + 1, k + 1);
            for (auto& e : cur.edges)
                e.child = remap[static_cast<std::size_t>(e.child)];
        }
    }
    out.states_explored += layers[0].keys.size();

    auto& last = layers[horizon];
    last.cost_to_go.assign(last.keys.size(), kInfiniteCost);
    last.best_edge.assign(last.keys.size(), -1);
    for (std::size_t s = 0; s < last.keys.size(); ++s) {
        if (terminal_ok(model, decode_key(model, *last.keys[s], n), n))
            last.cost_to_go[s] = 0.0;
    }
    for (std::size_t t = horizon; t-- > 0;) {
        auto& cur = layers[t];
        const auto& next = layers[t + 1];
        cur.cost_to_go.assign(cur.keys.size(), kInfiniteCost);
        cur.best_edge.assign(cur.keys.size(), -1);
        for (std::size_t s = 0; s < cur.keys.size(); ++s) {
            for (std::size_t e = cur.edge_begin[s]; e < cur.edge_begin[s + 1]; ++e) {
                const auto& edge = cur.edges[e];
                if (edge.child < 0)
                    continue;
                const double c = edge.cost + next.cost_to_go[static_cast<std::size_t>(edge.child)];
                if (c < cur.cost_to_go[s]) {
                    cur.cost_to_go[s] = c;
                    cur.best_edge[s] = static_cast<int>(e);
                }
            }
        }
    }

    if (table) {
        table->first_slot = k0;
        table->layers.assign(horizon + 1, {});
        for (std::size_t t = 0; t <= horizon; ++t) {
            const auto& layer = layers[t];
            for (std::size_t s = 0; s < layer.keys.size(); ++s) {
                const int best = layer.best_edge[s];
                table->layers[t].emplace(
                    *layer.keys[s],
                    DpTable::Entry{decode_key(model, *layer.keys[s], k0 + static_cast<int>(t)), layer.cost_to_go[s],
                                   best < 0 ? -1 : layer.edges[static_cast<std::size_t>(best)].code});
            }
        }
    }

    if (layers[0].keys.empty() || layers[0].cost_to_go[0] == kInfiniteCost)
        fail(ErrorCode::Infeasible, "problem is infeasible: no admissible path reaches the terminal set");

    out.objective_eur = layers[0].cost_to_go[0];
    std::size_t s = 0;
    for (std::size_t t = 0; t < horizon; ++t) {
        const auto& layer = layers[t];
        const auto& edge = layer.edges[static_cast<std::size_t>(layer.best_edge[s])];
        const FleetState st = decode_key(model, *layer.keys[s], k0 + static_cast<int>(t));
        candidates.clear();
        generate(st, candidates);
        auto it = std::find_if(candidates.begin(), candidates.end(),
                               [&](const CandidateAction& c) { return c.code == edge.code; });
        if (it == candidates.end())
            fail(ErrorCode::Internal, "schedule reconstruction lost an action");
        out.actions.push_back(it->deltas);
        if (aggregate_labels)
            out.labels.push_back(static_cast<AggregateAction>(edge.code));
        s = static_cast<std::size_t>(edge.child);
    }
    return out;
}

void aggregate_candidates(const FleetModel& model, int n_slots, const FleetState& st,
                          std::vector<CandidateAction>& out)
{
    for (AggregateAction kind : kAllAggregateActions) {
        PerEvAction deltas = expand_aggregate(kind, st, model, n_slots);
        const bool duplicate =
            std::any_of(out.begin(), out.end(), [&](const CandidateAction& c) { return c.deltas == deltas; });
        if (!duplicate)
            out.push_back({static_cast<int>(kind), std::move(deltas)});
    }
}

} // namespace

std::vector<AggregateAction> idle_baseline_labels(const Scenario& scenario, const FleetState& start)
{
    const FleetModel model = scenario.fleet_model();
    std::vector<AggregateAction> labels;
    FleetState st = lattice_state(model, start);
    for (int k = start.slot; k < scenario.n_slots; ++k) {
        bool moved = false;
        for (AggregateAction kind : {AggregateAction::I, AggregateAction::C, AggregateAction::D}) {
            const auto deltas = expand_aggregate(kind, st, model, scenario.n_slots);
            if (!is_admissible(model, st, deltas))
                continue;
            FleetState nxt = apply_unchecked(model, st, deltas);
            if (!viable(model, nxt, scenario.n_slots))
                continue;
            labels.push_back(kind);
            st = std::move(nxt);
            moved = true;
            break;
        }
        if (!moved)
            return {};
    }
    return labels;
}

Schedule solve_exact(const Scenario& scenario, const ExactOptions& options, DpTable* table)
{
    validate(scenario);
    const FleetModel model = scenario.fleet_model();
    const int d = static_cast<int>(model.size());
    if (d > options.max_evs || scenario.n_slots > options.max_slots)
        fail(ErrorCode::SizeLimit, "exact DP limited to " + std::to_string(options.max_evs) + " vehicles and " +
                                       std::to_string(options.max_slots) + " slots");

    int n_actions = 1;
    for (int j = 0; j < d; ++j)
        n_actions *= 3;

    // Lexicographic order, vehicle 0 most significant, per-vehicle -r < 0 < +r.
    auto generate = [&](const FleetState&, std::vector<CandidateAction>& out) {
        for (int code = 0; code < n_actions; ++code) {
            PerEvAction deltas(static_cast<std::size_t>(d));
            int rest = code;
            for (int j = d - 1; j >= 0; --j) {
                const int digit = rest % 3;
                rest /= 3;
                deltas[static_cast<std::size_t>(j)] = (digit - 1) * model.step_kwh(static_cast<std::size_t>(j));
            }
            out.push_back({code, std::move(deltas)});
        }
    };
    return solve_layered(scenario, model, initial_state(model), generate, Beam{}, false, table);
}

Schedule solve_approx(const Scenario& scenario, const ApproxOptions& options, DpTable* table)
{
    validate(scenario);
    return solve_approx(scenario, initial_state(scenario.fleet_model()), options, table);
}

Schedule solve_approx(const Scenario& scenario, const FleetState& start, const ApproxOptions& options,
                      DpTable* table)
{
    const FleetModel model = scenario.fleet_model();
    if (start.evs.size() != model.size())
        fail(ErrorCode::DimensionMismatch, "start state does not match the fleet");

    Beam beam;
    beam.width = options.beam_width;
    if (beam.width != 0) {
        const int horizon = scenario.n_slots - start.slot;
        beam.energy_value.assign(static_cast<std::size_t>(horizon) + 1, 0.0);
        double tail = 0.0;
        for (int t = horizon - 1; t >= 0; --t) {
            tail += scenario.rho[static_cast<std::size_t>(start.slot + t)];
            beam.energy_value[static_cast<std::size_t>(t)] = tail / (horizon - t);
        }
        // pin the idle baseline trajectory so trimming never loses it
        FleetState st = lattice_state(model, start);
        beam.pinned.push_back(state_key(model, st));
        for (AggregateAction kind : idle_baseline_labels(scenario, start)) {
            st = transition(model, st, expand_aggregate(kind, st, model, scenario.n_slots));
            beam.pinned.push_back(state_key(model, st));
        }
    }

    auto generate = [&](const FleetState& st, std::vector<CandidateAction>& out) {
        aggregate_candidates(model, scenario.n_slots, st, out);
    };
    return solve_layered(scenario, model, start, generate, beam, true, table);
}

// ---- schedule files ----------------------------------------------------------

std::string schedule_to_csv(const Schedule& schedule, const Scenario& scenario)
{
    std::string out = "slot,ev_id,delta_kwh,aggregate_label\n";
    for (std::size_t t = 0; t < schedule.actions.size(); ++t) {
        const int slot = schedule.start_slot + static_cast<int>(t);
        const std::string label = schedule.labels.empty() ? "" : std::string(1, to_char(schedule.labels[t]));
        for (std::size_t j = 0; j < schedule.actions[t].size(); ++j) {
            out += std::to_string(slot) + "," + std::to_string(scenario.fleet[j].id) + "," +
                   text::format_double(schedule.actions[t][j]) + "," + label + "\n";
        }
    }
    return out;
}

std::string schedule_sidecar_json(const Schedule& schedule, const Scenario& scenario, const std::string& method)
{
    using nlohmann::json;
    json per_slot = json::array();
    double replayed = 0.0;
    for (std::size_t t = 0; t < schedule.actions.size(); ++t) {
        const int slot = schedule.start_slot + static_cast<int>(t);
        const auto c = stage_cost(slot, action_sum(schedule.actions[t]), scenario);
        replayed += c.cost_eur;
        json row = {{"slot", slot}, {"bought_kwh", c.bought_kwh}, {"excess_kwh", c.excess_kwh},
                    {"cost_eur", c.cost_eur}};
        if (!schedule.labels.empty())
            row["aggregate_label"] = std::string(1, to_char(schedule.labels[t]));
        per_slot.push_back(row);
    }
    json j = {{"method", method},
              {"start_slot", schedule.start_slot},
              {"n_slots", scenario.n_slots},
              {"n_evs", scenario.fleet.size()},
              {"objective_eur", schedule.objective_eur},
              {"replayed_cost_eur", replayed},
              {"states_explored", schedule.states_explored},
              {"per_slot", per_slot}};
    return j.dump(2) + "\n";
}

} // namespace fleetdp
