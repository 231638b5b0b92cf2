// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 fleetdp contributors

#include "fleet.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace fleetdp {

const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConstraintViolation: return "ConstraintViolation";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::SizeLimit: return "SizeLimit";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Io: return "Io";
    case ErrorCode::EmptyScenario: return "EmptyScenario";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::ModelVersion: return "ModelVersion";
    case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

const char* to_string(ViolationKind kind)
{
    switch (kind) {
    case ViolationKind::Dimension: return "Dimension";
    case ViolationKind::SocLower: return "SocLower";
    case ViolationKind::SocUpper: return "SocUpper";
    case ViolationKind::Rate: return "Rate";
    case ViolationKind::SiteChargeCap: return "SiteChargeCap";
    case ViolationKind::SiteDischargeCap: return "SiteDischargeCap";
    case ViolationKind::Reversal: return "Reversal";
    }
    return "Unknown";
}

std::string Violation::describe() const
{
    std::string s = to_string(kind);
    if (ev_id >= 0)
        s += " (ev " + std::to_string(ev_id) + ")";
    else
        s += " (site)";
    return s;
}

double FleetModel::charge_cap_kwh() const
{
    if (!site_caps_apply() || !level.site_charge_cap_kw)
        return std::numeric_limits<double>::infinity();
    return *level.site_charge_cap_kw * slot_hours;
}

double FleetModel::discharge_cap_kwh() const
{
    if (!site_caps_apply() || !level.site_discharge_cap_kw)
        return std::numeric_limits<double>::infinity();
    return *level.site_discharge_cap_kw * slot_hours;
}

void validate(const FleetModel& model)
{
    auto bad = [](const std::string& msg) { fail(ErrorCode::InvalidArgument, msg); };
    if (!(model.slot_hours > 0.0))
        bad("slot_hours must be positive");
    if (model.slots_per_hour < 1)
        bad("slots_per_hour must be at least 1");

    std::set<int> ids;
    for (const auto& s : model.specs) {
        const std::string who = "ev " + std::to_string(s.id) + ": ";
        if (!ids.insert(s.id).second)
            bad(who + "duplicate id");
        if (!(s.min_soc_kwh >= 0.0 && s.min_soc_kwh <= s.initial_soc_kwh && s.initial_soc_kwh <= s.capacity_kwh))
            bad(who + "requires 0 <= min_soc <= initial_soc <= capacity");
        if (!(s.min_soc_kwh <= s.target_soc_kwh && s.target_soc_kwh <= s.capacity_kwh))
            bad(who + "requires min_soc <= target_soc <= capacity");
        if (!(s.max_rate_kw > 0.0))
            bad(who + "max_rate_kw must be positive");
    }

    const auto& lv = model.level;
    if (lv.level == Level::L0 && !model.specs.empty()) {
        const auto& a = model.specs.front();
        for (const auto& b : model.specs) {
            if (a.capacity_kwh != b.capacity_kwh || a.min_soc_kwh != b.min_soc_kwh || a.max_rate_kw != b.max_rate_kw ||
                a.initial_soc_kwh != b.initial_soc_kwh || a.target_soc_kwh != b.target_soc_kwh)
                bad("level 0 requires identical vehicles");
        }
    }
    if (lv.site_charge_cap_kw && !(*lv.site_charge_cap_kw > 0.0))
        bad("site_charge_cap_kw must be positive");
    if (lv.site_discharge_cap_kw && !(*lv.site_discharge_cap_kw > 0.0))
        bad("site_discharge_cap_kw must be positive");
    if (lv.level >= Level::L2 && (!lv.site_charge_cap_kw || !lv.site_discharge_cap_kw))
        bad("levels 2 and 3 require both site caps");
}

FleetState initial_state(const FleetModel& model)
{
    FleetState st;
    st.evs.reserve(model.size());
    for (const auto& s : model.specs)
        st.evs.push_back({s.initial_soc_kwh, Direction::None, false});
    return st;
}

bool reversal_flag_active(const FleetModel& model, const EvState& ev, int slot)
{
    return ev.reversal_used_in_hour && slot % model.slots_per_hour != 0;
}

bool reversal_blocked(const FleetModel& model, const EvState& ev, int slot, Direction dir)
{
    return model.reversal_cap_applies() && ev.last_direction != Direction::None && ev.last_direction != dir &&
           reversal_flag_active(model, ev, slot);
}

Admissibility is_admissible(const FleetModel& model, const FleetState& state, std::span<const double> deltas)
{
    Admissibility out;
    if (deltas.size() != model.size() || state.evs.size() != model.size()) {
        out.violations.push_back({ViolationKind::Dimension, -1});
        return out;
    }

    double charged = 0.0;
    double discharged = 0.0;
    for (std::size_t j = 0; j < model.size(); ++j) {
        const auto& spec = model.specs[j];
        const auto& ev = state.evs[j];
        const double delta = deltas[j];
        if (!std::isfinite(delta) || std::abs(delta) > model.step_kwh(j) + kEnergyTol) {
            out.violations.push_back({ViolationKind::Rate, spec.id});
            continue;
        }
        const double soc = ev.soc_kwh + delta;
        if (soc < spec.min_soc_kwh - kEnergyTol)
            out.violations.push_back({ViolationKind::SocLower, spec.id});
        if (soc > spec.capacity_kwh + kEnergyTol)
            out.violations.push_back({ViolationKind::SocUpper, spec.id});
        if (std::abs(delta) > kEnergyTol) {
            const Direction dir = delta > 0.0 ? Direction::Charging : Direction::Discharging;
            if (reversal_blocked(model, ev, state.slot, dir))
                out.violations.push_back({ViolationKind::Reversal, spec.id});
        }
        if (delta > 0.0)
            charged += delta;
        else
            discharged -= delta;
    }
    if (charged > model.charge_cap_kwh() + kEnergyTol)
        out.violations.push_back({ViolationKind::SiteChargeCap, -1});
    if (discharged > model.discharge_cap_kwh() + kEnergyTol)
        out.violations.push_back({ViolationKind::SiteDischargeCap, -1});
    return out;
}

FleetState transition(const FleetModel& model, const FleetState& state, std::span<const double> deltas)
{
    const auto check = is_admissible(model, state, deltas);
    if (!check.ok())
        fail(ErrorCode::ConstraintViolation,
             "inadmissible action at slot " + std::to_string(state.slot) + ": " + check.violations.front().describe());

    FleetState next;
    next.slot = state.slot + 1;
    next.evs = state.evs;
    const bool window_start = state.slot % model.slots_per_hour == 0;
    for (std::size_t j = 0; j < model.size(); ++j) {
        auto& ev = next.evs[j];
        if (window_start)
            ev.reversal_used_in_hour = false;
        const double delta = deltas[j];
        if (std::abs(delta) > kEnergyTol) {
            const Direction dir = delta > 0.0 ? Direction::Charging : Direction::Discharging;
            if (ev.last_direction != Direction::None && ev.last_direction != dir)
                ev.reversal_used_in_hour = true;
            ev.last_direction = dir;
        }
        ev.soc_kwh += delta;
    }
    return next;
}

bool terminal_ok(const FleetModel& model, const FleetState& state, int n_slots)
{
    if (state.slot != n_slots)
        fail(ErrorCode::InvalidArgument,
             "terminal check at slot " + std::to_string(state.slot) + ", horizon is " + std::to_string(n_slots));
    for (std::size_t j = 0; j < model.size(); ++j) {
        if (state.evs[j].soc_kwh < model.specs[j].target_soc_kwh - kEnergyTol)
            return false;
    }
    return true;
}

double reachability_bound(const FleetModel& model, std::size_t j, const EvState& ev, int next_slot,
                          int slots_remaining)
{
    const double step = model.step_kwh(j);
    int usable = std::max(0, slots_remaining);
    if (model.reversal_cap_applies() && ev.last_direction == Direction::Discharging &&
        reversal_flag_active(model, ev, next_slot)) {
        const int blocked = model.slots_per_hour - next_slot % model.slots_per_hour;
        usable = std::max(0, usable - blocked);
    }
    const double headroom = model.specs[j].capacity_kwh - ev.soc_kwh;
    const int headroom_steps = headroom <= 0.0 ? 0 : static_cast<int>(std::floor(headroom / step + 1e-9));
    return ev.soc_kwh + std::min(usable, headroom_steps) * step;
}

int required_charge_slots(const FleetModel& model, std::size_t j, double soc_kwh)
{
    const double need = model.specs[j].target_soc_kwh - soc_kwh;
    if (need <= kEnergyTol)
        return 0;
    return static_cast<int>(std::ceil(need / model.step_kwh(j) - 1e-9));
}

} // namespace fleetdp
