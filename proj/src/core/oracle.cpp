// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 fleetdp contributors

#include "oracle.hpp"

#include "error.hpp"
#include "text.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace fleetdp::oracle {

namespace {

double nested_sum(const std::vector<double>& stage_costs)
{
    double acc = 0.0;
    for (std::size_t k = stage_costs.size(); k-- > 0;)
        acc = stage_costs[k] + acc;
    return acc;
}

struct Search {
    const Scenario& scenario;
    const FleetModel model;
    const int d;
    const int n_actions;
    std::vector<PerEvAction> lattice; // all 3^d per-vehicle actions, lexicographic
    ActionMatrix path;
    std::vector<double> costs;
    EnumerationResult best;
    bool found = false;

    Search(const Scenario& s)
        : scenario(s), model(s.fleet_model()), d(static_cast<int>(s.fleet.size())), n_actions(ipow3(d))
    {
        for (int code = 0; code < n_actions; ++code) {
            PerEvAction a(static_cast<std::size_t>(d));
            int rest = code;
            for (int j = d - 1; j >= 0; --j) {
                a[static_cast<std::size_t>(j)] = (rest % 3 - 1) * model.step_kwh(static_cast<std::size_t>(j));
                rest /= 3;
            }
            lattice.push_back(std::move(a));
        }
        path.resize(static_cast<std::size_t>(s.n_slots));
        costs.resize(static_cast<std::size_t>(s.n_slots));
    }

    static int ipow3(int e)
    {
        int v = 1;
        for (int i = 0; i < e; ++i)
            v *= 3;
        return v;
    }

    // Stage costs are non-negative, so a prefix already above the incumbent
    // cannot win; the margin absorbs the different summation order.
    bool dominated(double prefix) const { return found && prefix > best.min_cost * (1.0 + 1e-9) + 1e-12; }

    // Charging at full rate in every remaining slot must still reach each target.
    bool reachable(const FleetState& state) const
    {
        const int remaining = scenario.n_slots - state.slot;
        for (std::size_t j = 0; j < state.evs.size(); ++j) {
            const double gap = scenario.fleet[j].target_soc_kwh - state.evs[j].soc_kwh;
            if (gap > remaining * model.step_kwh(j) + kEnergyTol)
                return false;
        }
        return true;
    }

    void descend(const FleetState& state, double prefix)
    {
        const int k = state.slot;
        if (k == scenario.n_slots) {
            ++best.sequences_evaluated;
            if (!terminal_ok(model, state, scenario.n_slots))
                return;
            const double total = nested_sum(costs);
            if (!found || total < best.min_cost) { // ties keep the lexicographically first
                found = true;
                best.min_cost = total;
                best.actions = path;
            }
            return;
        }
        for (const auto& action : lattice) {
            if (!is_admissible(model, state, action))
                continue;
            const double g = stage_cost(k, action_sum(action), scenario).cost_eur;
            if (dominated(prefix + g))
                continue;
            FleetState next = transition(model, state, action);
            if (!reachable(next))
                continue;
            path[static_cast<std::size_t>(k)] = action;
            costs[static_cast<std::size_t>(k)] = g;
            descend(next, prefix + g);
        }
    }
};

} // namespace

EnumerationResult enumerate(const Scenario& scenario, const EnumerateOptions& options)
{
    validate(scenario);
    const double sequences = std::pow(3.0, static_cast<double>(scenario.n_slots) * scenario.fleet.size());
    if (sequences > options.budget)
        fail(ErrorCode::BudgetExceeded, "3^(N*d) = " + text::format_double(sequences) + " exceeds the budget of " +
                                            text::format_double(options.budget));
    Search search(scenario);
    search.descend(initial_state(search.model), 0.0);
    if (!search.found)
        fail(ErrorCode::Infeasible, "no admissible action sequence reaches the terminal set");
    return std::move(search.best);
}

std::optional<double> evaluate_sequence(const Scenario& scenario, const ActionMatrix& actions)
{
    const FleetModel model = scenario.fleet_model();
    if (actions.size() != static_cast<std::size_t>(scenario.n_slots))
        return std::nullopt;
    FleetState st = initial_state(model);
    std::vector<double> costs;
    for (int k = 0; k < scenario.n_slots; ++k) {
        const auto& a = actions[static_cast<std::size_t>(k)];
        if (!is_admissible(model, st, a))
            return std::nullopt;
        costs.push_back(stage_cost(k, action_sum(a), scenario).cost_eur);
        st = transition(model, st, a);
    }
    if (!terminal_ok(model, st, scenario.n_slots))
        return std::nullopt;
    return nested_sum(costs);
}

// ---- LP export -----------------------------------------------------------------

namespace {

int window_count(const Scenario& s)
{
    // windows holding at least one switch index k in [1, N-1]
    const int sph = s.slots_per_hour();
    int count = 0;
    for (int w = 0; w * sph <= s.n_slots - 1; ++w) {
        const int lo = std::max(1, w * sph);
        const int hi = std::min(s.n_slots - 1, w * sph + sph - 1);
        if (lo <= hi)
            ++count;
    }
    return count;
}

std::string var(const char* prefix, std::size_t j, int k)
{
    return std::string(prefix) + "_" + std::to_string(j) + "_" + std::to_string(k);
}

std::string var(const char* prefix, int k) { return std::string(prefix) + "_" + std::to_string(k); }

/// Writes `name: t1 + t2 ...` wrapping long rows onto continuation lines.
class RowWriter {
public:
    explicit RowWriter(std::ostringstream& out) : out_(out) {}

    void begin(const std::string& name)
    {
        out_ << " " << name << ":";
        width_ = name.size() + 2;
        first_ = true;
    }

    void term(double coef, const std::string& name)
    {
        std::string t;
        if (coef < 0)
            t = first_ ? "-" : " -";
        else if (!first_)
            t = " +";
        const double mag = std::abs(coef);
        t += mag == 1.0 ? " " + name : " " + text::format_double(mag) + " " + name;
        if (width_ + t.size() > 78) {
            out_ << "\n   ";
            width_ = 3;
        }
        out_ << t;
        width_ += t.size();
        first_ = false;
    }

    void end(const char* sense, double rhs) { out_ << " " << sense << " " << text::format_double(rhs) << "\n"; }

private:
    std::ostringstream& out_;
    std::size_t width_ = 0;
    bool first_ = true;
};

} // namespace

LpCounts expected_lp_counts(const Scenario& s)
{
    const long long d = static_cast<long long>(s.fleet.size());
    const long long n = s.n_slots;
    const bool caps = s.level.level >= Level::L2;
    const bool l3 = s.level.level >= Level::L3;
    LpCounts c;
    c.continuous = 2 * d * n + d * n + 2 * n;
    c.binaries = 2 * d * n + (l3 ? d * (n - 1) : 0);
    c.rows = d * n + 3 * d * n + n + (caps ? 2 * n : 0) + (l3 ? 2 * d * (n - 1) + d * window_count(s) : 0);
    return c;
}

std::string milp_lp_text(const Scenario& s)
{
    validate(s);
    const FleetModel model = s.fleet_model();
    const std::size_t d = s.fleet.size();
    const int n = s.n_slots;
    const bool caps = model.site_caps_apply();
    const bool l3 = model.reversal_cap_applies();
    const int sph = s.slots_per_hour();
    const LpCounts counts = expected_lp_counts(s);

    std::ostringstream out;
    out << "\\ fleetdp MILP export (CPLEX LP format)\n";
    out << "\\ generator: " << kLpGenerator << "\n";
    out << "\\ scenario hash: fnv1a64 " << text::hex64(text::fnv1a64(scenario_to_json(s))) << "\n";
    out << "\\ level " << static_cast<int>(s.level.level) << ", d = " << d << " vehicles, N = " << n
        << " slots, slot_hours = " << text::format_double(s.slot_hours) << "\n";
    out << "\\ continuous: ch,dc 2dN + soc dN + buy,surplus 2N = " << counts.continuous << "\n";
    out << "\\ binaries: uc,ud 2dN" << (l3 ? " + sw d(N-1)" : "") << " = " << counts.binaries << "\n";
    out << "\\ rows: soc dN + link 3dN + balance N" << (caps ? " + site 2N" : "")
        << (l3 ? " + switch 2d(N-1) + window d*W" : "") << " = " << counts.rows << "\n";
    out << "\\ rates are continuous in [0, r]; the DP lattice only uses {-r, 0, +r}\n";

    out << "Minimize\n";
    {
        RowWriter w(out);
        w.begin("cost");
        for (int k = 0; k < n; ++k) {
            w.term(s.rho[static_cast<std::size_t>(k)], var("buy", k));
            w.term(s.sigma[static_cast<std::size_t>(k)], var("surplus", k));
        }
        out << "\n";
    }

    out << "Subject To\n";
    RowWriter w(out);
    for (std::size_t j = 0; j < d; ++j) {
        for (int k = 0; k < n; ++k) {
            w.begin(var("soc_bal", j, k));
            w.term(1.0, var("soc", j, k + 1));
            if (k > 0)
                w.term(-1.0, var("soc", j, k));
            w.term(-1.0, var("ch", j, k));
            w.term(1.0, var("dc", j, k));
            w.end("=", k == 0 ? s.fleet[j].initial_soc_kwh : 0.0);
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        const double r = model.step_kwh(j);
        for (int k = 0; k < n; ++k) {
            w.begin(var("link_ch", j, k));
            w.term(1.0, var("ch", j, k));
            w.term(-r, var("uc", j, k));
            w.end("<=", 0.0);
            w.begin(var("link_dc", j, k));
            w.term(1.0, var("dc", j, k));
            w.term(-r, var("ud", j, k));
            w.end("<=", 0.0);
            w.begin(var("one_dir", j, k));
            w.term(1.0, var("uc", j, k));
            w.term(1.0, var("ud", j, k));
            w.end("<=", 1.0);
        }
    }
    for (int k = 0; k < n; ++k) {
        w.begin(var("balance", k));
        w.term(1.0, var("buy", k));
        w.term(-1.0, var("surplus", k));
        for (std::size_t j = 0; j < d; ++j) {
            w.term(-1.0, var("ch", j, k));
            w.term(1.0, var("dc", j, k));
        }
        w.end("=", s.volumes[static_cast<std::size_t>(k)]);
    }
    if (caps) {
        for (int k = 0; k < n; ++k) {
            w.begin(var("site_ch", k));
            for (std::size_t j = 0; j < d; ++j)
                w.term(1.0, var("ch", j, k));
            w.end("<=", model.charge_cap_kwh());
            w.begin(var("site_dc", k));
            for (std::size_t j = 0; j < d; ++j)
                w.term(1.0, var("dc", j, k));
            w.end("<=", model.discharge_cap_kwh());
        }
    }
    if (l3) {
        for (std::size_t j = 0; j < d; ++j) {
            for (int k = 1; k < n; ++k) {
                w.begin(var("sw_cd", j, k));
                w.term(1.0, var("sw", j, k));
                w.term(-1.0, var("uc", j, k));
                w.term(-1.0, var("ud", j, k - 1));
                w.end(">=", -1.0);
                w.begin(var("sw_dc", j, k));
                w.term(1.0, var("sw", j, k));
                w.term(-1.0, var("ud", j, k));
                w.term(-1.0, var("uc", j, k - 1));
                w.end(">=", -1.0);
            }
            for (int h = 0; h * sph <= n - 1; ++h) {
                const int lo = std::max(1, h * sph);
                const int hi = std::min(n - 1, h * sph + sph - 1);
                if (lo > hi)
                    continue;
                w.begin(var("window", j, h));
                for (int k = lo; k <= hi; ++k)
                    w.term(1.0, var("sw", j, k));
                w.end("<=", 1.0);
            }
        }
    }

    out << "Bounds\n";
    for (std::size_t j = 0; j < d; ++j) {
        const auto& spec = s.fleet[j];
        const std::string r = text::format_double(model.step_kwh(j));
        for (int k = 0; k < n; ++k) {
            out << " 0 <= " << var("ch", j, k) << " <= " << r << "\n";
            out << " 0 <= " << var("dc", j, k) << " <= " << r << "\n";
        }
        for (int k = 1; k <= n; ++k) {
            const double lo = k == n ? spec.target_soc_kwh : spec.min_soc_kwh;
            out << " " << text::format_double(lo) << " <= " << var("soc", j, k)
                << " <= " << text::format_double(spec.capacity_kwh) << "\n";
        }
    }
    for (int k = 0; k < n; ++k) {
        out << " " << var("buy", k) << " >= 0\n";
        out << " " << var("surplus", k) << " >= 0\n";
    }

    out << "Binaries\n";
    for (std::size_t j = 0; j < d; ++j) {
        for (int k = 0; k < n; ++k)
            out << " " << var("uc", j, k) << " " << var("ud", j, k) << "\n";
    }
    if (l3) {
        for (std::size_t j = 0; j < d; ++j)
            for (int k = 1; k < n; ++k)
                out << " " << var("sw", j, k) << "\n";
    }
    out << "End\n";
    return out.str();
}

void emit_milp_lp(const Scenario& scenario, const std::string& out_path)
{
    text::write_file(out_path, milp_lp_text(scenario));
}

} // namespace fleetdp::oracle
