// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 fleetdp contributors

#include "support.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>

namespace fleetdp::testing {

Scenario small_scenario(Level level, int n_evs, int n_slots, std::uint64_t seed)
{
    auto sc = generate_scenario({level, n_evs, n_slots, seed});
    std::mt19937_64 rng(seed ^ 0x9e37u);
    const double r = sc.fleet.front().max_rate_kw * sc.slot_hours;
    int per_slot = n_evs;
    if (level >= Level::L2)
        per_slot = static_cast<int>(std::floor(*sc.level.site_charge_cap_kw * sc.slot_hours / r + 1e-9));
    int budget = per_slot * (n_slots / 2);
    auto draw = [&](int hi) { return std::uniform_int_distribution<int>(0, std::max(0, hi))(rng); };

    const int shared = draw(std::min(budget, n_slots / 2));
    for (auto& ev : sc.fleet) {
        if (level == Level::L0) {
            ev.initial_soc_kwh = 30.0;
            ev.target_soc_kwh = 30.0 + r * shared;
            continue;
        }
        const int steps = draw(std::min(budget, n_slots / 2));
        budget -= steps;
        ev.initial_soc_kwh = 20.0 + r * draw(8);
        ev.target_soc_kwh = ev.initial_soc_kwh + r * steps;
    }
    return sc;
}

namespace {

struct Rules {
    const Scenario& sc;
    std::vector<double> step;
    double charge_cap = INFINITY;
    double discharge_cap = INFINITY;
    bool reversal_cap = false;
    int per_hour = 4;

    explicit Rules(const Scenario& s) : sc(s)
    {
        for (const auto& ev : s.fleet)
            step.push_back(ev.max_rate_kw * s.slot_hours);
        if (s.level.level >= Level::L2) {
            charge_cap = *s.level.site_charge_cap_kw * s.slot_hours;
            discharge_cap = *s.level.site_discharge_cap_kw * s.slot_hours;
        }
        reversal_cap = s.level.level == Level::L3;
        per_hour = static_cast<int>(std::lround(1.0 / s.slot_hours));
    }

    double cost(int k, double net) const
    {
        return net > 0 ? sc.rho[k] * net : -sc.sigma[k] * net;
    }
};

struct EvTrack {
    double soc;
    int last_sign = 0;
    std::map<int, int> reversals; // window -> count
};

// Applies one slot; false if any rule breaks.
bool apply(const Rules& rules, int k, const std::vector<int>& steps, std::vector<EvTrack>& evs, double& net)
{
    double up = 0, down = 0;
    net = rules.sc.volumes[k];
    for (std::size_t j = 0; j < evs.size(); ++j) {
        const auto& spec = rules.sc.fleet[j];
        auto& ev = evs[j];
        const double delta = steps[j] * rules.step[j];
        ev.soc += delta;
        if (ev.soc < spec.min_soc_kwh - 1e-9 || ev.soc > spec.capacity_kwh + 1e-9)
            return false;
        if (steps[j] != 0) {
            if (ev.last_sign != 0 && ev.last_sign != steps[j] && ++ev.reversals[k / rules.per_hour] > 1 &&
                rules.reversal_cap)
                return false;
            ev.last_sign = steps[j];
        }
        (delta > 0 ? up : down) += std::abs(delta);
        net += delta;
    }
    return up <= rules.charge_cap + 1e-9 && down <= rules.discharge_cap + 1e-9;
}

bool meets_targets(const Rules& rules, const std::vector<EvTrack>& evs)
{
    for (std::size_t j = 0; j < evs.size(); ++j)
        if (evs[j].soc < rules.sc.fleet[j].target_soc_kwh - 1e-9)
            return false;
    return true;
}

std::vector<EvTrack> start(const Scenario& sc)
{
    std::vector<EvTrack> evs;
    for (const auto& ev : sc.fleet)
        evs.push_back({ev.initial_soc_kwh});
    return evs;
}

} // namespace

std::optional<double> brute_cost(const Scenario& scenario, const std::vector<std::vector<int>>& steps)
{
    const Rules rules(scenario);
    if (static_cast<int>(steps.size()) != scenario.n_slots)
        return std::nullopt;
    auto evs = start(scenario);
    double total = 0;
    for (int k = 0; k < scenario.n_slots; ++k) {
        double net = 0;
        if (steps[k].size() != evs.size() || !apply(rules, k, steps[k], evs, net))
            return std::nullopt;
        total += rules.cost(k, net);
    }
    if (!meets_targets(rules, evs))
        return std::nullopt;
    return total;
}

BruteForce brute_force(const Scenario& scenario)
{
    const Rules rules(scenario);
    const int n = scenario.n_slots;
    const std::size_t d = scenario.fleet.size();
    BruteForce out;
    std::vector<std::vector<int>> seq(n, std::vector<int>(d, -1));

    std::function<void(int, std::vector<EvTrack>, double)> walk = [&](int k, std::vector<EvTrack> evs,
                                                                      double so_far) {
        if (k == n) {
            ++out.sequences;
            if (meets_targets(rules, evs) && (!out.min_cost || so_far < *out.min_cost)) {
                out.min_cost = so_far;
                out.argmin = seq;
            }
            return;
        }
        std::vector<int> steps(d, -1);
        for (;;) {
            auto next = evs;
            double net = 0;
            if (apply(rules, k, steps, next, net)) {
                seq[k] = steps;
                walk(k + 1, std::move(next), so_far + rules.cost(k, net));
            }
            std::size_t j = 0;
            while (j < d && steps[j] == 1)
                steps[j++] = -1;
            if (j == d)
                break;
            ++steps[j];
        }
    };
    walk(0, start(scenario), 0.0);
    return out;
}

// ---- LP reader ----

namespace {

enum class Section { None, Objective, Constraints, Bounds, Binaries, Generals, End };

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::optional<Section> section_keyword(const std::string& trimmed)
{
    const auto l = lower(trimmed);
    if (l == "minimize" || l == "maximize" || l == "minimum" || l == "maximum" || l == "min" || l == "max")
        return Section::Objective;
    if (l == "subject to" || l == "such that" || l == "st" || l == "s.t.")
        return Section::Constraints;
    if (l == "bounds" || l == "bound")
        return Section::Bounds;
    if (l == "binaries" || l == "binary" || l == "bin")
        return Section::Binaries;
    if (l == "generals" || l == "general" || l == "gen")
        return Section::Generals;
    if (l == "end")
        return Section::End;
    return std::nullopt;
}

enum class Tok { Name, Number, Sign, Op, Colon };

struct Token {
    Tok kind;
    std::string text;
};

bool name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

bool lex(const std::string& line, std::vector<Token>& out, std::string& err)
{
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (name_start(c)) {
            std::size_t j = i;
            while (j < line.size() && name_char(line[j]))
                ++j;
            out.push_back({Tok::Name, line.substr(i, j - i)});
            i = j;
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t j = i;
            while (j < line.size() && (std::isdigit(static_cast<unsigned char>(line[j])) || line[j] == '.'))
                ++j;
            if (j < line.size() && (line[j] == 'e' || line[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < line.size() && (line[k] == '+' || line[k] == '-'))
                    ++k;
                if (k < line.size() && std::isdigit(static_cast<unsigned char>(line[k]))) {
                    while (k < line.size() && std::isdigit(static_cast<unsigned char>(line[k])))
                        ++k;
                    j = k;
                }
            }
            const auto num = line.substr(i, j - i);
            char* end = nullptr;
            std::strtod(num.c_str(), &end);
            if (end != num.c_str() + num.size()) {
                err = "malformed number '" + num + "'";
                return false;
            }
            out.push_back({Tok::Number, num});
            i = j;
        } else if (c == '+' || c == '-') {
            out.push_back({Tok::Sign, std::string(1, c)});
            ++i;
        } else if (c == '<' || c == '>' || c == '=') {
            std::size_t j = i + 1;
            if (j < line.size() && (line[j] == '=' || line[j] == '<' || line[j] == '>'))
                ++j;
            auto op = line.substr(i, j - i);
            if (op == "=<")
                op = "<=";
            if (op == "=>")
                op = ">=";
            if (op != "<=" && op != ">=" && op != "=" && op != "<" && op != ">") {
                err = "bad operator '" + op + "'";
                return false;
            }
            out.push_back({Tok::Op, op});
            i = j;
        } else if (c == ':') {
            out.push_back({Tok::Colon, ":"});
            ++i;
        } else {
            err = std::string("unexpected character '") + c + "'";
            return false;
        }
    }
    return true;
}

// Parses `[+-] [number] name` terms; returns the index after the expression.
std::size_t parse_expression(const std::vector<Token>& t, std::size_t i, std::set<std::string>& vars,
                             std::string& err)
{
    bool first = true;
    while (i < t.size() && t[i].kind != Tok::Op) {
        if (t[i].kind == Tok::Sign)
            ++i;
        else if (!first) {
            err = "missing sign between terms";
            return i;
        }
        if (i < t.size() && t[i].kind == Tok::Number)
            ++i;
        if (i >= t.size() || t[i].kind != Tok::Name) {
            err = "expected a variable name";
            return i;
        }
        vars.insert(t[i].text);
        ++i;
        first = false;
    }
    if (first)
        err = "empty expression";
    return i;
}

bool parse_signed_number(const std::vector<Token>& t, std::size_t& i)
{
    if (i < t.size() && t[i].kind == Tok::Sign)
        ++i;
    if (i < t.size() && t[i].kind == Tok::Number) {
        ++i;
        return true;
    }
    if (i < t.size() && t[i].kind == Tok::Name && (lower(t[i].text) == "inf" || lower(t[i].text) == "infinity")) {
        ++i;
        return true;
    }
    return false;
}

} // namespace

LpCheck check_lp(const std::string& text)
{
    LpCheck out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    Section section = Section::None;
    std::set<std::string> model_vars; // objective and constraints
    std::set<std::string> bound_vars;
    std::set<std::string> binary_vars;
    std::set<std::string> row_names;
    std::vector<Token> pending; // tokens of the statement being assembled
    int pending_line = 0;
    auto error = [&](int at, const std::string& what) {
        out.errors.push_back("line " + std::to_string(at) + ": " + what);
    };

    // A statement ends at its right-hand side; continuation lines start with
    // whitespace and carry more terms.
    auto flush_statement = [&]() {
        if (pending.empty())
            return;
        const auto& t = pending;
        std::size_t i = 0;
        std::string err;
        std::string label;
        if (t.size() >= 2 && t[0].kind == Tok::Name && t[1].kind == Tok::Colon) {
            label = t[0].text;
            i = 2;
        }
        if (section == Section::Objective) {
            i = parse_expression(t, i, model_vars, err);
            if (err.empty() && i != t.size())
                err = "objective contains a comparison";
        } else {
            if (label.empty())
                err = "constraint without a name";
            else if (!row_names.insert(label).second)
                err = "duplicate row name '" + label + "'";
            if (err.empty())
                i = parse_expression(t, i, model_vars, err);
            if (err.empty() && (i >= t.size() || t[i].kind != Tok::Op))
                err = "constraint without a comparison";
            if (err.empty()) {
                ++i;
                if (!parse_signed_number(t, i))
                    err = "right-hand side must be a number";
                else if (i != t.size())
                    err = "trailing tokens after right-hand side";
            }
            ++out.rows;
        }
        if (!err.empty())
            error(pending_line, err);
        pending.clear();
    };

    bool saw_objective = false;
    bool saw_end = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.size() > 510)
            error(lineno, "line longer than 510 characters");
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (!line.empty() && line[0] == '\\') {
            const auto colon = line.find(':');
            if (colon != std::string::npos) {
                auto key = line.substr(1, colon - 1);
                auto value = line.substr(colon + 1);
                auto strip = [](std::string s) {
                    s.erase(0, s.find_first_not_of(' '));
                    s.erase(s.find_last_not_of(' ') + 1);
                    return s;
                };
                out.header[strip(key)] = strip(value);
            }
            continue;
        }
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos)
            continue;
        const auto trimmed = line.substr(first, line.find_last_not_of(" \t") - first + 1);
        if (auto kw = section_keyword(trimmed)) {
            flush_statement();
            if (*kw <= section && section != Section::None)
                error(lineno, "section out of order");
            if (*kw == Section::Objective)
                saw_objective = true;
            if (*kw == Section::End)
                saw_end = true;
            section = *kw;
            continue;
        }
        if (section == Section::None || section == Section::End) {
            error(lineno, "content outside a section");
            continue;
        }
        std::vector<Token> toks;
        std::string err;
        if (!lex(trimmed, toks, err)) {
            error(lineno, err);
            continue;
        }
        if (section == Section::Objective || section == Section::Constraints) {
            // The objective runs to the next section; a constraint ends with
            // its right-hand side, wherever the line breaks fall.
            const bool labelled = toks.size() >= 2 && toks[0].kind == Tok::Name && toks[1].kind == Tok::Colon;
            if (section == Section::Constraints && labelled && !pending.empty()) {
                error(pending_line, "constraint without a right-hand side");
                pending.clear();
            }
            if (pending.empty())
                pending_line = lineno;
            pending.insert(pending.end(), toks.begin(), toks.end());
            if (section == Section::Constraints) {
                const auto op = std::find_if(pending.begin(), pending.end(),
                                             [](const Token& t) { return t.kind == Tok::Op; });
                if (op != pending.end() && pending.back().kind == Tok::Number)
                    flush_statement();
            }
            continue;
        }
        if (section == Section::Bounds) {
            // lo <= x <= hi | x >= lo | x <= hi | x = v | x free
            std::size_t i = 0;
            std::string name;
            bool good = false;
            if (toks.size() == 2 && toks[0].kind == Tok::Name && lower(toks[1].text) == "free") {
                name = toks[0].text;
                good = true;
            } else if (!toks.empty() && toks[0].kind == Tok::Name) {
                name = toks[0].text;
                i = 1;
                good = i < toks.size() && toks[i].kind == Tok::Op && (++i, parse_signed_number(toks, i)) &&
                       i == toks.size();
            } else if (parse_signed_number(toks, i) && i < toks.size() && toks[i].kind == Tok::Op &&
                       toks[i].text == "<=") {
                ++i;
                if (i < toks.size() && toks[i].kind == Tok::Name) {
                    name = toks[i].text;
                    ++i;
                    good = i < toks.size() && toks[i].kind == Tok::Op && toks[i].text == "<=" &&
                           (++i, parse_signed_number(toks, i)) && i == toks.size();
                }
            }
            if (!good)
                error(lineno, "malformed bound");
            else if (!bound_vars.insert(name).second)
                error(lineno, "second bound line for '" + name + "'");
            continue;
        }
        if (section == Section::Binaries || section == Section::Generals) {
            for (const auto& tok : toks) {
                if (tok.kind != Tok::Name)
                    error(lineno, "integer section lists a non-name");
                else if (section == Section::Binaries && !binary_vars.insert(tok.text).second)
                    error(lineno, "binary '" + tok.text + "' listed twice");
            }
        }
    }
    flush_statement();

    if (!saw_objective)
        error(lineno, "no objective section");
    if (!saw_end)
        error(lineno, "missing End");
    for (const auto& v : bound_vars)
        if (!model_vars.count(v))
            out.errors.push_back("bounded variable '" + v + "' never used");
    for (const auto& v : binary_vars)
        if (!model_vars.count(v))
            out.errors.push_back("binary '" + v + "' never used");
    for (const auto& v : binary_vars)
        if (bound_vars.count(v))
            out.errors.push_back("binary '" + v + "' also has a bound");
    out.variables = static_cast<long long>(model_vars.size());
    out.binaries = static_cast<long long>(binary_vars.size());
    out.bounded = static_cast<long long>(bound_vars.size());
    return out;
}

std::string temp_dir(const std::string& name)
{
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / ("fleetdp-test-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

} // namespace fleetdp::testing
