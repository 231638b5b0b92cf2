// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 fleetdp contributors

#include "market.hpp"

#include "error.hpp"
#include "text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace fleetdp {

namespace {

constexpr int kScenarioFormatVersion = 1;
constexpr double kMinSigma = 1e-4;

constexpr const char* kRosterHeader = "id,capacity_kwh,min_soc_kwh,max_rate_kw,initial_soc_kwh,target_soc_kwh";

} // namespace

int Scenario::slots_per_hour() const { return std::max(1, static_cast<int>(std::lround(1.0 / slot_hours))); }

FleetModel Scenario::fleet_model() const
{
    FleetModel m;
    m.specs = fleet;
    m.level = level;
    m.slot_hours = slot_hours;
    m.slots_per_hour = slots_per_hour();
    return m;
}

void validate(const Scenario& s)
{
    if (s.n_slots < 1)
        fail(ErrorCode::InvalidArgument, "scenario needs at least one slot");
    const auto n = static_cast<std::size_t>(s.n_slots);
    if (s.rho.size() != n || s.sigma.size() != n || s.volumes.size() != n)
        fail(ErrorCode::InvalidArgument, "rho, sigma and volumes must all have n_slots entries");
    for (std::size_t k = 0; k < n; ++k) {
        if (!(s.rho[k] >= 0.0) || !std::isfinite(s.rho[k]))
            fail(ErrorCode::InvalidArgument, "rho[" + std::to_string(k) + "] must be finite and >= 0");
        if (!(s.sigma[k] > 0.0) || !std::isfinite(s.sigma[k]))
            fail(ErrorCode::InvalidArgument, "sigma[" + std::to_string(k) + "] must be finite and > 0");
        if (!std::isfinite(s.volumes[k]))
            fail(ErrorCode::InvalidArgument, "volumes[" + std::to_string(k) + "] must be finite");
    }
    validate(s.fleet_model());
}

double default_sigma(double rho) { return std::max(0.5 * rho, kMinSigma); }

StageCost stage_cost(int k, double action_sum_kwh, const Scenario& scenario)
{
    if (k < 0 || k >= scenario.n_slots)
        fail(ErrorCode::InvalidArgument, "slot " + std::to_string(k) + " outside horizon");
    const auto i = static_cast<std::size_t>(k);
    const double net = scenario.volumes[i] + action_sum_kwh;
    StageCost c;
    c.bought_kwh = std::max(0.0, net);
    c.excess_kwh = net < 0.0 ? -net : 0.0;
    c.cost_eur = scenario.rho[i] * c.bought_kwh + scenario.sigma[i] * c.excess_kwh;
    return c;
}

double action_sum(std::span<const double> deltas)
{
    double sum = 0.0;
    for (double d : deltas)
        sum += d;
    return sum;
}

CostBreakdown total_cost(const ActionMatrix& actions, const Scenario& scenario)
{
    if (actions.size() != static_cast<std::size_t>(scenario.n_slots))
        fail(ErrorCode::DimensionMismatch, "schedule has " + std::to_string(actions.size()) + " slots, scenario has " +
                                               std::to_string(scenario.n_slots));
    CostBreakdown out;
    out.per_slot.reserve(actions.size());
    for (std::size_t k = 0; k < actions.size(); ++k) {
        if (actions[k].size() != scenario.fleet.size())
            fail(ErrorCode::DimensionMismatch, "slot " + std::to_string(k) + " has wrong vehicle count");
        out.per_slot.push_back(stage_cost(static_cast<int>(k), action_sum(actions[k]), scenario));
        out.total_eur += out.per_slot.back().cost_eur;
    }
    return out;
}

namespace {

bool looks_like_iso8601(std::string_view ts)
{
    // YYYY-MM-DDTHH:MM with optional seconds/zone suffix
    if (ts.size() < 16)
        return false;
    for (int i : {0, 1, 2, 3, 5, 6, 8, 9, 11, 12, 14, 15})
        if (ts[i] < '0' || ts[i] > '9')
            return false;
    return ts[4] == '-' && ts[7] == '-' && (ts[10] == 'T' || ts[10] == ' ') && ts[13] == ':';
}

} // namespace

std::vector<double> ingest_prices(const std::string& csv_path, Granularity granularity, int slots_per_hour)
{
    const auto lines = text::read_lines(csv_path);
    std::size_t first = 0;
    while (first < lines.size() && text::trim(lines[first]).empty())
        ++first;
    if (first == lines.size())
        fail(ErrorCode::EmptyScenario, csv_path + ": empty price file");
    if (text::trim(lines[first]) != "timestamp,price_eur_per_mwh")
        fail(ErrorCode::Parse, csv_path + ":" + std::to_string(first + 1) +
                                   ": expected header 'timestamp,price_eur_per_mwh'");

    const int repeat = granularity == Granularity::Hourly ? slots_per_hour : 1;
    std::vector<double> prices;
    for (std::size_t i = first + 1; i < lines.size(); ++i) {
        const auto line = text::trim(lines[i]);
        if (line.empty())
            continue;
        const auto where = csv_path + ":" + std::to_string(i + 1) + ": ";
        const auto fields = text::split(line);
        if (fields.size() != 2)
            fail(ErrorCode::Parse, where + "expected 2 fields");
        if (!looks_like_iso8601(text::trim(fields[0])))
            fail(ErrorCode::Parse, where + "malformed timestamp");
        double eur_mwh = 0.0;
        if (!text::parse_double(fields[1], eur_mwh) || std::isnan(eur_mwh) || std::isinf(eur_mwh))
            fail(ErrorCode::Parse, where + "malformed price");
        for (int r = 0; r < repeat; ++r)
            prices.push_back(eur_mwh / 1000.0);
    }
    if (prices.empty())
        fail(ErrorCode::EmptyScenario, csv_path + ": no price rows");
    return prices;
}

int apply_prices(Scenario& scenario, const std::vector<double>& prices, const std::string& source)
{
    if (prices.size() < static_cast<std::size_t>(scenario.n_slots))
        fail(ErrorCode::InvalidArgument, "price trace has " + std::to_string(prices.size()) + " slots, need " +
                                             std::to_string(scenario.n_slots));
    int clamped = 0;
    for (int k = 0; k < scenario.n_slots; ++k) {
        double p = prices[static_cast<std::size_t>(k)];
        if (p < 0.0) {
            p = 0.0;
            ++clamped;
        }
        scenario.rho[static_cast<std::size_t>(k)] = text::round_significant(p);
        scenario.sigma[static_cast<std::size_t>(k)] = text::round_significant(default_sigma(p));
    }
    scenario.source = source;
    return clamped;
}

Scenario generate_scenario(const GeneratorParams& p)
{
    if (p.n_evs < 1 || p.n_slots < 1)
        fail(ErrorCode::InvalidArgument, "generator needs at least one vehicle and one slot");
    if (!(p.slot_hours > 0.0))
        fail(ErrorCode::InvalidArgument, "slot_hours must be positive");

    constexpr double capacity = 100.0;
    constexpr double min_soc = 10.0;
    constexpr double rate_kw = 10.0;
    const double step = rate_kw * p.slot_hours;
    const auto q = [](double v) { return text::round_significant(v); };

    std::mt19937_64 rng(p.seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    const double phi_price = phase(rng);
    const double phi_volume = phase(rng);

    Scenario s;
    s.n_slots = p.n_slots;
    s.slot_hours = p.slot_hours;
    s.seed = p.seed;
    s.level.level = p.level;

    std::uniform_real_distribution<double> initial_dist(10.0, 50.0);
    std::uniform_real_distribution<double> target_dist(70.0, 100.0);
    s.fleet.reserve(static_cast<std::size_t>(p.n_evs));
    for (int j = 0; j < p.n_evs; ++j) {
        EvSpec ev{j, capacity, min_soc, rate_kw, 30.0, 80.0};
        if (p.level != Level::L0) {
            ev.initial_soc_kwh = q(initial_dist(rng));
            const double target = target_dist(rng);
            // Highest lattice point under the capacity; targets above it are unreachable.
            const double top = ev.initial_soc_kwh + std::floor((capacity - ev.initial_soc_kwh) / step + 1e-9) * step;
            ev.target_soc_kwh = q(std::min(target, top - 1e-6));
        }
        s.fleet.push_back(ev);
    }
    if (p.level >= Level::L2) {
        const double cap = q(0.9 * p.n_evs * rate_kw);
        s.level.site_charge_cap_kw = cap;
        s.level.site_discharge_cap_kw = cap;
    }

    std::normal_distribution<double> price_noise(0.0, 0.005);
    std::normal_distribution<double> volume_noise(0.0, 0.2);
    const auto n = static_cast<std::size_t>(p.n_slots);
    s.rho.resize(n);
    s.sigma.resize(n);
    s.volumes.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / p.n_slots;
        const double rho = std::max(0.0, 0.06 + 0.03 * std::sin(angle + phi_price) + price_noise(rng));
        s.rho[k] = q(rho);
        s.sigma[k] = q(default_sigma(s.rho[k]));
        s.volumes[k] = q(p.n_evs * (0.8 * std::sin(angle + phi_volume) + volume_noise(rng)));
    }
    validate(s);
    return s;
}

std::uint64_t derive_seed(std::uint64_t base, int fleet_size, int index)
{
    // splitmix64 finalizer over a mixed (base, size, index) triple
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(fleet_size) * 1000003ULL +
                                                      static_cast<std::uint64_t>(index) + 1ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// ---- serialization ---------------------------------------------------------

std::string scenario_to_json(const Scenario& s)
{
    using nlohmann::json;
    json fleet = json::array();
    for (const auto& ev : s.fleet) {
        fleet.push_back({{"id", ev.id},
                         {"capacity_kwh", ev.capacity_kwh},
                         {"min_soc_kwh", ev.min_soc_kwh},
                         {"max_rate_kw", ev.max_rate_kw},
                         {"initial_soc_kwh", ev.initial_soc_kwh},
                         {"target_soc_kwh", ev.target_soc_kwh}});
    }
    json level = {{"level", static_cast<int>(s.level.level)}, {"site_charge_cap_kw", nullptr},
                  {"site_discharge_cap_kw", nullptr}};
    if (s.level.site_charge_cap_kw)
        level["site_charge_cap_kw"] = *s.level.site_charge_cap_kw;
    if (s.level.site_discharge_cap_kw)
        level["site_discharge_cap_kw"] = *s.level.site_discharge_cap_kw;

    json j = {{"format_version", kScenarioFormatVersion},
              {"n_slots", s.n_slots},
              {"slot_hours", s.slot_hours},
              {"rho", s.rho},
              {"sigma", s.sigma},
              {"volumes", s.volumes},
              {"fleet", fleet},
              {"level", level},
              {"seed", s.seed},
              {"source", s.source}};
    return j.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& json_text)
{
    using nlohmann::json;
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, std::string("scenario JSON: ") + e.what());
    }
    Scenario s;
    try {
        if (j.at("format_version").get<int>() != kScenarioFormatVersion)
            fail(ErrorCode::Parse, "unsupported scenario format_version");
        s.n_slots = j.at("n_slots").get<int>();
        s.slot_hours = j.at("slot_hours").get<double>();
        s.rho = j.at("rho").get<std::vector<double>>();
        s.sigma = j.at("sigma").get<std::vector<double>>();
        s.volumes = j.at("volumes").get<std::vector<double>>();
        s.seed = j.at("seed").get<std::uint64_t>();
        s.source = j.at("source").get<std::string>();
        for (const auto& ev : j.at("fleet")) {
            s.fleet.push_back({ev.at("id").get<int>(), ev.at("capacity_kwh").get<double>(),
                               ev.at("min_soc_kwh").get<double>(), ev.at("max_rate_kw").get<double>(),
                               ev.at("initial_soc_kwh").get<double>(), ev.at("target_soc_kwh").get<double>()});
        }
        const auto& lv = j.at("level");
        const int level = lv.at("level").get<int>();
        if (level < 0 || level > 3)
            fail(ErrorCode::Parse, "level must be 0..3");
        s.level.level = static_cast<Level>(level);
        if (!lv.at("site_charge_cap_kw").is_null())
            s.level.site_charge_cap_kw = lv.at("site_charge_cap_kw").get<double>();
        if (!lv.at("site_discharge_cap_kw").is_null())
            s.level.site_discharge_cap_kw = lv.at("site_discharge_cap_kw").get<double>();
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, std::string("scenario JSON: ") + e.what());
    }
    validate(s);
    return s;
}

void save_scenario(const Scenario& scenario, const std::string& path)
{
    text::write_file(path, scenario_to_json(scenario));
}

Scenario load_scenario(const std::string& path) { return scenario_from_json(text::read_file(path)); }

std::string roster_to_csv(const std::vector<EvSpec>& fleet)
{
    std::string out = std::string(kRosterHeader) + "\n";
    for (const auto& ev : fleet) {
        out += std::to_string(ev.id) + "," + text::format_double(ev.capacity_kwh) + "," +
               text::format_double(ev.min_soc_kwh) + "," + text::format_double(ev.max_rate_kw) + "," +
               text::format_double(ev.initial_soc_kwh) + "," + text::format_double(ev.target_soc_kwh) + "\n";
    }
    return out;
}

std::vector<EvSpec> roster_from_csv(const std::string& path)
{
    const auto lines = text::read_lines(path);
    if (lines.empty() || text::trim(lines[0]) != kRosterHeader)
        fail(ErrorCode::Parse, path + ":1: expected header '" + std::string(kRosterHeader) + "'");
    std::vector<EvSpec> fleet;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto line = text::trim(lines[i]);
        if (line.empty())
            continue;
        const auto where = path + ":" + std::to_string(i + 1) + ": ";
        const auto f = text::split(line);
        if (f.size() != 6)
            fail(ErrorCode::Parse, where + "expected 6 fields");
        long long id = 0;
        double v[5];
        if (!text::parse_int(f[0], id))
            fail(ErrorCode::Parse, where + "malformed id");
        for (int c = 0; c < 5; ++c)
            if (!text::parse_double(f[static_cast<std::size_t>(c) + 1], v[c]) || !std::isfinite(v[c]))
                fail(ErrorCode::Parse, where + "malformed number in column " + std::to_string(c + 2));
        fleet.push_back({static_cast<int>(id), v[0], v[1], v[2], v[3], v[4]});
    }
    return fleet;
}

} // namespace fleetdp
