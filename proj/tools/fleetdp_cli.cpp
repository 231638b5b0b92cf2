// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 fleetdp contributors

// fleetdp command-line tool. Talks to the library only through its C API.

#include "fleetdp/fleetdp.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

enum Exit { kOk = 0, kInternal = 1, kUsage = 2, kInfeasible = 3, kData = 4 };

/// Carries a C API failure out of a command.
struct ApiError {
    fleetdp_status status;
    std::string message;
};

void check(fleetdp_status s)
{
    if (s != FLEETDP_OK)
        throw ApiError{s, fleetdp_last_error()};
}

int exit_code(fleetdp_status s)
{
    switch (s) {
    case FLEETDP_OK: return kOk;
    case FLEETDP_ERR_INFEASIBLE: return kInfeasible;
    case FLEETDP_ERR_INVALID_ARGUMENT: return kUsage;
    case FLEETDP_ERR_INTERNAL: return kInternal;
    default: return kData;
    }
}

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using ScenarioPtr = std::unique_ptr<fleetdp_scenario, Deleter<fleetdp_scenario, fleetdp_scenario_free>>;
using SchedulePtr = std::unique_ptr<fleetdp_schedule, Deleter<fleetdp_schedule, fleetdp_schedule_free>>;
using DatasetPtr = std::unique_ptr<fleetdp_dataset, Deleter<fleetdp_dataset, fleetdp_dataset_free>>;
using ModelPtr = std::unique_ptr<fleetdp_model, Deleter<fleetdp_model, fleetdp_model_free>>;
using ReportPtr = std::unique_ptr<fleetdp_report, Deleter<fleetdp_report, fleetdp_report_free>>;

std::string take_string(char* s)
{
    std::string out = s ? s : "";
    fleetdp_string_free(s);
    return out;
}

std::uint64_t fnv1a64_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// `<out>.manifest.json`: tool version, resolved options, and content hashes
/// of inputs and deterministic outputs. Wall-clock outputs are listed unhashed.
void write_manifest(const std::string& manifest_path, const std::string& command, const CLI::App& sub,
                    const std::vector<std::string>& inputs, const std::vector<std::string>& outputs,
                    const std::vector<std::string>& timing_outputs = {})
{
    using nlohmann::json;
    json options = json::object();
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->get_name() == "--help" || opt->get_lnames().empty())
            continue;
        if (opt->count() == 0 && opt->get_default_str().empty())
            continue;
        const auto& res = opt->results();
        options[opt->get_lnames().front()] = res.empty() ? opt->get_default_str() : CLI::detail::join(res, ",");
    }
    json in = json::array(), out = json::array();
    for (const auto& p : inputs)
        in.push_back({{"path", p}, {"fnv1a64", hex(fnv1a64_file(p))}});
    for (const auto& p : outputs)
        out.push_back({{"path", p}, {"fnv1a64", hex(fnv1a64_file(p))}});
    for (const auto& p : timing_outputs)
        out.push_back({{"path", p}, {"wall_clock", true}});
    json m = {{"tool", "fleetdp"}, {"version", fleetdp_version()}, {"command", command},
              {"options", options}, {"inputs", in},         {"outputs", out}};
    std::ofstream f(manifest_path, std::ios::binary);
    if (!f)
        throw ApiError{FLEETDP_ERR_IO, "cannot write " + manifest_path};
    f << m.dump(2) << "\n";
}

std::string sidecar_path(const std::string& csv)
{
    std::filesystem::path p(csv);
    if (p.extension() == ".csv")
        return p.replace_extension(".json").string();
    return csv + ".json";
}

/// Inserts `--key value` pairs from a JSON config for every option that was
/// not given on the command line. Flags therefore override the file.
std::vector<std::string> expand_config(const std::vector<std::string>& args)
{
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    if (path.empty())
        return args;
    std::ifstream f(path);
    if (!f)
        throw CLI::ValidationError("--config", "cannot read config file " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw CLI::ValidationError("--config", std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object())
        throw CLI::ValidationError("--config", "config file must hold a JSON object");

    auto given = [&](const std::string& key) {
        for (const auto& a : args)
            if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0)
                return true;
        return false;
    };
    std::vector<std::string> out = args;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        if (key == "config" || given(key))
            continue;
        const auto& v = it.value();
        if (v.is_boolean()) {
            if (v.get<bool>())
                out.push_back("--" + key);
        } else if (v.is_array()) {
            std::string joined;
            for (const auto& e : v)
                joined += (joined.empty() ? "" : ",") + (e.is_string() ? e.get<std::string>() : e.dump());
            out.push_back("--" + key);
            out.push_back(joined);
        } else {
            out.push_back("--" + key);
            out.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        }
    }
    return out;
}

struct Options {
    // shared
    int level = 3;
    int evs = 0;
    int slots = 48;
    std::uint64_t seed = 0;
    std::string out;
    std::size_t beam = 256;
    // scenario gen
    std::string prices, granularity = "hourly", roster;
    // data gen
    int scenarios = 0;
    // train
    std::string data;
    std::size_t train_size = 1000;
    double c = 1.0, tol = 1e-3;
    int max_passes = 1000;
    // solve / evaluate / export
    std::string scenario, method = "approx", model, policy = "svc";
    int replan_every = 0;
    // compare
    std::vector<int> fleet_sizes;
    std::vector<std::string> policies;
    int jobs = 1;
    std::string out_dir = ".";
};

CLI::Option* add_seed(CLI::App* sub, Options& o)
{
    return sub->add_option("--seed", o.seed, "Random seed (default from FLEETDP_SEED, else 0)")
        ->envname("FLEETDP_SEED")
        ->capture_default_str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Electric-vehicle fleet charging scheduler: scenarios, solvers, classifier training and "
                 "benchmarks."};
    app.set_version_flag("--version", std::string("fleetdp ") + fleetdp_version());
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON file supplying any flag; command-line flags win");
    Options o;

    // scenario gen
    auto* scenario_cmd = app.add_subcommand("scenario", "Scenario files")->require_subcommand(1);
    auto* sgen = scenario_cmd->add_subcommand("gen", "Generate a synthetic scenario");
    sgen->add_option("--level", o.level, "Constraint level 0..3")->required()->check(CLI::Range(0, 3));
    sgen->add_option("--evs", o.evs, "Fleet size")->required()->check(CLI::PositiveNumber);
    sgen->add_option("--slots", o.slots, "Horizon length in slots")->capture_default_str()->check(CLI::PositiveNumber);
    add_seed(sgen, o);
    sgen->add_option("--prices", o.prices, "Price CSV (timestamp,price_eur_per_mwh) replacing generated prices");
    sgen->add_option("--granularity", o.granularity, "Price row granularity")
        ->check(CLI::IsMember({"hourly", "quarter"}))
        ->capture_default_str();
    sgen->add_option("--roster", o.roster, "Fleet roster CSV replacing the generated fleet");
    sgen->add_option("--out", o.out, "Output scenario JSON")->required();

    // data gen
    auto* data_cmd = app.add_subcommand("data", "Training data")->require_subcommand(1);
    auto* dgen = data_cmd->add_subcommand("gen", "Label states with the approximate DP");
    dgen->add_option("--scenarios", o.scenarios, "Number of scenarios")->required()->check(CLI::PositiveNumber);
    dgen->add_option("--level", o.level, "Constraint level 0..3")->capture_default_str()->check(CLI::Range(0, 3));
    dgen->add_option("--evs", o.evs, "Fleet size")->required()->check(CLI::PositiveNumber);
    dgen->add_option("--slots", o.slots, "Horizon length in slots")->capture_default_str()->check(CLI::PositiveNumber);
    dgen->add_option("--beam", o.beam, "States kept per slot, 0 = all")->capture_default_str();
    add_seed(dgen, o);
    dgen->add_option("--out", o.out, "Output dataset CSV")->required();

    // train
    auto* train = app.add_subcommand("train", "Train the classifier policy");
    train->add_option("--data", o.data, "Dataset CSV")->required();
    train->add_option("--out", o.out, "Output model JSON")->required();
    train->add_option("--train-size", o.train_size, "Rows sampled uniformly for training, 0 = all")
        ->capture_default_str();
    train->add_option("--c", o.c, "Soft-margin penalty")->capture_default_str()->check(CLI::PositiveNumber);
    train->add_option("--tol", o.tol, "Optimality tolerance")->capture_default_str()->check(CLI::PositiveNumber);
    train->add_option("--max-passes", o.max_passes, "Iteration cap in passes over the training set")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    add_seed(train, o);

    // solve
    auto* solve = app.add_subcommand("solve", "Solve one scenario");
    solve->add_option("--scenario", o.scenario, "Scenario JSON")->required();
    solve->add_option("--method", o.method, "exact, approx, or a policy (adp, svc, idle, greedy)")
        ->check(CLI::IsMember({"exact", "approx", "adp", "svc", "idle", "greedy"}))
        ->capture_default_str();
    solve->add_option("--model", o.model, "Model JSON for the svc policy");
    solve->add_option("--beam", o.beam, "States kept per slot, 0 = all")->capture_default_str();
    solve->add_option("--replan-every", o.replan_every, "Re-solve the ADP plan every R slots, 0 = never")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    solve->add_option("--out", o.out, "Output schedule CSV (JSON sidecar written next to it)")->required();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Run a policy on one scenario");
    evaluate->add_option("--model", o.model, "Model JSON");
    evaluate->add_option("--scenario", o.scenario, "Scenario JSON")->required();
    evaluate->add_option("--policy", o.policy, "adp, svc, idle or greedy")
        ->check(CLI::IsMember({"adp", "svc", "idle", "greedy"}))
        ->capture_default_str();
    evaluate->add_option("--replan-every", o.replan_every, "Re-solve the ADP plan every R slots, 0 = never")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    evaluate->add_option("--beam", o.beam, "States kept per slot, 0 = all")->capture_default_str();
    evaluate->add_option("--out", o.out, "Optional schedule CSV");

    // compare
    auto* compare = app.add_subcommand("compare", "Benchmark policies across fleet sizes");
    compare->add_option("--fleet-sizes", o.fleet_sizes, "Comma-separated fleet sizes")
        ->required()
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    compare->add_option("--scenarios", o.scenarios, "Scenarios per fleet size")->required()->check(CLI::PositiveNumber);
    compare->add_option("--policies", o.policies, "Comma-separated policies")
        ->required()
        ->delimiter(',')
        ->check(CLI::IsMember({"adp", "svc", "idle", "greedy"}));
    compare->add_option("--model", o.model, "Model JSON, required for svc");
    compare->add_option("--level", o.level, "Constraint level 0..3")->capture_default_str()->check(CLI::Range(0, 3));
    compare->add_option("--slots", o.slots, "Horizon length in slots")->capture_default_str()->check(CLI::PositiveNumber);
    compare->add_option("--jobs", o.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    compare->add_option("--beam", o.beam, "States kept per slot, 0 = all")->capture_default_str();
    compare->add_option("--replan-every", o.replan_every, "Re-solve the ADP plan every R slots, 0 = never")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    add_seed(compare, o);
    compare->add_option("--out-dir", o.out_dir, "Directory for report.csv, summary.json, plot.csv, timings.csv")
        ->capture_default_str();

    // export milp
    auto* export_cmd = app.add_subcommand("export", "Model exports")->require_subcommand(1);
    auto* milp = export_cmd->add_subcommand("milp", "Write the scenario as a MILP in LP format");
    milp->add_option("--scenario", o.scenario, "Scenario JSON")->required();
    milp->add_option("--out", o.out, "Output LP file")->required();

    // --config is accepted after any subcommand
    for (CLI::App* sub : {scenario_cmd, sgen, data_cmd, dgen, train, solve, evaluate, compare, export_cmd, milp})
        sub->fallthrough();

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = expand_config(args);
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*sgen) {
            fleetdp_scenario* raw = nullptr;
            check(fleetdp_scenario_generate(o.level, o.evs, o.slots, o.seed, &raw));
            ScenarioPtr sc(raw);
            std::vector<std::string> inputs;
            if (!o.roster.empty()) {
                check(fleetdp_scenario_apply_roster(sc.get(), o.roster.c_str()));
                inputs.push_back(o.roster);
            }
            if (!o.prices.empty()) {
                int clamped = 0;
                check(fleetdp_scenario_apply_prices(sc.get(), o.prices.c_str(), o.granularity == "hourly" ? 0 : 1,
                                                    &clamped));
                if (clamped > 0)
                    std::cerr << "warning: " << clamped << " negative prices clamped to 0\n";
                inputs.push_back(o.prices);
            }
            check(fleetdp_scenario_save(sc.get(), o.out.c_str()));
            write_manifest(o.out + ".manifest.json", "scenario gen", *sgen, inputs, {o.out});
            std::cout << "wrote " << o.out << "\n";
        } else if (*dgen) {
            fleetdp_dataset* raw = nullptr;
            check(fleetdp_dataset_generate(o.scenarios, o.level, o.evs, o.slots, o.seed, o.beam, &raw));
            DatasetPtr ds(raw);
            check(fleetdp_dataset_save(ds.get(), o.out.c_str()));
            char* log_raw = nullptr;
            check(fleetdp_dataset_skipped(ds.get(), &log_raw));
            const std::string log = take_string(log_raw);
            std::vector<std::string> outputs{o.out};
            if (!log.empty()) {
                const std::string log_path = o.out + ".skipped.log";
                std::ofstream(log_path, std::ios::binary) << log;
                outputs.push_back(log_path);
                std::cerr << "warning: some scenarios were skipped, see " << log_path << "\n";
            }
            std::size_t rows = 0;
            check(fleetdp_dataset_size(ds.get(), &rows));
            write_manifest(o.out + ".manifest.json", "data gen", *dgen, {}, outputs);
            std::cout << "wrote " << rows << " samples to " << o.out << "\n";
        } else if (*train) {
            fleetdp_dataset* raw = nullptr;
            check(fleetdp_dataset_load(o.data.c_str(), &raw));
            DatasetPtr ds(raw);
            fleetdp_train_config cfg = fleetdp_train_config_default();
            cfg.train_size = o.train_size;
            cfg.seed = o.seed;
            cfg.c = o.c;
            cfg.tol = o.tol;
            cfg.max_passes = o.max_passes;
            fleetdp_model* mraw = nullptr;
            double heldout = -1.0;
            check(fleetdp_train(ds.get(), &cfg, &mraw, &heldout));
            ModelPtr model(mraw);
            check(fleetdp_model_save(model.get(), o.out.c_str()));
            int selected[5];
            double train_acc = 0.0;
            int converged = 0;
            check(fleetdp_model_info(model.get(), selected, &train_acc, &converged));
            write_manifest(o.out + ".manifest.json", "train", *train, {o.data}, {o.out});
            std::cout << "selected features:";
            for (int f : selected)
                std::cout << " f" << f + 1;
            std::cout << "\ntraining accuracy: " << train_acc << "\n";
            if (heldout >= 0.0)
                std::cout << "held-out accuracy: " << heldout << "\n";
            else
                std::cout << "held-out accuracy: n/a (no rows held out)\n";
            if (!converged)
                std::cerr << "warning: optimizer stopped at the iteration cap before reaching the tolerance\n";
            std::cout << "wrote " << o.out << "\n";
        } else if (*solve || *evaluate) {
            const bool is_solve = static_cast<bool>(*solve);
            fleetdp_scenario* sraw = nullptr;
            check(fleetdp_scenario_load(o.scenario.c_str(), &sraw));
            ScenarioPtr sc(sraw);
            ModelPtr model;
            std::vector<std::string> inputs{o.scenario};
            if (!o.model.empty()) {
                fleetdp_model* mraw = nullptr;
                check(fleetdp_model_load(o.model.c_str(), &mraw));
                model.reset(mraw);
                inputs.push_back(o.model);
            }
            const std::string method = is_solve ? o.method : o.policy;
            if (method == "svc" && !model)
                throw ApiError{FLEETDP_ERR_INVALID_ARGUMENT, "the svc policy needs --model"};
            fleetdp_schedule* raw = nullptr;
            int repairs = 0;
            if (method == "exact")
                check(fleetdp_solve_exact(sc.get(), &raw));
            else if (method == "approx")
                check(fleetdp_solve_approx(sc.get(), o.beam, &raw));
            else
                check(fleetdp_run_policy(sc.get(), method.c_str(), model.get(), o.replan_every, o.beam, &raw,
                                         &repairs));
            SchedulePtr schedule(raw);
            double objective = 0.0;
            int violations = 0;
            check(fleetdp_schedule_objective(schedule.get(), &objective));
            check(fleetdp_schedule_audit(schedule.get(), sc.get(), &violations));
            std::ostringstream obj;
            obj.precision(17);
            obj << objective;
            std::cout << "method: " << method << "\nobjective_eur: " << obj.str() << "\nrepairs: " << repairs
                      << "\nviolations: " << violations << "\n";
            if (!o.out.empty()) {
                const std::string side = sidecar_path(o.out);
                check(fleetdp_schedule_save_csv(schedule.get(), sc.get(), o.out.c_str()));
                check(fleetdp_schedule_save_sidecar(schedule.get(), sc.get(), method.c_str(), side.c_str()));
                write_manifest(o.out + ".manifest.json", is_solve ? "solve" : "evaluate", is_solve ? *solve : *evaluate,
                               inputs, {o.out, side});
                std::cout << "wrote " << o.out << " and " << side << "\n";
            }
            if (violations > 0) {
                std::cerr << "error: schedule failed its audit: " << fleetdp_last_error() << "\n";
                return kInternal;
            }
        } else if (*compare) {
            ModelPtr model;
            std::vector<std::string> inputs;
            if (!o.model.empty()) {
                fleetdp_model* mraw = nullptr;
                check(fleetdp_model_load(o.model.c_str(), &mraw));
                model.reset(mraw);
                inputs.push_back(o.model);
            }
            std::vector<const char*> policies;
            for (const auto& p : o.policies) {
                if (p == "svc" && !model)
                    throw ApiError{FLEETDP_ERR_INVALID_ARGUMENT, "the svc policy needs --model"};
                policies.push_back(p.c_str());
            }
            fleetdp_benchmark_config cfg = fleetdp_benchmark_config_default();
            cfg.fleet_sizes = o.fleet_sizes.data();
            cfg.n_fleet_sizes = o.fleet_sizes.size();
            cfg.n_scenarios = o.scenarios;
            cfg.policies = policies.data();
            cfg.n_policies = policies.size();
            cfg.level = o.level;
            cfg.n_slots = o.slots;
            cfg.seed = o.seed;
            cfg.jobs = o.jobs;
            cfg.replan_every = o.replan_every;
            cfg.beam_width = o.beam;
            cfg.model = model.get();
            fleetdp_report* raw = nullptr;
            check(fleetdp_benchmark(&cfg, &raw));
            ReportPtr report(raw);
            std::filesystem::create_directories(o.out_dir);
            const auto path = [&](const char* name) { return (std::filesystem::path(o.out_dir) / name).string(); };
            const std::string report_csv = path("report.csv"), summary = path("summary.json"),
                              plot = path("plot.csv"), timings = path("timings.csv");
            check(fleetdp_report_write(report.get(), "report", report_csv.c_str()));
            check(fleetdp_report_write(report.get(), "summary", summary.c_str()));
            check(fleetdp_report_write(report.get(), "plot", plot.c_str()));
            check(fleetdp_report_write(report.get(), "timings", timings.c_str()));
            write_manifest(path("compare.manifest.json"), "compare", *compare, inputs, {report_csv, summary},
                           {plot, timings});
            std::size_t rows = 0, failed = 0;
            long long violations = 0;
            check(fleetdp_report_counts(report.get(), &rows, &failed, &violations));
            std::cout << "runs: " << rows << "\nfailed: " << failed << "\nviolations: " << violations << "\nwrote "
                      << report_csv << ", " << summary << ", " << plot << ", " << timings << "\n";
            if (violations > 0) {
                std::cerr << "error: " << violations << " constraint violations in emitted schedules\n";
                return kInternal;
            }
        } else if (*milp) {
            fleetdp_scenario* sraw = nullptr;
            check(fleetdp_scenario_load(o.scenario.c_str(), &sraw));
            ScenarioPtr sc(sraw);
            check(fleetdp_export_milp(sc.get(), o.out.c_str()));
            write_manifest(o.out + ".manifest.json", "export milp", *milp, {o.scenario}, {o.out});
            std::cout << "wrote " << o.out << "\n";
        }
    } catch (const ApiError& e) {
        if (e.status == FLEETDP_ERR_INFEASIBLE)
            std::cerr << "error: infeasible: " << e.message << "\n";
        else
            std::cerr << "error: " << fleetdp_status_name(e.status) << ": " << e.message << "\n";
        return exit_code(e.status);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInternal;
    }
    return kOk;
}
