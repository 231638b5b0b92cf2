// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 fleetdp contributors

#include "fleetdp/fleetdp.h"

#include "error.hpp"
#include "learner.hpp"
#include "market.hpp"
#include "oracle.hpp"
#include "rollout.hpp"
#include "sched_dp.hpp"
#include "text.hpp"

#include <cstring>
#include <new>
#include <string>

struct fleetdp_scenario {
    fleetdp::Scenario value;
};
struct fleetdp_schedule {
    fleetdp::Schedule value;
};
struct fleetdp_dataset {
    fleetdp::learner::Dataset value;
};
struct fleetdp_model {
    fleetdp::learner::SvcModel value;
};
struct fleetdp_report {
    fleetdp::rollout::EvalReport value;
};

namespace {

thread_local std::string g_last_error;

fleetdp_status status_of(fleetdp::ErrorCode code)
{
    using fleetdp::ErrorCode;
    switch (code) {
    case ErrorCode::InvalidArgument: return FLEETDP_ERR_INVALID_ARGUMENT;
    case ErrorCode::ConstraintViolation: return FLEETDP_ERR_CONSTRAINT_VIOLATION;
    case ErrorCode::Infeasible: return FLEETDP_ERR_INFEASIBLE;
    case ErrorCode::SizeLimit: return FLEETDP_ERR_SIZE_LIMIT;
    case ErrorCode::BudgetExceeded: return FLEETDP_ERR_BUDGET_EXCEEDED;
    case ErrorCode::Parse: return FLEETDP_ERR_PARSE;
    case ErrorCode::Io: return FLEETDP_ERR_IO;
    case ErrorCode::EmptyScenario: return FLEETDP_ERR_EMPTY_SCENARIO;
    case ErrorCode::DimensionMismatch: return FLEETDP_ERR_DIMENSION_MISMATCH;
    case ErrorCode::DegenerateData: return FLEETDP_ERR_DEGENERATE_DATA;
    case ErrorCode::ModelVersion: return FLEETDP_ERR_MODEL_VERSION;
    case ErrorCode::Internal: return FLEETDP_ERR_INTERNAL;
    }
    return FLEETDP_ERR_INTERNAL;
}

fleetdp_status fail_with(fleetdp_status s, const std::string& msg)
{
    g_last_error = msg;
    return s;
}

/// Runs `body`, translating exceptions into status codes.
template <class F>
fleetdp_status guarded(F&& body)
{
    try {
        body();
        return FLEETDP_OK;
    } catch (const fleetdp::Error& e) {
        return fail_with(status_of(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return fail_with(FLEETDP_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail_with(FLEETDP_ERR_INTERNAL, e.what());
    }
}

#define FLEETDP_REQUIRE(cond, what)                                                                                    \
    do {                                                                                                               \
        if (!(cond))                                                                                                   \
            return fail_with(FLEETDP_ERR_INVALID_ARGUMENT, what);                                                     \
    } while (0)

char* dup_string(const std::string& s)
{
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

} // namespace

extern "C" {

const char* fleetdp_version(void) { return "0.1.0"; }

const char* fleetdp_last_error(void) { return g_last_error.c_str(); }

const char* fleetdp_status_name(fleetdp_status status)
{
    switch (status) {
    case FLEETDP_OK: return "ok";
    case FLEETDP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case FLEETDP_ERR_CONSTRAINT_VIOLATION: return "constraint violation";
    case FLEETDP_ERR_INFEASIBLE: return "infeasible";
    case FLEETDP_ERR_SIZE_LIMIT: return "size limit";
    case FLEETDP_ERR_BUDGET_EXCEEDED: return "budget exceeded";
    case FLEETDP_ERR_PARSE: return "parse error";
    case FLEETDP_ERR_IO: return "i/o error";
    case FLEETDP_ERR_EMPTY_SCENARIO: return "empty scenario";
    case FLEETDP_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case FLEETDP_ERR_DEGENERATE_DATA: return "degenerate data";
    case FLEETDP_ERR_MODEL_VERSION: return "model version";
    case FLEETDP_ERR_INTERNAL: return "internal error";
    }
    return "unknown";
}

void fleetdp_string_free(char* s) { delete[] s; }

// ---- scenarios ----

fleetdp_status fleetdp_scenario_generate(int level, int n_evs, int n_slots, uint64_t seed, fleetdp_scenario** out)
{
    FLEETDP_REQUIRE(out, "out is NULL");
    FLEETDP_REQUIRE(level >= 0 && level <= 3, "level must be 0..3");
    return guarded([&] {
        auto sc = fleetdp::generate_scenario({static_cast<fleetdp::Level>(level), n_evs, n_slots, seed});
        *out = new fleetdp_scenario{std::move(sc)};
    });
}

fleetdp_status fleetdp_scenario_load(const char* path, fleetdp_scenario** out)
{
    FLEETDP_REQUIRE(path && out, "path or out is NULL");
    return guarded([&] { *out = new fleetdp_scenario{fleetdp::load_scenario(path)}; });
}

fleetdp_status fleetdp_scenario_save(const fleetdp_scenario* scenario, const char* path)
{
    FLEETDP_REQUIRE(scenario && path, "scenario or path is NULL");
    return guarded([&] { fleetdp::save_scenario(scenario->value, path); });
}

fleetdp_status fleetdp_scenario_to_json(const fleetdp_scenario* scenario, char** out)
{
    FLEETDP_REQUIRE(scenario && out, "scenario or out is NULL");
    return guarded([&] { *out = dup_string(fleetdp::scenario_to_json(scenario->value)); });
}

fleetdp_status fleetdp_scenario_apply_prices(fleetdp_scenario* scenario, const char* csv_path, int granularity,
                                             int* clamped)
{
    FLEETDP_REQUIRE(scenario && csv_path, "scenario or csv_path is NULL");
    FLEETDP_REQUIRE(granularity == 0 || granularity == 1, "granularity must be 0 (hourly) or 1 (quarter)");
    return guarded([&] {
        auto& sc = scenario->value;
        const auto prices =
            fleetdp::ingest_prices(csv_path, granularity == 0 ? fleetdp::Granularity::Hourly : fleetdp::Granularity::Quarter,
                                   sc.slots_per_hour());
        fleetdp::Scenario updated = sc;
        const int n = fleetdp::apply_prices(updated, prices, csv_path);
        sc = std::move(updated);
        if (clamped)
            *clamped = n;
    });
}

fleetdp_status fleetdp_scenario_apply_roster(fleetdp_scenario* scenario, const char* csv_path)
{
    FLEETDP_REQUIRE(scenario && csv_path, "scenario or csv_path is NULL");
    return guarded([&] {
        fleetdp::Scenario updated = scenario->value;
        updated.fleet = fleetdp::roster_from_csv(csv_path);
        if (updated.level.level >= fleetdp::Level::L2) {
            double rate = 0.0;
            for (const auto& ev : updated.fleet)
                rate += ev.max_rate_kw;
            const double cap = fleetdp::text::round_significant(0.9 * rate);
            updated.level.site_charge_cap_kw = cap;
            updated.level.site_discharge_cap_kw = cap;
        }
        fleetdp::validate(updated);
        scenario->value = std::move(updated);
    });
}

fleetdp_status fleetdp_scenario_info(const fleetdp_scenario* scenario, int* level, int* n_evs, int* n_slots,
                                     uint64_t* seed)
{
    FLEETDP_REQUIRE(scenario, "scenario is NULL");
    const auto& sc = scenario->value;
    if (level)
        *level = static_cast<int>(sc.level.level);
    if (n_evs)
        *n_evs = static_cast<int>(sc.fleet.size());
    if (n_slots)
        *n_slots = sc.n_slots;
    if (seed)
        *seed = sc.seed;
    return FLEETDP_OK;
}

void fleetdp_scenario_free(fleetdp_scenario* scenario) { delete scenario; }

// ---- solvers and policies ----

fleetdp_status fleetdp_solve_exact(const fleetdp_scenario* scenario, fleetdp_schedule** out)
{
    FLEETDP_REQUIRE(scenario && out, "scenario or out is NULL");
    return guarded([&] { *out = new fleetdp_schedule{fleetdp::solve_exact(scenario->value)}; });
}

fleetdp_status fleetdp_solve_approx(const fleetdp_scenario* scenario, size_t beam_width, fleetdp_schedule** out)
{
    FLEETDP_REQUIRE(scenario && out, "scenario or out is NULL");
    return guarded([&] {
        fleetdp::ApproxOptions opts;
        opts.beam_width = beam_width;
        *out = new fleetdp_schedule{fleetdp::solve_approx(scenario->value, opts)};
    });
}

fleetdp_status fleetdp_enumerate(const fleetdp_scenario* scenario, double budget, double* min_cost)
{
    FLEETDP_REQUIRE(scenario && min_cost, "scenario or min_cost is NULL");
    FLEETDP_REQUIRE(budget > 0.0, "budget must be positive");
    return guarded([&] { *min_cost = fleetdp::oracle::enumerate(scenario->value, {budget}).min_cost; });
}

fleetdp_status fleetdp_run_policy(const fleetdp_scenario* scenario, const char* policy, const fleetdp_model* model,
                                  int replan_every, size_t beam_width, fleetdp_schedule** out, int* repairs)
{
    FLEETDP_REQUIRE(scenario && policy && out, "scenario, policy or out is NULL");
    return guarded([&] {
        fleetdp::rollout::RunOptions opts;
        opts.replan_every = replan_every;
        opts.approx.beam_width = beam_width;
        opts.model = model ? &model->value : nullptr;
        auto res = fleetdp::rollout::run_policy(fleetdp::rollout::policy_from_string(policy), scenario->value, opts);
        if (repairs)
            *repairs = res.row.repairs;
        *out = new fleetdp_schedule{std::move(res.schedule)};
    });
}

fleetdp_status fleetdp_schedule_objective(const fleetdp_schedule* schedule, double* objective_eur)
{
    FLEETDP_REQUIRE(schedule && objective_eur, "schedule or objective_eur is NULL");
    *objective_eur = schedule->value.objective_eur;
    return FLEETDP_OK;
}

fleetdp_status fleetdp_schedule_slots(const fleetdp_schedule* schedule, int* n_slots)
{
    FLEETDP_REQUIRE(schedule && n_slots, "schedule or n_slots is NULL");
    *n_slots = static_cast<int>(schedule->value.actions.size());
    return FLEETDP_OK;
}

fleetdp_status fleetdp_schedule_save_csv(const fleetdp_schedule* schedule, const fleetdp_scenario* scenario,
                                         const char* path)
{
    FLEETDP_REQUIRE(schedule && scenario && path, "schedule, scenario or path is NULL");
    return guarded(
        [&] { fleetdp::text::write_file(path, fleetdp::schedule_to_csv(schedule->value, scenario->value)); });
}

fleetdp_status fleetdp_schedule_save_sidecar(const fleetdp_schedule* schedule, const fleetdp_scenario* scenario,
                                             const char* method, const char* path)
{
    FLEETDP_REQUIRE(schedule && scenario && method && path, "schedule, scenario, method or path is NULL");
    return guarded([&] {
        fleetdp::text::write_file(path, fleetdp::schedule_sidecar_json(schedule->value, scenario->value, method));
    });
}

fleetdp_status fleetdp_schedule_audit(const fleetdp_schedule* schedule, const fleetdp_scenario* scenario,
                                      int* violations)
{
    FLEETDP_REQUIRE(schedule && scenario && violations, "schedule, scenario or violations is NULL");
    return guarded([&] {
        const auto audit = fleetdp::rollout::audit_schedule(scenario->value, schedule->value);
        *violations = static_cast<int>(audit.violations.size());
        if (!audit.ok())
            g_last_error = audit.violations.front();
    });
}

void fleetdp_schedule_free(fleetdp_schedule* schedule) { delete schedule; }

// ---- MILP export ----

fleetdp_status fleetdp_export_milp(const fleetdp_scenario* scenario, const char* path)
{
    FLEETDP_REQUIRE(scenario && path, "scenario or path is NULL");
    return guarded([&] { fleetdp::oracle::emit_milp_lp(scenario->value, path); });
}

// ---- datasets ----

fleetdp_status fleetdp_dataset_generate(int n_scenarios, int level, int n_evs, int n_slots, uint64_t seed,
                                        size_t beam_width, fleetdp_dataset** out)
{
    FLEETDP_REQUIRE(out, "out is NULL");
    FLEETDP_REQUIRE(level >= 0 && level <= 3, "level must be 0..3");
    return guarded([&] {
        fleetdp::learner::DatasetConfig cfg;
        cfg.n_scenarios = n_scenarios;
        cfg.level = static_cast<fleetdp::Level>(level);
        cfg.n_evs = n_evs;
        cfg.n_slots = n_slots;
        cfg.seed = seed;
        cfg.approx.beam_width = beam_width;
        *out = new fleetdp_dataset{fleetdp::learner::generate_dataset(cfg)};
    });
}

fleetdp_status fleetdp_dataset_load(const char* path, fleetdp_dataset** out)
{
    FLEETDP_REQUIRE(path && out, "path or out is NULL");
    return guarded([&] {
        fleetdp::learner::Dataset ds;
        ds.samples = fleetdp::learner::dataset_from_csv(fleetdp::text::read_file(path), path);
        *out = new fleetdp_dataset{std::move(ds)};
    });
}

fleetdp_status fleetdp_dataset_save(const fleetdp_dataset* dataset, const char* path)
{
    FLEETDP_REQUIRE(dataset && path, "dataset or path is NULL");
    return guarded(
        [&] { fleetdp::text::write_file(path, fleetdp::learner::dataset_to_csv(dataset->value.samples)); });
}

fleetdp_status fleetdp_dataset_size(const fleetdp_dataset* dataset, size_t* rows)
{
    FLEETDP_REQUIRE(dataset && rows, "dataset or rows is NULL");
    *rows = dataset->value.samples.size();
    return FLEETDP_OK;
}

fleetdp_status fleetdp_dataset_skipped(const fleetdp_dataset* dataset, char** log)
{
    FLEETDP_REQUIRE(dataset && log, "dataset or log is NULL");
    return guarded([&] {
        std::string s;
        for (const auto& m : dataset->value.skipped)
            s += m + "\n";
        *log = dup_string(s);
    });
}

void fleetdp_dataset_free(fleetdp_dataset* dataset) { delete dataset; }

// ---- classifier ----

fleetdp_train_config fleetdp_train_config_default(void)
{
    const fleetdp::learner::TrainConfig d;
    return {1000, 0, d.c, d.tol, d.max_passes};
}

fleetdp_status fleetdp_train(const fleetdp_dataset* dataset, const fleetdp_train_config* config, fleetdp_model** out,
                             double* heldout_accuracy)
{
    FLEETDP_REQUIRE(dataset && config && out, "dataset, config or out is NULL");
    return guarded([&] {
        using namespace fleetdp::learner;
        const auto& all = dataset->value.samples;
        std::vector<TrainingSample> train, held;
        const std::size_t n = config->train_size == 0 ? all.size() : config->train_size;
        split_uniform(all, n, config->seed, train, held);
        TrainConfig tc;
        tc.c = config->c;
        tc.tol = config->tol;
        tc.max_passes = config->max_passes;
        tc.seed = config->seed;
        auto model = train_svc(train, tc);
        if (heldout_accuracy)
            *heldout_accuracy = held.empty() ? -1.0 : accuracy(model, held);
        *out = new fleetdp_model{std::move(model)};
    });
}

fleetdp_status fleetdp_model_load(const char* path, fleetdp_model** out)
{
    FLEETDP_REQUIRE(path && out, "path or out is NULL");
    return guarded([&] { *out = new fleetdp_model{fleetdp::learner::load_model(path)}; });
}

fleetdp_status fleetdp_model_save(const fleetdp_model* model, const char* path)
{
    FLEETDP_REQUIRE(model && path, "model or path is NULL");
    return guarded([&] { fleetdp::learner::save_model(model->value, path); });
}

fleetdp_status fleetdp_model_info(const fleetdp_model* model, int selected[5], double* training_accuracy,
                                  int* converged)
{
    FLEETDP_REQUIRE(model, "model is NULL");
    if (selected)
        for (int i = 0; i < 5; ++i)
            selected[i] = model->value.selected[static_cast<std::size_t>(i)];
    if (training_accuracy)
        *training_accuracy = model->value.training_accuracy;
    if (converged)
        *converged = model->value.converged() ? 1 : 0;
    return FLEETDP_OK;
}

fleetdp_status fleetdp_model_accuracy(const fleetdp_model* model, const fleetdp_dataset* dataset, double* accuracy)
{
    FLEETDP_REQUIRE(model && dataset && accuracy, "model, dataset or accuracy is NULL");
    return guarded([&] { *accuracy = fleetdp::learner::accuracy(model->value, dataset->value.samples); });
}

void fleetdp_model_free(fleetdp_model* model) { delete model; }

// ---- benchmarks ----

fleetdp_benchmark_config fleetdp_benchmark_config_default(void)
{
    fleetdp_benchmark_config c{};
    c.n_scenarios = 1;
    c.level = 3;
    c.n_slots = 48;
    c.jobs = 1;
    c.beam_width = fleetdp::ApproxOptions{}.beam_width;
    return c;
}

fleetdp_status fleetdp_benchmark(const fleetdp_benchmark_config* config, fleetdp_report** out)
{
    FLEETDP_REQUIRE(config && out, "config or out is NULL");
    FLEETDP_REQUIRE(config->fleet_sizes || config->n_fleet_sizes == 0, "fleet_sizes is NULL");
    FLEETDP_REQUIRE(config->policies || config->n_policies == 0, "policies is NULL");
    FLEETDP_REQUIRE(config->level >= 0 && config->level <= 3, "level must be 0..3");
    return guarded([&] {
        fleetdp::rollout::BenchmarkConfig bc;
        bc.fleet_sizes.assign(config->fleet_sizes, config->fleet_sizes + config->n_fleet_sizes);
        bc.n_scenarios = config->n_scenarios;
        for (std::size_t i = 0; i < config->n_policies; ++i)
            bc.policies.push_back(fleetdp::rollout::policy_from_string(config->policies[i]));
        bc.level = static_cast<fleetdp::Level>(config->level);
        bc.n_slots = config->n_slots;
        bc.seed = config->seed;
        bc.jobs = config->jobs;
        bc.run.replan_every = config->replan_every;
        bc.run.approx.beam_width = config->beam_width;
        bc.run.model = config->model ? &config->model->value : nullptr;
        *out = new fleetdp_report{fleetdp::rollout::benchmark(bc)};
    });
}

fleetdp_status fleetdp_report_write(const fleetdp_report* report, const char* kind, const char* path)
{
    FLEETDP_REQUIRE(report && kind && path, "report, kind or path is NULL");
    const std::string k = kind;
    FLEETDP_REQUIRE(k == "report" || k == "summary" || k == "plot" || k == "timings",
                    "kind must be report, summary, plot or timings");
    return guarded([&] {
        using namespace fleetdp::rollout;
        const auto& r = report->value;
        const std::string body = k == "report"    ? report_csv(r)
                                 : k == "summary" ? summary_json(r)
                                 : k == "plot"    ? plot_csv(r)
                                                  : timings_csv(r);
        fleetdp::text::write_file(path, body);
    });
}

fleetdp_status fleetdp_report_counts(const fleetdp_report* report, size_t* rows, size_t* failed, long long* violations)
{
    FLEETDP_REQUIRE(report, "report is NULL");
    std::size_t f = 0;
    long long v = 0;
    for (const auto& row : report->value.rows) {
        f += row.status != "ok";
        v += row.violations;
    }
    if (rows)
        *rows = report->value.rows.size();
    if (failed)
        *failed = f;
    if (violations)
        *violations = v;
    return FLEETDP_OK;
}

void fleetdp_report_free(fleetdp_report* report) { delete report; }

} // extern "C"
