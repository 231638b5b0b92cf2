/* SPDX-License-Identifier: Apache-2.0 */
/* Copyright 2026 fleetdp contributors */

/*
 * C interface of the fleetdp library. Objects are opaque handles owned by the
 * caller and released with the matching *_free function (NULL is accepted).
 * Every fallible call returns a status; on failure fleetdp_last_error() holds
 * a message for the calling thread until its next failing call.
 */

#ifndef FLEETDP_FLEETDP_H
#define FLEETDP_FLEETDP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(FLEETDP_BUILDING)
#    define FLEETDP_API __declspec(dllexport)
#  else
#    define FLEETDP_API __declspec(dllimport)
#  endif
#else
#  define FLEETDP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fleetdp_status {
    FLEETDP_OK = 0,
    FLEETDP_ERR_INVALID_ARGUMENT = 1,
    FLEETDP_ERR_CONSTRAINT_VIOLATION = 2,
    FLEETDP_ERR_INFEASIBLE = 3,
    FLEETDP_ERR_SIZE_LIMIT = 4,
    FLEETDP_ERR_BUDGET_EXCEEDED = 5,
    FLEETDP_ERR_PARSE = 6,
    FLEETDP_ERR_IO = 7,
    FLEETDP_ERR_EMPTY_SCENARIO = 8,
    FLEETDP_ERR_DIMENSION_MISMATCH = 9,
    FLEETDP_ERR_DEGENERATE_DATA = 10,
    FLEETDP_ERR_MODEL_VERSION = 11,
    FLEETDP_ERR_INTERNAL = 12
} fleetdp_status;

typedef struct fleetdp_scenario fleetdp_scenario;
typedef struct fleetdp_schedule fleetdp_schedule;
typedef struct fleetdp_dataset fleetdp_dataset;
typedef struct fleetdp_model fleetdp_model;
typedef struct fleetdp_report fleetdp_report;

FLEETDP_API const char* fleetdp_version(void);
FLEETDP_API const char* fleetdp_last_error(void);
FLEETDP_API const char* fleetdp_status_name(fleetdp_status status);

/* Strings returned through char** are heap copies. */
FLEETDP_API void fleetdp_string_free(char* s);

/* ---- scenarios ---- */

FLEETDP_API fleetdp_status fleetdp_scenario_generate(int level, int n_evs, int n_slots, uint64_t seed,
                                                     fleetdp_scenario** out);
FLEETDP_API fleetdp_status fleetdp_scenario_load(const char* path, fleetdp_scenario** out);
FLEETDP_API fleetdp_status fleetdp_scenario_save(const fleetdp_scenario* scenario, const char* path);
FLEETDP_API fleetdp_status fleetdp_scenario_to_json(const fleetdp_scenario* scenario, char** out);
/* Replaces rho (negatives clamped to 0) and sigma from a price CSV.
 * granularity: 0 hourly, 1 quarter-hourly. `clamped` may be NULL. */
FLEETDP_API fleetdp_status fleetdp_scenario_apply_prices(fleetdp_scenario* scenario, const char* csv_path,
                                                         int granularity, int* clamped);
/* Replaces the fleet with a roster CSV. */
FLEETDP_API fleetdp_status fleetdp_scenario_apply_roster(fleetdp_scenario* scenario, const char* csv_path);
FLEETDP_API fleetdp_status fleetdp_scenario_info(const fleetdp_scenario* scenario, int* level, int* n_evs,
                                                 int* n_slots, uint64_t* seed);
FLEETDP_API void fleetdp_scenario_free(fleetdp_scenario* scenario);

/* ---- solvers and policies ---- */

FLEETDP_API fleetdp_status fleetdp_solve_exact(const fleetdp_scenario* scenario, fleetdp_schedule** out);
/* beam_width 0 keeps every reachable state. */
FLEETDP_API fleetdp_status fleetdp_solve_approx(const fleetdp_scenario* scenario, size_t beam_width,
                                                fleetdp_schedule** out);
FLEETDP_API fleetdp_status fleetdp_enumerate(const fleetdp_scenario* scenario, double budget, double* min_cost);
/* policy: "adp", "svc", "idle" or "greedy"; model may be NULL except for svc.
 * replan_every 0 solves the ADP plan once. `repairs` may be NULL. */
FLEETDP_API fleetdp_status fleetdp_run_policy(const fleetdp_scenario* scenario, const char* policy,
                                              const fleetdp_model* model, int replan_every, size_t beam_width,
                                              fleetdp_schedule** out, int* repairs);

FLEETDP_API fleetdp_status fleetdp_schedule_objective(const fleetdp_schedule* schedule, double* objective_eur);
FLEETDP_API fleetdp_status fleetdp_schedule_slots(const fleetdp_schedule* schedule, int* n_slots);
/* Writes `slot,ev_id,delta_kwh,aggregate_label` rows. */
FLEETDP_API fleetdp_status fleetdp_schedule_save_csv(const fleetdp_schedule* schedule,
                                                     const fleetdp_scenario* scenario, const char* path);
FLEETDP_API fleetdp_status fleetdp_schedule_save_sidecar(const fleetdp_schedule* schedule,
                                                         const fleetdp_scenario* scenario, const char* method,
                                                         const char* path);
/* Number of constraint, terminal or objective violations found by replay. */
FLEETDP_API fleetdp_status fleetdp_schedule_audit(const fleetdp_schedule* schedule, const fleetdp_scenario* scenario,
                                                  int* violations);
FLEETDP_API void fleetdp_schedule_free(fleetdp_schedule* schedule);

/* ---- MILP export ---- */

FLEETDP_API fleetdp_status fleetdp_export_milp(const fleetdp_scenario* scenario, const char* path);

/* ---- datasets ---- */

FLEETDP_API fleetdp_status fleetdp_dataset_generate(int n_scenarios, int level, int n_evs, int n_slots,
                                                    uint64_t seed, size_t beam_width, fleetdp_dataset** out);
FLEETDP_API fleetdp_status fleetdp_dataset_load(const char* path, fleetdp_dataset** out);
FLEETDP_API fleetdp_status fleetdp_dataset_save(const fleetdp_dataset* dataset, const char* path);
FLEETDP_API fleetdp_status fleetdp_dataset_size(const fleetdp_dataset* dataset, size_t* rows);
/* Newline-separated messages for scenarios skipped during generation. */
FLEETDP_API fleetdp_status fleetdp_dataset_skipped(const fleetdp_dataset* dataset, char** log);
FLEETDP_API void fleetdp_dataset_free(fleetdp_dataset* dataset);

/* ---- classifier ---- */

typedef struct fleetdp_train_config {
    size_t train_size; /* rows sampled uniformly for training, 0 = all */
    uint64_t seed;
    double c;
    double tol;
    int max_passes;
} fleetdp_train_config;

FLEETDP_API fleetdp_train_config fleetdp_train_config_default(void);
/* `heldout_accuracy` is set to -1 when no rows are held out; may be NULL. */
FLEETDP_API fleetdp_status fleetdp_train(const fleetdp_dataset* dataset, const fleetdp_train_config* config,
                                         fleetdp_model** out, double* heldout_accuracy);
FLEETDP_API fleetdp_status fleetdp_model_load(const char* path, fleetdp_model** out);
FLEETDP_API fleetdp_status fleetdp_model_save(const fleetdp_model* model, const char* path);
/* `selected` receives five zero-based feature indices; any pointer may be NULL. */
FLEETDP_API fleetdp_status fleetdp_model_info(const fleetdp_model* model, int selected[5],
                                              double* training_accuracy, int* converged);
FLEETDP_API fleetdp_status fleetdp_model_accuracy(const fleetdp_model* model, const fleetdp_dataset* dataset,
                                                  double* accuracy);
FLEETDP_API void fleetdp_model_free(fleetdp_model* model);

/* ---- benchmarks ---- */

typedef struct fleetdp_benchmark_config {
    const int* fleet_sizes;
    size_t n_fleet_sizes;
    int n_scenarios;
    const char* const* policies;
    size_t n_policies;
    int level;
    int n_slots;
    uint64_t seed;
    int jobs;
    int replan_every;
    size_t beam_width;
    const fleetdp_model* model; /* required when policies contain "svc" */
} fleetdp_benchmark_config;

FLEETDP_API fleetdp_benchmark_config fleetdp_benchmark_config_default(void);
FLEETDP_API fleetdp_status fleetdp_benchmark(const fleetdp_benchmark_config* config, fleetdp_report** out);
/* kind: "report" (CSV), "summary" (JSON), "plot" (CSV) or "timings" (CSV). */
FLEETDP_API fleetdp_status fleetdp_report_write(const fleetdp_report* report, const char* kind, const char* path);
FLEETDP_API fleetdp_status fleetdp_report_counts(const fleetdp_report* report, size_t* rows, size_t* failed,
                                                 long long* violations);
FLEETDP_API void fleetdp_report_free(fleetdp_report* report);

#ifdef __cplusplus
}
#endif

#endif /* FLEETDP_FLEETDP_H */
