// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 fleetdp contributors

// Classifier that imitates the aggregate decisions of the approximate DP:
// fixed-size fleet statistics, single-tree feature ranking, and one-vs-rest
// RBF support-vector machines trained with SMO.

#pragma once

#include "fleet.hpp"
#include "market.hpp"
#include "sched_dp.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace fleetdp::learner {

inline constexpr int kNumFeatures = 10;
inline constexpr int kNumSelected = 5;
inline constexpr int kModelVersion = 1;

using FeatureVector = std::array<double, kNumFeatures>;
using FeatureIndices = std::array<int, kNumSelected>; // zero-based

extern const std::array<const char*, kNumFeatures> kFeatureNames;

/// Order: k/N, mean/min/max SoC fraction, fraction at target, v_k/d, rho_k,
/// sigma_k, mean rho and mean v/d over slots k+1..min(k+4,N)-1 (rho_k and
/// v_k/d when that window is empty). Invariant under vehicle permutation.
FeatureVector extract_features(const FleetState& state, const Scenario& scenario, int k);

struct TrainingSample {
    int scenario_id = 0;
    int slot = 0;
    FeatureVector features{};
    AggregateAction label = AggregateAction::I;
};

/// One sample per slot along the schedule's state trajectory.
std::vector<TrainingSample> samples_from_schedule(const Scenario& scenario, const Schedule& schedule,
                                                  int scenario_id);

struct DatasetConfig {
    int n_scenarios = 50;
    Level level = Level::L3;
    int n_evs = 100;
    int n_slots = 48;
    std::uint64_t seed = 0;
    ApproxOptions approx;
};

struct Dataset {
    std::vector<TrainingSample> samples;
    std::vector<std::string> skipped; // one message per scenario without a schedule
};

/// Solves each derived scenario with the approximate DP and keeps one sample
/// per slot; scenarios that fail are skipped and logged.
Dataset generate_dataset(const DatasetConfig& config);

struct TreeParams {
    int max_depth = 8;
    int min_leaf = 5;
};

/// Total Gini impurity decrease per feature of a single CART tree fitted on
/// z-scored features, weighted by node sample fraction.
std::array<double, kNumFeatures> feature_importances(const std::vector<TrainingSample>& samples,
                                                     const TreeParams& params = {});

/// Top five non-constant features by importance, ties to the lower index.
/// Throws DegenerateData for a single class, fewer than 50 samples, or fewer
/// than five non-constant features.
FeatureIndices select_features(const std::vector<TrainingSample>& samples, const TreeParams& params = {});

struct Scaler {
    std::vector<double> mean;
    std::vector<double> stddev; // population, > 0

    static Scaler fit(const std::vector<std::vector<double>>& rows);
    std::vector<double> standardize(const std::vector<double>& x) const;
    std::vector<double> destandardize(const std::vector<double>& z) const;
};

double rbf_kernel(const std::vector<double>& a, const std::vector<double>& b, double gamma);

struct BinaryMachine {
    std::vector<std::vector<double>> support_vectors; // standardized
    std::vector<double> dual_coef;                     // alpha_i * y_i
    double bias = 0.0;
    bool converged = false;
    double kkt_gap = 0.0; // maximal violating-pair gap at exit
    double dual_sum = 0.0; // sum of alpha_i * y_i over the training set
    long long iterations = 0;

    double decision(const std::vector<double>& z, double gamma) const;
};

struct TrainConfig {
    double c = 1.0;
    double tol = 1e-3;
    int max_passes = 1000; // iteration cap is max_passes * training-set size
    std::uint64_t seed = 0; // recorded in the model
};

/// Low-level binary solver over labels in {-1, +1}.
BinaryMachine train_binary(const std::vector<std::vector<double>>& x, const std::vector<int>& y, double gamma,
                           const TrainConfig& config);

struct SvcModel {
    FeatureIndices selected{};
    Scaler scaler;
    double gamma = 0.0;
    std::array<BinaryMachine, 3> machines; // one-vs-rest for C, I, D
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    double training_accuracy = 0.0;
    std::array<double, kNumFeatures> importances{};

    bool converged() const;
    std::array<double, 3> decision_values(const FeatureVector& features) const;
};

/// Selects features, then trains. Throws DegenerateData unless all three
/// classes are present. Non-convergence is flagged, not thrown.
SvcModel train_svc(const std::vector<TrainingSample>& samples, const TrainConfig& config = {});
SvcModel train_svc(const std::vector<TrainingSample>& samples, const FeatureIndices& selected,
                   const TrainConfig& config = {});

/// Argmax of decision values, ties to C < I < D.
AggregateAction predict(const SvcModel& model, const FeatureVector& features);
AggregateAction predict(const SvcModel& model, const FleetState& state, const Scenario& scenario, int k);

double accuracy(const SvcModel& model, const std::vector<TrainingSample>& samples);

/// Uniform sample of `count` rows without replacement; the rest are held out.
/// Both parts keep the input order.
void split_uniform(const std::vector<TrainingSample>& all, std::size_t count, std::uint64_t seed,
                   std::vector<TrainingSample>& train, std::vector<TrainingSample>& held_out);

std::string model_to_json(const SvcModel& model);
SvcModel model_from_json(const std::string& text); // Parse or ModelVersion errors
void save_model(const SvcModel& model, const std::string& path);
SvcModel load_model(const std::string& path);

/// Dataset CSV `scenario_id,slot,f1..f10,label`.
std::string dataset_to_csv(const std::vector<TrainingSample>& samples);
std::vector<TrainingSample> dataset_from_csv(const std::string& text, const std::string& origin = "dataset");

} // namespace fleetdp::learner
