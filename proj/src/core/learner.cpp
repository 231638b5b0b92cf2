// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 fleetdp contributors

#include "learner.hpp"

#include "error.hpp"
#include "text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace fleetdp::learner {

const std::array<const char*, kNumFeatures> kFeatureNames = {
    "slot_fraction", "mean_soc_fraction", "min_soc_fraction", "max_soc_fraction", "fraction_at_target",
    "volume_per_ev", "rho",               "sigma",            "lookahead_rho",    "lookahead_volume_per_ev"};

// ---- features ------------------------------------------------------------------

FeatureVector extract_features(const FleetState& state, const Scenario& sc, int k)
{
    if (k < 0 || k >= sc.n_slots)
        fail(ErrorCode::InvalidArgument, "feature slot " + std::to_string(k) + " outside [0, N)");
    const std::size_t d = sc.fleet.size();
    if (state.evs.size() != d)
        fail(ErrorCode::DimensionMismatch, "state has " + std::to_string(state.evs.size()) + " vehicles, scenario " +
                                               std::to_string(d));
    FeatureVector f{};
    f[0] = static_cast<double>(k) / sc.n_slots;

    // Fractions are summed in 2^-52 fixed point so the mean does not depend
    // on vehicle order. 128 bits hold the sum for any fleet size.
    unsigned __int128 fixed_sum = 0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::size_t at_target = 0;
    for (std::size_t j = 0; j < d; ++j) {
        const double frac = state.evs[j].soc_kwh / sc.fleet[j].capacity_kwh;
        fixed_sum += static_cast<std::uint64_t>(frac * 0x1p52 + 0.5); // frac in [0, 1]
        lo = std::min(lo, frac);
        hi = std::max(hi, frac);
        if (state.evs[j].soc_kwh >= sc.fleet[j].target_soc_kwh - kEnergyTol)
            ++at_target;
    }
    f[1] = static_cast<double>(fixed_sum) * 0x1p-52 / static_cast<double>(d);
    f[2] = lo;
    f[3] = hi;
    f[4] = static_cast<double>(at_target) / static_cast<double>(d);

    const auto kk = static_cast<std::size_t>(k);
    const double dd = static_cast<double>(d);
    f[5] = sc.volumes[kk] / dd;
    f[6] = sc.rho[kk];
    f[7] = sc.sigma[kk];

    const int last = std::min(k + 4, sc.n_slots) - 1;
    if (last >= k + 1) {
        double rho = 0.0, vol = 0.0;
        for (int t = k + 1; t <= last; ++t) {
            rho += sc.rho[static_cast<std::size_t>(t)];
            vol += sc.volumes[static_cast<std::size_t>(t)];
        }
        const int n = last - k;
        f[8] = rho / n;
        f[9] = vol / n / dd;
    } else {
        f[8] = f[6];
        f[9] = f[5];
    }
    return f;
}

std::vector<TrainingSample> samples_from_schedule(const Scenario& sc, const Schedule& schedule, int scenario_id)
{
    if (schedule.labels.size() != schedule.actions.size())
        fail(ErrorCode::InvalidArgument, "schedule has no aggregate labels");
    const FleetModel model = sc.fleet_model();
    FleetState st = initial_state(model);
    std::vector<TrainingSample> out;
    for (int k = 0; k < sc.n_slots; ++k) {
        if (k >= schedule.start_slot) {
            const auto i = static_cast<std::size_t>(k - schedule.start_slot);
            out.push_back({scenario_id, k, extract_features(st, sc, k), schedule.labels[i]});
            st = lattice_state(model, transition(model, st, schedule.actions[i]));
        }
    }
    return out;
}

Dataset generate_dataset(const DatasetConfig& cfg)
{
    if (cfg.n_scenarios < 1)
        fail(ErrorCode::InvalidArgument, "dataset needs at least one scenario");
    Dataset ds;
    for (int i = 0; i < cfg.n_scenarios; ++i) {
        const std::uint64_t seed = derive_seed(cfg.seed, cfg.n_evs, i);
        try {
            const Scenario sc = generate_scenario({cfg.level, cfg.n_evs, cfg.n_slots, seed});
            const auto s = samples_from_schedule(sc, solve_approx(sc, cfg.approx), i);
            ds.samples.insert(ds.samples.end(), s.begin(), s.end());
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Infeasible)
                throw;
            ds.skipped.push_back("scenario " + std::to_string(i) + " (seed " + std::to_string(seed) +
                                 ") skipped: " + e.what());
        }
    }
    return ds;
}

// ---- feature ranking -------------------------------------------------------------

namespace {

int class_index(AggregateAction a) { return static_cast<int>(a); }

double gini(const std::array<int, 3>& counts, int n)
{
    if (n == 0)
        return 0.0;
    double s = 0.0;
    for (int c : counts) {
        const double p = static_cast<double>(c) / n;
        s += p * p;
    }
    return 1.0 - s;
}

struct TreeBuilder {
    const std::vector<std::array<double, kNumFeatures>>& x;
    const std::vector<int>& y;
    std::array<bool, kNumFeatures> usable{};
    TreeParams params;
    double total = 0.0;
    std::array<double, kNumFeatures> importance{};

    void grow(std::vector<int> idx, int depth)
    {
        const int n = static_cast<int>(idx.size());
        std::array<int, 3> counts{};
        for (int i : idx)
            ++counts[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])];
        const double node_gini = gini(counts, n);
        if (depth >= params.max_depth || n < 2 * params.min_leaf || node_gini == 0.0)
            return;

        double best_gain = 1e-12;
        int best_f = -1;
        double best_thr = 0.0;
        for (int f = 0; f < kNumFeatures; ++f) {
            if (!usable[static_cast<std::size_t>(f)])
                continue;
            auto order = idx;
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                return x[static_cast<std::size_t>(a)][static_cast<std::size_t>(f)] <
                       x[static_cast<std::size_t>(b)][static_cast<std::size_t>(f)];
            });
            std::array<int, 3> left{};
            for (int i = 0; i + 1 < n; ++i) {
                ++left[static_cast<std::size_t>(y[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])])];
                const double v = x[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])][static_cast<std::size_t>(f)];
                const double w =
                    x[static_cast<std::size_t>(order[static_cast<std::size_t>(i + 1)])][static_cast<std::size_t>(f)];
                const int nl = i + 1;
                const int nr = n - nl;
                if (v == w || nl < params.min_leaf || nr < params.min_leaf)
                    continue;
                std::array<int, 3> right{counts[0] - left[0], counts[1] - left[1], counts[2] - left[2]};
                const double gain = (n * node_gini - nl * gini(left, nl) - nr * gini(right, nr)) / total;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_f = f;
                    best_thr = 0.5 * (v + w);
                }
            }
        }
        if (best_f < 0)
            return;
        importance[static_cast<std::size_t>(best_f)] += best_gain;
        std::vector<int> l, r;
        for (int i : idx)
            (x[static_cast<std::size_t>(i)][static_cast<std::size_t>(best_f)] <= best_thr ? l : r).push_back(i);
        grow(std::move(l), depth + 1);
        grow(std::move(r), depth + 1);
    }
};

std::array<bool, kNumFeatures> non_constant(const std::vector<TrainingSample>& samples)
{
    std::array<bool, kNumFeatures> out{};
    for (int f = 0; f < kNumFeatures; ++f) {
        const auto uf = static_cast<std::size_t>(f);
        for (const auto& s : samples) {
            if (s.features[uf] != samples.front().features[uf]) {
                out[uf] = true;
                break;
            }
        }
    }
    return out;
}

void check_finite(const std::vector<TrainingSample>& samples)
{
    for (const auto& s : samples)
        for (double v : s.features)
            if (!std::isfinite(v))
                fail(ErrorCode::DegenerateData, "non-finite feature in scenario " + std::to_string(s.scenario_id) +
                                                    " slot " + std::to_string(s.slot));
}

int distinct_classes(const std::vector<TrainingSample>& samples)
{
    std::array<bool, 3> seen{};
    for (const auto& s : samples)
        seen[static_cast<std::size_t>(class_index(s.label))] = true;
    return static_cast<int>(std::count(seen.begin(), seen.end(), true));
}

} // namespace

std::array<double, kNumFeatures> feature_importances(const std::vector<TrainingSample>& samples,
                                                     const TreeParams& params)
{
    if (samples.empty())
        fail(ErrorCode::DegenerateData, "no samples");
    check_finite(samples);
    const auto usable = non_constant(samples);
    const double n = static_cast<double>(samples.size());

    std::array<double, kNumFeatures> mean{}, sd{};
    for (int f = 0; f < kNumFeatures; ++f) {
        const auto uf = static_cast<std::size_t>(f);
        double m = 0.0;
        for (const auto& s : samples)
            m += s.features[uf];
        m /= n;
        double v = 0.0;
        for (const auto& s : samples)
            v += (s.features[uf] - m) * (s.features[uf] - m);
        mean[uf] = m;
        sd[uf] = std::sqrt(v / n);
    }
    std::vector<std::array<double, kNumFeatures>> x(samples.size());
    std::vector<int> y(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t f = 0; f < static_cast<std::size_t>(kNumFeatures); ++f)
            x[i][f] = usable[f] && sd[f] > 0.0 ? (samples[i].features[f] - mean[f]) / sd[f] : 0.0;
        y[i] = class_index(samples[i].label);
    }
    TreeBuilder tb{x, y, usable, params, n, {}};
    std::vector<int> idx(samples.size());
    std::iota(idx.begin(), idx.end(), 0);
    tb.grow(std::move(idx), 0);
    return tb.importance;
}

FeatureIndices select_features(const std::vector<TrainingSample>& samples, const TreeParams& params)
{
    if (samples.size() < 50)
        fail(ErrorCode::DegenerateData, "feature selection needs at least 50 samples, got " +
                                            std::to_string(samples.size()));
    if (distinct_classes(samples) < 2)
        fail(ErrorCode::DegenerateData, "feature selection needs at least two classes");
    check_finite(samples);
    const auto usable = non_constant(samples);
    if (std::count(usable.begin(), usable.end(), true) < kNumSelected)
        fail(ErrorCode::DegenerateData, "fewer than five non-constant features");
    const auto imp = feature_importances(samples, params);
    std::vector<int> order;
    for (int f = 0; f < kNumFeatures; ++f)
        if (usable[static_cast<std::size_t>(f)])
            order.push_back(f);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return imp[static_cast<std::size_t>(a)] > imp[static_cast<std::size_t>(b)]; });
    FeatureIndices out{};
    std::copy_n(order.begin(), kNumSelected, out.begin());
    return out;
}

// ---- scaling and kernel -----------------------------------------------------------

Scaler Scaler::fit(const std::vector<std::vector<double>>& rows)
{
    if (rows.empty())
        fail(ErrorCode::DegenerateData, "cannot fit a scaler on zero rows");
    const std::size_t m = rows.front().size();
    const double n = static_cast<double>(rows.size());
    Scaler s;
    s.mean.assign(m, 0.0);
    s.stddev.assign(m, 0.0);
    for (const auto& r : rows)
        for (std::size_t f = 0; f < m; ++f)
            s.mean[f] += r[f];
    for (auto& v : s.mean)
        v /= n;
    for (const auto& r : rows)
        for (std::size_t f = 0; f < m; ++f)
            s.stddev[f] += (r[f] - s.mean[f]) * (r[f] - s.mean[f]);
    for (std::size_t f = 0; f < m; ++f) {
        s.stddev[f] = std::sqrt(s.stddev[f] / n);
        if (!(s.stddev[f] > 0.0))
            fail(ErrorCode::DegenerateData, "selected feature " + std::to_string(f) + " is constant");
    }
    return s;
}

std::vector<double> Scaler::standardize(const std::vector<double>& x) const
{
    std::vector<double> z(x.size());
    for (std::size_t f = 0; f < x.size(); ++f)
        z[f] = (x[f] - mean[f]) / stddev[f];
    return z;
}

std::vector<double> Scaler::destandardize(const std::vector<double>& z) const
{
    std::vector<double> x(z.size());
    for (std::size_t f = 0; f < z.size(); ++f)
        x[f] = z[f] * stddev[f] + mean[f];
    return x;
}

double rbf_kernel(const std::vector<double>& a, const std::vector<double>& b, double gamma)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = a[i] - b[i];
        s += t * t;
    }
    return std::exp(-gamma * s);
}

double BinaryMachine::decision(const std::vector<double>& z, double gamma) const
{
    double s = 0.0;
    for (std::size_t i = 0; i < support_vectors.size(); ++i)
        s += dual_coef[i] * rbf_kernel(support_vectors[i], z, gamma);
    return s + bias;
}

// ---- SMO ----------------------------------------------------------------------------

namespace {

constexpr double kTau = 1e-12;
constexpr std::size_t kMaxCachedKernel = 6000;

class Kernel {
public:
    Kernel(const std::vector<std::vector<double>>& x, double gamma) : x_(x), gamma_(gamma), n_(x.size())
    {
        if (n_ <= kMaxCachedKernel) {
            cache_.resize(n_ * n_);
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = 0; j <= i; ++j)
                    cache_[i * n_ + j] = cache_[j * n_ + i] = i == j ? 1.0 : rbf_kernel(x[i], x[j], gamma);
        }
    }

    double operator()(std::size_t i, std::size_t j) const
    {
        return cache_.empty() ? (i == j ? 1.0 : rbf_kernel(x_[i], x_[j], gamma_)) : cache_[i * n_ + j];
    }

private:
    const std::vector<std::vector<double>>& x_;
    double gamma_;
    std::size_t n_;
    std::vector<double> cache_;
};

BinaryMachine smo(const std::vector<std::vector<double>>& x, const std::vector<int>& y, const Kernel& k,
                  const TrainConfig& cfg)
{
    const std::size_t n = x.size();
    const double c = cfg.c;
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);
    const long long max_iter = static_cast<long long>(cfg.max_passes) * static_cast<long long>(std::max<std::size_t>(n, 1));
    auto upper = [&](std::size_t t) { return alpha[t] >= c; };
    auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };
    auto q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * k(i, j); };

    BinaryMachine m;
    double gap = std::numeric_limits<double>::infinity();
    long long iter = 0;
    for (; iter < max_iter; ++iter) {
        // second-order working set selection
        double gmax = -std::numeric_limits<double>::infinity();
        double gmax2 = -std::numeric_limits<double>::infinity();
        std::ptrdiff_t ii = -1, jj = -1;
        for (std::size_t t = 0; t < n; ++t) {
            if (y[t] == 1 ? !upper(t) : !lower(t)) {
                const double v = -y[t] * grad[t];
                if (v >= gmax) {
                    gmax = v;
                    ii = static_cast<std::ptrdiff_t>(t);
                }
            }
        }
        double obj_min = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            if (y[t] == 1 ? lower(t) : upper(t))
                continue;
            const double v = y[t] * grad[t];
            gmax2 = std::max(gmax2, v);
            if (ii < 0)
                continue;
            const auto i = static_cast<std::size_t>(ii);
            const double diff = gmax + v;
            if (diff > 0.0) {
                double quad = 2.0 - 2.0 * y[i] * y[t] * k(i, t);
                if (quad <= 0.0)
                    quad = kTau;
                const double obj = -(diff * diff) / quad;
                if (obj <= obj_min) {
                    obj_min = obj;
                    jj = static_cast<std::ptrdiff_t>(t);
                }
            }
        }
        gap = gmax + gmax2;
        if (ii < 0 || jj < 0 || gap < cfg.tol)
            break;

        const auto i = static_cast<std::size_t>(ii);
        const auto j = static_cast<std::size_t>(jj);
        const double ai = alpha[i], aj = alpha[j];
        const double qij = q(i, j);
        if (y[i] != y[j]) {
            double quad = 2.0 + 2.0 * qij;
            if (quad <= 0.0)
                quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if (alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            double quad = 2.0 - 2.0 * qij;
            if (quad <= 0.0)
                quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > c) {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        const double dai = alpha[i] - ai, daj = alpha[j] - aj;
        for (std::size_t t = 0; t < n; ++t)
            grad[t] += q(i, t) * dai + q(j, t) * daj;
    }
    m.converged = gap < cfg.tol;
    m.kkt_gap = std::isfinite(gap) ? gap : 0.0;
    m.iterations = iter;

    // bias from free multipliers, midpoint of the feasible interval otherwise
    double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    int n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (upper(t)) {
            if (y[t] == -1)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else if (lower(t)) {
            if (y[t] == 1)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    double r;
    if (n_free > 0)
        r = sum_free / n_free;
    else if (std::isfinite(ub) && std::isfinite(lb))
        r = 0.5 * (ub + lb);
    else
        r = std::isfinite(ub) ? ub : (std::isfinite(lb) ? lb : 0.0);
    m.bias = -r;

    for (std::size_t t = 0; t < n; ++t) {
        m.dual_sum += alpha[t] * y[t];
        if (alpha[t] > 0.0) {
            m.support_vectors.push_back(x[t]);
            m.dual_coef.push_back(alpha[t] * y[t]);
        }
    }
    return m;
}

std::vector<double> pick(const FeatureVector& f, const FeatureIndices& idx)
{
    std::vector<double> out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        out[i] = f[static_cast<std::size_t>(idx[i])];
    return out;
}

} // namespace

BinaryMachine train_binary(const std::vector<std::vector<double>>& x, const std::vector<int>& y, double gamma,
                           const TrainConfig& config)
{
    if (x.size() != y.size() || x.empty())
        fail(ErrorCode::DimensionMismatch, "training inputs and labels differ in length or are empty");
    for (int v : y)
        if (v != 1 && v != -1)
            fail(ErrorCode::InvalidArgument, "binary labels must be -1 or +1");
    if (!(gamma > 0.0) || !(config.c > 0.0) || !(config.tol > 0.0) || config.max_passes <= 0)
        fail(ErrorCode::InvalidArgument, "gamma, C, tol and max_passes must be positive");
    const Kernel k(x, gamma);
    return smo(x, y, k, config);
}

bool SvcModel::converged() const
{
    return std::all_of(machines.begin(), machines.end(), [](const BinaryMachine& m) { return m.converged; });
}

std::array<double, 3> SvcModel::decision_values(const FeatureVector& features) const
{
    const auto z = scaler.standardize(pick(features, selected));
    std::array<double, 3> out{};
    for (std::size_t c = 0; c < 3; ++c)
        out[c] = machines[c].decision(z, gamma);
    return out;
}

SvcModel train_svc(const std::vector<TrainingSample>& samples, const TrainConfig& config)
{
    return train_svc(samples, select_features(samples), config);
}

SvcModel train_svc(const std::vector<TrainingSample>& samples, const FeatureIndices& selected,
                   const TrainConfig& config)
{
    if (distinct_classes(samples) < 3)
        fail(ErrorCode::DegenerateData, "training needs samples of all three classes");
    check_finite(samples);
    for (int f : selected)
        if (f < 0 || f >= kNumFeatures)
            fail(ErrorCode::InvalidArgument, "feature index out of range");
    for (std::size_t a = 0; a < selected.size(); ++a)
        for (std::size_t b = a + 1; b < selected.size(); ++b)
            if (selected[a] == selected[b])
                fail(ErrorCode::InvalidArgument, "selected feature indices must be distinct");

    SvcModel model;
    model.selected = selected;
    model.seed = config.seed;
    model.samples = samples.size();
    if (samples.size() >= 50 && distinct_classes(samples) >= 2)
        model.importances = feature_importances(samples);

    std::vector<std::vector<double>> raw;
    raw.reserve(samples.size());
    for (const auto& s : samples)
        raw.push_back(pick(s.features, selected));
    model.scaler = Scaler::fit(raw);
    std::vector<std::vector<double>> z;
    z.reserve(raw.size());
    for (const auto& r : raw)
        z.push_back(model.scaler.standardize(r));

    double var_sum = 0.0;
    const double n = static_cast<double>(z.size());
    for (std::size_t f = 0; f < selected.size(); ++f) {
        double m = 0.0, v = 0.0;
        for (const auto& r : z)
            m += r[f];
        m /= n;
        for (const auto& r : z)
            v += (r[f] - m) * (r[f] - m);
        var_sum += v / n;
    }
    model.gamma = 1.0 / (5.0 * (var_sum / static_cast<double>(selected.size())));

    const Kernel k(z, model.gamma);
    for (std::size_t c = 0; c < 3; ++c) {
        std::vector<int> y(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i)
            y[i] = class_index(samples[i].label) == static_cast<int>(c) ? 1 : -1;
        model.machines[c] = smo(z, y, k, config);
    }
    model.training_accuracy = accuracy(model, samples);
    return model;
}

AggregateAction predict(const SvcModel& model, const FeatureVector& features)
{
    const auto v = model.decision_values(features);
    std::size_t best = 0;
    for (std::size_t c = 1; c < 3; ++c)
        if (v[c] > v[best])
            best = c;
    return static_cast<AggregateAction>(best);
}

AggregateAction predict(const SvcModel& model, const FleetState& state, const Scenario& scenario, int k)
{
    return predict(model, extract_features(state, scenario, k));
}

double accuracy(const SvcModel& model, const std::vector<TrainingSample>& samples)
{
    if (samples.empty())
        return 0.0;
    std::size_t hits = 0;
    for (const auto& s : samples)
        if (predict(model, s.features) == s.label)
            ++hits;
    return static_cast<double>(hits) / static_cast<double>(samples.size());
}

void split_uniform(const std::vector<TrainingSample>& all, std::size_t count, std::uint64_t seed,
                   std::vector<TrainingSample>& train, std::vector<TrainingSample>& held_out)
{
    if (count > all.size())
        fail(ErrorCode::DegenerateData, "requested " + std::to_string(count) + " training samples but only " +
                                            std::to_string(all.size()) + " are available");
    std::vector<std::size_t> idx(all.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick_one(i, idx.size() - 1);
        std::swap(idx[i], idx[pick_one(rng)]);
    }
    std::vector<bool> chosen(all.size(), false);
    for (std::size_t i = 0; i < count; ++i)
        chosen[idx[i]] = true;
    train.clear();
    held_out.clear();
    for (std::size_t i = 0; i < all.size(); ++i)
        (chosen[i] ? train : held_out).push_back(all[i]);
}

// ---- serialization -----------------------------------------------------------------

std::string model_to_json(const SvcModel& m)
{
    using nlohmann::json;
    json machines = json::array();
    for (std::size_t c = 0; c < 3; ++c) {
        const auto& b = m.machines[c];
        machines.push_back({{"class", std::string(1, to_char(static_cast<AggregateAction>(c)))},
                            {"bias", b.bias},
                            {"support_vectors", b.support_vectors},
                            {"dual_coefficients", b.dual_coef},
                            {"converged", b.converged},
                            {"kkt_gap", b.kkt_gap},
                            {"dual_sum", b.dual_sum},
                            {"iterations", b.iterations}});
    }
    json j = {{"format_version", kModelVersion},
              {"selected_features", m.selected},
              {"feature_names", kFeatureNames},
              {"scaler", {{"mean", m.scaler.mean}, {"stddev", m.scaler.stddev}}},
              {"kernel", {{"type", "rbf"}, {"gamma", m.gamma}}},
              {"machines", machines},
              {"meta",
               {{"seed", m.seed},
                {"samples", m.samples},
                {"training_accuracy", m.training_accuracy},
                {"importances", m.importances}}}};
    return j.dump(2) + "\n";
}

SvcModel model_from_json(const std::string& text)
{
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, std::string("model JSON: ") + e.what());
    }
    SvcModel m;
    try {
        if (!j.contains("format_version"))
            fail(ErrorCode::ModelVersion, "model file has no format_version");
        const int version = j.at("format_version").get<int>();
        if (version != kModelVersion)
            fail(ErrorCode::ModelVersion, "model format_version " + std::to_string(version) + " is not supported (expected " +
                                              std::to_string(kModelVersion) + ")");
        m.selected = j.at("selected_features").get<FeatureIndices>();
        m.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
        m.scaler.stddev = j.at("scaler").at("stddev").get<std::vector<double>>();
        if (j.at("kernel").at("type").get<std::string>() != "rbf")
            fail(ErrorCode::Parse, "model kernel must be rbf");
        m.gamma = j.at("kernel").at("gamma").get<double>();
        const auto& ms = j.at("machines");
        if (!ms.is_array() || ms.size() != 3)
            fail(ErrorCode::Parse, "model needs exactly three machines");
        for (std::size_t c = 0; c < 3; ++c) {
            auto& b = m.machines[c];
            const auto& e = ms[c];
            b.bias = e.at("bias").get<double>();
            b.support_vectors = e.at("support_vectors").get<std::vector<std::vector<double>>>();
            b.dual_coef = e.at("dual_coefficients").get<std::vector<double>>();
            b.converged = e.at("converged").get<bool>();
            b.kkt_gap = e.at("kkt_gap").get<double>();
            b.dual_sum = e.at("dual_sum").get<double>();
            b.iterations = e.at("iterations").get<long long>();
            if (b.support_vectors.size() != b.dual_coef.size())
                fail(ErrorCode::Parse, "support vector and coefficient counts differ");
            for (const auto& sv : b.support_vectors)
                if (sv.size() != static_cast<std::size_t>(kNumSelected))
                    fail(ErrorCode::Parse, "support vector has wrong dimension");
        }
        const auto& meta = j.at("meta");
        m.seed = meta.at("seed").get<std::uint64_t>();
        m.samples = meta.at("samples").get<std::size_t>();
        m.training_accuracy = meta.at("training_accuracy").get<double>();
        m.importances = meta.at("importances").get<std::array<double, kNumFeatures>>();
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, std::string("model JSON: ") + e.what());
    }
    if (m.scaler.mean.size() != static_cast<std::size_t>(kNumSelected) ||
        m.scaler.stddev.size() != static_cast<std::size_t>(kNumSelected))
        fail(ErrorCode::Parse, "scaler must have five entries");
    for (double s : m.scaler.stddev)
        if (!(s > 0.0))
            fail(ErrorCode::Parse, "scaler stddev must be positive");
    for (int f : m.selected)
        if (f < 0 || f >= kNumFeatures)
            fail(ErrorCode::Parse, "selected feature index out of range");
    if (!(m.gamma > 0.0))
        fail(ErrorCode::Parse, "gamma must be positive");
    return m;
}

void save_model(const SvcModel& model, const std::string& path) { text::write_file(path, model_to_json(model)); }

SvcModel load_model(const std::string& path) { return model_from_json(text::read_file(path)); }

namespace {

std::string dataset_header()
{
    std::string h = "scenario_id,slot";
    for (int f = 1; f <= kNumFeatures; ++f)
        h += ",f" + std::to_string(f);
    return h + ",label";
}

} // namespace

std::string dataset_to_csv(const std::vector<TrainingSample>& samples)
{
    std::string out = dataset_header() + "\n";
    for (const auto& s : samples) {
        out += std::to_string(s.scenario_id) + "," + std::to_string(s.slot);
        for (double v : s.features)
            out += "," + text::format_double(v);
        out += ",";
        out += to_char(s.label);
        out += "\n";
    }
    return out;
}

std::vector<TrainingSample> dataset_from_csv(const std::string& body, const std::string& origin)
{
    std::vector<TrainingSample> out;
    std::size_t pos = 0;
    int line_no = 0;
    bool header_seen = false;
    while (pos <= body.size()) {
        const auto nl = body.find('\n', pos);
        std::string_view line(body.data() + pos, (nl == std::string::npos ? body.size() : nl) - pos);
        pos = nl == std::string::npos ? body.size() + 1 : nl + 1;
        ++line_no;
        line = text::trim(line);
        if (line.empty())
            continue;
        const auto where = origin + ":" + std::to_string(line_no) + ": ";
        if (!header_seen) {
            if (line != dataset_header())
                fail(ErrorCode::Parse, where + "expected header '" + dataset_header() + "'");
            header_seen = true;
            continue;
        }
        const auto f = text::split(line);
        if (f.size() != static_cast<std::size_t>(kNumFeatures + 3))
            fail(ErrorCode::Parse, where + "expected " + std::to_string(kNumFeatures + 3) + " fields");
        TrainingSample s;
        long long id = 0, slot = 0;
        if (!text::parse_int(f[0], id) || !text::parse_int(f[1], slot))
            fail(ErrorCode::Parse, where + "bad scenario_id or slot");
        s.scenario_id = static_cast<int>(id);
        s.slot = static_cast<int>(slot);
        for (std::size_t i = 0; i < static_cast<std::size_t>(kNumFeatures); ++i) {
            if (!text::parse_double(f[i + 2], s.features[i]) || !std::isfinite(s.features[i]))
                fail(ErrorCode::Parse, where + "bad feature f" + std::to_string(i + 1));
        }
        const auto lab = text::trim(f.back());
        if (lab.size() != 1 || (lab[0] != 'C' && lab[0] != 'I' && lab[0] != 'D'))
            fail(ErrorCode::Parse, where + "label must be C, I or D");
        s.label = aggregate_from_char(lab[0]);
        out.push_back(s);
    }
    if (!header_seen)
        fail(ErrorCode::EmptyScenario, origin + ": empty dataset");
    return out;
}

} // namespace fleetdp::learner
