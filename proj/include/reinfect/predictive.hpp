/*
 * Copyright (C) 2026 The reinfect authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include "reinfect/error.hpp"
#include "reinfect/inference.hpp"
#include "reinfect/integrator.hpp"
#include "reinfect/model.hpp"
#include "reinfect/parallel.hpp"
#include "reinfect/random.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace reinfect {

/// A vaccination timing / efficacy scenario.
struct Scenario {
    int id = 1;
    VaccinationPolicy policy;
    std::string label;
};

inline constexpr int kScenarioCount = 6;

/// 1: day 380 at 94%, 2: day 380 at 100%, 3: day 200 at 94%,
/// 4: day 450 at 94%, 5: day 200 at 100%, 6: day 450 at 100%.
inline Scenario canonical_scenario(int id)
{
    struct Row {
        double start;
        double kappa;
        const char* label;
    };
    static constexpr Row rows[kScenarioCount] = {
        {380.0, 0.94, "observed timing, 94% efficacy"}, {380.0, 1.00, "observed timing, 100% efficacy"},
        {200.0, 0.94, "early vaccine, 94% efficacy"},   {450.0, 0.94, "late vaccine, 94% efficacy"},
        {200.0, 1.00, "early vaccine, 100% efficacy"},  {450.0, 1.00, "late vaccine, 100% efficacy"},
    };
    if (id < 1 || id > kScenarioCount)
        throw Error(ErrorCategory::Input, "scenario id " + std::to_string(id) + " is not in 1..6");
    const Row& r = rows[id - 1];
    return {id, VaccinationPolicy{r.start, r.kappa}, r.label};
}

inline std::vector<Scenario> canonical_scenarios()
{
    std::vector<Scenario> out;
    for (int id = 1; id <= kScenarioCount; ++id)
        out.push_back(canonical_scenario(id));
    return out;
}

/// One posterior draw pushed through a scenario, with Poisson noise added to
/// the daily I, I_I and D means.
struct PredictiveSample {
    std::size_t draw_index = 0;
    std::uint64_t seed = 0;
    MeanTrajectory trajectory;
    std::vector<std::int64_t> infected;
    std::vector<std::int64_t> reinfected;
    std::vector<std::int64_t> deaths;
};

struct PredictiveBatch {
    std::vector<PredictiveSample> samples;
    std::size_t failed = 0;
    std::vector<std::pair<std::size_t, std::string>> failures; ///< draw index, error detail
};

struct PredictiveOptions {
    int horizon = 550;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::size_t max_draws = 0; ///< evenly thinned subset of draws; 0 means all
};

inline std::int64_t sample_poisson(Rng& rng, double lambda)
{
    std::poisson_distribution<std::int64_t> dist(lambda > kRateFloor ? lambda : kRateFloor);
    return dist(rng);
}

/// Simulates draw `index` of `params` under the scenario. Deterministic in
/// (seed, index).
inline PredictiveSample simulate_draw(const ParameterSet& params, std::size_t index, const Scenario& scenario,
                                      const FitContext& ctx, int horizon, std::uint64_t seed)
{
    PredictiveSample s;
    s.draw_index = index;
    s.seed = derive_seed(seed, kStreamPredictive, index);
    s.trajectory = integrate(ctx.model, ctx.initial, params, scenario.policy, horizon, ctx.integrator);
    Rng rng(s.seed);
    const std::size_t days = s.trajectory.days();
    const std::size_t ci = ctx.model == ModelTag::M1 ? std::size_t{m1::I} : std::size_t{m2::I};
    const std::size_t cii = ctx.model == ModelTag::M1 ? std::size_t{m1::II} : std::size_t{m2::II};
    const std::size_t cd = ctx.model == ModelTag::M1 ? std::size_t{m1::D} : std::size_t{m2::D};
    s.infected.resize(days);
    s.reinfected.resize(days);
    s.deaths.resize(days);
    for (std::size_t d = 0; d < days; ++d) {
        const int day = static_cast<int>(d);
        s.infected[d] = sample_poisson(rng, s.trajectory.at(day, ci));
        s.reinfected[d] = sample_poisson(rng, s.trajectory.at(day, cii));
        s.deaths[d] = sample_poisson(rng, s.trajectory.at(day, cd));
    }
    return s;
}

/// Posterior-predictive simulation of every draw (or a thinned subset).
/// Draws whose integration fails are excluded and counted.
inline PredictiveBatch posterior_predict(const PosteriorDraws& draws, const Scenario& scenario, const FitContext& ctx,
                                         const PredictiveOptions& options)
{
    if (draws.size() == 0)
        throw Error(ErrorCategory::Input, "no posterior draws");
    const auto idx = thinned_indices(draws.size(), options.max_draws);
    std::vector<std::optional<PredictiveSample>> slots(idx.size());
    std::vector<std::string> errors(idx.size());
    parallel_for(idx.size(), options.threads, [&](std::size_t i) {
        try {
            slots[i] = simulate_draw(draws.draw(idx[i]), idx[i], scenario, ctx, options.horizon, options.seed);
        }
        catch (const Error& e) {
            errors[i] = e.what();
        }
    });
    PredictiveBatch out;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i])
            out.samples.push_back(std::move(*slots[i]));
        else {
            ++out.failed;
            out.failures.emplace_back(idx[i], errors[i]);
        }
    }
    return out;
}

/// Days 1..horizon on which the value strictly exceeds the threshold.
template <class T>
int count_overload_days(const std::vector<T>& daily, double threshold)
{
    int n = 0;
    for (std::size_t d = 1; d < daily.size(); ++d)
        n += static_cast<double>(daily[d]) > threshold;
    return n;
}

struct OverloadSummary {
    std::vector<int> mean_days;    ///< per draw, from the mean trajectory I(t)
    std::vector<int> sampled_days; ///< per draw, from the Poisson-sampled counts
    int mean_min = 0, mean_max = 0;
    int sampled_min = 0, sampled_max = 0;
};

/// Hospital-overload day counts: days with active infections above `threshold` beds.
inline OverloadSummary overload_days(const std::vector<PredictiveSample>& samples, double threshold)
{
    if (!(threshold >= 0.0))
        throw Error(ErrorCategory::Input, "threshold must be >= 0");
    OverloadSummary out;
    for (const auto& s : samples) {
        const std::size_t ci = s.trajectory.model() == ModelTag::M1 ? std::size_t{m1::I} : std::size_t{m2::I};
        out.mean_days.push_back(count_overload_days(s.trajectory.series(ci), threshold));
        out.sampled_days.push_back(count_overload_days(s.infected, threshold));
    }
    if (!samples.empty()) {
        auto [lo, hi] = std::minmax_element(out.mean_days.begin(), out.mean_days.end());
        out.mean_min = *lo;
        out.mean_max = *hi;
        auto [slo, shi] = std::minmax_element(out.sampled_days.begin(), out.sampled_days.end());
        out.sampled_min = *slo;
        out.sampled_max = *shi;
    }
    return out;
}

enum class CumulativeSeries { Infected, Reinfected, Deaths };

inline std::string_view cumulative_series_name(CumulativeSeries s)
{
    switch (s) {
    case CumulativeSeries::Infected: return "infected";
    case CumulativeSeries::Reinfected: return "reinfected";
    case CumulativeSeries::Deaths: return "deaths";
    }
    return "";
}

/// Infected: I(0) plus integrated beta*E inflow. Reinfected and deaths read
/// the I_I and D compartments.
inline double cumulative_value(const MeanTrajectory& traj, int day, CumulativeSeries series)
{
    if (day < 0 || day > traj.horizon())
        throw Error(ErrorCategory::OutOfRange,
                    "day " + std::to_string(day) + " outside 0.." + std::to_string(traj.horizon()));
    switch (series) {
    case CumulativeSeries::Infected: return traj.cumulative_infections(day);
    case CumulativeSeries::Reinfected:
        return traj.at(day, traj.model() == ModelTag::M1 ? std::size_t{m1::II} : std::size_t{m2::II});
    case CumulativeSeries::Deaths:
        return traj.at(day, traj.model() == ModelTag::M1 ? std::size_t{m1::D} : std::size_t{m2::D});
    }
    return 0.0;
}

inline std::vector<double> cumulative_at_day(const std::vector<PredictiveSample>& samples, int day,
                                             CumulativeSeries series)
{
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples)
        out.push_back(cumulative_value(s.trajectory, day, series));
    return out;
}

/// Per-draw row of the scenario CSV.
struct PredictiveSummary {
    std::size_t draw_index = 0;
    int overload_days = 0;
    int overload_days_sampled = 0;
    double cum_infected = 0.0;
    double cum_reinfected = 0.0;
    double cum_deaths = 0.0;
};

struct ScenarioSummary {
    Scenario scenario;
    int summary_day = 540;
    double threshold = 3134.0;
    std::vector<PredictiveSummary> rows;
    std::size_t failed = 0;
};

/// Streaming variant of posterior_predict: keeps only the per-draw summary
/// so that tens of thousands of draws fit in memory. Rows match what
/// posterior_predict + overload_days + cumulative_at_day would give.
inline ScenarioSummary summarize_scenario(const PosteriorDraws& draws, const Scenario& scenario, const FitContext& ctx,
                                          const PredictiveOptions& options, double threshold, int summary_day)
{
    if (draws.size() == 0)
        throw Error(ErrorCategory::Input, "no posterior draws");
    if (summary_day < 0 || summary_day > options.horizon)
        throw Error(ErrorCategory::OutOfRange, "summary day outside the horizon");
    const auto idx = thinned_indices(draws.size(), options.max_draws);
    std::vector<std::optional<PredictiveSummary>> slots(idx.size());
    parallel_for(idx.size(), options.threads, [&](std::size_t i) {
        try {
            const auto s = simulate_draw(draws.draw(idx[i]), idx[i], scenario, ctx, options.horizon, options.seed);
            const std::size_t ci = ctx.model == ModelTag::M1 ? std::size_t{m1::I} : std::size_t{m2::I};
            PredictiveSummary row;
            row.draw_index = idx[i];
            row.overload_days = count_overload_days(s.trajectory.series(ci), threshold);
            row.overload_days_sampled = count_overload_days(s.infected, threshold);
            row.cum_infected = cumulative_value(s.trajectory, summary_day, CumulativeSeries::Infected);
            row.cum_reinfected = cumulative_value(s.trajectory, summary_day, CumulativeSeries::Reinfected);
            row.cum_deaths = cumulative_value(s.trajectory, summary_day, CumulativeSeries::Deaths);
            slots[i] = row;
        }
        catch (const Error&) {
        }
    });
    ScenarioSummary out;
    out.scenario = scenario;
    out.summary_day = summary_day;
    out.threshold = threshold;
    for (auto& s : slots) {
        if (s)
            out.rows.push_back(*s);
        else
            ++out.failed;
    }
    return out;
}

} // namespace reinfect
