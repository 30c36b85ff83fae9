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
#include "reinfect/integrator.hpp"
#include "reinfect/model.hpp"
#include "reinfect/observations.hpp"
#include "reinfect/parallel.hpp"
#include "reinfect/random.hpp"
#include "reinfect/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace reinfect {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Poisson means at or below zero are replaced by this before taking logs.
inline constexpr double kRateFloor = 1e-10;

// ---------------------------------------------------------------------------
// Parameter layout
// ---------------------------------------------------------------------------

/// Maps between a ParameterSet and the flat vector of parameters the sampler
/// moves. Parameters not in the layout keep the values of the base set.
class ParameterLayout
{
public:
    enum class Slot { Alpha, Beta, Gamma1, Phi, Gamma2, Mu, Kappa, Eta, Zeta1, Zeta2 };

    struct Entry {
        Slot slot;
        std::size_t segment = 0;
        std::string name;
    };

    ParameterLayout() = default;

    /// Every parameter of `base` except those named in `fixed`. A group name
    /// ("alpha", "gamma1", "phi") fixes all of its segments.
    explicit ParameterLayout(ParameterSet base, const std::vector<std::string>& fixed = {"gamma2", "kappa"})
        : base_(std::move(base))
    {
        const auto all = all_entries(base_);
        for (const auto& f : fixed) {
            bool known = false;
            for (const auto& e : all)
                known = known || e.name == f || group_name(e.slot) == f;
            if (!known)
                throw Error(ErrorCategory::Config, "unknown parameter '" + f + "' in fixed list");
        }
        for (const auto& e : all) {
            const bool is_fixed = std::find_if(fixed.begin(), fixed.end(), [&](const std::string& f) {
                                      return f == e.name || f == group_name(e.slot);
                                  }) != fixed.end();
            if (!is_fixed)
                entries_.push_back(e);
        }
    }

    /// Names of every parameter of `p`, in table order.
    static std::vector<Entry> all_entries(const ParameterSet& p)
    {
        std::vector<Entry> out;
        auto add_schedule = [&](Slot slot, const RateSchedule& s) {
            for (std::size_t i = 0; i < s.segments(); ++i)
                out.push_back({slot, i, std::string(group_name(slot)) + "_" + std::to_string(i)});
        };
        add_schedule(Slot::Alpha, p.alpha);
        out.push_back({Slot::Beta, 0, "beta"});
        add_schedule(Slot::Gamma1, p.gamma1);
        add_schedule(Slot::Phi, p.phi);
        out.push_back({Slot::Gamma2, 0, "gamma2"});
        out.push_back({Slot::Mu, 0, "mu"});
        out.push_back({Slot::Kappa, 0, "kappa"});
        out.push_back({Slot::Eta, 0, "eta"});
        out.push_back({Slot::Zeta1, 0, "zeta1"});
        out.push_back({Slot::Zeta2, 0, "zeta2"});
        return out;
    }

    static std::string_view group_name(Slot s)
    {
        switch (s) {
        case Slot::Alpha: return "alpha";
        case Slot::Beta: return "beta";
        case Slot::Gamma1: return "gamma1";
        case Slot::Phi: return "phi";
        case Slot::Gamma2: return "gamma2";
        case Slot::Mu: return "mu";
        case Slot::Kappa: return "kappa";
        case Slot::Eta: return "eta";
        case Slot::Zeta1: return "zeta1";
        case Slot::Zeta2: return "zeta2";
        }
        return "";
    }

    static double& ref(ParameterSet& p, const Entry& e)
    {
        switch (e.slot) {
        case Slot::Alpha: return p.alpha.rates.at(e.segment);
        case Slot::Beta: return p.beta;
        case Slot::Gamma1: return p.gamma1.rates.at(e.segment);
        case Slot::Phi: return p.phi.rates.at(e.segment);
        case Slot::Gamma2: return p.gamma2;
        case Slot::Mu: return p.mu;
        case Slot::Kappa: return p.kappa;
        case Slot::Eta: return p.eta;
        case Slot::Zeta1: return p.zeta1;
        case Slot::Zeta2: return p.zeta2;
        }
        return p.beta;
    }

    static double get(const ParameterSet& p, const Entry& e)
    {
        return ref(const_cast<ParameterSet&>(p), e);
    }

    std::size_t size() const
    {
        return entries_.size();
    }
    const Entry& entry(std::size_t i) const
    {
        return entries_[i];
    }
    const std::string& name(std::size_t i) const
    {
        return entries_[i].name;
    }
    bool is_probability(std::size_t i) const
    {
        return entries_[i].slot == Slot::Kappa;
    }
    bool contains(std::string_view name) const
    {
        return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == name; });
    }
    const ParameterSet& base() const
    {
        return base_;
    }

    std::vector<double> extract(const ParameterSet& p) const
    {
        std::vector<double> out(entries_.size());
        for (std::size_t i = 0; i < entries_.size(); ++i)
            out[i] = get(p, entries_[i]);
        return out;
    }

    ParameterSet assemble(std::span<const double> values) const
    {
        ParameterSet p = base_;
        for (std::size_t i = 0; i < entries_.size(); ++i)
            ref(p, entries_[i]) = values[i];
        return p;
    }

private:
    ParameterSet base_;
    std::vector<Entry> entries_;
};

// ---------------------------------------------------------------------------
// Prior and likelihood
// ---------------------------------------------------------------------------

/// Exp(1) on every sampled rate, Beta(1, 1) on kappa when it is sampled.
/// Returns -inf outside the support.
inline double log_prior(const ParameterSet& params, const ParameterLayout& layout)
{
    double lp = 0.0;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const double x = ParameterLayout::get(params, layout.entry(i));
        if (std::isnan(x))
            return kNegInf;
        if (layout.is_probability(i)) {
            if (x < 0.0 || x > 1.0)
                return kNegInf;
        }
        else {
            if (x < 0.0 || !std::isfinite(x))
                return kNegInf;
            lp -= x;
        }
    }
    return lp;
}

/// Prior with every rate sampled (gamma2 included) and kappa fixed.
inline double log_prior(const ParameterSet& params)
{
    return log_prior(params, ParameterLayout(params, {"kappa"}));
}

inline double poisson_log_pmf(std::int64_t k, double lambda)
{
    const double rate = lambda > kRateFloor ? lambda : kRateFloor;
    const auto kd = static_cast<double>(k);
    return kd * std::log(rate) - rate - std::lgamma(kd + 1.0);
}

/// Everything besides the parameters that a likelihood evaluation needs.
struct FitContext {
    ModelTag model = ModelTag::M1;
    StateVector initial;
    VaccinationPolicy policy;
    int horizon = 0; ///< 0 means "last observed day"
    IntegratorOptions integrator;

    int resolved_horizon(const ObservationSeries& obs) const
    {
        return horizon > 0 ? horizon : obs.last_day();
    }
};

/// Poisson log-likelihood of the observed cells given a mean trajectory.
/// Latent compartments (S, S2, E, RE) never enter.
inline double log_likelihood(const ObservationSeries& obs, const MeanTrajectory& traj)
{
    if (obs.last_day() > traj.horizon())
        throw Error(ErrorCategory::Input, "observations extend past the integration horizon");
    double ll = 0.0;
    for (Series s : all_series) {
        const std::size_t c = series_compartment(traj.model(), s);
        for (int d = 0; d <= obs.last_day(); ++d) {
            if (auto k = obs.get(s, d))
                ll += poisson_log_pmf(*k, traj.at(d, c));
        }
    }
    return ll;
}

/// Integrates the model and scores the observations. Instability errors propagate.
inline double log_likelihood(const ParameterSet& params, const ObservationSeries& obs, const FitContext& ctx)
{
    if (obs.observed_cells() == 0)
        return 0.0;
    const int horizon = ctx.resolved_horizon(obs);
    if (obs.last_day() > horizon)
        throw Error(ErrorCategory::Input, "observations extend past the integration horizon");
    return log_likelihood(obs, integrate(ctx.model, ctx.initial, params, ctx.policy, horizon, ctx.integrator));
}

/// Prior plus likelihood. Skips integration when the prior is -inf, and
/// scores an unstable integration as -inf so the sampler can reject it.
inline double log_posterior(const ParameterSet& params, const ParameterLayout& layout, const ObservationSeries& obs,
                            const FitContext& ctx)
{
    const double lp = log_prior(params, layout);
    if (!std::isfinite(lp))
        return kNegInf;
    try {
        return lp + log_likelihood(params, obs, ctx);
    }
    catch (const InstabilityError&) {
        return kNegInf;
    }
    catch (const Error& e) {
        if (e.category() == ErrorCategory::Validation)
            return kNegInf;
        throw;
    }
}

// ---------------------------------------------------------------------------
// Metropolis-Hastings
// ---------------------------------------------------------------------------

struct SamplerConfig {
    std::size_t n_draws = 50000;
    std::size_t tuning_chains = 10;
    std::size_t tuning_iterations = 1000;
    std::uint64_t seed = 1;
    double initial_scale = 0.1;
    std::vector<double> proposal_scales; ///< overrides initial_scale per component when non-empty
    double target_low = 0.20;
    double target_high = 0.45;
    bool keep_tuning_trace = true;
};

/// Probability of accepting a move between two (transformed) log targets.
inline double acceptance_probability(double log_current, double log_proposed)
{
    if (std::isnan(log_proposed) || log_proposed == kNegInf)
        return 0.0;
    const double r = log_proposed - log_current;
    return r >= 0.0 ? 1.0 : std::exp(r);
}

struct PosteriorDraws {
    ParameterLayout layout;
    std::size_t n = 0;
    std::vector<double> values;        ///< n x layout.size(), row major
    std::vector<double> log_posterior; ///< one per draw
    std::vector<double> acceptance_rates;
    std::vector<double> proposal_scales;
    std::vector<std::vector<double>> tuning_acceptance; ///< per tuning chain
    std::uint64_t seed = 0;
    SamplerConfig config;

    // Discarded tuning iterations, kept for trace export.
    std::vector<double> tuning_values;
    std::vector<double> tuning_log_posterior;

    std::size_t size() const
    {
        return n;
    }
    std::size_t dim() const
    {
        return layout.size();
    }
    double value(std::size_t draw, std::size_t component) const
    {
        return values[draw * dim() + component];
    }
    std::span<const double> row(std::size_t draw) const
    {
        return {values.data() + draw * dim(), dim()};
    }
    ParameterSet draw(std::size_t i) const
    {
        return layout.assemble(row(i));
    }
    std::vector<double> column(std::size_t component) const
    {
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = value(i, component);
        return out;
    }
};

namespace detail {

inline double to_unconstrained(double x, bool probability)
{
    return probability ? std::log(x) - std::log1p(-x) : std::log(x);
}

inline double from_unconstrained(double y, bool probability)
{
    return probability ? 1.0 / (1.0 + std::exp(-y)) : std::exp(y);
}

/// log |dx/dy| for the transform above.
inline double log_jacobian(double x, bool probability)
{
    return probability ? std::log(x) + std::log1p(-x) : std::log(x);
}

} // namespace detail

/// Componentwise Gaussian random-walk Metropolis-Hastings on log-rates
/// (logit for kappa). A sequence of tuning chains adjusts each proposal scale
/// until its acceptance rate falls in [target_low, target_high]; those chains
/// are discarded and n_draws full sweeps are then recorded.
/// `log_target(ParameterSet)` returns the log posterior density.
template <class LogTarget>
PosteriorDraws mh_sample(const ParameterLayout& layout, LogTarget&& log_target, const SamplerConfig& config)
{
    if (config.n_draws < 1)
        throw Error(ErrorCategory::Input, "n_draws must be at least 1");
    const std::size_t d = layout.size();
    if (d == 0)
        throw Error(ErrorCategory::Config, "no free parameters to sample");
    if (!config.proposal_scales.empty() && config.proposal_scales.size() != d)
        throw Error(ErrorCategory::Config, "proposal_scales has " + std::to_string(config.proposal_scales.size()) +
                                               " entries for " + std::to_string(d) + " parameters");

    std::vector<double> x = layout.extract(layout.base());
    std::vector<double> y(d);
    for (std::size_t j = 0; j < d; ++j) {
        const bool prob = layout.is_probability(j);
        if (x[j] <= 0.0 || (prob && x[j] >= 1.0) || !std::isfinite(x[j]))
            throw Error(ErrorCategory::Initialization,
                        "starting value of " + layout.name(j) + " is outside the open support of its transform");
        y[j] = detail::to_unconstrained(x[j], prob);
    }
    ParameterSet current = layout.assemble(x);
    double lp = log_target(current);
    if (!std::isfinite(lp))
        throw Error(ErrorCategory::Initialization, "log posterior at the starting point is not finite");

    std::vector<double> scales =
        config.proposal_scales.empty() ? std::vector<double>(d, config.initial_scale) : config.proposal_scales;

    Rng rng(derive_seed(config.seed, kStreamSampler, 0));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<std::size_t> accepted(d, 0);

    auto sweep = [&] {
        for (std::size_t j = 0; j < d; ++j) {
            const bool prob = layout.is_probability(j);
            const double y_new = y[j] + scales[j] * normal(rng);
            const double x_new = detail::from_unconstrained(y_new, prob);
            const double x_old = x[j];
            double lp_new = kNegInf;
            if (x_new > 0.0 && std::isfinite(x_new) && !(prob && x_new >= 1.0)) {
                ParameterLayout::ref(current, layout.entry(j)) = x_new;
                lp_new = log_target(current);
            }
            const double log_ratio = (lp_new + detail::log_jacobian(x_new, prob)) - (lp + detail::log_jacobian(x_old, prob));
            if (std::isfinite(lp_new) && std::log(uniform(rng)) < log_ratio) {
                y[j] = y_new;
                x[j] = x_new;
                lp = lp_new;
                ++accepted[j];
            }
            else {
                ParameterLayout::ref(current, layout.entry(j)) = x_old;
            }
        }
    };

    PosteriorDraws out;
    out.layout = layout;
    out.seed = config.seed;
    out.config = config;

    for (std::size_t chain = 0; chain < config.tuning_chains; ++chain) {
        std::fill(accepted.begin(), accepted.end(), 0);
        for (std::size_t it = 0; it < config.tuning_iterations; ++it) {
            sweep();
            if (config.keep_tuning_trace) {
                out.tuning_values.insert(out.tuning_values.end(), x.begin(), x.end());
                out.tuning_log_posterior.push_back(lp);
            }
        }
        std::vector<double> rates(d);
        for (std::size_t j = 0; j < d; ++j) {
            rates[j] = config.tuning_iterations ? static_cast<double>(accepted[j]) / config.tuning_iterations : 0.0;
            if (rates[j] < config.target_low || rates[j] > config.target_high) {
                const double target = 0.5 * (config.target_low + config.target_high);
                scales[j] *= std::clamp(rates[j] / target, 0.25, 4.0);
            }
        }
        out.tuning_acceptance.push_back(std::move(rates));
    }

    std::fill(accepted.begin(), accepted.end(), 0);
    out.n = config.n_draws;
    out.values.reserve(config.n_draws * d);
    out.log_posterior.reserve(config.n_draws);
    for (std::size_t it = 0; it < config.n_draws; ++it) {
        sweep();
        out.values.insert(out.values.end(), x.begin(), x.end());
        out.log_posterior.push_back(lp);
    }
    out.acceptance_rates.resize(d);
    for (std::size_t j = 0; j < d; ++j)
        out.acceptance_rates[j] = static_cast<double>(accepted[j]) / static_cast<double>(config.n_draws);
    out.proposal_scales = scales;
    return out;
}

/// Posterior sampling of a compartment model against observed counts.
inline PosteriorDraws mh_sample(const ObservationSeries& obs, const FitContext& ctx, const ParameterLayout& layout,
                                const SamplerConfig& config)
{
    return mh_sample(
        layout, [&](const ParameterSet& p) { return log_posterior(p, layout, obs, ctx); }, config);
}

// ---------------------------------------------------------------------------
// Fit diagnostics
// ---------------------------------------------------------------------------

/// Fitted value per observed series and day.
using FittedSeries = std::array<std::vector<double>, kSeriesCount>;

inline FittedSeries fitted_from(const MeanTrajectory& traj)
{
    FittedSeries out;
    for (Series s : all_series)
        out[static_cast<std::size_t>(s)] = traj.series(series_compartment(traj.model(), s));
    return out;
}

/// Pooled 1 - SS_res / SS_tot over all observed cells; SS_tot is taken
/// about each series' own mean.
inline double pseudo_r2(const ObservationSeries& obs, const FittedSeries& fitted)
{
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (Series s : all_series) {
        const auto si = static_cast<std::size_t>(s);
        double sum = 0.0;
        std::size_t n = 0;
        for (int d = 0; d <= obs.last_day(); ++d) {
            if (auto k = obs.get(s, d)) {
                sum += static_cast<double>(*k);
                ++n;
            }
        }
        if (n == 0)
            continue;
        if (fitted[si].size() < obs.days())
            throw Error(ErrorCategory::Input, "fitted series shorter than the observations");
        const double mean = sum / static_cast<double>(n);
        for (int d = 0; d <= obs.last_day(); ++d) {
            if (auto k = obs.get(s, d)) {
                const double y = static_cast<double>(*k);
                const double r = y - fitted[si][static_cast<std::size_t>(d)];
                ss_res += r * r;
                ss_tot += (y - mean) * (y - mean);
            }
        }
    }
    if (!(ss_tot > 0.0))
        throw Error(ErrorCategory::UndefinedStatistic, "observations have zero total variance");
    return 1.0 - ss_res / ss_tot;
}

inline double pseudo_r2(const ObservationSeries& obs, const MeanTrajectory& fitted)
{
    return pseudo_r2(obs, fitted_from(fitted));
}

/// Pointwise quantiles of the mean trajectories of the posterior draws.
struct TrajectoryBands {
    std::vector<double> probabilities;
    /// bands[q][series][day]
    std::vector<FittedSeries> bands;
    std::size_t draws_used = 0;
    std::size_t draws_failed = 0;
};

struct BandOptions {
    std::vector<double> probabilities = {0.025, 0.5, 0.975};
    std::size_t max_draws = 2000; ///< evenly thinned subset of the draws; 0 means all
    unsigned threads = 0;
};

inline std::vector<std::size_t> thinned_indices(std::size_t n, std::size_t max_draws)
{
    std::vector<std::size_t> idx;
    if (max_draws == 0 || max_draws >= n) {
        idx.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            idx[i] = i;
        return idx;
    }
    idx.reserve(max_draws);
    for (std::size_t i = 0; i < max_draws; ++i)
        idx.push_back(i * n / max_draws);
    return idx;
}

inline TrajectoryBands trajectory_bands(const PosteriorDraws& draws, const FitContext& ctx, int horizon,
                                        const BandOptions& options = {})
{
    if (draws.size() == 0)
        throw Error(ErrorCategory::Input, "no posterior draws");
    const auto idx = thinned_indices(draws.size(), options.max_draws);
    const std::size_t days = static_cast<std::size_t>(horizon + 1);
    std::vector<std::optional<FittedSeries>> per_draw(idx.size());
    parallel_for(idx.size(), options.threads, [&](std::size_t i) {
        try {
            per_draw[i] = fitted_from(integrate(ctx.model, ctx.initial, draws.draw(idx[i]), ctx.policy, horizon,
                                                ctx.integrator));
        }
        catch (const Error&) {
        }
    });

    TrajectoryBands out;
    out.probabilities = options.probabilities;
    out.bands.resize(options.probabilities.size());
    for (auto& b : out.bands)
        for (auto& s : b)
            s.assign(days, 0.0);
    std::vector<double> column;
    for (std::size_t s = 0; s < kSeriesCount; ++s) {
        for (std::size_t d = 0; d < days; ++d) {
            column.clear();
            for (const auto& f : per_draw)
                if (f)
                    column.push_back((*f)[s][d]);
            std::sort(column.begin(), column.end());
            for (std::size_t q = 0; q < options.probabilities.size(); ++q)
                out.bands[q][s][d] = stats::quantile_sorted(column, options.probabilities[q]);
        }
    }
    for (const auto& f : per_draw)
        (f ? out.draws_used : out.draws_failed)++;
    if (out.draws_used == 0)
        throw Error(ErrorCategory::Instability, "every posterior draw failed to integrate");
    return out;
}

/// Pseudo-R^2 with the pointwise posterior-median trajectory as fitted values.
inline double pseudo_r2(const PosteriorDraws& draws, const ObservationSeries& obs, const FitContext& ctx,
                        const BandOptions& options = {})
{
    BandOptions median_only = options;
    median_only.probabilities = {0.5};
    const auto bands = trajectory_bands(draws, ctx, ctx.resolved_horizon(obs), median_only);
    return pseudo_r2(obs, bands.bands[0]);
}

} // namespace reinfect
