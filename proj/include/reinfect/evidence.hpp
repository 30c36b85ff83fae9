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
#include "reinfect/parallel.hpp"
#include "reinfect/random.hpp"
#include "reinfect/stats.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace reinfect {

struct EvidenceConfig {
    std::size_t n_prior_draws = 100000;
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

struct EvidenceResult {
    double log_marginal = kNegInf;
    std::size_t n_draws = 0;
    std::size_t n_zero = 0;   ///< draws with -inf log-likelihood
    std::size_t n_failed = 0; ///< draws whose integration was unstable
};

/// log((1/n) sum_i exp(loglik_i)) where loglik_i = draw_loglik(rng_i, i) and
/// rng_i depends only on (seed, i). The reduction runs in index order.
template <class DrawLogLik>
EvidenceResult monte_carlo_log_evidence(const EvidenceConfig& config, DrawLogLik&& draw_loglik)
{
    if (config.n_prior_draws < 1)
        throw Error(ErrorCategory::Input, "n_prior_draws must be at least 1");
    std::vector<double> ll(config.n_prior_draws, kNegInf);
    std::vector<char> failed(config.n_prior_draws, 0);
    parallel_for(config.n_prior_draws, config.threads, [&](std::size_t i) {
        Rng rng = make_rng(config.seed, kStreamEvidence, i);
        try {
            ll[i] = draw_loglik(rng, i);
        }
        catch (const InstabilityError&) {
            failed[i] = 1;
        }
    });
    EvidenceResult out;
    out.n_draws = config.n_prior_draws;
    for (std::size_t i = 0; i < ll.size(); ++i) {
        out.n_failed += failed[i];
        out.n_zero += !std::isfinite(ll[i]);
    }
    const double lse = stats::log_sum_exp(ll);
    if (!std::isfinite(lse))
        throw EvidenceUnderflowError(out.n_draws, out.n_failed);
    out.log_marginal = lse - std::log(static_cast<double>(config.n_prior_draws));
    return out;
}

/// Draws every free parameter from its prior: Exp(1) for rates, U(0, 1) for kappa.
inline ParameterSet sample_prior(const ParameterLayout& layout, Rng& rng)
{
    std::exponential_distribution<double> exp1(1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> v(layout.size());
    for (std::size_t j = 0; j < layout.size(); ++j)
        v[j] = layout.is_probability(j) ? unit(rng) : exp1(rng);
    return layout.assemble(v);
}

/// Simple Monte Carlo marginal likelihood over draws from the prior.
inline EvidenceResult log_marginal_likelihood(const ObservationSeries& obs, const FitContext& ctx,
                                              const ParameterLayout& layout, const EvidenceConfig& config)
{
    return monte_carlo_log_evidence(config, [&](Rng& rng, std::size_t) {
        return log_likelihood(sample_prior(layout, rng), obs, ctx);
    });
}

inline double bayes_factor(double log_ml_1, double log_ml_2)
{
    if (!std::isfinite(log_ml_1) || !std::isfinite(log_ml_2))
        throw Error(ErrorCategory::Input, "Bayes factor needs finite log marginal likelihoods");
    return std::exp(log_ml_1 - log_ml_2);
}

/// Kass & Raftery bands on 2 ln BF.
inline std::string interpret_bayes_factor(double bf)
{
    if (bf == 1.0)
        return "no preference";
    const bool first = bf > 1.0;
    const double strength = 2.0 * std::abs(std::log(bf));
    std::string level;
    if (strength < 2.0)
        level = "not worth more than a bare mention";
    else if (strength < 6.0)
        level = "positive";
    else if (strength < 10.0)
        level = "strong";
    else
        level = "very strong";
    return std::string(first ? "favours model 1" : "favours model 2") + " (" + level + ")";
}

} // namespace reinfect
