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
#include "reinfect/config.hpp"
#include "reinfect/evidence.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace reinfect;

namespace {

/// log P(k) with k | lambda ~ Poisson(lambda), lambda ~ Gamma(shape a, rate b).
double negative_binomial_log_pmf(int k, double a, double b)
{
    return std::lgamma(k + a) - std::lgamma(a) - std::lgamma(k + 1.0) + a * std::log(b / (b + 1.0)) -
           k * std::log(b + 1.0);
}

EvidenceResult poisson_gamma_estimate(int k, double a, double b, std::size_t n, std::uint64_t seed,
                                      unsigned threads = 0)
{
    EvidenceConfig cfg{n, seed, threads};
    return monte_carlo_log_evidence(cfg, [&](Rng& rng, std::size_t) {
        std::gamma_distribution<double> g(a, 1.0 / b);
        return poisson_log_pmf(k, g(rng));
    });
}

} // namespace

TEST(Evidence, PoissonGammaConjugate)
{
    for (auto [k, a, b] : {std::tuple{3, 2.0, 1.0}, std::tuple{0, 1.0, 1.0}, std::tuple{12, 5.0, 0.5}}) {
        const double exact = negative_binomial_log_pmf(k, a, b);
        const auto est = poisson_gamma_estimate(k, a, b, 100000, 7);
        EXPECT_NEAR(std::exp(est.log_marginal - exact), 1.0, 0.05) << k;
        EXPECT_EQ(est.n_zero, 0u);
    }
}

TEST(Evidence, SpreadShrinksWithMoreDraws)
{
    const double exact = negative_binomial_log_pmf(8, 2.0, 1.0);
    auto spread = [&](std::size_t n) {
        std::vector<double> e;
        for (std::uint64_t s = 1; s <= 20; ++s)
            e.push_back(poisson_gamma_estimate(8, 2.0, 1.0, n, s).log_marginal - exact);
        return stats::variance(e);
    };
    EXPECT_LT(spread(4000), spread(1000));
}

TEST(Evidence, ThreadCountDoesNotMatter)
{
    const auto a = poisson_gamma_estimate(3, 2.0, 1.0, 5000, 9, 1);
    const auto b = poisson_gamma_estimate(3, 2.0, 1.0, 5000, 9, 3);
    EXPECT_EQ(a.log_marginal, b.log_marginal);
}

TEST(Evidence, EmptyMaskGivesZero)
{
    FitContext ctx;
    ctx.initial = InitialConditions{}.state(ModelTag::M1);
    const ObservationSeries obs(20);
    const ParameterLayout layout(reported_parameters(ModelTag::M1));
    const auto r = log_marginal_likelihood(obs, ctx, layout, {200, 1, 0});
    EXPECT_EQ(r.log_marginal, 0.0);
    EXPECT_EQ(r.n_draws, 200u);
}

TEST(Evidence, IdenticalModelsIdenticalEstimates)
{
    FitContext ctx;
    ctx.model = ModelTag::M2;
    InitialConditions ic;
    ic.S1 = 1000;
    ctx.initial = ic.state(ModelTag::M2);
    ctx.policy = {5.0, std::nullopt};
    ObservationSeries obs(10);
    for (int d = 0; d <= 10; ++d)
        obs.set(Series::Infected, d, 1);
    auto base = ParameterSet::zeros();
    base.kappa = 0.9;
    base.beta = 0.1;
    const ParameterLayout layout(base, {"alpha", "gamma1", "phi", "gamma2", "kappa", "mu", "zeta1", "zeta2"});
    const auto a = log_marginal_likelihood(obs, ctx, layout, {300, 4, 0});
    const auto b = log_marginal_likelihood(obs, ctx, layout, {300, 4, 0});
    EXPECT_EQ(a.log_marginal, b.log_marginal);
    EXPECT_TRUE(std::isfinite(a.log_marginal));
    EXPECT_EQ(bayes_factor(a.log_marginal, b.log_marginal), 1.0);
}

TEST(Evidence, AllDrawsMinusInfinityIsUnderflow)
{
    try {
        monte_carlo_log_evidence({50, 1, 0}, [](Rng&, std::size_t) { return kNegInf; });
        FAIL();
    }
    catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::EvidenceUnderflow);
        EXPECT_NE(std::string(e.what()).find("50"), std::string::npos);
    }
    EXPECT_THROW(monte_carlo_log_evidence({0, 1, 0}, [](Rng&, std::size_t) { return 0.0; }), Error);
}

TEST(Evidence, UnstableDrawsCounted)
{
    const auto r = monte_carlo_log_evidence({10, 1, 1}, [](Rng&, std::size_t i) -> double {
        if (i % 2)
            throw InstabilityError(1.0, "E", -5.0);
        return 0.0;
    });
    EXPECT_EQ(r.n_failed, 5u);
    EXPECT_EQ(r.n_zero, 5u);
    EXPECT_NEAR(r.log_marginal, std::log(0.5), 1e-15);
}

TEST(BayesFactor, Definition)
{
    EXPECT_EQ(bayes_factor(-3.2, -3.2), 1.0);
    EXPECT_NEAR(bayes_factor(std::log(10.0) - 4.0, -4.0), 10.0, 1e-12);
    EXPECT_THROW(bayes_factor(kNegInf, 0.0), Error);
    EXPECT_THROW(bayes_factor(0.0, std::nan("")), Error);
}

TEST(BayesFactor, ReciprocalProduct)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-50, 50);
    for (int i = 0; i < 1000; ++i) {
        const double a = u(rng), b = u(rng);
        // exp(x) * exp(-x) is 1 up to rounding of the two exponentials.
        EXPECT_NEAR(bayes_factor(a, b) * bayes_factor(b, a), 1.0, 4e-16 * 4);
    }
}

TEST(BayesFactor, Interpretation)
{
    EXPECT_EQ(interpret_bayes_factor(1.0), "no preference");
    EXPECT_EQ(interpret_bayes_factor(2.0), "favours model 1 (not worth more than a bare mention)");
    EXPECT_EQ(interpret_bayes_factor(10.0), "favours model 1 (positive)");
    EXPECT_EQ(interpret_bayes_factor(100.0), "favours model 1 (strong)");
    EXPECT_EQ(interpret_bayes_factor(50013.35), "favours model 1 (very strong)");
    EXPECT_EQ(interpret_bayes_factor(0.01), "favours model 2 (strong)");
}
