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
#include "reinfect/inference.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace reinfect;

namespace {

/// Every rate zero except kappa; schedules of one segment.
ParameterSet zero_rates()
{
    auto p = ParameterSet::zeros();
    p.kappa = 0.5;
    return p;
}

/// Model 2, two alpha segments, small population.
FitContext small_context()
{
    FitContext ctx;
    ctx.model = ModelTag::M2;
    InitialConditions ic;
    ic.S1 = 50000;
    ic.E = 20;
    ic.I = 5;
    ctx.initial = ic.state(ModelTag::M2);
    ctx.policy = {30.0, std::nullopt};
    ctx.horizon = 60;
    return ctx;
}

ParameterSet small_truth()
{
    ParameterSet p = ParameterSet::zeros();
    p.alpha = {{25}, {0.4, 0.15}};
    p.beta = 0.2;
    p.gamma1 = RateSchedule::constant(0.1);
    p.phi = RateSchedule::constant(0.5);
    p.gamma2 = 0.14;
    p.mu = 0.01;
    p.kappa = 0.94;
    p.eta = 0.002;
    p.zeta1 = 0.01;
    p.zeta2 = 0.005;
    return p;
}

ObservationSeries rounded_observations(const MeanTrajectory& traj)
{
    ObservationSeries obs(traj.horizon());
    for (Series s : all_series) {
        const auto c = series_compartment(traj.model(), s);
        for (int d = 0; d <= traj.horizon(); ++d)
            obs.set(s, d, static_cast<std::int64_t>(std::llround(traj.at(d, c))));
    }
    return obs;
}

} // namespace

TEST(LogPrior, ZeroRatesHaveDensityOne)
{
    const auto p = zero_rates();
    EXPECT_EQ(log_prior(p, ParameterLayout(p, {})), 0.0);
    EXPECT_EQ(log_prior(p), 0.0);
}

TEST(LogPrior, ExponentialLogDensity)
{
    auto p = zero_rates();
    p.eta = 2.0;
    EXPECT_EQ(log_prior(p), -2.0);
    p.eta = 0.0;
    p.alpha.rates[0] = 2.0;
    EXPECT_EQ(log_prior(p), -2.0);
}

TEST(LogPrior, OutOfSupportIsMinusInfinity)
{
    auto p = zero_rates();
    p.beta = -0.1;
    EXPECT_EQ(log_prior(p), kNegInf);
    p = zero_rates();
    p.kappa = 1.5;
    EXPECT_EQ(log_prior(p, ParameterLayout(p, {})), kNegInf);
    // Fixed parameters do not enter.
    EXPECT_EQ(log_prior(p, ParameterLayout(p, {"kappa"})), 0.0);
}

TEST(PoissonLogPmf, MatchesDirectFormula)
{
    EXPECT_DOUBLE_EQ(poisson_log_pmf(0, 1.0), -1.0);
    EXPECT_DOUBLE_EQ(poisson_log_pmf(3, 2.0), 3.0 * std::log(2.0) - 2.0 - std::log(6.0));
}

TEST(PoissonLogPmf, ClampsNonPositiveMeans)
{
    EXPECT_DOUBLE_EQ(poisson_log_pmf(0, 0.0), -kRateFloor);
    EXPECT_DOUBLE_EQ(poisson_log_pmf(0, -3.0), -kRateFloor);
    EXPECT_DOUBLE_EQ(poisson_log_pmf(2, 0.0), 2.0 * std::log(kRateFloor) - kRateFloor - std::log(2.0));
}

TEST(LogLikelihood, SingleObservationAgainstTrajectory)
{
    MeanTrajectory traj(ModelTag::M1, 1);
    traj.at(0, m1::I) = 2.0;
    ObservationSeries obs(0);
    obs.set(Series::Infected, 0, 3);
    EXPECT_DOUBLE_EQ(log_likelihood(obs, traj), 3.0 * std::log(2.0) - 2.0 - std::log(6.0));
}

TEST(LogLikelihood, LatentCompartmentsNeverEnter)
{
    MeanTrajectory a(ModelTag::M1, 3), b(ModelTag::M1, 3);
    for (int d = 0; d <= 3; ++d) {
        a.at(d, m1::I) = b.at(d, m1::I) = 7.0;
        b.at(d, m1::S1) = 1e6;
        b.at(d, m1::S2) = 2e5;
        b.at(d, m1::E) = 30;
        b.at(d, m1::RE) = 4;
    }
    ObservationSeries obs(3);
    for (int d = 0; d <= 3; ++d)
        obs.set(Series::Infected, d, 6 + d);
    EXPECT_EQ(log_likelihood(obs, a), log_likelihood(obs, b));
}

TEST(LogLikelihood, EmptyMaskIsZeroWithoutIntegrating)
{
    ObservationSeries obs(100);
    auto p = reported_parameters(ModelTag::M1);
    p.transmission_unit = 1.0; // would be unstable if integrated
    FitContext ctx;
    ctx.initial = InitialConditions{}.state(ModelTag::M1);
    EXPECT_EQ(log_likelihood(p, obs, ctx), 0.0);
}

TEST(LogLikelihood, InstabilityPropagates)
{
    ObservationSeries obs(10);
    obs.set(Series::Infected, 3, 4);
    auto p = reported_parameters(ModelTag::M1);
    p.transmission_unit = 1.0;
    FitContext ctx;
    ctx.initial = InitialConditions{}.state(ModelTag::M1);
    EXPECT_THROW(log_likelihood(p, obs, ctx), InstabilityError);
    EXPECT_EQ(log_posterior(p, ParameterLayout(p), obs, ctx), kNegInf);
}

TEST(LogPosterior, IsPriorPlusLikelihood)
{
    const auto ctx = small_context();
    const auto truth = small_truth();
    const auto obs =
        rounded_observations(integrate(ctx.model, ctx.initial, truth, ctx.policy, ctx.horizon, ctx.integrator));
    const ParameterLayout layout(truth);
    for (double scale : {0.9, 1.0, 1.1}) {
        auto p = truth;
        p.beta *= scale;
        EXPECT_DOUBLE_EQ(log_posterior(p, layout, obs, ctx), log_prior(p, layout) + log_likelihood(p, obs, ctx));
    }
}

TEST(ParameterLayout, ExtractAssembleRoundTrip)
{
    const auto p = reported_parameters(ModelTag::M1);
    const ParameterLayout layout(p, {"gamma2", "kappa", "phi"});
    EXPECT_EQ(layout.size(), 10u + 1 + 4 + 1 + 1 + 1 + 1);
    EXPECT_FALSE(layout.contains("phi_0"));
    EXPECT_TRUE(layout.contains("alpha_9"));
    EXPECT_EQ(layout.assemble(layout.extract(p)), p);
    EXPECT_THROW(ParameterLayout(p, {"nonsense"}), Error);
}

TEST(Acceptance, IdenticalProposalIsAlwaysAccepted)
{
    EXPECT_EQ(acceptance_probability(-12.5, -12.5), 1.0);
    EXPECT_EQ(acceptance_probability(-12.5, -10.0), 1.0);
    EXPECT_DOUBLE_EQ(acceptance_probability(-10.0, -11.0), std::exp(-1.0));
}

TEST(Acceptance, NegativeRateProposalIsRejected)
{
    auto p = zero_rates();
    p.mu = -0.01;
    EXPECT_EQ(acceptance_probability(-3.0, log_prior(p)), 0.0);
}

TEST(MhSample, PriorOnlyRecoversExponentialMoments)
{
    // Small version of the acceptance run: three rates, Exp(1) target.
    ParameterSet base = ParameterSet::zeros();
    base.beta = 0.5;
    base.eta = 2.0;
    base.mu = 0.01;
    const ParameterLayout layout(base, {"alpha", "gamma1", "phi", "gamma2", "kappa", "zeta1", "zeta2"});
    ASSERT_EQ(layout.size(), 3u);
    ObservationSeries empty(10);
    FitContext ctx;
    ctx.initial = InitialConditions{}.state(ModelTag::M1);
    SamplerConfig cfg;
    cfg.n_draws = 20000;
    cfg.seed = 17;
    const auto draws = mh_sample(empty, ctx, layout, cfg);
    for (std::size_t j = 0; j < layout.size(); ++j) {
        const auto col = draws.column(j);
        EXPECT_NEAR(stats::mean(col), 1.0, 0.08) << layout.name(j);
        EXPECT_NEAR(stats::variance(col), 1.0, 0.2) << layout.name(j);
        EXPECT_GE(draws.acceptance_rates[j], 0.15);
        EXPECT_LE(draws.acceptance_rates[j], 0.6);
    }
}

TEST(MhSample, IdenticalSeedsGiveIdenticalDraws)
{
    const auto ctx = small_context();
    const auto truth = small_truth();
    const auto obs =
        rounded_observations(integrate(ctx.model, ctx.initial, truth, ctx.policy, ctx.horizon, ctx.integrator));
    const ParameterLayout layout(truth, {"gamma2", "kappa", "zeta1", "zeta2", "mu"});
    SamplerConfig cfg;
    cfg.n_draws = 200;
    cfg.tuning_chains = 2;
    cfg.tuning_iterations = 50;
    cfg.seed = 99;
    const auto a = mh_sample(obs, ctx, layout, cfg);
    const auto b = mh_sample(obs, ctx, layout, cfg);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.log_posterior, b.log_posterior);
    cfg.seed = 100;
    const auto c = mh_sample(obs, ctx, layout, cfg);
    EXPECT_NE(a.values, c.values);
    for (double lp : a.log_posterior)
        EXPECT_TRUE(std::isfinite(lp));
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_NO_THROW(a.draw(i).validate());
}

TEST(MhSample, StoredLogPosteriorMatchesDraw)
{
    const auto ctx = small_context();
    const auto truth = small_truth();
    const auto obs =
        rounded_observations(integrate(ctx.model, ctx.initial, truth, ctx.policy, ctx.horizon, ctx.integrator));
    const ParameterLayout layout(truth, {"gamma2", "kappa"});
    SamplerConfig cfg;
    cfg.n_draws = 50;
    cfg.tuning_chains = 1;
    cfg.tuning_iterations = 20;
    const auto draws = mh_sample(obs, ctx, layout, cfg);
    for (std::size_t i = 0; i < draws.size(); i += 7)
        EXPECT_DOUBLE_EQ(draws.log_posterior[i], log_posterior(draws.draw(i), layout, obs, ctx));
}

TEST(MhSample, StartingOutsideSupportIsInitializationError)
{
    auto base = small_truth();
    base.zeta1 = 0.0;
    const ParameterLayout layout(base);
    ObservationSeries empty(10);
    FitContext ctx = small_context();
    try {
        mh_sample(empty, ctx, layout, SamplerConfig{});
        FAIL();
    }
    catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::Initialization);
    }
    // A finite start whose likelihood is -inf.
    auto unstable = small_truth();
    unstable.transmission_unit = 1e3;
    ObservationSeries one(10);
    one.set(Series::Infected, 5, 3);
    try {
        mh_sample(one, ctx, ParameterLayout(unstable), SamplerConfig{});
        FAIL();
    }
    catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::Initialization);
    }
}

TEST(PseudoR2, PerfectFitIsOne)
{
    const auto ctx = small_context();
    const auto traj = integrate(ctx.model, ctx.initial, small_truth(), ctx.policy, ctx.horizon);
    ObservationSeries obs(ctx.horizon);
    FittedSeries fitted = fitted_from(traj);
    // Observations equal to the (integer-valued) fitted series.
    for (Series s : all_series) {
        auto& f = fitted[static_cast<std::size_t>(s)];
        for (int d = 0; d <= ctx.horizon; ++d) {
            f[d] = std::round(f[d]);
            obs.set(s, d, static_cast<std::int64_t>(f[d]));
        }
    }
    EXPECT_EQ(pseudo_r2(obs, fitted), 1.0);
}

TEST(PseudoR2, SeriesMeanFitIsZero)
{
    ObservationSeries obs(4);
    const std::int64_t infected[] = {1, 5, 9, 4, 6};
    const std::int64_t deaths[] = {0, 0, 1, 3, 6};
    FittedSeries fitted;
    for (auto& f : fitted)
        f.assign(5, 0.0);
    for (int d = 0; d < 5; ++d) {
        obs.set(Series::Infected, d, infected[d]);
        obs.set(Series::Deaths, d, deaths[d]);
        fitted[static_cast<std::size_t>(Series::Infected)][d] = 5.0;
        fitted[static_cast<std::size_t>(Series::Deaths)][d] = 2.0;
    }
    EXPECT_NEAR(pseudo_r2(obs, fitted), 0.0, 1e-15);
}

TEST(PseudoR2, ZeroVarianceIsUndefined)
{
    ObservationSeries obs(3);
    for (int d = 0; d <= 3; ++d)
        obs.set(Series::Infected, d, 4);
    FittedSeries fitted;
    for (auto& f : fitted)
        f.assign(4, 4.0);
    try {
        pseudo_r2(obs, fitted);
        FAIL();
    }
    catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::UndefinedStatistic);
    }
}

TEST(PseudoR2, PosteriorMedianOfTightDrawsFitsWell)
{
    const auto ctx = small_context();
    const auto truth = small_truth();
    const auto obs =
        rounded_observations(integrate(ctx.model, ctx.initial, truth, ctx.policy, ctx.horizon, ctx.integrator));
    PosteriorDraws draws;
    draws.layout = ParameterLayout(truth);
    draws.n = 3;
    for (double f : {0.99, 1.0, 1.01}) {
        auto p = truth;
        p.beta *= f;
        const auto row = draws.layout.extract(p);
        draws.values.insert(draws.values.end(), row.begin(), row.end());
        draws.log_posterior.push_back(0.0);
    }
    EXPECT_GT(pseudo_r2(draws, obs, ctx), 0.999);
}
