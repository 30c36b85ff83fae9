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
#include "reinfect/csv_io.hpp"
#include "reinfect/predictive.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace reinfect;

namespace {

const std::string kHeader = "day,infected,recovered,deaths,reinfected,recovered_reinfected,vaccinated\n";

ObservationSeries parse(const std::string& text)
{
    std::istringstream in(text);
    return parse_observations(in);
}

ErrorCategory category_of(const std::function<void()>& fn)
{
    try {
        fn();
    }
    catch (const Error& e) {
        return e.category();
    }
    return ErrorCategory::Io; // sentinel: nothing thrown
}

std::string message_of(const std::function<void()>& fn)
{
    try {
        fn();
    }
    catch (const Error& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(Observations, FirstRecordedDay)
{
    const auto obs = parse(kHeader + "0,1,0,0,,,\n");
    EXPECT_EQ(obs.last_day(), 0);
    EXPECT_EQ(obs.get(Series::Infected, 0), 1);
    EXPECT_EQ(obs.get(Series::Recovered, 0), 0);
    EXPECT_EQ(obs.get(Series::Deaths, 0), 0);
    EXPECT_FALSE(obs.get(Series::Reinfected, 0));
    EXPECT_FALSE(obs.get(Series::RecoveredReinfected, 0));
    EXPECT_FALSE(obs.get(Series::Vaccinated, 0));
    EXPECT_EQ(obs.observed_cells(), 3u);
}

TEST(Observations, ColumnOrderIsFree)
{
    const auto obs = parse("vaccinated,deaths,day,infected,recovered,reinfected,recovered_reinfected\n"
                           "3,1,0,7,2,,\n");
    EXPECT_EQ(obs.get(Series::Vaccinated, 0), 3);
    EXPECT_EQ(obs.get(Series::Deaths, 0), 1);
    EXPECT_EQ(obs.get(Series::Infected, 0), 7);
}

TEST(Observations, MissingDaysAreMasked)
{
    const auto obs = parse(kHeader + "0,1,0,0,,,\n3,4,1,0,,,\n");
    EXPECT_EQ(obs.last_day(), 3);
    EXPECT_FALSE(obs.get(Series::Infected, 1));
    EXPECT_FALSE(obs.get(Series::Infected, 2));
    EXPECT_EQ(obs.get(Series::Infected, 3), 4);
}

TEST(Observations, MissingColumnIsSchemaError)
{
    const std::string text = "day,infected,recovered,reinfected,recovered_reinfected,vaccinated\n0,1,0,,,\n";
    EXPECT_EQ(category_of([&] { parse(text); }), ErrorCategory::Schema);
    EXPECT_NE(message_of([&] { parse(text); }).find("deaths"), std::string::npos);
}

TEST(Observations, NonIntegerIsParseErrorWithRow)
{
    const std::string text = kHeader + "0,1,0,0,,,\n1,2.5,0,0,,,\n";
    EXPECT_EQ(category_of([&] { parse(text); }), ErrorCategory::Parse);
    EXPECT_NE(message_of([&] { parse(text); }).find("row 3"), std::string::npos);
    EXPECT_EQ(category_of([&] { parse(kHeader + "0,-1,0,0,,,\n"); }), ErrorCategory::Parse);
    EXPECT_EQ(category_of([&] { parse(kHeader + "0,1,0\n"); }), ErrorCategory::Parse);
}

TEST(Observations, DecreasingDeathsIsValidationError)
{
    const std::string text = kHeader + "0,1,0,5,,,\n1,1,0,4,,,\n";
    EXPECT_EQ(category_of([&] { parse(text); }), ErrorCategory::Validation);
    EXPECT_NE(message_of([&] { parse(text); }).find("day 1"), std::string::npos);
    // Active infections may go down.
    EXPECT_NO_THROW(parse(kHeader + "0,9,0,0,,,\n1,3,0,0,,,\n"));
}

TEST(Observations, RoundTrip)
{
    const auto obs = parse(kHeader + "0,1,0,0,,,\n1,2,1,0,0,,\n4,7,2,1,1,0,12\n");
    std::ostringstream out;
    write_observations(out, obs);
    EXPECT_EQ(parse(out.str()), obs);
}

TEST(Observations, MissingFileIsIoError)
{
    EXPECT_EQ(category_of([] { load_observations("/nonexistent/obs.csv"); }), ErrorCategory::Io);
}

TEST(Config, EmptyFileGivesDefaults)
{
    const auto cfg = parse_config("");
    EXPECT_EQ(cfg.initial.S1, 2695122.0);
    EXPECT_EQ(cfg.initial.S2, 2695122.0 / 6.0);
    EXPECT_EQ(cfg.initial.E, 5.0);
    EXPECT_EQ(cfg.initial.I, 1.0);
    EXPECT_EQ(cfg.initial.D, 0.0);
    EXPECT_EQ(cfg.params.kappa, 0.94);
    EXPECT_EQ(cfg.bed_threshold, 3134.0);
    EXPECT_EQ(cfg.horizon, 550);
    EXPECT_EQ(cfg.vaccination_start_day, 380.0);
    EXPECT_EQ(cfg.model, ModelTag::M1);
    EXPECT_EQ(cfg.params, reported_parameters(ModelTag::M1));
    // The reported table has 10 alpha values; the discrepancy is flagged.
    ASSERT_FALSE(cfg.notes.empty());
    EXPECT_NE(cfg.notes[0].find("alpha"), std::string::npos);
}

TEST(Config, ModelSelectsRateDefaults)
{
    const auto cfg = parse_config("[model]\nmodel = M2\n");
    EXPECT_EQ(cfg.model, ModelTag::M2);
    EXPECT_EQ(cfg.params, reported_parameters(ModelTag::M2));
}

TEST(Config, FullEfficacyOverride)
{
    const auto cfg = parse_config("[rates]\nkappa = 1.0\n");
    EXPECT_EQ(cfg.params.kappa, 1.0);
    const auto ctx = cfg.fit_context();
    auto base = cfg.params;
    base.kappa = 0.94;
    const auto via_config = integrate(ctx.model, ctx.initial, cfg.params, ctx.policy, 450);
    const auto via_scenario = integrate(ctx.model, ctx.initial, base, canonical_scenario(2).policy, 450);
    EXPECT_EQ(via_config, via_scenario);
}

TEST(Config, SegmentCountMismatch)
{
    const std::string text = "[rates]\nalpha = 0.1, 0.2, 0.3, 0.4, 0.5\n"
                             "alpha_breakpoints = 10, 24, 108, 124, 151, 186, 392, 455, 497, 520\n";
    EXPECT_EQ(category_of([&] { parse_config(text); }), ErrorCategory::Validation);
}

TEST(Config, ElevenAlphaRatesAccepted)
{
    const std::string text = "[rates]\nalpha = 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1\n"
                             "alpha_breakpoints = 10, 24, 108, 124, 151, 186, 392, 455, 497, 520\n";
    const auto cfg = parse_config(text);
    EXPECT_EQ(cfg.params.alpha.segments(), 11u);
    for (const auto& n : cfg.notes)
        EXPECT_EQ(n.find("alpha"), std::string::npos);
}

TEST(Config, UnknownKeysAreStrictErrors)
{
    EXPECT_EQ(category_of([] { parse_config("[rates]\nbeta2 = 1\n"); }), ErrorCategory::Config);
    EXPECT_EQ(category_of([] { parse_config("[extras]\nx = 1\n"); }), ErrorCategory::Config);
    EXPECT_NO_THROW(parse_config("[rates]\nbeta2 = 1\n", false));
    EXPECT_EQ(category_of([] { parse_config("[rates]\nbeta = fast\n"); }), ErrorCategory::Config);
    EXPECT_EQ(category_of([] { parse_config("[rates]\nkappa = 1.5\n"); }), ErrorCategory::Validation);
    EXPECT_EQ(category_of([] { parse_config("[sampler]\nfixed = gamma3\n"); }), ErrorCategory::Config);
}

TEST(Config, RoundTripIsValueIdentical)
{
    const std::string text = "[model]\nmodel = 2\nhorizon = 520\n"
                             "[initial]\nS1 = 12345.678\nE = 3\n"
                             "[rates]\nbeta = 0.123456789012345678\nphi = 0.1, 0.2\nphi_breakpoints = 100.5\n"
                             "[vaccination]\nstart_day = 150\nefficacy_override = 0.8\nbed_threshold = 99\n"
                             "[sampler]\nn_draws = 77\nseed = 12345678901\nfixed = gamma2, mu\n"
                             "proposal_scales = 0.1\n"
                             "[predictive]\nscenarios = 3, 5\nsummary_day = 250\n";
    StudyConfig cfg;
    ASSERT_EQ(category_of([&] { cfg = parse_config(text); }), ErrorCategory::Io);
    const auto again = parse_config(write_config(cfg));
    EXPECT_EQ(again, cfg);
    EXPECT_EQ(write_config(again), write_config(cfg));
    EXPECT_EQ(again.params.beta, 0.123456789012345678);
    EXPECT_EQ(again.efficacy_override, 0.8);
    const auto defaults = parse_config("");
    EXPECT_EQ(parse_config(write_config(defaults)), defaults);
}

TEST(Draws, CsvRoundTrip)
{
    const auto base = reported_parameters(ModelTag::M1);
    PosteriorDraws d;
    d.layout = ParameterLayout(base);
    d.n = 3;
    for (int i = 0; i < 3; ++i) {
        auto p = base;
        p.beta = 0.1 / 3.0 * (i + 1);
        p.alpha.rates[4] = 1e-7 * std::sqrt(2.0 + i);
        const auto row = d.layout.extract(p);
        d.values.insert(d.values.end(), row.begin(), row.end());
        d.log_posterior.push_back(-1234.5678901234567 * (i + 1));
    }
    std::stringstream buf;
    write_draws_csv(buf, d);
    const auto back = read_draws_csv(buf, base);
    ASSERT_EQ(back.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(back.draw(i), d.draw(i));
        EXPECT_EQ(back.log_posterior[i], d.log_posterior[i]);
    }
    std::stringstream bad("draw,beta\n0,0.1\n");
    EXPECT_EQ(category_of([&] { read_draws_csv(bad, base); }), ErrorCategory::Schema);
}

TEST(Scenario, CsvRoundTrip)
{
    ScenarioSummary s;
    s.rows = {{0, 12, 14, 1234.5, 30.25, 99.125}, {5, 0, 1, 1.0 / 3.0, 0.0, 2.0}};
    std::stringstream buf;
    write_scenario_csv(buf, s);
    const auto rows = read_scenario_csv(buf);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1].draw_index, 5u);
    EXPECT_EQ(rows[1].cum_infected, 1.0 / 3.0);
    EXPECT_EQ(rows[0].overload_days_sampled, 14);
}

TEST(Format, SeventeenDigits)
{
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(std::strtod(format_double(1.0 / 3.0).c_str(), nullptr), 1.0 / 3.0);
    EXPECT_EQ(format_double(3134), "3134");
}

TEST(Config, EmptyBreakpointsMeanConstantRate)
{
    const auto cfg = parse_config("[rates]\ngamma1 = 0.1\ngamma1_breakpoints =\n");
    EXPECT_EQ(cfg.params.gamma1, RateSchedule::constant(0.1));
    EXPECT_EQ(parse_config(write_config(cfg)), cfg);
}
