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
#include "reinfect/density.hpp"
#include "reinfect/evidence.hpp"
#include "reinfect/format.hpp"
#include "reinfect/inference.hpp"
#include "reinfect/observations.hpp"
#include "reinfect/predictive.hpp"

#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace reinfect {

// ---------------------------------------------------------------------------
// Observations
// ---------------------------------------------------------------------------

namespace detail {

inline std::int64_t parse_count(const std::string& cell, std::size_t row, std::string_view column)
{
    const std::string s = trim(cell);
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || errno == ERANGE || v < 0) {
        throw Error(ErrorCategory::Parse, "row " + std::to_string(row) + ": " + std::string(column) + " value '" + s +
                                              "' is not a nonnegative integer");
    }
    return v;
}

inline std::vector<std::string> read_header(std::istream& in, const std::string& what)
{
    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorCategory::Schema, what + " is empty");
    auto cells = split(line, ',');
    for (auto& c : cells)
        c = trim(c);
    return cells;
}

inline std::size_t column_index(const std::vector<std::string>& header, std::string_view name, const std::string& what)
{
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name)
            return i;
    }
    throw Error(ErrorCategory::Schema, what + " is missing column '" + std::string(name) + "'");
}

inline double parse_real_cell(const std::string& cell, std::size_t row, const std::string& what)
{
    const std::string s = trim(cell);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        throw Error(ErrorCategory::Parse, what + " row " + std::to_string(row) + ": '" + s + "' is not a number");
    return v;
}

} // namespace detail

/// Headered CSV with columns day, infected, recovered, deaths, reinfected,
/// recovered_reinfected, vaccinated. Blank cells and absent days are masked.
inline ObservationSeries parse_observations(std::istream& in)
{
    const std::string what = "observations";
    const auto header = detail::read_header(in, what);
    const std::size_t day_col = detail::column_index(header, "day", what);
    std::array<std::size_t, kSeriesCount> cols{};
    for (Series s : all_series)
        cols[static_cast<std::size_t>(s)] = detail::column_index(header, series_column(s), what);

    struct Row {
        int day;
        std::array<std::optional<std::int64_t>, kSeriesCount> values;
        std::size_t line;
    };
    std::vector<Row> rows;
    std::string line;
    std::size_t line_no = 1;
    std::array<std::optional<std::int64_t>, kSeriesCount> last_cumulative{};
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        const auto cells = split(line, ',');
        if (cells.size() != header.size()) {
            throw Error(ErrorCategory::Parse, "row " + std::to_string(line_no) + " has " +
                                                  std::to_string(cells.size()) + " fields, expected " +
                                                  std::to_string(header.size()));
        }
        Row r;
        r.line = line_no;
        const auto day = detail::parse_count(cells[day_col], line_no, "day");
        r.day = static_cast<int>(day);
        if (!rows.empty() && r.day <= rows.back().day)
            throw Error(ErrorCategory::Validation, "row " + std::to_string(line_no) + ": days must increase");
        for (Series s : all_series) {
            const auto si = static_cast<std::size_t>(s);
            const std::string& cell = cells[cols[si]];
            if (trim(cell).empty())
                continue;
            r.values[si] = detail::parse_count(cell, line_no, series_column(s));
            if (is_cumulative(s)) {
                if (last_cumulative[si] && *r.values[si] < *last_cumulative[si]) {
                    throw Error(ErrorCategory::Validation, "row " + std::to_string(line_no) + " (day " +
                                                               std::to_string(r.day) + "): " +
                                                               std::string(series_column(s)) + " decreases");
                }
                last_cumulative[si] = r.values[si];
            }
        }
        rows.push_back(r);
    }
    if (rows.empty())
        throw Error(ErrorCategory::Schema, "observations contain no rows");
    ObservationSeries obs(rows.back().day);
    for (const auto& r : rows)
        for (Series s : all_series)
            obs.set(s, r.day, r.values[static_cast<std::size_t>(s)]);
    return obs;
}

inline ObservationSeries load_observations(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCategory::Io, "cannot open observations '" + path + "'");
    return parse_observations(in);
}

inline void write_observations(std::ostream& out, const ObservationSeries& obs)
{
    out << "day";
    for (auto c : series_columns)
        out << ',' << c;
    out << '\n';
    for (int d = 0; d <= obs.last_day(); ++d) {
        out << d;
        for (Series s : all_series) {
            out << ',';
            if (auto v = obs.get(s, d))
                out << *v;
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Posterior draws
// ---------------------------------------------------------------------------

/// One row per draw: every parameter (free or fixed) and the log posterior.
inline void write_draws_csv(std::ostream& out, const PosteriorDraws& draws)
{
    const auto entries = ParameterLayout::all_entries(draws.layout.base());
    out << "draw";
    for (const auto& e : entries)
        out << ',' << e.name;
    out << ",log_posterior\n";
    for (std::size_t i = 0; i < draws.size(); ++i) {
        const ParameterSet p = draws.draw(i);
        out << i;
        for (const auto& e : entries)
            out << ',' << format_double(ParameterLayout::get(p, e));
        out << ',' << format_double(draws.log_posterior[i]) << '\n';
    }
}

/// Reads draws written by write_draws_csv. `base` supplies the schedule
/// shapes and breakpoints; every column becomes a free parameter.
inline PosteriorDraws read_draws_csv(std::istream& in, const ParameterSet& base)
{
    const std::string what = "posterior draws";
    const auto header = detail::read_header(in, what);
    PosteriorDraws draws;
    draws.layout = ParameterLayout(base, {});
    const std::size_t d = draws.layout.size();
    std::vector<std::size_t> cols(d);
    for (std::size_t j = 0; j < d; ++j)
        cols[j] = detail::column_index(header, draws.layout.name(j), what);
    const std::size_t lp_col = detail::column_index(header, "log_posterior", what);
    if (header.size() != d + 2)
        throw Error(ErrorCategory::Schema, "posterior draws have " + std::to_string(header.size()) +
                                               " columns; the configured schedules imply " + std::to_string(d + 2));
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        const auto cells = split(line, ',');
        if (cells.size() != header.size())
            throw Error(ErrorCategory::Parse, what + " row " + std::to_string(line_no) + " has the wrong field count");
        for (std::size_t j = 0; j < d; ++j)
            draws.values.push_back(detail::parse_real_cell(cells[cols[j]], line_no, what));
        draws.log_posterior.push_back(detail::parse_real_cell(cells[lp_col], line_no, what));
        ++draws.n;
    }
    if (draws.n == 0)
        throw Error(ErrorCategory::Input, "posterior draws file has no rows");
    return draws;
}

inline PosteriorDraws load_draws(const std::string& path, const ParameterSet& base)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCategory::Io, "cannot open draws '" + path + "'");
    return read_draws_csv(in, base);
}

/// Sampler settings and diagnostics needed to replay a run.
inline nlohmann::ordered_json draws_metadata(const PosteriorDraws& draws)
{
    nlohmann::ordered_json j;
    j["seed"] = draws.seed;
    j["n_draws"] = draws.size();
    j["tuning_chains"] = draws.config.tuning_chains;
    j["tuning_iterations"] = draws.config.tuning_iterations;
    j["initial_scale"] = draws.config.initial_scale;
    j["target_acceptance"] = {draws.config.target_low, draws.config.target_high};
    nlohmann::ordered_json params = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < draws.dim(); ++i) {
        nlohmann::ordered_json p;
        p["name"] = draws.layout.name(i);
        p["acceptance_rate"] = draws.acceptance_rates.empty() ? 0.0 : draws.acceptance_rates[i];
        p["proposal_scale"] = draws.proposal_scales.empty() ? 0.0 : draws.proposal_scales[i];
        params.push_back(p);
    }
    j["free_parameters"] = params;
    j["tuning_acceptance"] = draws.tuning_acceptance;
    return j;
}

/// Per-iteration trace including the discarded tuning chains.
inline void write_trace_csv(std::ostream& out, const PosteriorDraws& draws)
{
    const std::size_t d = draws.dim();
    out << "phase,iteration,log_posterior";
    for (std::size_t j = 0; j < d; ++j)
        out << ',' << draws.layout.name(j);
    out << '\n';
    for (std::size_t i = 0; i < draws.tuning_log_posterior.size(); ++i) {
        out << "tuning," << i << ',' << format_double(draws.tuning_log_posterior[i]);
        for (std::size_t j = 0; j < d; ++j)
            out << ',' << format_double(draws.tuning_values[i * d + j]);
        out << '\n';
    }
    for (std::size_t i = 0; i < draws.size(); ++i) {
        out << "sampling," << i << ',' << format_double(draws.log_posterior[i]);
        for (std::size_t j = 0; j < d; ++j)
            out << ',' << format_double(draws.value(i, j));
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Scenario outputs
// ---------------------------------------------------------------------------

inline void write_scenario_csv(std::ostream& out, const ScenarioSummary& s)
{
    out << "draw,overload_days,overload_days_sampled,cum_infected,cum_reinfected,cum_deaths\n";
    for (const auto& r : s.rows) {
        out << r.draw_index << ',' << r.overload_days << ',' << r.overload_days_sampled << ','
            << format_double(r.cum_infected) << ',' << format_double(r.cum_reinfected) << ','
            << format_double(r.cum_deaths) << '\n';
    }
}

inline std::vector<PredictiveSummary> read_scenario_csv(std::istream& in)
{
    const std::string what = "scenario file";
    const auto header = detail::read_header(in, what);
    const auto c_draw = detail::column_index(header, "draw", what);
    const auto c_over = detail::column_index(header, "overload_days", what);
    const auto c_over_s = detail::column_index(header, "overload_days_sampled", what);
    const auto c_inf = detail::column_index(header, "cum_infected", what);
    const auto c_re = detail::column_index(header, "cum_reinfected", what);
    const auto c_de = detail::column_index(header, "cum_deaths", what);
    std::vector<PredictiveSummary> rows;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        const auto cells = split(line, ',');
        if (cells.size() != header.size())
            throw Error(ErrorCategory::Parse, what + " row " + std::to_string(line_no) + " has the wrong field count");
        PredictiveSummary r;
        r.draw_index = static_cast<std::size_t>(detail::parse_count(cells[c_draw], line_no, "draw"));
        r.overload_days = static_cast<int>(detail::parse_count(cells[c_over], line_no, "overload_days"));
        r.overload_days_sampled =
            static_cast<int>(detail::parse_count(cells[c_over_s], line_no, "overload_days_sampled"));
        r.cum_infected = detail::parse_real_cell(cells[c_inf], line_no, what);
        r.cum_reinfected = detail::parse_real_cell(cells[c_re], line_no, what);
        r.cum_deaths = detail::parse_real_cell(cells[c_de], line_no, what);
        rows.push_back(r);
    }
    return rows;
}

inline std::vector<PredictiveSummary> load_scenario_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCategory::Io, "cannot open scenario file '" + path + "'");
    return read_scenario_csv(in);
}

inline double summary_value(const PredictiveSummary& r, CumulativeSeries s)
{
    switch (s) {
    case CumulativeSeries::Infected: return r.cum_infected;
    case CumulativeSeries::Reinfected: return r.cum_reinfected;
    case CumulativeSeries::Deaths: return r.cum_deaths;
    }
    return 0.0;
}

inline std::vector<double> summary_column(const std::vector<PredictiveSummary>& rows, CumulativeSeries s)
{
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows)
        out.push_back(summary_value(r, s));
    return out;
}

inline void write_overload_table_header(std::ostream& out)
{
    out << "scenario,label,start_day,kappa,draws,failed,overload_min,overload_max,overload_sampled_min,"
           "overload_sampled_max,median_cum_infected,median_cum_reinfected,median_cum_deaths\n";
}

inline void write_overload_table_row(std::ostream& out, const ScenarioSummary& s)
{
    int lo = 0, hi = 0, slo = 0, shi = 0;
    if (!s.rows.empty()) {
        lo = hi = s.rows.front().overload_days;
        slo = shi = s.rows.front().overload_days_sampled;
        for (const auto& r : s.rows) {
            lo = std::min(lo, r.overload_days);
            hi = std::max(hi, r.overload_days);
            slo = std::min(slo, r.overload_days_sampled);
            shi = std::max(shi, r.overload_days_sampled);
        }
    }
    const auto med = [&](CumulativeSeries c) {
        return s.rows.empty() ? std::string("nan") : format_double(stats::median(summary_column(s.rows, c)));
    };
    out << s.scenario.id << ",\"" << s.scenario.label << "\"," << format_double(s.scenario.policy.start_day) << ','
        << format_double(s.scenario.policy.efficacy_override.value_or(std::nan(""))) << ',' << s.rows.size() << ','
        << s.failed << ',' << lo << ',' << hi << ',' << slo << ',' << shi << ',' << med(CumulativeSeries::Infected)
        << ',' << med(CumulativeSeries::Reinfected) << ',' << med(CumulativeSeries::Deaths) << '\n';
}

// ---------------------------------------------------------------------------
// Densities, matrices, bands, evidence
// ---------------------------------------------------------------------------

inline void write_density_csv(std::ostream& out, const SmoothedDensity& f)
{
    out << "x,density\n";
    for (std::size_t i = 0; i < f.grid.size(); ++i)
        out << format_double(f.grid[i]) << ',' << format_double(f.values[i]) << '\n';
}

inline void write_matrix_csv(std::ostream& out, const std::vector<std::string>& labels,
                             const std::vector<std::vector<double>>& m)
{
    out << "label";
    for (const auto& l : labels)
        out << ',' << l;
    out << '\n';
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out << labels[i];
        for (std::size_t j = 0; j < labels.size(); ++j)
            out << ',' << format_double(m[i][j]);
        out << '\n';
    }
}

inline void write_bands_csv(std::ostream& out, const TrajectoryBands& bands, const ObservationSeries* obs)
{
    out << "series,day,observed";
    for (double p : bands.probabilities) {
        std::ostringstream label; // column names stay short: q0.025, not 17 digits
        label << p;
        out << ",q" << label.str();
    }
    out << '\n';
    const std::size_t days = bands.bands.empty() ? 0 : bands.bands[0][0].size();
    for (Series s : all_series) {
        const auto si = static_cast<std::size_t>(s);
        for (std::size_t d = 0; d < days; ++d) {
            out << series_column(s) << ',' << d << ',';
            if (obs && static_cast<int>(d) <= obs->last_day()) {
                if (auto v = obs->get(s, static_cast<int>(d)))
                    out << *v;
            }
            for (const auto& q : bands.bands)
                out << ',' << format_double(q[si][d]);
            out << '\n';
        }
    }
}

struct ModelEvidence {
    std::string label;
    EvidenceResult result;
};

inline void write_evidence_csv(std::ostream& out, const ModelEvidence& a, const ModelEvidence& b)
{
    out << "model,log_marginal_likelihood,n_prior_draws,n_zero_likelihood,n_unstable\n";
    for (const auto* m : {&a, &b}) {
        out << m->label << ',' << format_double(m->result.log_marginal) << ',' << m->result.n_draws << ','
            << m->result.n_zero << ',' << m->result.n_failed << '\n';
    }
    const double bf = bayes_factor(a.result.log_marginal, b.result.log_marginal);
    out << "bayes_factor_12," << format_double(bf) << ",,,\n";
}

inline std::string evidence_report(const ModelEvidence& a, const ModelEvidence& b)
{
    std::ostringstream out;
    out << "Model comparison by Bayes factor\n\n";
    for (const auto* m : {&a, &b}) {
        out << m->label << ": log marginal likelihood " << format_double(m->result.log_marginal) << " from "
            << m->result.n_draws << " prior draws (" << m->result.n_zero << " with zero likelihood, "
            << m->result.n_failed << " unstable)\n";
    }
    const double log_bf = a.result.log_marginal - b.result.log_marginal;
    const double bf = bayes_factor(a.result.log_marginal, b.result.log_marginal);
    out << "\nln BF_12 = " << format_double(log_bf) << "\nBF_12 = " << format_double(bf) << "\n"
        << "Interpretation: " << interpret_bayes_factor(bf) << "\n";
    return out.str();
}

} // namespace reinfect
