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
// Command-line front end: fit, scenario, hellinger, compare, report, simulate.

#include "reinfect/reinfect.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace reinfect;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string out_dir = "out";
};

StudyConfig resolve_config(const Globals& g)
{
    StudyConfig cfg = g.config.empty() ? parse_config("") : load_config(g.config);
    if (g.seed)
        cfg.sampler.seed = *g.seed;
    return cfg;
}

fs::path prepare_out_dir(const Globals& g)
{
    std::error_code ec;
    fs::create_directories(g.out_dir, ec);
    if (ec)
        throw Error(ErrorCategory::Io, "cannot create output directory '" + g.out_dir + "': " + ec.message());
    return fs::path(g.out_dir);
}

template <class Writer>
void write_file(const fs::path& path, Writer&& writer)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCategory::Io, "cannot write '" + path.string() + "'");
    writer(out);
    out.flush();
    if (!out)
        throw Error(ErrorCategory::Io, "write to '" + path.string() + "' failed");
}

void echo_config(const fs::path& dir, const StudyConfig& cfg)
{
    write_file(dir / "config.resolved.ini", [&](std::ostream& o) { o << write_config(cfg); });
}

std::string parameter_table(const PosteriorDraws& draws)
{
    std::ostringstream o;
    o << "parameter,mean,sd,q0.025,q0.5,q0.975,acceptance_rate,proposal_scale\n";
    for (std::size_t j = 0; j < draws.dim(); ++j) {
        auto col = draws.column(j);
        const double m = stats::mean(col);
        const double sd = col.size() > 1 ? std::sqrt(stats::variance(col)) : 0.0;
        std::sort(col.begin(), col.end());
        o << draws.layout.name(j) << ',' << format_double(m) << ',' << format_double(sd) << ','
          << format_double(stats::quantile_sorted(col, 0.025)) << ','
          << format_double(stats::quantile_sorted(col, 0.5)) << ','
          << format_double(stats::quantile_sorted(col, 0.975)) << ',';
        if (!draws.acceptance_rates.empty())
            o << format_double(draws.acceptance_rates[j]) << ',' << format_double(draws.proposal_scales[j]);
        else
            o << ',';
        o << '\n';
    }
    return o.str();
}

std::optional<double> try_pseudo_r2(const PosteriorDraws& draws, const ObservationSeries& obs,
                                    const FitContext& ctx, const StudyConfig& cfg, unsigned threads)
{
    BandOptions opts;
    opts.max_draws = cfg.band_draws;
    opts.threads = threads;
    try {
        return pseudo_r2(draws, obs, ctx, opts);
    }
    catch (const Error& e) {
        if (e.category() != ErrorCategory::UndefinedStatistic)
            throw;
        return std::nullopt;
    }
}

// ---------------------------------------------------------------------------

struct FitArgs {
    std::string data;
};

void run_fit(const Globals& g, const FitArgs& a)
{
    const StudyConfig cfg = resolve_config(g);
    const auto obs = load_observations(a.data);
    const auto ctx = cfg.fit_context();
    const auto draws = mh_sample(obs, ctx, cfg.layout(), cfg.sampler);
    const auto r2 = try_pseudo_r2(draws, obs, ctx, cfg, g.threads);

    const auto dir = prepare_out_dir(g);
    write_file(dir / "draws.csv", [&](std::ostream& o) { write_draws_csv(o, draws); });
    write_file(dir / "draws_meta.json", [&](std::ostream& o) { o << draws_metadata(draws).dump(2) << '\n'; });
    write_file(dir / "trace.csv", [&](std::ostream& o) { write_trace_csv(o, draws); });
    write_file(dir / "fit_summary.csv", [&](std::ostream& o) {
        o << parameter_table(draws);
        o << "pseudo_r2," << (r2 ? format_double(*r2) : "nan") << ",,,,,,\n";
    });
    echo_config(dir, cfg);
    std::cout << "draws: " << draws.size() << "\npseudo_r2: " << (r2 ? format_double(*r2) : "undefined") << '\n';
}

struct ScenarioArgs {
    std::string draws;
    std::vector<int> scenarios;
    std::optional<double> threshold;
    std::optional<int> summary_day;
    std::optional<std::size_t> max_draws;
};

void run_scenario(const Globals& g, const ScenarioArgs& a)
{
    StudyConfig cfg = resolve_config(g);
    if (!a.scenarios.empty())
        cfg.scenarios = a.scenarios;
    if (a.threshold)
        cfg.bed_threshold = *a.threshold;
    if (a.summary_day)
        cfg.summary_day = *a.summary_day;
    if (a.max_draws)
        cfg.predictive_max_draws = *a.max_draws;
    cfg.validate();

    const auto draws = load_draws(a.draws, cfg.params);
    const auto ctx = cfg.fit_context();
    PredictiveOptions opts;
    opts.horizon = cfg.horizon;
    opts.seed = cfg.sampler.seed;
    opts.threads = g.threads;
    opts.max_draws = cfg.predictive_max_draws;

    const auto dir = prepare_out_dir(g);
    std::ostringstream table;
    write_overload_table_header(table);
    for (int id : cfg.scenarios) {
        const auto s = summarize_scenario(draws, canonical_scenario(id), ctx, opts, cfg.bed_threshold, cfg.summary_day);
        write_file(dir / ("scenario_" + std::to_string(id) + ".csv"), [&](std::ostream& o) { write_scenario_csv(o, s); });
        write_overload_table_row(table, s);
        if (s.failed)
            std::cerr << "scenario " << id << ": " << s.failed << " draws failed to integrate and were excluded\n";
    }
    write_file(dir / "overload_ranges.csv", [&](std::ostream& o) { o << table.str(); });
    echo_config(dir, cfg);
    std::cout << table.str();
}

// ---------------------------------------------------------------------------

struct HellingerArgs {
    std::vector<std::string> files;
    std::vector<std::string> labels;
    std::string series = "all";
    std::size_t points = 512;
};

const std::map<std::string, std::function<double(const PredictiveSummary&)>>& summary_columns()
{
    static const std::map<std::string, std::function<double(const PredictiveSummary&)>> cols = {
        {"infected", [](const PredictiveSummary& r) { return r.cum_infected; }},
        {"reinfected", [](const PredictiveSummary& r) { return r.cum_reinfected; }},
        {"deaths", [](const PredictiveSummary& r) { return r.cum_deaths; }},
        {"overload", [](const PredictiveSummary& r) { return static_cast<double>(r.overload_days); }},
    };
    return cols;
}

std::vector<std::vector<double>> hellinger_matrix(const std::vector<std::vector<double>>& samples,
                                                  std::size_t points)
{
    const std::size_t n = samples.size();
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            m[i][j] = m[j][i] = hellinger_from_samples(samples[i], samples[j], points);
    return m;
}

void run_hellinger(const Globals& g, const HellingerArgs& a)
{
    const StudyConfig cfg = resolve_config(g);
    if (!a.labels.empty() && a.labels.size() != a.files.size())
        throw Error(ErrorCategory::Input, "--labels needs one label per input file");
    std::vector<std::string> series;
    if (a.series == "all")
        series = {"infected", "reinfected", "deaths", "overload"};
    else if (summary_columns().count(a.series))
        series = {a.series};
    else
        throw Error(ErrorCategory::Input, "unknown series '" + a.series + "'");

    std::vector<std::vector<PredictiveSummary>> inputs;
    std::vector<std::string> labels = a.labels;
    for (const auto& f : a.files) {
        inputs.push_back(load_scenario_csv(f));
        if (inputs.back().empty())
            throw Error(ErrorCategory::Input, "'" + f + "' has no rows");
        if (a.labels.empty())
            labels.push_back(fs::path(f).stem().string());
    }

    const auto dir = prepare_out_dir(g);
    for (const auto& name : series) {
        const auto& col = summary_columns().at(name);
        std::vector<std::vector<double>> samples;
        for (const auto& rows : inputs) {
            samples.emplace_back();
            for (const auto& r : rows)
                samples.back().push_back(col(r));
        }
        std::vector<std::vector<double>> m;
        try {
            m = hellinger_matrix(samples, a.points);
        }
        catch (const Error& e) {
            if (e.category() != ErrorCategory::DegenerateSample || a.series != "all")
                throw;
            std::cerr << "skipping " << name << ": " << e.what() << '\n';
            continue;
        }
        write_file(dir / ("hellinger_" + name + ".csv"), [&](std::ostream& o) { write_matrix_csv(o, labels, m); });
        // Per-input densities on the grid shared by all inputs.
        GridSpec grid = default_grid(samples[0], rule_of_thumb_bandwidth(samples[0]), a.points);
        for (const auto& s : samples) {
            const auto gs = default_grid(s, rule_of_thumb_bandwidth(s), a.points);
            grid.min = std::min(grid.min, gs.min);
            grid.max = std::max(grid.max, gs.max);
        }
        for (std::size_t i = 0; i < samples.size(); ++i)
            write_file(dir / ("density_" + labels[i] + "_" + name + ".csv"),
                       [&](std::ostream& o) { write_density_csv(o, kde(samples[i], grid)); });
        std::cout << "hellinger_" << name << ".csv\n";
    }
    echo_config(dir, cfg);
}

// ---------------------------------------------------------------------------

struct CompareArgs {
    std::string data;
    std::string model_a;
    std::string model_b;
    std::optional<std::size_t> n_draws;
};

void run_compare(const Globals& g, const CompareArgs& a)
{
    const auto obs = load_observations(a.data);
    const auto dir = prepare_out_dir(g);
    std::vector<ModelEvidence> results;
    int k = 0;
    for (const auto& path : {a.model_a, a.model_b}) {
        ++k;
        StudyConfig cfg = load_config(path);
        if (g.seed)
            cfg.sampler.seed = *g.seed;
        if (a.n_draws)
            cfg.evidence_draws = *a.n_draws;
        EvidenceConfig ec{cfg.evidence_draws, cfg.sampler.seed, g.threads};
        results.push_back({"model_" + std::to_string(k) + " (" + std::string(model_name(cfg.model)) + ")",
                           log_marginal_likelihood(obs, cfg.fit_context(), cfg.layout(), ec)});
        write_file(dir / ("config_" + std::to_string(k) + ".resolved.ini"),
                   [&](std::ostream& o) { o << write_config(cfg); });
    }
    const auto report = evidence_report(results[0], results[1]);
    write_file(dir / "evidence.txt", [&](std::ostream& o) { o << report; });
    write_file(dir / "evidence.csv", [&](std::ostream& o) { write_evidence_csv(o, results[0], results[1]); });
    std::cout << report;
}

// ---------------------------------------------------------------------------

struct ReportArgs {
    std::string data;
    std::string draws;
    std::string scenario_dir;
};

void run_report(const Globals& g, const ReportArgs& a)
{
    const StudyConfig cfg = resolve_config(g);
    const auto obs = load_observations(a.data);
    const auto draws = load_draws(a.draws, cfg.params);
    const auto ctx = cfg.fit_context();
    BandOptions bo;
    bo.max_draws = cfg.band_draws;
    bo.threads = g.threads;
    const auto bands = trajectory_bands(draws, ctx, cfg.horizon, bo);
    std::optional<double> r2;
    try {
        BandOptions median = bo;
        median.probabilities = {0.5};
        r2 = pseudo_r2(obs, trajectory_bands(draws, ctx, ctx.resolved_horizon(obs), median).bands[0]);
    }
    catch (const Error& e) {
        if (e.category() != ErrorCategory::UndefinedStatistic)
            throw;
    }

    const auto dir = prepare_out_dir(g);
    write_file(dir / "bands.csv", [&](std::ostream& o) { write_bands_csv(o, bands, &obs); });

    // The draws file carries every parameter; list only those the config leaves free.
    const auto free_layout = cfg.layout();
    std::ostringstream r;
    r << "Run summary (" << model_name(cfg.model) << ", " << draws.size() << " draws, seed " << cfg.sampler.seed
      << ")\n\n";
    r << "Parameter estimates\n";
    std::istringstream table(parameter_table(draws));
    std::string line;
    std::getline(table, line);
    r << line << '\n';
    while (std::getline(table, line)) {
        const auto name = line.substr(0, line.find(','));
        if (free_layout.contains(name))
            r << line << '\n';
    }
    r << "\npseudo_r2," << (r2 ? format_double(*r2) : "undefined") << "\n";
    r << "trajectory bands: " << bands.draws_used << " draws used, " << bands.draws_failed << " failed\n";

    if (!a.scenario_dir.empty()) {
        std::vector<std::pair<int, std::vector<PredictiveSummary>>> found;
        for (int id = 1; id <= kScenarioCount; ++id) {
            const auto p = fs::path(a.scenario_dir) / ("scenario_" + std::to_string(id) + ".csv");
            if (fs::exists(p))
                found.emplace_back(id, load_scenario_csv(p.string()));
        }
        r << "\nScenario outcomes at day " << cfg.summary_day << " (threshold " << format_double(cfg.bed_threshold)
          << " beds)\n";
        r << "scenario,start_day,kappa,draws,overload_min,overload_max,median_cum_infected,median_cum_reinfected,"
             "median_cum_deaths\n";
        for (const auto& [id, rows] : found) {
            const auto sc = canonical_scenario(id);
            r << id << ',' << format_double(sc.policy.start_day) << ','
              << format_double(sc.policy.efficacy_override.value_or(std::nan(""))) << ',' << rows.size();
            if (rows.empty()) {
                r << ",,,,,\n";
                continue;
            }
            const auto [lo, hi] = std::minmax_element(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
                return x.overload_days < y.overload_days;
            });
            r << ',' << lo->overload_days << ',' << hi->overload_days;
            for (auto c : {CumulativeSeries::Infected, CumulativeSeries::Reinfected, CumulativeSeries::Deaths})
                r << ',' << format_double(stats::median(summary_column(rows, c)));
            r << '\n';
        }
        if (found.size() >= 2) {
            for (const auto& [name, col] : summary_columns()) {
                if (name == "overload")
                    continue;
                std::vector<std::vector<double>> samples;
                std::vector<std::string> labels;
                for (const auto& [id, rows] : found) {
                    samples.emplace_back();
                    for (const auto& row : rows)
                        samples.back().push_back(col(row));
                    labels.push_back("scenario_" + std::to_string(id));
                }
                r << "\nHellinger H^2, cumulative " << name << '\n';
                try {
                    std::ostringstream m;
                    write_matrix_csv(m, labels, hellinger_matrix(samples, 512));
                    r << m.str();
                }
                catch (const Error& e) {
                    r << "not available: " << e.what() << '\n';
                }
            }
        }
    }
    write_file(dir / "report.txt", [&](std::ostream& o) { o << r.str(); });
    echo_config(dir, cfg);
    std::cout << r.str();
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::optional<int> last_day;
};

/// Synthetic observations: Poisson counts around the configured trajectory.
void run_simulate(const Globals& g, const SimulateArgs& a)
{
    const StudyConfig cfg = resolve_config(g);
    const int last = a.last_day.value_or(cfg.horizon);
    if (last < 0 || last > cfg.horizon)
        throw Error(ErrorCategory::Input, "--days must be within 0..horizon");
    const auto ctx = cfg.fit_context();
    const auto traj = integrate(ctx.model, ctx.initial, cfg.params, ctx.policy, cfg.horizon, ctx.integrator);
    ObservationSeries obs(last);
    for (Series s : all_series) {
        Rng rng = make_rng(cfg.sampler.seed, kStreamSynthetic, static_cast<std::uint64_t>(s));
        const auto c = series_compartment(ctx.model, s);
        std::int64_t floor = 0;
        for (int d = 0; d <= last; ++d) {
            auto v = sample_poisson(rng, traj.at(d, c));
            if (is_cumulative(s))
                floor = v = std::max(v, floor);
            obs.set(s, d, v);
        }
    }
    const auto dir = prepare_out_dir(g);
    write_file(dir / "observations.csv", [&](std::ostream& o) { write_observations(o, obs); });
    echo_config(dir, cfg);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Bayesian reinfection model: fitting, scenarios and model comparison"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "INI configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "master seed (overrides [sampler] seed)");
    app.add_option("--threads", g.threads, "worker threads, 0 = hardware concurrency");
    app.add_option("--out-dir", g.out_dir, "output directory")->capture_default_str();

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "sample the posterior for observed data");
    fit_cmd->add_option("--data", fit.data, "observations CSV")->required();

    ScenarioArgs sc;
    auto* sc_cmd = app.add_subcommand("scenario", "posterior-predictive runs of vaccination scenarios");
    sc_cmd->add_option("--draws", sc.draws, "posterior draws CSV")->required();
    sc_cmd->add_option("--scenarios", sc.scenarios, "scenario ids 1..6")->delimiter(',');
    sc_cmd->add_option("--threshold", sc.threshold, "bed capacity");
    sc_cmd->add_option("--summary-day", sc.summary_day, "day of the cumulative summaries");
    sc_cmd->add_option("--max-draws", sc.max_draws, "thin the draws to at most this many, 0 = all");

    HellingerArgs he;
    auto* he_cmd = app.add_subcommand("hellinger", "pairwise Hellinger H^2 between scenario CSVs");
    he_cmd->add_option("files", he.files, "scenario CSVs")->required()->expected(2, -1);
    he_cmd->add_option("--labels", he.labels, "labels for the inputs")->delimiter(',');
    he_cmd->add_option("--series", he.series, "infected, reinfected, deaths, overload or all");
    he_cmd->add_option("--points", he.points, "grid points")->check(CLI::Range(2, 1 << 20));

    CompareArgs cm;
    auto* cm_cmd = app.add_subcommand("compare", "Bayes factor between two model configurations");
    cm_cmd->add_option("--data", cm.data, "observations CSV")->required();
    cm_cmd->add_option("model_a", cm.model_a, "first model config")->required()->check(CLI::ExistingFile);
    cm_cmd->add_option("model_b", cm.model_b, "second model config")->required()->check(CLI::ExistingFile);
    cm_cmd->add_option("--prior-draws", cm.n_draws, "prior draws per model");

    ReportArgs rp;
    auto* rp_cmd = app.add_subcommand("report", "summary tables and trajectory bands");
    rp_cmd->add_option("--data", rp.data, "observations CSV")->required();
    rp_cmd->add_option("--draws", rp.draws, "posterior draws CSV")->required();
    rp_cmd->add_option("--scenario-dir", rp.scenario_dir, "directory holding scenario_<id>.csv files");

    SimulateArgs sm;
    auto* sm_cmd = app.add_subcommand("simulate", "synthetic observations from the configured parameters");
    sm_cmd->add_option("--days", sm.last_day, "last simulated day");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    }
    catch (const CLI::Error& e) {
        std::cerr << "ERROR " << category_name(ErrorCategory::Input) << ": " << e.what() << '\n';
        return static_cast<int>(ErrorCategory::Input);
    }

    try {
        if (*fit_cmd)
            run_fit(g, fit);
        else if (*sc_cmd)
            run_scenario(g, sc);
        else if (*he_cmd)
            run_hellinger(g, he);
        else if (*cm_cmd)
            run_compare(g, cm);
        else if (*rp_cmd)
            run_report(g, rp);
        else if (*sm_cmd)
            run_simulate(g, sm);
    }
    catch (const Error& e) {
        std::cerr << "ERROR " << category_name(e.category()) << ": " << e.what() << '\n';
        return static_cast<int>(e.category());
    }
    catch (const std::exception& e) {
        std::cerr << "ERROR " << category_name(ErrorCategory::Io) << ": " << e.what() << '\n';
        return static_cast<int>(ErrorCategory::Io);
    }
    return 0;
}
