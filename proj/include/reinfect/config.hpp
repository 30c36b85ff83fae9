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
#include "reinfect/format.hpp"
#include "reinfect/inference.hpp"
#include "reinfect/integrator.hpp"
#include "reinfect/model.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace reinfect {

/// Day-0 occupancies. S2 is only used by Model 1; Model 2's S takes S1.
struct InitialConditions {
    double S1 = 2695122.0;
    double S2 = 2695122.0 / 6.0;
    double E = 5.0;
    double I = 1.0;
    double RE = 0.0;
    double RI = 0.0;
    double D = 0.0;
    double II = 0.0;
    double RR = 0.0;
    double V = 0.0;

    StateVector state(ModelTag model) const
    {
        if (model == ModelTag::M1)
            return {model, {S1, E, I, RE, RI, D, S2, II, RR, V}};
        return {model, {S1, E, I, RE, RI, D, II, RR, V}};
    }

    friend bool operator==(const InitialConditions&, const InitialConditions&) = default;
};

/// Intervention days (day 0 = first recorded case). The source study does
/// not print its dates; these follow the published Qatar timeline and are
/// expected to be overridden from the dataset's own breakpoint list.
inline const std::vector<double> kDefaultAlphaBreakpoints = {10, 24, 108, 124, 151, 186, 392, 455, 497};
inline const std::vector<double> kDefaultGamma1Breakpoints = {108, 186, 392};
inline const std::vector<double> kDefaultPhiBreakpoints = {186, 392, 455};

/// Posterior means reported for the Qatar fit, alpha in units of 1e-4.
inline ParameterSet reported_parameters(ModelTag model)
{
    ParameterSet p;
    if (model == ModelTag::M1) {
        p.alpha = {kDefaultAlphaBreakpoints,
                   {0.00286, 0.00084, 0.00091, 0.00076, 0.00110, 0.00089, 0.00086, 0.00097, 0.00112, 0.00132}};
        p.beta = 0.06988;
        p.gamma1 = {kDefaultGamma1Breakpoints, {0.09097, 0.13564, 0.14758, 0.11333}};
        p.phi = {kDefaultPhiBreakpoints, {0.00538, 0.01187, 0.02213, 0.00740}};
        p.gamma2 = 0.14295;
        p.mu = 0.00460;
        p.kappa = 0.94;
        p.eta = 0.00021;
        p.zeta1 = 0.00202;
        p.zeta2 = 0.00119;
    }
    else {
        p.alpha = {kDefaultAlphaBreakpoints,
                   {0.00314, 0.00089, 0.00089, 0.00077, 0.00110, 0.00090, 0.00087, 0.00098, 0.00114, 0.00135}};
        p.beta = 0.07270;
        p.gamma1 = {kDefaultGamma1Breakpoints, {0.11527, 0.13595, 0.15138, 0.11501}};
        p.phi = {kDefaultPhiBreakpoints, {0.01885, 0.01978, 0.02315, 0.01149}};
        p.gamma2 = 0.14286;
        p.mu = 0.00462;
        p.kappa = 0.94;
        p.eta = 0.00021;
        p.zeta1 = 0.05374;
        p.zeta2 = 0.00359;
    }
    p.transmission_unit = 1e-4;
    return p;
}

/// Fully resolved run configuration.
struct StudyConfig {
    ModelTag model = ModelTag::M1;
    int horizon = 550;
    double integrator_step = 0.1;
    InitialConditions initial;
    ParameterSet params = reported_parameters(ModelTag::M1);
    double vaccination_start_day = 380.0;
    std::optional<double> efficacy_override;
    double bed_threshold = 3134.0;

    SamplerConfig sampler;
    std::vector<std::string> fixed = {"gamma2", "kappa"};

    std::vector<int> scenarios = {1, 2, 3, 4, 5, 6};
    int summary_day = 540;
    std::size_t predictive_max_draws = 0;
    std::size_t band_draws = 2000;

    std::size_t evidence_draws = 100000;

    /// Non-fatal findings from validation (not part of equality).
    std::vector<std::string> notes;

    VaccinationPolicy policy() const
    {
        return {vaccination_start_day, efficacy_override};
    }

    FitContext fit_context() const
    {
        FitContext ctx;
        ctx.model = model;
        ctx.initial = initial.state(model);
        ctx.policy = policy();
        ctx.horizon = horizon;
        ctx.integrator.step = integrator_step;
        return ctx;
    }

    ParameterLayout layout() const
    {
        return ParameterLayout(params, fixed);
    }

    void validate();

    friend bool operator==(const StudyConfig& a, const StudyConfig& b)
    {
        const auto& sa = a.sampler;
        const auto& sb = b.sampler;
        return a.model == b.model && a.horizon == b.horizon && a.integrator_step == b.integrator_step &&
               a.initial == b.initial && a.params == b.params && a.vaccination_start_day == b.vaccination_start_day &&
               a.efficacy_override == b.efficacy_override && a.bed_threshold == b.bed_threshold &&
               sa.n_draws == sb.n_draws && sa.tuning_chains == sb.tuning_chains &&
               sa.tuning_iterations == sb.tuning_iterations && sa.seed == sb.seed &&
               sa.initial_scale == sb.initial_scale && sa.proposal_scales == sb.proposal_scales &&
               sa.target_low == sb.target_low && sa.target_high == sb.target_high && a.fixed == b.fixed &&
               a.scenarios == b.scenarios && a.summary_day == b.summary_day &&
               a.predictive_max_draws == b.predictive_max_draws && a.band_draws == b.band_draws &&
               a.evidence_draws == b.evidence_draws;
    }
};

inline void StudyConfig::validate()
{
    notes.clear();
    if (horizon < 1)
        throw Error(ErrorCategory::Validation, "horizon must be at least 1");
    params.validate();
    initial.state(model).validate(0.0);
    for (const auto* s : {&params.alpha, &params.gamma1, &params.phi}) {
        for (double b : s->breakpoints) {
            if (b < 0.0 || b > horizon)
                throw Error(ErrorCategory::Validation, "breakpoint " + format_double(b) + " outside [0, horizon]");
        }
    }
    policy().validate(horizon);
    if (bed_threshold < 0.0)
        throw Error(ErrorCategory::Validation, "bed_threshold must be >= 0");
    if (summary_day < 0 || summary_day > horizon)
        throw Error(ErrorCategory::Validation, "summary_day outside [0, horizon]");
    if (!(integrator_step > 0.0))
        throw Error(ErrorCategory::Validation, "integrator_step must be positive");
    for (int id : scenarios) {
        if (id < 1 || id > 6)
            throw Error(ErrorCategory::Validation, "scenario id " + std::to_string(id) + " is not in 1..6");
    }
    if (!(sampler.target_low > 0.0 && sampler.target_low < sampler.target_high && sampler.target_high < 1.0))
        throw Error(ErrorCategory::Validation, "sampler acceptance window must satisfy 0 < low < high < 1");
    (void)layout(); // rejects unknown names in `fixed`
    if (params.alpha.segments() != 11) {
        notes.push_back("alpha has " + std::to_string(params.alpha.segments()) +
                        " segments; the prior indexing i = 0..10 implies 11 while the reported fit lists 10");
    }
    if (params.gamma1.segments() != 4)
        notes.push_back("gamma1 has " + std::to_string(params.gamma1.segments()) + " segments (reported fit: 4)");
    if (params.phi.segments() != 4)
        notes.push_back("phi has " + std::to_string(params.phi.segments()) + " segments (reported fit: 4)");
}

namespace detail {

inline double parse_number(const std::string& text, const std::string& where)
{
    const std::string s = trim(text);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
        throw Error(ErrorCategory::Config, where + ": '" + s + "' is not a number");
    return v;
}

inline long long parse_integer(const std::string& text, const std::string& where)
{
    const double v = parse_number(text, where);
    if (v != std::floor(v))
        throw Error(ErrorCategory::Config, where + ": '" + trim(text) + "' is not an integer");
    return static_cast<long long>(v);
}

inline std::vector<double> parse_list(const std::string& text, const std::string& where)
{
    std::vector<double> out;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) {
        std::istringstream words(token);
        std::string w;
        while (words >> w)
            out.push_back(parse_number(w, where));
    }
    return out;
}

inline bool parse_bool(const std::string& text, const std::string& where)
{
    const std::string s = trim(text);
    if (s == "true" || s == "1" || s == "yes")
        return true;
    if (s == "false" || s == "0" || s == "no")
        return false;
    throw Error(ErrorCategory::Config, where + ": '" + s + "' is not a boolean");
}

inline std::vector<std::string> parse_names(const std::string& text)
{
    std::vector<std::string> out;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) {
        std::istringstream words(token);
        std::string w;
        while (words >> w)
            out.push_back(w);
    }
    return out;
}

} // namespace detail

/// Parses INI-style text: [sections] of key = value, lists comma separated.
/// Omitted keys keep their defaults; rate defaults follow the chosen model.
/// With `strict`, unknown sections or keys are errors.
inline StudyConfig parse_config(const std::string& text, bool strict = true)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::ini_parser::read_ini(in, tree);
    }
    catch (const pt::ini_parser_error& e) {
        throw Error(ErrorCategory::Config, std::string("malformed config: ") + e.what());
    }

    static const std::map<std::string, std::set<std::string>> known = {
        {"model", {"model", "horizon", "transmission_unit", "integrator_step"}},
        {"initial", {"S1", "S2", "E", "I", "RE", "RI", "D", "II", "RR", "V"}},
        {"rates",
         {"alpha", "alpha_breakpoints", "beta", "gamma1", "gamma1_breakpoints", "gamma2", "phi", "phi_breakpoints",
          "mu", "kappa", "eta", "zeta1", "zeta2"}},
        {"vaccination", {"start_day", "efficacy_override", "bed_threshold"}},
        {"sampler",
         {"n_draws", "tuning_chains", "tuning_iterations", "initial_scale", "proposal_scales", "target_low",
          "target_high", "fixed", "seed"}},
        {"predictive", {"scenarios", "summary_day", "max_draws", "band_draws"}},
        {"evidence", {"n_prior_draws"}},
    };
    if (strict) {
        for (const auto& [section, body] : tree) {
            auto it = known.find(section);
            if (it == known.end())
                throw Error(ErrorCategory::Config, "unknown section or top-level key '" + section + "'");
            for (const auto& [key, value] : body) {
                if (!it->second.count(key))
                    throw Error(ErrorCategory::Config, "unknown key '" + key + "' in [" + section + "]");
            }
        }
    }

    auto get = [&](const std::string& section, const std::string& key) -> std::optional<std::string> {
        auto v = tree.get_optional<std::string>(pt::ptree::path_type(section + "/" + key, '/'));
        if (!v || trim(*v).empty())
            return std::nullopt;
        return *v;
    };
    auto where = [](const std::string& s, const std::string& k) { return "[" + s + "] " + k; };
    auto num = [&](const std::string& s, const std::string& k, double& target) {
        if (auto v = get(s, k))
            target = detail::parse_number(*v, where(s, k));
    };
    auto count = [&](const std::string& s, const std::string& k, std::size_t& target) {
        if (auto v = get(s, k)) {
            const auto n = detail::parse_integer(*v, where(s, k));
            if (n < 0)
                throw Error(ErrorCategory::Config, where(s, k) + " must be >= 0");
            target = static_cast<std::size_t>(n);
        }
    };

    StudyConfig cfg;
    if (auto m = get("model", "model"))
        cfg.model = parse_model_tag(trim(*m));
    cfg.params = reported_parameters(cfg.model);
    if (auto v = get("model", "horizon"))
        cfg.horizon = static_cast<int>(detail::parse_integer(*v, where("model", "horizon")));
    num("model", "transmission_unit", cfg.params.transmission_unit);
    num("model", "integrator_step", cfg.integrator_step);

    auto& ic = cfg.initial;
    const std::pair<const char*, double*> initial_fields[] = {{"S1", &ic.S1}, {"S2", &ic.S2}, {"E", &ic.E},
                                                             {"I", &ic.I},   {"RE", &ic.RE}, {"RI", &ic.RI},
                                                             {"D", &ic.D},   {"II", &ic.II}, {"RR", &ic.RR},
                                                             {"V", &ic.V}};
    for (auto [key, target] : initial_fields)
        num("initial", key, *target);

    auto schedule = [&](const std::string& name, RateSchedule& target) {
        const auto rates = get("rates", name);
        // An empty breakpoint list is meaningful: a constant rate.
        const auto bps = tree.get_optional<std::string>(pt::ptree::path_type("rates/" + name + "_breakpoints", '/'));
        if (bps)
            target.breakpoints = trim(*bps).empty() ? std::vector<double>{}
                                                    : detail::parse_list(*bps, where("rates", name + "_breakpoints"));
        if (rates)
            target.rates = detail::parse_list(*rates, where("rates", name));
        else if (bps && target.rates.size() != target.breakpoints.size() + 1)
            throw Error(ErrorCategory::Validation,
                        name + "_breakpoints given without " + name + " and the default rate count does not match");
    };
    schedule("alpha", cfg.params.alpha);
    schedule("gamma1", cfg.params.gamma1);
    schedule("phi", cfg.params.phi);
    num("rates", "beta", cfg.params.beta);
    num("rates", "gamma2", cfg.params.gamma2);
    num("rates", "mu", cfg.params.mu);
    num("rates", "kappa", cfg.params.kappa);
    num("rates", "eta", cfg.params.eta);
    num("rates", "zeta1", cfg.params.zeta1);
    num("rates", "zeta2", cfg.params.zeta2);

    num("vaccination", "start_day", cfg.vaccination_start_day);
    if (auto v = get("vaccination", "efficacy_override"))
        cfg.efficacy_override = detail::parse_number(*v, where("vaccination", "efficacy_override"));
    num("vaccination", "bed_threshold", cfg.bed_threshold);

    count("sampler", "n_draws", cfg.sampler.n_draws);
    count("sampler", "tuning_chains", cfg.sampler.tuning_chains);
    count("sampler", "tuning_iterations", cfg.sampler.tuning_iterations);
    num("sampler", "initial_scale", cfg.sampler.initial_scale);
    if (auto v = get("sampler", "proposal_scales"))
        cfg.sampler.proposal_scales = detail::parse_list(*v, where("sampler", "proposal_scales"));
    num("sampler", "target_low", cfg.sampler.target_low);
    num("sampler", "target_high", cfg.sampler.target_high);
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type("sampler/fixed", '/')))
        cfg.fixed = detail::parse_names(*v);
    if (auto v = get("sampler", "seed"))
        cfg.sampler.seed = static_cast<std::uint64_t>(detail::parse_integer(*v, where("sampler", "seed")));

    if (auto v = get("predictive", "scenarios")) {
        cfg.scenarios.clear();
        for (double id : detail::parse_list(*v, where("predictive", "scenarios")))
            cfg.scenarios.push_back(static_cast<int>(id));
    }
    if (auto v = get("predictive", "summary_day"))
        cfg.summary_day = static_cast<int>(detail::parse_integer(*v, where("predictive", "summary_day")));
    count("predictive", "max_draws", cfg.predictive_max_draws);
    count("predictive", "band_draws", cfg.band_draws);
    count("evidence", "n_prior_draws", cfg.evidence_draws);

    cfg.validate();
    return cfg;
}

inline StudyConfig load_config(const std::string& path, bool strict = true)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCategory::Io, "cannot open config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), strict);
}

/// Writes every resolved value so that parse_config(write_config(c)) == c.
inline std::string write_config(const StudyConfig& cfg)
{
    std::ostringstream out;
    auto list = [](const std::vector<double>& v) { return join(v, ", "); };
    out << "; resolved configuration\n";
    for (const auto& n : cfg.notes)
        out << "; note: " << n << "\n";
    out << "\n[model]\n";
    out << "model = " << model_name(cfg.model) << "\n";
    out << "horizon = " << cfg.horizon << "\n";
    out << "transmission_unit = " << format_double(cfg.params.transmission_unit) << "\n";
    out << "integrator_step = " << format_double(cfg.integrator_step) << "\n";

    const auto& ic = cfg.initial;
    out << "\n[initial]\n";
    out << "S1 = " << format_double(ic.S1) << "\nS2 = " << format_double(ic.S2) << "\nE = " << format_double(ic.E)
        << "\nI = " << format_double(ic.I) << "\nRE = " << format_double(ic.RE) << "\nRI = " << format_double(ic.RI)
        << "\nD = " << format_double(ic.D) << "\nII = " << format_double(ic.II) << "\nRR = " << format_double(ic.RR)
        << "\nV = " << format_double(ic.V) << "\n";

    const auto& p = cfg.params;
    out << "\n[rates]\n";
    out << "alpha = " << list(p.alpha.rates) << "\n";
    out << "alpha_breakpoints = " << list(p.alpha.breakpoints) << "\n";
    out << "beta = " << format_double(p.beta) << "\n";
    out << "gamma1 = " << list(p.gamma1.rates) << "\n";
    out << "gamma1_breakpoints = " << list(p.gamma1.breakpoints) << "\n";
    out << "gamma2 = " << format_double(p.gamma2) << "\n";
    out << "phi = " << list(p.phi.rates) << "\n";
    out << "phi_breakpoints = " << list(p.phi.breakpoints) << "\n";
    out << "mu = " << format_double(p.mu) << "\nkappa = " << format_double(p.kappa)
        << "\neta = " << format_double(p.eta) << "\nzeta1 = " << format_double(p.zeta1)
        << "\nzeta2 = " << format_double(p.zeta2) << "\n";

    out << "\n[vaccination]\n";
    out << "start_day = " << format_double(cfg.vaccination_start_day) << "\n";
    out << "efficacy_override = " << (cfg.efficacy_override ? format_double(*cfg.efficacy_override) : "") << "\n";
    out << "bed_threshold = " << format_double(cfg.bed_threshold) << "\n";

    const auto& s = cfg.sampler;
    out << "\n[sampler]\n";
    out << "n_draws = " << s.n_draws << "\ntuning_chains = " << s.tuning_chains
        << "\ntuning_iterations = " << s.tuning_iterations << "\ninitial_scale = " << format_double(s.initial_scale)
        << "\nproposal_scales = " << list(s.proposal_scales) << "\ntarget_low = " << format_double(s.target_low)
        << "\ntarget_high = " << format_double(s.target_high) << "\n";
    out << "fixed = " << join(cfg.fixed, ", ") << "\n";
    out << "seed = " << s.seed << "\n";

    out << "\n[predictive]\n";
    out << "scenarios = " << join(cfg.scenarios, ", ") << "\n";
    out << "summary_day = " << cfg.summary_day << "\nmax_draws = " << cfg.predictive_max_draws
        << "\nband_draws = " << cfg.band_draws << "\n";

    out << "\n[evidence]\nn_prior_draws = " << cfg.evidence_draws << "\n";
    return out.str();
}

} // namespace reinfect
