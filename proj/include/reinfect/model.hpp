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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace reinfect {

/// Model 1 carries a second susceptible pool S2 for people whose natural
/// immunity has waned. Model 2 sends waned recoveries and vaccinees back to S.
enum class ModelTag { M1, M2 };

inline std::string_view model_name(ModelTag m)
{
    return m == ModelTag::M1 ? "M1" : "M2";
}

inline ModelTag parse_model_tag(std::string_view s)
{
    if (s == "M1" || s == "m1" || s == "1")
        return ModelTag::M1;
    if (s == "M2" || s == "m2" || s == "2")
        return ModelTag::M2;
    throw Error(ErrorCategory::Config, "unknown model '" + std::string(s) + "' (expected M1 or M2)");
}

namespace m1 {
enum Compartment : std::size_t { S1, E, I, RE, RI, D, S2, II, RR, V, kSize };
inline constexpr std::array<std::string_view, kSize> names = {"S1", "E", "I", "RE", "RI", "D", "S2", "II", "RR", "V"};
} // namespace m1

namespace m2 {
enum Compartment : std::size_t { S, E, I, RE, RI, D, II, RR, V, kSize };
inline constexpr std::array<std::string_view, kSize> names = {"S", "E", "I", "RE", "RI", "D", "II", "RR", "V"};
} // namespace m2

template <ModelTag M>
struct ModelTraits;

template <>
struct ModelTraits<ModelTag::M1> {
    static constexpr std::size_t size = m1::kSize;
    static constexpr auto& names = m1::names;
    static constexpr std::size_t E = m1::E, I = m1::I, RI = m1::RI, D = m1::D, II = m1::II, RR = m1::RR, V = m1::V;
};

template <>
struct ModelTraits<ModelTag::M2> {
    static constexpr std::size_t size = m2::kSize;
    static constexpr auto& names = m2::names;
    static constexpr std::size_t E = m2::E, I = m2::I, RI = m2::RI, D = m2::D, II = m2::II, RR = m2::RR, V = m2::V;
};

inline std::size_t compartment_count(ModelTag m)
{
    return m == ModelTag::M1 ? std::size_t{m1::kSize} : std::size_t{m2::kSize};
}

inline std::string_view compartment_name(ModelTag m, std::size_t i)
{
    return m == ModelTag::M1 ? m1::names.at(i) : m2::names.at(i);
}

/// Index of a named compartment; S is accepted as an alias of S1 for Model 1.
inline std::optional<std::size_t> compartment_index(ModelTag m, std::string_view name)
{
    if (m == ModelTag::M1 && name == "S")
        name = "S1";
    if (m == ModelTag::M2 && name == "S1")
        name = "S";
    for (std::size_t i = 0; i < compartment_count(m); ++i) {
        if (compartment_name(m, i) == name)
            return i;
    }
    return std::nullopt;
}

/// Slightly negative occupancies are tolerated while integrating.
inline constexpr double kStateTolerance = -1e-9;

/// Compartment occupancies of one model at one time, in individuals.
/// Construction does not validate so the same type can carry derivatives;
/// call validate() at API boundaries.
struct StateVector {
    ModelTag model = ModelTag::M1;
    std::vector<double> values;

    StateVector() = default;
    StateVector(ModelTag m, std::vector<double> v)
        : model(m)
        , values(std::move(v))
    {
    }

    static StateVector zeros(ModelTag m)
    {
        return {m, std::vector<double>(compartment_count(m), 0.0)};
    }

    std::size_t size() const
    {
        return values.size();
    }
    double& operator[](std::size_t i)
    {
        return values[i];
    }
    double operator[](std::size_t i) const
    {
        return values[i];
    }
    double total() const
    {
        double s = 0.0;
        for (double v : values)
            s += v;
        return s;
    }

    void check_dimension() const
    {
        if (values.size() != compartment_count(model)) {
            throw Error(ErrorCategory::ModelMismatch, "state for " + std::string(model_name(model)) + " has " +
                                                          std::to_string(values.size()) + " entries, expected " +
                                                          std::to_string(compartment_count(model)));
        }
    }

    void validate(double tolerance = kStateTolerance) const
    {
        check_dimension();
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!std::isfinite(values[i]) || values[i] < tolerance) {
                throw Error(ErrorCategory::Input, "compartment " + std::string(compartment_name(model, i)) +
                                                      " has invalid occupancy " + std::to_string(values[i]));
            }
        }
    }

    friend bool operator==(const StateVector&, const StateVector&) = default;
};

/// Piecewise-constant rate over day breakpoints. rates[i] applies on
/// [breakpoints[i-1], breakpoints[i]); the first and last rates extend to
/// -inf and +inf.
struct RateSchedule {
    std::vector<double> breakpoints;
    std::vector<double> rates;

    RateSchedule() = default;
    RateSchedule(std::vector<double> bps, std::vector<double> rs)
        : breakpoints(std::move(bps))
        , rates(std::move(rs))
    {
    }
    static RateSchedule constant(double rate)
    {
        return {{}, {rate}};
    }

    std::size_t segments() const
    {
        return rates.size();
    }

    /// Throws Validation on count mismatch, non-increasing breakpoints, or a
    /// negative/non-finite rate. Zero rates are permitted for scenario work.
    void validate(std::string_view name = "schedule") const
    {
        if (rates.size() != breakpoints.size() + 1) {
            throw Error(ErrorCategory::Validation, std::string(name) + ": " + std::to_string(rates.size()) +
                                                       " rates for " + std::to_string(breakpoints.size()) +
                                                       " breakpoints (need breakpoints + 1)");
        }
        for (std::size_t i = 0; i < breakpoints.size(); ++i) {
            if (!std::isfinite(breakpoints[i]) || (i > 0 && breakpoints[i] <= breakpoints[i - 1])) {
                throw Error(ErrorCategory::Validation,
                            std::string(name) + ": breakpoints must be finite and strictly increasing");
            }
        }
        for (double r : rates) {
            if (!std::isfinite(r) || r < 0.0)
                throw Error(ErrorCategory::Validation, std::string(name) + ": rates must be finite and >= 0");
        }
    }

    friend bool operator==(const RateSchedule&, const RateSchedule&) = default;
};

inline std::size_t segment_index(const RateSchedule& schedule, double t)
{
    auto it = std::upper_bound(schedule.breakpoints.begin(), schedule.breakpoints.end(), t);
    return static_cast<std::size_t>(it - schedule.breakpoints.begin());
}

inline double rate_at(const RateSchedule& schedule, double t)
{
    return schedule.rates[segment_index(schedule, t)];
}

/// All model rates. alpha is stored in the printed "per 10,000" units and
/// multiplied by transmission_unit inside the right-hand side.
struct ParameterSet {
    RateSchedule alpha;
    double beta = 0.0;
    RateSchedule gamma1;
    double gamma2 = 0.0;
    RateSchedule phi;
    double mu = 0.0;
    double kappa = 1.0;
    double eta = 0.0;
    double zeta1 = 0.0;
    double zeta2 = 0.0;
    double transmission_unit = 1e-4;

    /// Everything at zero except kappa; single-segment schedules.
    static ParameterSet zeros()
    {
        ParameterSet p;
        p.alpha = RateSchedule::constant(0.0);
        p.gamma1 = RateSchedule::constant(0.0);
        p.phi = RateSchedule::constant(0.0);
        return p;
    }

    void validate() const
    {
        alpha.validate("alpha");
        gamma1.validate("gamma1");
        phi.validate("phi");
        const std::array<std::pair<const char*, double>, 7> scalars = {{{"beta", beta},
                                                                        {"gamma2", gamma2},
                                                                        {"mu", mu},
                                                                        {"eta", eta},
                                                                        {"zeta1", zeta1},
                                                                        {"zeta2", zeta2},
                                                                        {"transmission_unit", transmission_unit}}};
        for (auto [name, v] : scalars) {
            if (!std::isfinite(v) || v < 0.0)
                throw Error(ErrorCategory::Validation, std::string(name) + " must be finite and >= 0");
        }
        if (!(kappa > 0.0 && kappa <= 1.0))
            throw Error(ErrorCategory::Validation, "kappa must lie in (0, 1]");
    }

    friend bool operator==(const ParameterSet&, const ParameterSet&) = default;
};

/// Day at which vaccination switches on, and an optional efficacy override.
struct VaccinationPolicy {
    double start_day = 0.0;
    std::optional<double> efficacy_override;

    void validate(double horizon) const
    {
        if (!(start_day >= 0.0 && start_day <= horizon))
            throw Error(ErrorCategory::Validation, "vaccination start day outside [0, horizon]");
        if (efficacy_override && !(*efficacy_override > 0.0 && *efficacy_override <= 1.0))
            throw Error(ErrorCategory::Validation, "efficacy override must lie in (0, 1]");
    }

    friend bool operator==(const VaccinationPolicy&, const VaccinationPolicy&) = default;
};

/// Scalar rates in force at a single instant, alpha already in per-individual units.
struct InstantRates {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double phi = 0.0;
    double mu = 0.0;
    double kappa = 1.0;
    double eta = 0.0;
    double zeta1 = 0.0;
    double zeta2 = 0.0;
};

inline InstantRates instant_rates(const ParameterSet& p, double t)
{
    InstantRates r;
    r.alpha = rate_at(p.alpha, t) * p.transmission_unit;
    r.beta = p.beta;
    r.gamma1 = rate_at(p.gamma1, t);
    r.gamma2 = p.gamma2;
    r.phi = rate_at(p.phi, t);
    r.mu = p.mu;
    r.kappa = p.kappa;
    r.eta = p.eta;
    r.zeta1 = p.zeta1;
    r.zeta2 = p.zeta2;
    return r;
}

/// S1 E I RE RI D S2 II RR V. Every term below is an internal transfer, so
/// the derivatives sum to zero.
inline void derivative_model1(const InstantRates& r, std::span<const double, m1::kSize> x,
                              std::span<double, m1::kSize> dx)
{
    using namespace m1;
    const double infection = r.alpha * x[S1] * x[E];
    const double reinfection = r.phi * r.alpha * x[S2] * x[E];
    const double vaccination = r.mu * (x[S1] + x[E] + x[RE]);
    const double vaccine_waning = r.zeta2 * (1.0 - r.kappa) * x[V];
    const double natural_waning = r.zeta1 * x[RI];

    dx[S1] = -infection - r.mu * x[S1];
    dx[E] = infection - (r.beta + r.gamma1 + r.mu) * x[E];
    dx[I] = r.beta * x[E] - (r.gamma1 + r.eta) * x[I];
    dx[RE] = r.gamma1 * x[E] - r.mu * x[RE];
    dx[RI] = r.gamma1 * x[I] - natural_waning;
    dx[D] = r.eta * x[I];
    dx[S2] = natural_waning - reinfection + vaccine_waning;
    dx[II] = reinfection - r.gamma2 * x[II];
    dx[RR] = r.gamma2 * x[II];
    dx[V] = vaccination - vaccine_waning;
}

/// S E I RE RI D II RR V. Vaccinees leak into E at alpha*(1-kappa), and both
/// R_R and V wane back into S.
inline void derivative_model2(const InstantRates& r, std::span<const double, m2::kSize> x,
                              std::span<double, m2::kSize> dx)
{
    using namespace m2;
    const double infection = r.alpha * x[S] * x[E];
    const double breakthrough = r.alpha * (1.0 - r.kappa) * x[V] * x[E];
    const double reinfection = r.alpha * r.phi * x[E] * x[RI];
    const double vaccination = r.mu * (x[S] + x[E] + x[RE]);

    dx[S] = -infection - r.mu * x[S] + r.zeta1 * x[RR] + r.zeta2 * x[V];
    dx[E] = infection - (r.beta + r.gamma1 + r.mu) * x[E] + breakthrough;
    dx[I] = r.beta * x[E] - (r.gamma1 + r.eta) * x[I];
    dx[RE] = r.gamma1 * x[E] - r.mu * x[RE];
    dx[RI] = r.gamma1 * x[I] - reinfection;
    dx[D] = r.eta * x[I];
    dx[II] = reinfection - r.gamma2 * x[II];
    dx[RR] = r.gamma2 * x[II] - r.zeta1 * x[RR];
    dx[V] = vaccination - r.zeta2 * x[V] - breakthrough;
}

template <ModelTag M>
inline void derivative(const InstantRates& r, std::span<const double, ModelTraits<M>::size> x,
                       std::span<double, ModelTraits<M>::size> dx)
{
    if constexpr (M == ModelTag::M1)
        derivative_model1(r, x, dx);
    else
        derivative_model2(r, x, dx);
}

namespace detail {
template <ModelTag M>
StateVector rhs(const StateVector& state, const ParameterSet& params, double t)
{
    if (state.model != M)
        throw Error(ErrorCategory::ModelMismatch, "state belongs to " + std::string(model_name(state.model)) +
                                                      ", expected " + std::string(model_name(M)));
    state.check_dimension();
    StateVector out = StateVector::zeros(M);
    derivative<M>(instant_rates(params, t), std::span<const double, ModelTraits<M>::size>(state.values),
                  std::span<double, ModelTraits<M>::size>(out.values));
    return out;
}
} // namespace detail

/// Time derivative of a Model 1 state; the returned vector carries derivatives, not occupancies.
inline StateVector rhs_model1(const StateVector& state, const ParameterSet& params, double t)
{
    return detail::rhs<ModelTag::M1>(state, params, t);
}

/// Time derivative of a Model 2 state.
inline StateVector rhs_model2(const StateVector& state, const ParameterSet& params, double t)
{
    return detail::rhs<ModelTag::M2>(state, params, t);
}

inline StateVector rhs(const StateVector& state, const ParameterSet& params, double t)
{
    return state.model == ModelTag::M1 ? rhs_model1(state, params, t) : rhs_model2(state, params, t);
}

} // namespace reinfect
