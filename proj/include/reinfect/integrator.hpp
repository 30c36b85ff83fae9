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

#include "reinfect/model.hpp"
#include "reinfect/parallel.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace reinfect {

/// Values below this abort integration; values in [kUndershootLimit, 0) are
/// clamped to zero when the trajectory is emitted.
inline constexpr double kUndershootLimit = -1e-6;

struct IntegratorOptions {
    double step = 0.1; ///< target step in days; intervals are split evenly so every event is a step boundary
};

/// Mean compartment values on the integer day grid 0..horizon.
class MeanTrajectory
{
public:
    MeanTrajectory() = default;
    MeanTrajectory(ModelTag model, int horizon)
        : model_(model)
        , horizon_(horizon)
        , width_(compartment_count(model))
        , values_(static_cast<std::size_t>(horizon + 1) * width_, 0.0)
        , cumulative_infections_(static_cast<std::size_t>(horizon + 1), 0.0)
    {
    }

    ModelTag model() const
    {
        return model_;
    }
    int horizon() const
    {
        return horizon_;
    }
    std::size_t days() const
    {
        return static_cast<std::size_t>(horizon_ + 1);
    }
    std::size_t width() const
    {
        return width_;
    }

    double at(int day, std::size_t compartment) const
    {
        return values_[static_cast<std::size_t>(day) * width_ + compartment];
    }
    double& at(int day, std::size_t compartment)
    {
        return values_[static_cast<std::size_t>(day) * width_ + compartment];
    }

    std::span<const double> row(int day) const
    {
        return {values_.data() + static_cast<std::size_t>(day) * width_, width_};
    }

    StateVector state(int day) const
    {
        auto r = row(day);
        return {model_, std::vector<double>(r.begin(), r.end())};
    }

    std::vector<double> series(std::size_t compartment) const
    {
        std::vector<double> out(days());
        for (std::size_t d = 0; d < out.size(); ++d)
            out[d] = values_[d * width_ + compartment];
        return out;
    }

    double total(int day) const
    {
        double s = 0.0;
        for (double v : row(day))
            s += v;
        return s;
    }

    /// I(0) plus the integrated E -> I inflow (beta * E) up to the given day.
    double cumulative_infections(int day) const
    {
        return cumulative_infections_[static_cast<std::size_t>(day)];
    }
    double& cumulative_infections(int day)
    {
        return cumulative_infections_[static_cast<std::size_t>(day)];
    }

    friend bool operator==(const MeanTrajectory&, const MeanTrajectory&) = default;

private:
    ModelTag model_ = ModelTag::M1;
    int horizon_ = 0;
    std::size_t width_ = 0;
    std::vector<double> values_;
    std::vector<double> cumulative_infections_;
};

namespace detail {

inline void append_events(std::vector<double>& events, const RateSchedule& s, double horizon)
{
    for (double b : s.breakpoints) {
        if (b > 0.0 && b < horizon)
            events.push_back(b);
    }
}

template <ModelTag M>
MeanTrajectory integrate_fixed(const StateVector& initial, const ParameterSet& params, const VaccinationPolicy& policy,
                               int horizon, const IntegratorOptions& options)
{
    constexpr std::size_t N = ModelTraits<M>::size;
    constexpr std::size_t kE = ModelTraits<M>::E;
    using State = std::array<double, N>;

    const double kappa = policy.efficacy_override.value_or(params.kappa);

    std::vector<double> events;
    append_events(events, params.alpha, horizon);
    append_events(events, params.gamma1, horizon);
    append_events(events, params.phi, horizon);
    if (policy.start_day > 0.0 && policy.start_day < horizon)
        events.push_back(policy.start_day);
    std::sort(events.begin(), events.end());
    events.erase(std::unique(events.begin(), events.end()), events.end());

    MeanTrajectory out(M, horizon);
    State x;
    std::copy(initial.values.begin(), initial.values.end(), x.begin());
    double cum_infections = x[ModelTraits<M>::I];

    auto emit = [&](int day) {
        for (std::size_t c = 0; c < N; ++c)
            out.at(day, c) = x[c] < 0.0 ? 0.0 : x[c];
        out.cumulative_infections(day) = cum_infections;
    };
    emit(0);

    auto check = [&](double t) {
        for (std::size_t c = 0; c < N; ++c) {
            if (!std::isfinite(x[c]) || x[c] < kUndershootLimit)
                throw InstabilityError(t, std::string(ModelTraits<M>::names[c]), x[c]);
        }
    };

    State k1, k2, k3, k4, tmp;
    auto f = [](const InstantRates& r, const State& in, State& dx) {
        derivative<M>(r, std::span<const double, N>(in), std::span<double, N>(dx));
    };

    auto next_event = events.begin();
    for (int day = 0; day < horizon; ++day) {
        double a = day;
        const double day_end = day + 1.0;
        while (a < day_end) {
            while (next_event != events.end() && *next_event <= a)
                ++next_event;
            const double b = (next_event != events.end() && *next_event < day_end) ? *next_event : day_end;
            const double mid = 0.5 * (a + b);
            InstantRates r = instant_rates(params, mid);
            r.kappa = kappa;
            if (mid < policy.start_day)
                r.mu = 0.0;

            const auto steps = std::max<long>(1, static_cast<long>(std::ceil((b - a) / options.step - 1e-9)));
            const double h = (b - a) / static_cast<double>(steps);
            for (long s = 0; s < steps; ++s) {
                f(r, x, k1);
                for (std::size_t c = 0; c < N; ++c)
                    tmp[c] = x[c] + 0.5 * h * k1[c];
                const double e2 = tmp[kE];
                f(r, tmp, k2);
                for (std::size_t c = 0; c < N; ++c)
                    tmp[c] = x[c] + 0.5 * h * k2[c];
                const double e3 = tmp[kE];
                f(r, tmp, k3);
                for (std::size_t c = 0; c < N; ++c)
                    tmp[c] = x[c] + h * k3[c];
                const double e4 = tmp[kE];
                f(r, tmp, k4);
                cum_infections += h / 6.0 * r.beta * (x[kE] + 2.0 * e2 + 2.0 * e3 + e4);
                for (std::size_t c = 0; c < N; ++c)
                    x[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
                check(a + static_cast<double>(s + 1) * h);
            }
            a = b;
        }
        emit(day + 1);
    }
    return out;
}

} // namespace detail

/// Classical RK4 from day 0 to horizon. Rates are held constant within each
/// step; rate breakpoints and the vaccination start day always coincide with
/// step boundaries. mu is zero before policy.start_day.
inline MeanTrajectory integrate(ModelTag model, const StateVector& initial, const ParameterSet& params,
                                const VaccinationPolicy& policy, int horizon, const IntegratorOptions& options = {})
{
    if (horizon < 1)
        throw Error(ErrorCategory::Input, "integration horizon must be at least 1 day");
    if (initial.model != model)
        throw Error(ErrorCategory::ModelMismatch, "initial state belongs to " + std::string(model_name(initial.model)));
    initial.validate();
    params.validate();
    policy.validate(horizon);
    if (!(options.step > 0.0))
        throw Error(ErrorCategory::Input, "integration step must be positive");
    return model == ModelTag::M1 ? detail::integrate_fixed<ModelTag::M1>(initial, params, policy, horizon, options)
                                 : detail::integrate_fixed<ModelTag::M2>(initial, params, policy, horizon, options);
}

/// Result of one member of a batch: a trajectory or the error that stopped it.
using BatchResult = std::variant<MeanTrajectory, Error>;

/// Integrates every parameter set; output order follows input order.
inline std::vector<BatchResult> integrate_batch(ModelTag model, const StateVector& initial,
                                                std::span<const ParameterSet> params, const VaccinationPolicy& policy,
                                                int horizon, unsigned threads = 0,
                                                const IntegratorOptions& options = {})
{
    std::vector<std::optional<BatchResult>> slots(params.size());
    parallel_for(params.size(), threads, [&](std::size_t i) {
        try {
            slots[i].emplace(integrate(model, initial, params[i], policy, horizon, options));
        }
        catch (const Error& e) {
            slots[i].emplace(e);
        }
    });
    std::vector<BatchResult> out;
    out.reserve(slots.size());
    for (auto& s : slots)
        out.push_back(std::move(*s));
    return out;
}

} // namespace reinfect
