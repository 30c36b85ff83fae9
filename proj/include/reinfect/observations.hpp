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
#include "reinfect/model.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace reinfect {

/// The six observed series, in CSV column order.
enum class Series : std::size_t { Infected, Recovered, Deaths, Reinfected, RecoveredReinfected, Vaccinated };

inline constexpr std::size_t kSeriesCount = 6;

inline constexpr std::array<Series, kSeriesCount> all_series = {Series::Infected,   Series::Recovered,
                                                                  Series::Deaths,     Series::Reinfected,
                                                                  Series::RecoveredReinfected, Series::Vaccinated};

inline constexpr std::array<std::string_view, kSeriesCount> series_columns = {
    "infected", "recovered", "deaths", "reinfected", "recovered_reinfected", "vaccinated"};

inline std::string_view series_column(Series s)
{
    return series_columns[static_cast<std::size_t>(s)];
}

/// R_I, D, R_R and V are reported as running totals.
inline constexpr bool is_cumulative(Series s)
{
    return s == Series::Recovered || s == Series::Deaths || s == Series::RecoveredReinfected ||
           s == Series::Vaccinated;
}

/// Compartment whose mean is the Poisson rate of the series.
inline std::size_t series_compartment(ModelTag model, Series s)
{
    if (model == ModelTag::M1) {
        constexpr std::array<std::size_t, kSeriesCount> map = {m1::I, m1::RI, m1::D, m1::II, m1::RR, m1::V};
        return map[static_cast<std::size_t>(s)];
    }
    constexpr std::array<std::size_t, kSeriesCount> map = {m2::I, m2::RI, m2::D, m2::II, m2::RR, m2::V};
    return map[static_cast<std::size_t>(s)];
}

/// Daily counts on days 0..last_day(). Unrecorded days are masked, never imputed.
class ObservationSeries
{
public:
    ObservationSeries() = default;
    explicit ObservationSeries(int last_day)
    {
        for (auto& s : counts_)
            s.assign(static_cast<std::size_t>(last_day + 1), std::nullopt);
    }

    int last_day() const
    {
        return static_cast<int>(counts_[0].size()) - 1;
    }
    std::size_t days() const
    {
        return counts_[0].size();
    }

    std::optional<std::int64_t> get(Series s, int day) const
    {
        return counts_[static_cast<std::size_t>(s)][static_cast<std::size_t>(day)];
    }

    void set(Series s, int day, std::optional<std::int64_t> value)
    {
        if (value && *value < 0)
            throw Error(ErrorCategory::Input, "negative count for " + std::string(series_column(s)));
        counts_[static_cast<std::size_t>(s)][static_cast<std::size_t>(day)] = value;
    }

    /// Number of observed (unmasked) cells across all series.
    std::size_t observed_cells() const
    {
        std::size_t n = 0;
        for (const auto& s : counts_)
            for (const auto& v : s)
                n += v.has_value();
        return n;
    }

    /// Drops every observation, keeping the day grid.
    void mask_all()
    {
        for (auto& s : counts_)
            std::fill(s.begin(), s.end(), std::nullopt);
    }

    /// Throws Validation if a cumulative series decreases between observed days.
    void validate() const
    {
        for (Series s : all_series) {
            if (!is_cumulative(s))
                continue;
            std::optional<std::int64_t> prev;
            for (int d = 0; d <= last_day(); ++d) {
                auto v = get(s, d);
                if (!v)
                    continue;
                if (prev && *v < *prev)
                    throw Error(ErrorCategory::Validation, std::string(series_column(s)) + " decreases on day " +
                                                               std::to_string(d));
                prev = v;
            }
        }
    }

    friend bool operator==(const ObservationSeries&, const ObservationSeries&) = default;

private:
    std::array<std::vector<std::optional<std::int64_t>>, kSeriesCount> counts_;
};

} // namespace reinfect
