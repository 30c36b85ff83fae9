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
#include "reinfect/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace reinfect {

struct GridSpec {
    double min = 0.0;
    double max = 1.0;
    std::size_t points = 512;
};

/// Density values on an equally spaced grid.
struct SmoothedDensity {
    std::vector<double> grid;
    std::vector<double> values;
    double bandwidth = 0.0;

    double integral() const
    {
        double s = 0.0;
        for (std::size_t i = 1; i < grid.size(); ++i)
            s += 0.5 * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
        return s;
    }
};

inline std::vector<double> make_grid(const GridSpec& spec)
{
    if (spec.points < 2 || !(spec.max > spec.min))
        throw Error(ErrorCategory::Input, "grid needs at least 2 points and max > min");
    std::vector<double> g(spec.points);
    const double step = (spec.max - spec.min) / static_cast<double>(spec.points - 1);
    for (std::size_t i = 0; i < spec.points; ++i)
        g[i] = spec.min + step * static_cast<double>(i);
    g.back() = spec.max;
    return g;
}

/// Silverman's rule of thumb, 0.9 * min(sd, IQR / 1.34) * n^(-1/5), falling
/// back to sd when the IQR is zero.
inline double rule_of_thumb_bandwidth(std::span<const double> samples)
{
    if (samples.size() < 2)
        throw Error(ErrorCategory::DegenerateSample, "need at least two samples");
    const double sd = std::sqrt(stats::variance(samples));
    if (!(sd > 0.0))
        throw Error(ErrorCategory::DegenerateSample, "all samples are identical; bandwidth would be zero");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double iqr = stats::quantile_sorted(sorted, 0.75) - stats::quantile_sorted(sorted, 0.25);
    double lo = std::min(sd, iqr / 1.34);
    if (!(lo > 0.0))
        lo = sd;
    return 0.9 * lo * std::pow(static_cast<double>(samples.size()), -0.2);
}

/// Sample range padded by three bandwidths.
inline GridSpec default_grid(std::span<const double> samples, double bandwidth, std::size_t points = 512)
{
    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    return {*lo - 3.0 * bandwidth, *hi + 3.0 * bandwidth, points};
}

/// Gaussian-kernel density estimate of the samples. Bandwidth defaults to the
/// rule of thumb and the grid to default_grid().
inline SmoothedDensity kde(std::span<const double> samples, std::optional<GridSpec> grid = std::nullopt,
                           std::optional<double> bandwidth = std::nullopt)
{
    const double h = bandwidth ? *bandwidth : rule_of_thumb_bandwidth(samples);
    if (!(h > 0.0))
        throw Error(ErrorCategory::DegenerateSample, "bandwidth must be positive");
    SmoothedDensity out;
    out.bandwidth = h;
    out.grid = make_grid(grid ? *grid : default_grid(samples, h));
    out.values.assign(out.grid.size(), 0.0);
    const double norm = 1.0 / (static_cast<double>(samples.size()) * h * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t i = 0; i < out.grid.size(); ++i) {
        const double x = out.grid[i];
        double s = 0.0;
        for (double v : samples) {
            const double z = (x - v) / h;
            s += std::exp(-0.5 * z * z);
        }
        out.values[i] = s * norm;
    }
    return out;
}

/// Grid spanning the default ranges of both sample sets.
inline GridSpec common_grid(std::span<const double> a, std::span<const double> b, std::size_t points = 512)
{
    const GridSpec ga = default_grid(a, rule_of_thumb_bandwidth(a), points);
    const GridSpec gb = default_grid(b, rule_of_thumb_bandwidth(b), points);
    return {std::min(ga.min, gb.min), std::max(ga.max, gb.max), points};
}

/// H^2 = 1 - integral sqrt(f g), trapezoid rule, clipped to [0, 1].
/// Both densities must live on the same grid.
inline double hellinger(const SmoothedDensity& f, const SmoothedDensity& g)
{
    if (f.grid.size() != g.grid.size() || f.grid.size() < 2 || f.grid.front() != g.grid.front() ||
        f.grid.back() != g.grid.back())
        throw Error(ErrorCategory::GridAlignment, "densities are not on a common grid");
    double overlap = 0.0;
    for (std::size_t i = 1; i < f.grid.size(); ++i) {
        const double left = std::sqrt(f.values[i - 1] * g.values[i - 1]);
        const double right = std::sqrt(f.values[i] * g.values[i]);
        overlap += 0.5 * (left + right) * (f.grid[i] - f.grid[i - 1]);
    }
    return std::clamp(1.0 - overlap, 0.0, 1.0);
}

/// Rescales the values so that the trapezoid integral over the grid is 1.
inline SmoothedDensity normalized(SmoothedDensity f)
{
    const double mass = f.integral();
    if (!(mass > 0.0))
        throw Error(ErrorCategory::DegenerateSample, "density has no mass on its grid");
    for (double& v : f.values)
        v /= mass;
    return f;
}

/// Smooths both sample sets on their common grid and returns H^2. The
/// kernel tails cut off by the grid are renormalised away, so identical
/// samples give 0.
inline double hellinger_from_samples(std::span<const double> a, std::span<const double> b,
                                     std::size_t points = 512)
{
    const GridSpec grid = common_grid(a, b, points);
    return hellinger(normalized(kde(a, grid)), normalized(kde(b, grid)));
}

} // namespace reinfect
