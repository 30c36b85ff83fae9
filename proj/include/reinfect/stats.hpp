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

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace reinfect::stats {

inline double mean(std::span<const double> x)
{
    double s = 0.0;
    for (double v : x)
        s += v;
    return s / static_cast<double>(x.size());
}

/// Unbiased (n - 1) sample variance.
inline double variance(std::span<const double> x)
{
    const double m = mean(x);
    double s = 0.0;
    for (double v : x)
        s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

/// Linear-interpolation quantile of sorted data (R's default, type 7).
inline double quantile_sorted(std::span<const double> sorted, double p)
{
    if (sorted.empty())
        return std::numeric_limits<double>::quiet_NaN();
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> x, double p)
{
    std::sort(x.begin(), x.end());
    return quantile_sorted(x, p);
}

inline double median(std::vector<double> x)
{
    return quantile(std::move(x), 0.5);
}

/// log(sum(exp(x))) in a fixed left-to-right order; -inf for empty or all -inf input.
inline double log_sum_exp(std::span<const double> x)
{
    double m = -std::numeric_limits<double>::infinity();
    for (double v : x)
        m = std::max(m, v);
    if (!std::isfinite(m))
        return m;
    double s = 0.0;
    for (double v : x)
        s += std::exp(v - m);
    return m + std::log(s);
}

} // namespace reinfect::stats
