// Copyright 2026 The ekbf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ekbf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "ekbf/error.hpp"
#include "ekbf/rng.hpp"

namespace ekbf {

std::string_view to_string(CiMethod m)
{
    return m == CiMethod::Wilson ? "wilson" : "bootstrap";
}

double normal_cdf(double z)
{
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

EstimateWithCI wilson_interval(std::size_t successes, std::size_t n, double z)
{
    if (successes > n) {
        throw Error(Errc::InvalidArgument, "successes exceed trials");
    }
    EstimateWithCI e;
    e.n = n;
    e.method = CiMethod::Wilson;
    if (n == 0) {
        e.ci_high = 1.0;
        return e;
    }
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    e.point = p;
    e.ci_low = std::clamp(centre - half, 0.0, p);
    e.ci_high = std::clamp(centre + half, p, 1.0);
    return e;
}

EstimateWithCI bootstrap_mean(std::span<const double> samples, std::size_t resamples,
                              std::uint64_t seed, const std::function<double(double)>& transform,
                              double level)
{
    if (samples.empty()) {
        throw Error(Errc::InvalidArgument, "bootstrap needs at least one sample");
    }
    if (resamples == 0 || !(level > 0.0 && level < 1.0)) {
        throw Error(Errc::InvalidArgument, "bootstrap needs resamples > 0 and level in (0, 1)");
    }
    auto f = [&](double m) { return transform ? transform(m) : m; };
    const std::size_t n = samples.size();
    double sum = 0.0;
    for (double s : samples) {
        sum += s;
    }

    Rng rng = make_stream(seed, 0xb007);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<double> stats(resamples);
    for (auto& st : stats) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += samples[pick(rng)];
        }
        st = f(acc / static_cast<double>(n));
    }
    std::sort(stats.begin(), stats.end());
    const double tail = 0.5 * (1.0 - level);
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(resamples - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, resamples - 1);
        return stats[lo] + (pos - static_cast<double>(lo)) * (stats[hi] - stats[lo]);
    };

    EstimateWithCI e;
    e.method = CiMethod::Bootstrap;
    e.n = n;
    e.point = f(sum / static_cast<double>(n));
    e.ci_low = std::min(quantile(tail), e.point);
    e.ci_high = std::max(quantile(1.0 - tail), e.point);
    return e;
}

MannKendall mann_kendall(std::span<const double> series, double alpha)
{
    MannKendall mk;
    const std::size_t n = series.size();
    if (n < 3) {
        return mk;
    }
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = series[j] - series[i];
            s += (d > 0.0) - (d < 0.0);
        }
    }
    std::map<double, std::size_t> ties;
    for (double v : series) {
        ++ties[v];
    }
    const double nn = static_cast<double>(n);
    double var = nn * (nn - 1.0) * (2.0 * nn + 5.0);
    for (const auto& [value, count] : ties) {
        if (count > 1) {
            const double c = static_cast<double>(count);
            var -= c * (c - 1.0) * (2.0 * c + 5.0);
        }
    }
    var /= 18.0;
    mk.s = s;
    if (var > 0.0) {
        if (s > 0.0) {
            mk.z = (s - 1.0) / std::sqrt(var);
        } else if (s < 0.0) {
            mk.z = (s + 1.0) / std::sqrt(var);
        }
    }
    mk.p_increasing = 1.0 - normal_cdf(mk.z);
    mk.increasing = mk.p_increasing < alpha;
    return mk;
}

LinearFit ols_fit(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) {
        throw Error(Errc::DimensionMismatch, "ols_fit needs equal-length inputs");
    }
    const std::size_t n = x.size();
    if (n < 2) {
        throw Error(Errc::InvalidArgument, "ols_fit needs at least two points");
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) {
        throw Error(Errc::InvalidArgument, "ols_fit needs distinct abscissae");
    }
    LinearFit fit;
    fit.n = n;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (n > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - fit.intercept - fit.slope * x[i];
            rss += r * r;
        }
        fit.slope_se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
    }
    return fit;
}

} // namespace ekbf
