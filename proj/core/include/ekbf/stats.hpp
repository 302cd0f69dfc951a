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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>

namespace ekbf {

enum class CiMethod { Wilson, Bootstrap };

std::string_view to_string(CiMethod m);

struct EstimateWithCI {
    double point = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n = 0;
    CiMethod method = CiMethod::Wilson;
};

// Wilson score interval for a binomial proportion.
EstimateWithCI wilson_interval(std::size_t successes, std::size_t n, double z = 1.96);

// Percentile bootstrap of transform(mean(samples)); the point estimate is
// transform(mean). transform must be monotone non-decreasing.
EstimateWithCI bootstrap_mean(std::span<const double> samples, std::size_t resamples,
                              std::uint64_t seed, const std::function<double(double)>& transform = {},
                              double level = 0.95);

struct MannKendall {
    double s = 0.0;
    double z = 0.0;
    double p_increasing = 1.0;  // one-sided p-value for an upward trend
    bool increasing = false;
};

// Mann-Kendall trend test with the tie-corrected variance.
MannKendall mann_kendall(std::span<const double> series, double alpha = 0.05);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    std::size_t n = 0;
};

LinearFit ols_fit(std::span<const double> x, std::span<const double> y);

double normal_cdf(double z);

} // namespace ekbf
