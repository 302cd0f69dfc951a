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

#include <array>
#include <optional>
#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ekbf/bounds.hpp"
#include "ekbf/config.hpp"
#include "ekbf/stats.hpp"

namespace ekbf {

// Squared errors at the configured checkpoints, one row per trial.
//   signal-vs-flow: ||X_t - x_t||^2 against the noise-free flow from the same start
//   ekf-vs-signal:  ||X_t - Xhat_t||^2 for the first filter
struct ErrorSamples {
    Scenario scenario = Scenario::SignalVsFlow;
    Vec signal_start;
    std::vector<double> checkpoints;
    std::vector<std::vector<double>> err2;  // [trial][checkpoint]
    std::vector<double> window_mean;        // time average of err2 over the stationary window
    std::vector<char> diverged;             // [trial]
    std::size_t n_diverged = 0;
};

ErrorSamples collect_errors(const ExperimentConfig& cfg, Scenario scenario, const Vec& signal_start);

struct EventRow {
    double t = 0.0;
    double delta = 0.0;
    EstimateWithCI frequency;
    double radius = 0.0;
    double threshold = 0.0;  // 1 - e^{-delta}
    bool pass = false;
};

struct EventResult {
    Scenario scenario = Scenario::SignalVsFlow;
    std::vector<EventRow> rows;
    std::size_t n_trials = 0;
    std::size_t n_diverged = 0;
    bool pass = false;
};

EventResult estimate_event_probability(const ExperimentConfig& cfg);
EventResult estimate_event_probability(const ExperimentConfig& cfg, const ErrorSamples& samples);

struct MomentRow {
    double t = 0.0;
    int n = 1;
    EstimateWithCI value;  // E(||e||^{2n})^{1/n}
    double bound = 0.0;
    bool pass = false;
};

// Time-averaged E||e||^2 over the stationary window against tr(R1) / (2 lambda_A),
// which is the exact stationary value when A + A' = -2 lambda_A Id.
struct StationaryCheck {
    double empirical = 0.0;
    double target = 0.0;
    double relative_error = 0.0;
    bool pass = false;
};

inline constexpr double kStationaryTolerance = 0.03;

struct MomentResult {
    Scenario scenario = Scenario::SignalVsFlow;
    std::vector<MomentRow> rows;
    std::optional<StationaryCheck> stationary;  // signal-vs-flow with such a linear drift
    std::size_t n_diverged = 0;
    bool pass = false;
};

MomentResult estimate_moments(const ExperimentConfig& cfg);
MomentResult estimate_moments(const ExperimentConfig& cfg, const ErrorSamples& samples);

struct LaplaceRow {
    double t = 0.0;
    double coefficient = 0.0;
    EstimateWithCI value;  // E exp(coefficient ||e||^2)
    double bound = 0.0;
    std::size_t overflowed = 0;
    bool pass = false;
};

struct LaplaceResult {
    Scenario scenario = Scenario::Chi2Laplace;
    std::vector<LaplaceRow> rows;
    bool pass = false;
};

// chi2-laplace: initial error X0 - Xhat0 ~ N(0, P0) against e.
// signal-vs-flow / ekf-vs-signal: uniform Laplace estimates at the
// checkpoints inside the stationary window.
LaplaceResult estimate_laplace(const ExperimentConfig& cfg);
LaplaceResult estimate_laplace(const ExperimentConfig& cfg, const ErrorSamples& samples);

enum class ForgettingStatus { Pass, Fail, Inconclusive, Degenerate };
std::string_view to_string(ForgettingStatus s);

struct ForgettingResult {
    ForgettingStatus status = ForgettingStatus::Inconclusive;
    std::string message;
    ConditionFlags flags;
    LyapunovRate rate;
    double epsilon = 0.5;
    double required_rate = 0.0;  // (1 - eps) Lambda delta / 2
    double fitted_rate = 0.0;    // minus the slope of log mean Delta^{delta/2}
    double rate_ci_low = 0.0;
    double rate_ci_high = 0.0;
    std::array<MannKendall, 2> trend{};  // mean Delta^n for n = 1, 2
    std::vector<double> times;
    std::vector<double> mean_delta_pow;  // mean Delta^{delta/2}
    std::vector<double> mean_delta;
    std::vector<double> mean_delta_sq;
    std::size_t n_trials = 0;
    std::size_t n_diverged = 0;
};

ForgettingResult estimate_forgetting_rate(const ExperimentConfig& cfg);

struct TraceResult {
    double max_violation = 0.0;  // max over trials, filters and steps of tr(P_t) - tau_t
    double tolerance = 0.0;      // 5 dt tr(R1)
    std::size_t n_trials = 0;
    std::size_t n_diverged = 0;
    bool pass = false;
};

TraceResult verify_trace_bound(const ExperimentConfig& cfg);

struct GronwallRow {
    double t = 0.0;
    int n = 1;
    EstimateWithCI value;  // E||X_t||^n, or E(||X_t||^n)^{2/n} with sources
    double bound = 0.0;
    double oracle = 0.0;   // NaN when no closed form is available
    bool pass = false;
};

struct GronwallResult {
    bool with_sources = false;
    std::vector<GronwallRow> rows;
    bool pass = false;
};

GronwallResult gronwall_test_process(const ExperimentConfig& cfg);

void to_json(nlohmann::json& j, const EstimateWithCI& e);
void to_json(nlohmann::json& j, const EventResult& r);
void to_json(nlohmann::json& j, const MomentResult& r);
void to_json(nlohmann::json& j, const LaplaceResult& r);
void to_json(nlohmann::json& j, const ForgettingResult& r);
void to_json(nlohmann::json& j, const TraceResult& r);
void to_json(nlohmann::json& j, const GronwallResult& r);

} // namespace ekbf
