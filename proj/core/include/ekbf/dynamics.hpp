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

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ekbf/linalg.hpp"
#include "ekbf/models.hpp"

namespace ekbf {

// Extended Kalman-Bucy filter state: mean, Riccati matrix, time.
struct FilterState {
    Vec mean;
    SymMat P;
    double t = 0.0;
};

// Pre-drawn Brownian increments for one trial. dW has signal_dim entries per
// step and dV has obs_dim entries per step, each N(0, dt). The draw order is
// fixed (dW then dV, step by step), so (seed, stream) determines every bit.
class PathBundle {
public:
    static PathBundle generate(double dt, std::size_t steps, std::size_t signal_dim,
                               std::size_t obs_dim, std::uint64_t seed, std::uint64_t stream);

    double dt() const noexcept { return dt_; }
    std::size_t steps() const noexcept { return steps_; }
    std::size_t signal_dim() const noexcept { return r1_; }
    std::size_t obs_dim() const noexcept { return r2_; }
    std::span<const double> dW(std::size_t k) const noexcept { return {&dW_[k * r1_], r1_}; }
    std::span<const double> dV(std::size_t k) const noexcept { return {&dV_[k * r2_], r2_}; }

private:
    double dt_ = 0.0;
    std::size_t steps_ = 0;
    std::size_t r1_ = 0;
    std::size_t r2_ = 0;
    std::vector<double> dW_;
    std::vector<double> dV_;
};

// Euler-Maruyama path X_0..X_steps. Throws UnstableStep if dt * lambda_dA >= 0.5.
std::vector<Vec> simulate_signal(const SignalModel& model, const Vec& x0, const PathBundle& bundle);

// Same scheme without storing the path; observe(k, X_k) runs for k = 0..steps.
void integrate_signal(const SignalModel& model, const Vec& x0, const PathBundle& bundle,
                      const std::function<void(std::size_t, const Vec&)>& observe);

// Noise-free flow x' = A(x) by the classical four-stage Runge-Kutta scheme;
// returns round(T / dt) + 1 states.
std::vector<Vec> deterministic_flow(const SignalModel& model, const Vec& x0, double dt, double T);

// One explicit Euler step of the filter mean and the Riccati equation. The
// new P is symmetrized and projected back onto the PSD cone.
FilterState step_ekf(const FilterState& state, const SignalModel& model,
                     const ObservationModel& obs, const Vec& dY, double dt);

// ||mean_a - mean_b||^2 + ||P_a - P_b||_F^2
double joint_squared_distance(const FilterState& a, const FilterState& b);

// Filters whose ||mean|| or tr(P) exceed this are treated as diverged.
inline constexpr double kDivergenceLimit = 1e8;

using StepObserver =
    std::function<void(std::size_t step, const Vec& signal, std::span<const FilterState> filters)>;

struct RecordOptions {
    std::size_t stride = 1;  // record every stride steps, plus the last step
    StepObserver observer;   // optional, runs at every step including step 0
};

struct TrialRecord {
    std::vector<double> times;
    std::vector<Vec> signal;
    std::vector<std::vector<FilterState>> filters;  // [record][filter]
    std::vector<double> delta;                      // first pair; empty with one filter
    std::vector<std::vector<double>> trace;         // [record][filter]
    // max over every step of tr(P_t) - (e^{-lambda_dA t} tr(P_0) + tr(R1)/lambda_dA);
    // empty when the model has no regularity constants.
    std::vector<double> max_trace_excess;
    bool diverged = false;
    std::size_t diverged_step = 0;
};

// One signal path and one observation path; every filter consumes the same dY.
TrialRecord simulate_coupled(const SignalModel& model, const ObservationModel& obs, const Vec& x0,
                             std::span<const FilterState> filter_inits, const PathBundle& bundle,
                             RecordOptions options = {});

// Root of A(x) = 0 by damped Newton from the origin.
Vec fixed_point(const SignalModel& model);

} // namespace ekbf
