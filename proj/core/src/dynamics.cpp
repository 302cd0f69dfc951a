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

#include "ekbf/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include "ekbf/error.hpp"
#include "ekbf/rng.hpp"

namespace ekbf {

namespace {

std::optional<RegularityConstants> try_constants(const SignalModel& model)
{
    try {
        return regularity_constants(model);
    } catch (const Error& e) {
        if (e.code() == Errc::ModelNotContractive) {
            return std::nullopt;
        }
        throw;
    }
}

void check_step(const SignalModel& model, double dt)
{
    if (!(dt > 0.0)) {
        throw Error(Errc::InvalidArgument, "dt must be positive");
    }
    if (const auto c = try_constants(model); c && dt * c->lambda_dA >= 0.5) {
        throw Error(Errc::UnstableStep, "dt * lambda_dA = " + std::to_string(dt * c->lambda_dA) +
                                            " >= 0.5");
    }
}

Vec noise(const SymMat& root, std::span<const double> dW)
{
    return root.mat() * Vec(dW);
}

} // namespace

PathBundle PathBundle::generate(double dt, std::size_t steps, std::size_t signal_dim,
                                std::size_t obs_dim, std::uint64_t seed, std::uint64_t stream)
{
    if (!(dt > 0.0)) {
        throw Error(Errc::InvalidArgument, "dt must be positive");
    }
    PathBundle b;
    b.dt_ = dt;
    b.steps_ = steps;
    b.r1_ = signal_dim;
    b.r2_ = obs_dim;
    b.dW_.resize(steps * signal_dim);
    b.dV_.resize(steps * obs_dim);
    Rng rng = make_stream(seed, stream);
    std::normal_distribution<double> gauss(0.0, std::sqrt(dt));
    for (std::size_t k = 0; k < steps; ++k) {
        for (std::size_t i = 0; i < signal_dim; ++i) {
            b.dW_[k * signal_dim + i] = gauss(rng);
        }
        for (std::size_t i = 0; i < obs_dim; ++i) {
            b.dV_[k * obs_dim + i] = gauss(rng);
        }
    }
    return b;
}

void integrate_signal(const SignalModel& model, const Vec& x0, const PathBundle& bundle,
                      const std::function<void(std::size_t, const Vec&)>& observe)
{
    check_step(model, bundle.dt());
    if (bundle.signal_dim() != model.dim() || x0.size() != model.dim()) {
        throw Error(Errc::DimensionMismatch, "path bundle does not match the signal dimension");
    }
    const double dt = bundle.dt();
    Vec x = x0;
    observe(0, x);
    for (std::size_t k = 0; k < bundle.steps(); ++k) {
        Vec next = x + dt * drift(model, x);
        next += noise(model.R1_sqrt(), bundle.dW(k));
        x = std::move(next);
        observe(k + 1, x);
    }
}

std::vector<Vec> simulate_signal(const SignalModel& model, const Vec& x0, const PathBundle& bundle)
{
    std::vector<Vec> path;
    path.reserve(bundle.steps() + 1);
    integrate_signal(model, x0, bundle, [&](std::size_t, const Vec& x) { path.push_back(x); });
    return path;
}

std::vector<Vec> deterministic_flow(const SignalModel& model, const Vec& x0, double dt, double T)
{
    if (!(dt > 0.0)) {
        throw Error(Errc::InvalidArgument, "dt must be positive");
    }
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    std::vector<Vec> path;
    path.reserve(steps + 1);
    path.push_back(x0);
    Vec x = x0;
    for (std::size_t k = 0; k < steps; ++k) {
        const Vec k1 = drift(model, x);
        const Vec k2 = drift(model, x + (0.5 * dt) * k1);
        const Vec k3 = drift(model, x + (0.5 * dt) * k2);
        const Vec k4 = drift(model, x + dt * k3);
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        path.push_back(x);
    }
    return path;
}

FilterState step_ekf(const FilterState& state, const SignalModel& model,
                     const ObservationModel& obs, const Vec& dY, double dt)
{
    const Vec& m = state.mean;
    const Mat& P = state.P.mat();

    Vec innovation = dY - dt * (obs.B() * m);
    Vec mean = m + dt * drift(model, m);
    mean += P * (obs.gain() * innovation);

    const Mat J = drift_jacobian(model, m);
    const Mat JP = J * P;
    Mat rate = JP + JP.transpose();
    rate += model.R1().mat();
    rate -= P * (obs.S().mat() * P);
    const Mat next = P + dt * rate;

    if (!all_finite(mean) || !all_finite(next)) {
        throw Error(Errc::DivergedFilter, "non-finite filter update at t = " +
                                              std::to_string(state.t));
    }
    return FilterState{std::move(mean), psd_project(symmetrize(next)), state.t + dt};
}

double joint_squared_distance(const FilterState& a, const FilterState& b)
{
    return squared_norm(a.mean - b.mean) + frobenius_inner(a.P - b.P, a.P - b.P);
}

TrialRecord simulate_coupled(const SignalModel& model, const ObservationModel& obs, const Vec& x0,
                             std::span<const FilterState> filter_inits, const PathBundle& bundle,
                             RecordOptions options)
{
    if (filter_inits.empty()) {
        throw Error(Errc::InvalidArgument, "simulate_coupled needs at least one filter");
    }
    if (obs.signal_dim() != model.dim() || bundle.signal_dim() != model.dim() ||
        bundle.obs_dim() != obs.obs_dim() || x0.size() != model.dim()) {
        throw Error(Errc::DimensionMismatch, "model, observation and path dimensions disagree");
    }
    for (const auto& f : filter_inits) {
        if (f.mean.size() != model.dim() || f.P.dim() != model.dim()) {
            throw Error(Errc::DimensionMismatch, "filter initial state has the wrong dimension");
        }
    }
    check_step(model, bundle.dt());

    const std::size_t stride = options.stride == 0 ? 1 : options.stride;
    const double dt = bundle.dt();
    const std::size_t n_filters = filter_inits.size();
    const auto constants = try_constants(model);
    const double trR1 = trace(model.R1());

    std::vector<double> trP0(n_filters);
    std::vector<FilterState> filters(filter_inits.begin(), filter_inits.end());
    for (std::size_t f = 0; f < n_filters; ++f) {
        filters[f].t = 0.0;
        trP0[f] = trace(filters[f].P);
    }

    TrialRecord rec;
    if (constants) {
        rec.max_trace_excess.assign(n_filters, -std::numeric_limits<double>::infinity());
    }
    Vec x = x0;

    auto observe_trace = [&](std::size_t k) {
        if (!constants) {
            return;
        }
        const double t = static_cast<double>(k) * dt;
        for (std::size_t f = 0; f < n_filters; ++f) {
            const double envelope =
                std::exp(-constants->lambda_dA * t) * trP0[f] + trR1 / constants->lambda_dA;
            rec.max_trace_excess[f] =
                std::max(rec.max_trace_excess[f], trace(filters[f].P) - envelope);
        }
    };
    auto record = [&](std::size_t k) {
        rec.times.push_back(static_cast<double>(k) * dt);
        rec.signal.push_back(x);
        rec.filters.push_back(filters);
        std::vector<double> tr(n_filters);
        for (std::size_t f = 0; f < n_filters; ++f) {
            tr[f] = trace(filters[f].P);
        }
        rec.trace.push_back(std::move(tr));
        if (n_filters >= 2) {
            rec.delta.push_back(joint_squared_distance(filters[0], filters[1]));
        }
    };

    auto notify = [&](std::size_t k) {
        if (options.observer) {
            options.observer(k, x, filters);
        }
    };

    observe_trace(0);
    notify(0);
    record(0);
    for (std::size_t k = 0; k < bundle.steps(); ++k) {
        Vec dY = dt * (obs.B() * x);
        dY += noise(obs.R2_sqrt(), bundle.dV(k));
        try {
            for (auto& f : filters) {
                f = step_ekf(f, model, obs, dY, dt);
                if (norm(f.mean) > kDivergenceLimit || trace(f.P) > kDivergenceLimit) {
                    throw Error(Errc::DivergedFilter, "divergence guard");
                }
            }
        } catch (const Error& e) {
            if (e.code() != Errc::DivergedFilter) {
                throw;
            }
            rec.diverged = true;
            rec.diverged_step = k + 1;
            return rec;
        }
        Vec next = x + dt * drift(model, x);
        next += noise(model.R1_sqrt(), bundle.dW(k));
        x = std::move(next);
        if (!all_finite(x)) {
            rec.diverged = true;
            rec.diverged_step = k + 1;
            return rec;
        }
        observe_trace(k + 1);
        notify(k + 1);
        if ((k + 1) % stride == 0 || k + 1 == bundle.steps()) {
            record(k + 1);
        }
    }
    return rec;
}

Vec fixed_point(const SignalModel& model)
{
    constexpr int kMaxIterations = 200;
    Vec x(model.dim());
    Vec r = drift(model, x);
    for (int it = 0; it < kMaxIterations; ++it) {
        const double res = norm(r);
        if (res <= 1e-10) {
            return x;
        }
        const Vec step = solve(drift_jacobian(model, x), -r);
        double damping = 1.0;
        Vec trial = x + step;
        Vec trial_r = drift(model, trial);
        while (norm(trial_r) >= res && damping > 1e-8) {
            damping *= 0.5;
            trial = x + damping * step;
            trial_r = drift(model, trial);
        }
        x = std::move(trial);
        r = std::move(trial_r);
    }
    if (norm(r) <= 1e-10) {
        return x;
    }
    throw Error(Errc::NoFixedPoint, "Newton did not converge in 200 iterations");
}

} // namespace ekbf
