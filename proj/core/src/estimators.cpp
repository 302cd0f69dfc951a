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

#include "ekbf/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "ekbf/dynamics.hpp"
#include "ekbf/error.hpp"
#include "ekbf/parallel.hpp"
#include "ekbf/rng.hpp"

namespace ekbf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxExponent = 700.0;
// Rounding allowance for comparisons that hold with equality (w = 0).
constexpr double kRoundoff = 1e-12;

std::size_t step_index(double t, double dt)
{
    return static_cast<std::size_t>(std::llround(t / dt));
}

std::uint64_t bootstrap_seed(std::uint64_t seed, std::uint64_t salt)
{
    return mix64(seed ^ mix64(salt));
}

ProblemConstants constants_for(const ExperimentConfig& cfg)
{
    return ProblemConstants::from(cfg.model, cfg.obs, cfg.inits.front().P);
}

void require_error_scenario(Scenario s)
{
    if (s != Scenario::SignalVsFlow && s != Scenario::EkfVsSignal) {
        throw Error(Errc::InvalidArgument,
                    "scenario must be signal-vs-flow or ekf-vs-signal, got " +
                        std::string(to_string(s)));
    }
}

// A + A' = -2 lambda Id, in which case the stationary error trace is tr(R1) / (2 lambda).
bool isotropic_linear(const SignalModel& model)
{
    const auto* lin = std::get_if<LinearDrift>(&model.family());
    if (lin == nullptr) {
        return false;
    }
    const Mat sym = lin->A + lin->A.transpose();
    const double diag = sym(0, 0);
    for (std::size_t i = 0; i < sym.rows(); ++i) {
        for (std::size_t j = 0; j < sym.cols(); ++j) {
            const double target = i == j ? diag : 0.0;
            if (std::abs(sym(i, j) - target) > 1e-12 * (1.0 + std::abs(diag))) {
                return false;
            }
        }
    }
    return diag < 0.0;
}

Vec signal_start_for_moments(const ExperimentConfig& cfg, Scenario s)
{
    return s == Scenario::EkfVsSignal ? cfg.inits.front().mean : cfg.x0;
}

std::vector<double> column(const ErrorSamples& samples, std::size_t c, double power)
{
    std::vector<double> out;
    out.reserve(samples.err2.size());
    for (std::size_t k = 0; k < samples.err2.size(); ++k) {
        if (!samples.diverged[k]) {
            out.push_back(power == 1.0 ? samples.err2[k][c] : std::pow(samples.err2[k][c], power));
        }
    }
    return out;
}

} // namespace

std::string_view to_string(ForgettingStatus s)
{
    switch (s) {
    case ForgettingStatus::Pass:
        return "pass";
    case ForgettingStatus::Fail:
        return "fail";
    case ForgettingStatus::Inconclusive:
        return "inconclusive";
    case ForgettingStatus::Degenerate:
        return "degenerate-input";
    }
    return "unknown";
}

ErrorSamples collect_errors(const ExperimentConfig& cfg, Scenario scenario, const Vec& signal_start)
{
    require_error_scenario(scenario);
    const double dt = cfg.dt;
    const std::size_t steps = cfg.steps();
    const std::size_t n_cp = cfg.checkpoints.size();
    std::vector<std::size_t> cp_steps;
    for (double t : cfg.checkpoints) {
        cp_steps.push_back(std::min(step_index(t, dt), steps));
    }
    const std::size_t window_from = step_index(cfg.stationary_from * cfg.T, dt);

    std::vector<Vec> flow;
    if (scenario == Scenario::SignalVsFlow) {
        flow = deterministic_flow(cfg.model, signal_start, dt, static_cast<double>(steps) * dt);
    }

    struct Trial {
        std::vector<double> err;
        double window = kNaN;
        bool diverged = false;
    };
    auto trials = parallel_map(cfg.n_trials, [&](std::size_t k) {
        const PathBundle bundle = PathBundle::generate(dt, steps, cfg.model.dim(),
                                                       cfg.obs.obs_dim(), cfg.seed, k);
        Trial out;
        out.err.assign(n_cp, kNaN);
        double wsum = 0.0;
        std::size_t wcount = 0;
        auto handle = [&](std::size_t step, double e2) {
            for (std::size_t c = 0; c < n_cp; ++c) {
                if (cp_steps[c] == step) {
                    out.err[c] = e2;
                }
            }
            if (step >= window_from) {
                wsum += e2;
                ++wcount;
            }
        };
        if (scenario == Scenario::SignalVsFlow) {
            integrate_signal(cfg.model, signal_start, bundle, [&](std::size_t step, const Vec& x) {
                handle(step, squared_norm(x - flow[step]));
            });
            out.diverged = !std::all_of(out.err.begin(), out.err.end(),
                                        [](double e) { return std::isfinite(e); });
        } else {
            RecordOptions opts;
            opts.stride = std::max<std::size_t>(steps, 1);
            opts.observer = [&](std::size_t step, const Vec& x, std::span<const FilterState> f) {
                handle(step, squared_norm(x - f.front().mean));
            };
            const TrialRecord rec = simulate_coupled(cfg.model, cfg.obs, signal_start,
                                                     std::span(cfg.inits.data(), 1), bundle, opts);
            out.diverged = rec.diverged;
        }
        if (wcount > 0) {
            out.window = wsum / static_cast<double>(wcount);
        }
        return out;
    });

    ErrorSamples s;
    s.scenario = scenario;
    s.signal_start = signal_start;
    s.checkpoints = cfg.checkpoints;
    for (auto& t : trials) {
        s.err2.push_back(std::move(t.err));
        s.window_mean.push_back(t.window);
        s.diverged.push_back(t.diverged ? 1 : 0);
        s.n_diverged += t.diverged ? 1 : 0;
    }
    return s;
}

EventResult estimate_event_probability(const ExperimentConfig& cfg)
{
    require_error_scenario(cfg.scenario);
    return estimate_event_probability(cfg, collect_errors(cfg, cfg.scenario, cfg.x0));
}

EventResult estimate_event_probability(const ExperimentConfig& cfg, const ErrorSamples& samples)
{
    const ProblemConstants c = constants_for(cfg);
    const FilterState& f0 = cfg.inits.front();
    const double dist2 = squared_norm(samples.signal_start - f0.mean);
    const std::size_t n = samples.err2.size();

    EventResult r;
    r.scenario = samples.scenario;
    r.n_trials = n;
    r.n_diverged = samples.n_diverged;
    r.pass = true;
    for (double delta : cfg.delta_grid) {
        for (std::size_t cp = 0; cp < samples.checkpoints.size(); ++cp) {
            EventRow row;
            row.t = samples.checkpoints[cp];
            row.delta = delta;
            row.radius = samples.scenario == Scenario::SignalVsFlow
                             ? signal_radius(c, delta)
                             : ekf_radius(c, delta, row.t, dist2, trace(f0.P));
            std::size_t hits = 0;
            for (std::size_t k = 0; k < n; ++k) {
                if (!samples.diverged[k] && samples.err2[k][cp] <= row.radius) {
                    ++hits;
                }
            }
            row.frequency = wilson_interval(hits, n);
            row.threshold = -std::expm1(-delta);
            row.pass = row.frequency.point >= row.threshold || row.frequency.ci_high >= row.threshold;
            r.pass = r.pass && row.pass;
            r.rows.push_back(row);
        }
    }
    return r;
}

MomentResult estimate_moments(const ExperimentConfig& cfg)
{
    require_error_scenario(cfg.scenario);
    return estimate_moments(
        cfg, collect_errors(cfg, cfg.scenario, signal_start_for_moments(cfg, cfg.scenario)));
}

MomentResult estimate_moments(const ExperimentConfig& cfg, const ErrorSamples& samples)
{
    const ProblemConstants c = constants_for(cfg);
    MomentResult r;
    r.scenario = samples.scenario;
    r.n_diverged = samples.n_diverged;
    r.pass = samples.n_diverged == 0;
    for (std::size_t cp = 0; cp < samples.checkpoints.size(); ++cp) {
        for (int n : cfg.n_orders) {
            MomentRow row;
            row.t = samples.checkpoints[cp];
            row.n = n;
            const std::vector<double> values = column(samples, cp, n);
            if (values.empty()) {
                row.value.point = row.value.ci_low = row.value.ci_high = kInf;
            } else {
                row.value = bootstrap_mean(
                    values, cfg.bootstrap_resamples,
                    bootstrap_seed(cfg.seed, 1000 * cp + static_cast<std::uint64_t>(n)),
                    [n](double m) { return std::pow(m, 1.0 / n); });
            }
            // The filter display bounds E(||e||^m)^{2/m}; here m = 2n.
            row.bound = samples.scenario == Scenario::SignalVsFlow
                            ? signal_moment_bound(c, n)
                            : moment_bound_xhat(c, 2 * n, row.t);
            row.pass = samples.n_diverged == 0 && row.value.ci_low <= row.bound;
            r.pass = r.pass && row.pass;
            r.rows.push_back(row);
        }
    }
    if (samples.scenario == Scenario::SignalVsFlow && isotropic_linear(cfg.model) &&
        samples.n_diverged == 0) {
        StationaryCheck st;
        double sum = 0.0;
        for (double w : samples.window_mean) {
            sum += w;
        }
        st.empirical = sum / static_cast<double>(samples.window_mean.size());
        st.target = c.trR1 / (2.0 * c.lambda_A);
        st.relative_error = std::abs(st.empirical - st.target) / st.target;
        st.pass = st.relative_error <= kStationaryTolerance;
        r.pass = r.pass && st.pass;
        r.stationary = st;
    }
    return r;
}

LaplaceResult estimate_laplace(const ExperimentConfig& cfg)
{
    if (cfg.scenario != Scenario::Chi2Laplace) {
        require_error_scenario(cfg.scenario);
        return estimate_laplace(
            cfg, collect_errors(cfg, cfg.scenario, signal_start_for_moments(cfg, cfg.scenario)));
    }
    const ProblemConstants c = constants_for(cfg);
    const double chi_value = chi(c);
    const SymMat root = sym_sqrt(cfg.inits.front().P);
    const std::size_t dim = cfg.model.dim();

    std::vector<double> values = parallel_map(cfg.n_trials, [&](std::size_t k) {
        if (chi_value == 0.0) {
            return 1.0;
        }
        Rng rng = make_stream(cfg.seed, k);
        std::normal_distribution<double> gauss;
        Vec xi(dim);
        for (double& v : xi) {
            v = gauss(rng);
        }
        return std::exp(squared_norm(root.mat() * xi) / chi_value);
    });

    LaplaceRow row;
    row.t = 0.0;
    row.coefficient = chi_value == 0.0 ? 0.0 : 1.0 / chi_value;
    row.value = bootstrap_mean(values, cfg.bootstrap_resamples, bootstrap_seed(cfg.seed, 77));
    row.bound = std::numbers::e;
    row.pass = row.value.ci_low <= row.bound;

    LaplaceResult r;
    r.scenario = Scenario::Chi2Laplace;
    r.rows.push_back(row);
    r.pass = row.pass;
    return r;
}

LaplaceResult estimate_laplace(const ExperimentConfig& cfg, const ErrorSamples& samples)
{
    const ProblemConstants c = constants_for(cfg);
    const double eps = cfg.epsilon;
    const bool filter = samples.scenario == Scenario::EkfVsSignal;
    double coefficient = (1.0 - eps) / (4.0 * std::numbers::e) * c.lambda_A / c.trR1;
    if (filter) {
        coefficient /= sigma_pi(c, 0.0).sigma2_inf();
    }
    const double bound = laplace_rhs(eps, 0.25, 1.0);
    const double from = cfg.stationary_from * cfg.T;

    LaplaceResult r;
    r.scenario = samples.scenario;
    r.pass = true;
    for (std::size_t cp = 0; cp < samples.checkpoints.size(); ++cp) {
        const double t = samples.checkpoints[cp];
        // The filter estimate holds only after a burn-in that depends on P0.
        if (filter && t < from) {
            continue;
        }
        LaplaceRow row;
        row.t = t;
        row.coefficient = coefficient;
        row.bound = bound;
        std::vector<double> values;
        values.reserve(samples.err2.size());
        for (std::size_t k = 0; k < samples.err2.size(); ++k) {
            const double x = samples.diverged[k] ? kInf : coefficient * samples.err2[k][cp];
            if (!(x <= kMaxExponent)) {
                ++row.overflowed;
                values.push_back(kInf);
            } else {
                values.push_back(std::exp(x));
            }
        }
        row.value = bootstrap_mean(values, cfg.bootstrap_resamples,
                                   bootstrap_seed(cfg.seed, 5000 + cp));
        row.pass = row.overflowed == 0 && row.value.ci_low <= row.bound;
        r.pass = r.pass && row.pass;
        r.rows.push_back(row);
    }
    return r;
}

ForgettingResult estimate_forgetting_rate(const ExperimentConfig& cfg)
{
    if (cfg.inits.size() < 2) {
        throw Error(Errc::ConfigError, "coupled-forgetting needs at least two filter inits");
    }
    const ProblemConstants c = constants_for(cfg);
    ForgettingResult r;
    r.epsilon = cfg.epsilon;
    r.n_trials = cfg.n_trials;
    r.flags = check_conditions(c, cfg.alpha);
    if (joint_squared_distance(cfg.inits[0], cfg.inits[1]) == 0.0) {
        r.status = ForgettingStatus::Degenerate;
        r.message = "identical filter initial conditions";
        return r;
    }
    if (!(c.rhoS > 0.0) || !r.flags.stable) {
        r.status = ForgettingStatus::Inconclusive;
        r.message = "forgetting rate undefined: needs lambda_dA > 0 and rho(S) > 0";
        return r;
    }
    r.rate = lyapunov_rate(c);
    r.required_rate = (1.0 - cfg.epsilon) * r.rate.Lambda * r.rate.delta_exp / 2.0;

    const double dt = cfg.dt;
    const std::size_t steps = cfg.steps();
    std::vector<std::size_t> rec_steps;
    for (std::size_t k = 0; k <= steps; k += cfg.record_stride) {
        rec_steps.push_back(k);
    }
    if (rec_steps.back() != steps) {
        rec_steps.push_back(steps);
    }
    const std::size_t n_rec = rec_steps.size();
    for (std::size_t k : rec_steps) {
        r.times.push_back(static_cast<double>(k) * dt);
    }

    struct Trial {
        std::vector<double> delta;
        bool diverged = false;
    };
    const auto pair = std::span(cfg.inits.data(), 2);
    auto trials = parallel_map(cfg.n_trials, [&](std::size_t k) {
        const PathBundle bundle = PathBundle::generate(dt, steps, cfg.model.dim(),
                                                       cfg.obs.obs_dim(), cfg.seed, k);
        Trial out;
        out.delta.assign(n_rec, kNaN);
        std::size_t next = 0;
        RecordOptions opts;
        opts.stride = std::max<std::size_t>(steps, 1);
        opts.observer = [&](std::size_t step, const Vec&, std::span<const FilterState> f) {
            if (next < n_rec && rec_steps[next] == step) {
                out.delta[next++] = joint_squared_distance(f[0], f[1]);
            }
        };
        out.diverged = simulate_coupled(cfg.model, cfg.obs, cfg.x0, pair, bundle, opts).diverged;
        return out;
    });

    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < trials.size(); ++k) {
        if (trials[k].diverged) {
            ++r.n_diverged;
        } else {
            kept.push_back(k);
        }
    }
    if (kept.empty()) {
        r.status = ForgettingStatus::Inconclusive;
        r.message = "every trial diverged";
        return r;
    }

    const double half_delta = r.rate.delta_exp / 2.0;
    auto mean_pow = [&](const std::vector<std::size_t>& idx, std::size_t j) {
        double acc = 0.0;
        for (std::size_t k : idx) {
            acc += std::pow(trials[k].delta[j], half_delta);
        }
        return acc / static_cast<double>(idx.size());
    };
    r.mean_delta_pow.resize(n_rec);
    r.mean_delta.resize(n_rec);
    r.mean_delta_sq.resize(n_rec);
    for (std::size_t j = 0; j < n_rec; ++j) {
        double d1 = 0.0;
        double d2 = 0.0;
        for (std::size_t k : kept) {
            const double d = trials[k].delta[j];
            d1 += d;
            d2 += d * d;
        }
        r.mean_delta[j] = d1 / static_cast<double>(kept.size());
        r.mean_delta_sq[j] = d2 / static_cast<double>(kept.size());
        r.mean_delta_pow[j] = mean_pow(kept, j);
    }
    r.trend[0] = mann_kendall(r.mean_delta);
    r.trend[1] = mann_kendall(r.mean_delta_sq);

    std::vector<std::size_t> fit_idx;
    const double burn_in = cfg.burn_in_fraction * cfg.T;
    for (std::size_t j = 0; j < n_rec; ++j) {
        if (r.times[j] >= burn_in - 1e-12 && r.mean_delta_pow[j] > 1e-12) {
            fit_idx.push_back(j);
        }
    }
    if (fit_idx.size() < 3) {
        r.status = ForgettingStatus::Inconclusive;
        r.message = "fewer than three fit points above 1e-12 after burn-in";
        return r;
    }
    auto fitted = [&](const std::vector<double>& means) {
        std::vector<double> x;
        std::vector<double> y;
        for (std::size_t j : fit_idx) {
            if (means[j] > 0.0) {
                x.push_back(r.times[j]);
                y.push_back(std::log(means[j]));
            }
        }
        return x.size() < 2 ? kNaN : -ols_fit(x, y).slope;
    };
    r.fitted_rate = fitted(r.mean_delta_pow);

    Rng rng = make_stream(bootstrap_seed(cfg.seed, 0xf0f0), 0);
    std::uniform_int_distribution<std::size_t> pick(0, kept.size() - 1);
    std::vector<double> rates;
    std::vector<std::size_t> idx(kept.size());
    std::vector<double> means(n_rec, 0.0);
    for (std::size_t b = 0; b < cfg.bootstrap_resamples; ++b) {
        for (auto& i : idx) {
            i = kept[pick(rng)];
        }
        for (std::size_t j : fit_idx) {
            means[j] = mean_pow(idx, j);
        }
        const double rate = fitted(means);
        if (std::isfinite(rate)) {
            rates.push_back(rate);
        }
    }
    if (rates.empty()) {
        r.rate_ci_low = r.rate_ci_high = r.fitted_rate;
    } else {
        std::sort(rates.begin(), rates.end());
        auto q = [&](double p) {
            return rates[static_cast<std::size_t>(std::floor(p * static_cast<double>(rates.size() - 1)))];
        };
        r.rate_ci_low = std::min(q(0.025), r.fitted_rate);
        r.rate_ci_high = std::max(q(0.975), r.fitted_rate);
    }

    const double slack = 0.5 * (r.rate_ci_high - r.rate_ci_low);
    const bool rate_ok = r.fitted_rate + slack >= r.required_rate;
    const bool bounded = !r.trend[0].increasing && !r.trend[1].increasing;
    if (!r.flags.all()) {
        r.status = ForgettingStatus::Inconclusive;
        r.message = "stability conditions do not hold for this alpha";
    } else if (rate_ok && bounded) {
        r.status = ForgettingStatus::Pass;
    } else {
        r.status = ForgettingStatus::Fail;
        r.message = rate_ok ? "increasing trend in mean Delta^n" : "fitted rate below requirement";
    }
    return r;
}

TraceResult verify_trace_bound(const ExperimentConfig& cfg)
{
    (void)regularity_constants(cfg.model);  // throws when the envelope is undefined
    const double dt = cfg.dt;
    const std::size_t steps = cfg.steps();
    TraceResult r;
    r.n_trials = cfg.n_trials;
    r.tolerance = 5.0 * dt * trace(cfg.model.R1());

    struct Trial {
        double excess = -kInf;
        bool diverged = false;
    };
    auto trials = parallel_map(cfg.n_trials, [&](std::size_t k) {
        const PathBundle bundle = PathBundle::generate(dt, steps, cfg.model.dim(),
                                                       cfg.obs.obs_dim(), cfg.seed, k);
        RecordOptions opts;
        opts.stride = std::max<std::size_t>(steps, 1);
        const TrialRecord rec =
            simulate_coupled(cfg.model, cfg.obs, cfg.x0, cfg.inits, bundle, opts);
        Trial out;
        out.diverged = rec.diverged;
        for (double e : rec.max_trace_excess) {
            out.excess = std::max(out.excess, e);
        }
        return out;
    });
    r.max_violation = -kInf;
    for (const auto& t : trials) {
        r.max_violation = std::max(r.max_violation, t.excess);
        r.n_diverged += t.diverged ? 1 : 0;
    }
    r.pass = r.n_diverged == 0 && r.max_violation <= r.tolerance;
    return r;
}

GronwallResult gronwall_test_process(const ExperimentConfig& cfg)
{
    const GronwallParams& p = cfg.gronwall;
    GronwallResult r;
    r.with_sources = p.u > 0.0 || p.v > 0.0;
    if (r.with_sources && p.x0_sq != 0.0) {
        throw Error(Errc::ConfigError, "the sourced Gronwall bound needs x0_sq = 0");
    }
    std::vector<double> cps = cfg.checkpoints;
    std::sort(cps.begin(), cps.end());
    const std::size_t n_cp = cps.size();

    std::vector<std::vector<double>> paths = parallel_map(p.n_paths, [&](std::size_t k) {
        Rng rng = make_stream(cfg.seed, k);
        std::normal_distribution<double> gauss;
        std::vector<double> y(n_cp);
        if (!r.with_sources) {
            // Exact geometric Brownian motion sampled at the checkpoints.
            double t_prev = 0.0;
            double noise = 0.0;
            for (std::size_t c = 0; c < n_cp; ++c) {
                noise += std::sqrt(cps[c] - t_prev) * gauss(rng);
                t_prev = cps[c];
                y[c] = p.x0_sq * std::exp((-p.a - 0.5 * p.w) * cps[c] + std::sqrt(p.w) * noise);
            }
            return y;
        }
        const double sdt = std::sqrt(p.dt);
        double value = p.x0_sq;
        std::size_t step = 0;
        for (std::size_t c = 0; c < n_cp; ++c) {
            const std::size_t target = step_index(cps[c], p.dt);
            for (; step < target; ++step) {
                const double diffusion = std::sqrt(std::max(0.0, p.v * value + p.w * value * value));
                value += (-p.a * value + p.u) * p.dt + diffusion * sdt * gauss(rng);
                value = std::max(0.0, value);
            }
            y[c] = value;
        }
        return y;
    });

    // First and second moments of Y solve a linear ODE; integrate it with RK4.
    auto moment_oracle = [&](double t) {
        double m1 = p.x0_sq;
        double m2 = p.x0_sq * p.x0_sq;
        const std::size_t n_steps = std::max<std::size_t>(1, step_index(t, 1e-4));
        const double h = t / static_cast<double>(n_steps);
        auto f = [&](double a1, double a2) {
            return std::pair{-p.a * a1 + p.u, (-2.0 * p.a + p.w) * a2 + (2.0 * p.u + p.v) * a1};
        };
        for (std::size_t i = 0; i < n_steps; ++i) {
            const auto [k1a, k1b] = f(m1, m2);
            const auto [k2a, k2b] = f(m1 + 0.5 * h * k1a, m2 + 0.5 * h * k1b);
            const auto [k3a, k3b] = f(m1 + 0.5 * h * k2a, m2 + 0.5 * h * k2b);
            const auto [k4a, k4b] = f(m1 + h * k3a, m2 + h * k3b);
            m1 += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
            m2 += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
        }
        return std::pair{m1, m2};
    };

    r.pass = true;
    for (std::size_t c = 0; c < n_cp; ++c) {
        const double t = cps[c];
        for (int n : p.n_orders) {
            GronwallRow row;
            row.t = t;
            row.n = n;
            std::vector<double> values;
            values.reserve(paths.size());
            for (const auto& y : paths) {
                values.push_back(std::pow(y[c], 0.5 * n));
            }
            const auto seed = bootstrap_seed(cfg.seed, 9000 + 100 * c + static_cast<std::uint64_t>(n));
            if (!r.with_sources) {
                row.value = bootstrap_mean(values, cfg.bootstrap_resamples, seed);
                row.bound = hilbert_rhs(n, p.a, p.w, t, std::pow(p.x0_sq, 0.5 * n));
                row.oracle = std::pow(p.x0_sq, 0.5 * n) *
                             std::exp(t * (0.5 * n * (-p.a - 0.5 * p.w) + n * n * p.w / 8.0));
            } else {
                row.value = bootstrap_mean(values, cfg.bootstrap_resamples, seed,
                                           [n](double m) { return std::pow(m, 2.0 / n); });
                const auto constant = [](double value) {
                    return [value](double) { return value; };
                };
                const GronwallSchedule schedule{constant(p.a), constant(p.w), constant(p.u),
                                                constant(p.v)};
                row.bound = gronwall_moment_rhs(n, schedule, t, p.dt);
                const auto [m1, m2] = moment_oracle(t);
                row.oracle = n == 2 ? m1 : n == 4 ? std::sqrt(m2) : kNaN;
            }
            row.pass = row.value.ci_low <= row.bound * (1.0 + kRoundoff);
            r.pass = r.pass && row.pass;
            r.rows.push_back(row);
        }
    }
    return r;
}

void to_json(nlohmann::json& j, const EstimateWithCI& e)
{
    j = {{"point", e.point},
         {"ci_low", e.ci_low},
         {"ci_high", e.ci_high},
         {"n", e.n},
         {"method", to_string(e.method)}};
}

void to_json(nlohmann::json& j, const EventResult& r)
{
    j = {{"scenario", to_string(r.scenario)}, {"pass", r.pass}, {"n_trials", r.n_trials},
         {"n_diverged", r.n_diverged}, {"rows", nlohmann::json::array()}};
    for (const auto& row : r.rows) {
        j["rows"].push_back({{"t", row.t},
                             {"delta", row.delta},
                             {"frequency", row.frequency},
                             {"radius", row.radius},
                             {"threshold", row.threshold},
                             {"pass", row.pass}});
    }
}

void to_json(nlohmann::json& j, const MomentResult& r)
{
    j = {{"scenario", to_string(r.scenario)}, {"pass", r.pass}, {"n_diverged", r.n_diverged},
         {"rows", nlohmann::json::array()}};
    for (const auto& row : r.rows) {
        j["rows"].push_back({{"t", row.t},
                             {"n", row.n},
                             {"value", row.value},
                             {"bound", row.bound},
                             {"pass", row.pass}});
    }
    if (r.stationary) {
        j["stationary"] = {{"empirical", r.stationary->empirical},
                           {"target", r.stationary->target},
                           {"relative_error", r.stationary->relative_error},
                           {"tolerance", kStationaryTolerance},
                           {"pass", r.stationary->pass}};
    }
}

void to_json(nlohmann::json& j, const LaplaceResult& r)
{
    j = {{"scenario", to_string(r.scenario)}, {"pass", r.pass}, {"rows", nlohmann::json::array()}};
    for (const auto& row : r.rows) {
        j["rows"].push_back({{"t", row.t},
                             {"coefficient", row.coefficient},
                             {"value", row.value},
                             {"bound", row.bound},
                             {"overflowed", row.overflowed},
                             {"pass", row.pass}});
    }
}

void to_json(nlohmann::json& j, const ForgettingResult& r)
{
    j = {{"status", to_string(r.status)},
         {"pass", r.status == ForgettingStatus::Pass},
         {"message", r.message},
         {"flags", r.flags},
         {"Lambda", r.rate.Lambda},
         {"delta_exponent", r.rate.delta_exp},
         {"epsilon", r.epsilon},
         {"required_rate", r.required_rate},
         {"fitted_rate", r.fitted_rate},
         {"rate_ci", {r.rate_ci_low, r.rate_ci_high}},
         {"n_trials", r.n_trials},
         {"n_diverged", r.n_diverged}};
    for (int n = 0; n < 2; ++n) {
        j["trend_n" + std::to_string(n + 1)] = {{"s", r.trend[n].s},
                                                {"z", r.trend[n].z},
                                                {"p_increasing", r.trend[n].p_increasing},
                                                {"increasing", r.trend[n].increasing}};
    }
}

void to_json(nlohmann::json& j, const TraceResult& r)
{
    j = {{"pass", r.pass},
         {"max_violation", r.max_violation},
         {"tolerance", r.tolerance},
         {"n_trials", r.n_trials},
         {"n_diverged", r.n_diverged}};
}

void to_json(nlohmann::json& j, const GronwallResult& r)
{
    j = {{"pass", r.pass}, {"with_sources", r.with_sources}, {"rows", nlohmann::json::array()}};
    for (const auto& row : r.rows) {
        j["rows"].push_back({{"t", row.t},
                             {"n", row.n},
                             {"value", row.value},
                             {"bound", row.bound},
                             {"oracle", std::isfinite(row.oracle) ? nlohmann::json(row.oracle)
                                                                  : nlohmann::json(nullptr)},
                             {"pass", row.pass}});
    }
}

} // namespace ekbf
