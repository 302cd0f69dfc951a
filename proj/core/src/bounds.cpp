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

#include "ekbf/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

#include "ekbf/error.hpp"

namespace ekbf {

namespace {

constexpr double kE = std::numbers::e;

void require_stable(const ProblemConstants& c)
{
    if (!(c.lambda_dA > 0.0)) {
        throw Error(Errc::NotStable, "lambda_dA must be positive");
    }
}

void require_lambda_A(const ProblemConstants& c)
{
    if (!(c.lambda_A > 0.0)) {
        throw Error(Errc::NotStable, "lambda_A must be positive");
    }
}

void require_order(int n)
{
    if (n < 1) {
        throw Error(Errc::InvalidArgument, "moment order must be at least 1");
    }
}

} // namespace

ProblemConstants ProblemConstants::from(const SignalModel& model, const ObservationModel& obs,
                                        const SymMat& P0)
{
    const RegularityConstants rc = regularity_constants(model);
    ProblemConstants c;
    c.lambda_dA = rc.lambda_dA;
    c.kappa_dA = rc.kappa_dA;
    c.lambda_A = rc.lambda_A;
    c.trR1 = trace(model.R1());
    c.rhoS = obs.rho_S();
    c.trP0 = trace(P0);
    c.rhoP0 = std::max(0.0, max_eigenvalue(P0));
    c.r1 = model.dim();
    return c;
}

double tau_t(const ProblemConstants& c, double t)
{
    require_stable(c);
    return std::exp(-c.lambda_dA * t) * c.trP0 + c.trR1 / c.lambda_dA;
}

SigmaPi sigma_pi(const ProblemConstants& c, double t)
{
    require_stable(c);
    if (!(c.trR1 > 0.0)) {
        throw Error(Errc::InvalidArgument, "tr(R1) must be positive");
    }
    const double tau = tau_t(c, t);
    SigmaPi s;
    s.pi = tau * tau * c.rhoS / c.trR1;
    s.sigma2 = 1.0 + 2.0 * s.pi;
    s.pi_inf = (c.rhoS / c.lambda_dA) * (c.trR1 / c.lambda_dA);
    return s;
}

double varpi(double delta)
{
    if (!(delta >= 0.0)) {
        throw Error(Errc::InvalidArgument, "delta must be nonnegative");
    }
    return kE * kE / std::numbers::sqrt2 * (0.5 + delta + std::sqrt(delta));
}

double chi(const ProblemConstants& c)
{
    return 4.0 * static_cast<double>(c.r1) * c.rhoP0;
}

double ramp(double a, double b, double t)
{
    const double d = b - a;
    if (std::abs(d) < 1e-12) {
        return t * std::exp(-a * t);
    }
    return std::exp(-a * t) * std::abs(std::expm1(-d * t)) / std::abs(d);
}

double signal_radius(const ProblemConstants& c, double delta)
{
    require_lambda_A(c);
    return event_control_radius(c.trR1 / c.lambda_A, delta);
}

double ekf_radius(const ProblemConstants& c, double delta, double t, double dist2, double trp)
{
    require_stable(c);
    require_lambda_A(c);
    const double w = varpi(delta);
    const double sigma2 = 1.0 + 2.0 * (c.rhoS / c.lambda_dA) * (c.trR1 / c.lambda_dA);
    return 4.0 * w * (c.trR1 / c.lambda_A) * sigma2 + 2.0 * std::exp(-c.lambda_dA * t) * dist2 +
           8.0 * w * ramp(c.lambda_A, c.lambda_dA, t) * c.rhoS * trp * trp;
}

ConditionFlags check_conditions(const ProblemConstants& c, double alpha)
{
    if (!(alpha > 1.0)) {
        throw Error(Errc::InvalidArgument, "alpha must exceed 1");
    }
    ConditionFlags f;
    f.alpha = alpha;
    f.stable = c.lambda_dA > 0.0;
    f.regularity_threshold = std::max(std::sqrt(2.0 * c.kappa_dA * c.trR1), 4.0 * c.rhoS);
    f.regularity = c.lambda_dA > f.regularity_threshold;
    if (f.stable && c.lambda_A > 0.0) {
        const double l = c.lambda_dA;
        f.contraction_lhs = 4.0 * kE * alpha * std::sqrt(c.rhoS / l) * (c.trR1 / c.lambda_A) *
                            (1.0 + 2.0 * (c.trR1 / l) * (c.rhoS / l));
        f.contraction = f.contraction_lhs < 1.0;
    } else {
        f.contraction_lhs = std::numeric_limits<double>::infinity();
        f.contraction = false;
    }
    return f;
}

LyapunovRate lyapunov_rate(const ProblemConstants& c)
{
    require_stable(c);
    if (!(c.rhoS > 0.0)) {
        throw Error(Errc::InvalidArgument, "rho(S) must be positive for the forgetting rate");
    }
    const double l = c.lambda_dA;
    const double r = std::sqrt(c.rhoS / l);
    const double kappa_term = 2.0 * (c.kappa_dA / l) * (c.trR1 / l);
    LyapunovRate out;
    out.Lambda = l * (1.0 - kappa_term - r * (1.0 - 0.75 * r));
    out.delta_exp = 0.5 * std::sqrt(l / c.rhoS);
    out.lower_bound_holds = out.Lambda / l >= 0.5 - kappa_term;
    return out;
}

double moment_bound_xhat(const ProblemConstants& c, int n, double t)
{
    require_order(n);
    require_stable(c);
    require_lambda_A(c);
    const double sigma2 = sigma_pi(c, t).sigma2_inf();
    return (2.0 * n - 1.0) * (c.trR1 / c.lambda_A * sigma2 / 2.0 +
                              ramp(c.lambda_A, c.lambda_dA, t) * c.rhoS * c.trP0 * c.trP0);
}

double signal_moment_bound(const ProblemConstants& c, int n)
{
    require_order(n);
    require_lambda_A(c);
    return (n - 0.5) * c.trR1 / c.lambda_A;
}

double hilbert_rhs(int n, double a, double w, double t, double x0_norm_n)
{
    require_order(n);
    return std::exp(0.5 * t * (-n * a + 0.5 * n * (n - 1) * w)) * x0_norm_n;
}

double gronwall_moment_rhs(int n, const GronwallSchedule& schedule, double T, double dt)
{
    require_order(n);
    if (!(dt > 0.0) || !(T >= 0.0)) {
        throw Error(Errc::InvalidArgument, "gronwall_moment_rhs needs dt > 0 and T >= 0");
    }
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    if (steps == 0) {
        return 0.0;
    }
    const double h = T / static_cast<double>(steps);
    const double half = 0.5 * (n - 1);

    std::vector<double> lambda_cum(steps + 1, 0.0);
    std::vector<double> w_cum(steps + 1, 0.0);
    std::vector<double> source(steps + 1, 0.0);
    double prev_lambda = 0.0;
    double prev_w = 0.0;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double s = h * static_cast<double>(k);
        const double w = schedule.w(s);
        const double lambda = schedule.a(s) - half * w;
        source[k] = schedule.u(s) + half * schedule.v(s);
        if (k > 0) {
            lambda_cum[k] = lambda_cum[k - 1] + 0.5 * h * (lambda + prev_lambda);
            w_cum[k] = w_cum[k - 1] + 0.5 * h * (w + prev_w);
        }
        prev_lambda = lambda;
        prev_w = w;
    }
    double total = 0.0;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double f =
            std::exp(-((lambda_cum[steps] - lambda_cum[k]) + half * w_cum[k])) * source[k];
        total += (k == 0 || k == steps) ? 0.5 * f : f;
    }
    return h * total;
}

double laplace_rhs(double eps, double u_a, double v_a)
{
    if (!(eps > 0.0 && eps <= 1.0)) {
        throw Error(Errc::InvalidArgument, "eps must lie in (0, 1]");
    }
    if (!(v_a > 0.0)) {
        throw Error(Errc::InvalidArgument, "v must be positive");
    }
    return 0.5 * std::exp((1.0 - eps) / kE * u_a / v_a) +
           kE / (2.0 * std::numbers::sqrt2) / std::sqrt(eps);
}

double laplace_time_avg_coefficient(double eps, double a, double v)
{
    if (!(eps >= 0.0 && eps <= 1.0) || !(v > 0.0)) {
        throw Error(Errc::InvalidArgument, "need eps in [0, 1] and v > 0");
    }
    return a * a * eps / (4.0 * v);
}

double laplace_time_avg_rhs(double eps, double a, double v, double integral_u)
{
    if (!(eps >= 0.0 && eps <= 1.0) || !(v > 0.0)) {
        throw Error(Errc::InvalidArgument, "need eps in [0, 1] and v > 0");
    }
    return std::exp(0.5 * (a / v) * eps / (1.0 + std::sqrt(1.0 - eps)) * integral_u);
}

double event_control_radius(double z2, double delta)
{
    if (!(z2 >= 0.0)) {
        throw Error(Errc::InvalidArgument, "z^2 must be nonnegative");
    }
    return z2 * varpi(delta);
}

double gaussian_even_moment(int n)
{
    if (n < 0) {
        throw Error(Errc::InvalidArgument, "order must be nonnegative");
    }
    double m = 1.0;
    for (int k = 1; k <= n; ++k) {
        m *= 2.0 * k - 1.0;  // (2n)! / (2^n n!) = (2n - 1)!!
    }
    return m;
}

double stirling_lower_bound(int n)
{
    if (n < 0) {
        throw Error(Errc::InvalidArgument, "order must be nonnegative");
    }
    return std::numbers::sqrt2 / kE * std::pow(2.0 * n / kE, n);
}

BoundsReport make_bounds_report(const ProblemConstants& c, double alpha,
                                const std::vector<double>& t_grid,
                                const std::vector<double>& delta_grid, double dist2)
{
    BoundsReport r;
    r.flags = check_conditions(c, alpha);
    r.chi = chi(c);
    r.t_grid = t_grid;
    r.delta_grid = delta_grid;
    for (double d : delta_grid) {
        r.varpi.push_back(varpi(d));
    }
    if (!r.flags.stable) {
        return r;
    }
    for (double t : t_grid) {
        const SigmaPi s = sigma_pi(c, t);
        r.tau.push_back(tau_t(c, t));
        r.sigma2.push_back(s.sigma2);
        r.pi.push_back(s.pi);
        r.pi_inf = s.pi_inf;
    }
    if (c.rhoS > 0.0) {
        r.rate = lyapunov_rate(c);
    }
    if (c.lambda_A > 0.0) {
        for (double d : delta_grid) {
            r.signal_radius.push_back(signal_radius(c, d));
            std::vector<double> row;
            for (double t : t_grid) {
                row.push_back(ekf_radius(c, d, t, dist2, c.trP0));
            }
            r.ekf_radius.push_back(std::move(row));
        }
    }
    return r;
}

void to_json(nlohmann::json& j, const ProblemConstants& c)
{
    j = {{"lambda_dA", c.lambda_dA}, {"kappa_dA", c.kappa_dA}, {"lambda_A", c.lambda_A},
         {"trR1", c.trR1},           {"rhoS", c.rhoS},         {"trP0", c.trP0},
         {"rhoP0", c.rhoP0},         {"r1", c.r1}};
}

void to_json(nlohmann::json& j, const ConditionFlags& f)
{
    j = {{"alpha", f.alpha},
         {"lambda_dA_positive", f.stable},
         {"regularity", f.regularity},
         {"regularity_threshold", f.regularity_threshold},
         {"contraction", f.contraction},
         {"contraction_lhs", f.contraction_lhs}};
}

void to_json(nlohmann::json& j, const LyapunovRate& r)
{
    j = {{"Lambda", r.Lambda}, {"delta_exponent", r.delta_exp},
         {"lower_bound_holds", r.lower_bound_holds}};
}

void to_json(nlohmann::json& j, const BoundsReport& r)
{
    j = {{"t_grid", r.t_grid},
         {"tau", r.tau},
         {"sigma2", r.sigma2},
         {"pi", r.pi},
         {"pi_inf", r.pi_inf},
         {"delta_grid", r.delta_grid},
         {"varpi", r.varpi},
         {"chi", r.chi},
         {"flags", r.flags},
         {"signal_radius", r.signal_radius},
         {"ekf_radius", r.ekf_radius}};
    if (r.rate) {
        j["Lambda"] = r.rate->Lambda;
        j["delta_exponent"] = r.rate->delta_exp;
        j["lower_bound_holds"] = r.rate->lower_bound_holds;
    } else {
        j["Lambda"] = nullptr;
        j["delta_exponent"] = nullptr;
    }
}

} // namespace ekbf
