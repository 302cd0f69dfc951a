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
#include <functional>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ekbf/linalg.hpp"
#include "ekbf/models.hpp"

namespace ekbf {

// Scalars entering every closed-form bound.
struct ProblemConstants {
    double lambda_dA = 0.0;
    double kappa_dA = 0.0;
    double lambda_A = 0.0;
    double trR1 = 0.0;
    double rhoS = 0.0;
    double trP0 = 0.0;
    double rhoP0 = 0.0;
    std::size_t r1 = 0;

    static ProblemConstants from(const SignalModel& model, const ObservationModel& obs,
                                 const SymMat& P0);
};

// e^{-lambda_dA t} tr(P0) + tr(R1) / lambda_dA
double tau_t(const ProblemConstants& c, double t);

struct SigmaPi {
    double sigma2 = 1.0;  // 1 + 2 pi(t)
    double pi = 0.0;      // tau_t^2 rho(S) / tr(R1)
    double pi_inf = 0.0;  // (rho(S) / lambda_dA) (tr(R1) / lambda_dA)
    double sigma2_inf() const noexcept { return 1.0 + 2.0 * pi_inf; }
};
SigmaPi sigma_pi(const ProblemConstants& c, double t);

// e^2 / sqrt(2) * (1/2 + delta + sqrt(delta))
double varpi(double delta);

// 4 r1 rho(P0)
double chi(const ProblemConstants& c);

// |e^{-a t} - e^{-b t}| / |a - b|, continued by t e^{-a t} when |a - b| < 1e-12.
double ramp(double a, double b, double t);

double signal_radius(const ProblemConstants& c, double delta);

// Squared-error radius for the filter mean; dist2 = ||x - xhat||^2 at time 0,
// trp = tr(P0) of the filter.
double ekf_radius(const ProblemConstants& c, double delta, double t, double dist2, double trp);

struct ConditionFlags {
    double alpha = 0.0;
    bool stable = false;             // lambda_dA > 0
    bool regularity = false;         // lambda_dA > max(sqrt(2 kappa tr(R1)), 4 rho(S))
    double regularity_threshold = 0.0;
    bool contraction = false;        // the alpha-weighted inequality below holds
    double contraction_lhs = 0.0;    // 4 e alpha sqrt(rhoS/l) (trR1/lA) [1 + 2 (trR1/l)(rhoS/l)]
    bool all() const noexcept { return stable && regularity && contraction; }
};
ConditionFlags check_conditions(const ProblemConstants& c, double alpha);

struct LyapunovRate {
    double Lambda = 0.0;
    double delta_exp = 0.0;         // (1/2) sqrt(lambda_dA / rho(S))
    bool lower_bound_holds = false;  // Lambda / lambda_dA >= 1/2 - 2 kappa tr(R1) / lambda_dA^2
};
LyapunovRate lyapunov_rate(const ProblemConstants& c);

// Bound on E(||signal - filter mean||^n)^{2/n}.
double moment_bound_xhat(const ProblemConstants& c, int n, double t);

// Bound on E(||signal - deterministic flow||^{2n})^{1/n}.
double signal_moment_bound(const ProblemConstants& c, int n);

// Geometric test process d||X||^2 = -a ||X||^2 dt + sqrt(w) ||X||^2 dN with
// constant (a, w): bound on E ||X_t||^n given ||X_0||^n.
double hilbert_rhs(int n, double a, double w, double t, double x0_norm_n);

// Time-varying coefficients of the quadratic test process.
struct GronwallSchedule {
    std::function<double(double)> a;
    std::function<double(double)> w;
    std::function<double(double)> u;
    std::function<double(double)> v;
};

// Bound on E(||X_T||^n)^{2/n} for X_0 = 0 with sources (u, v); trapezoidal
// quadrature on the grid k dt.
double gronwall_moment_rhs(int n, const GronwallSchedule& schedule, double T, double dt);

// (1/2) exp((1 - eps) / e * u / v) + e / (2 sqrt(2 eps))
double laplace_rhs(double eps, double u_a, double v_a);

// Exponent coefficient a^2 eps / (4 v) of the time-averaged Laplace estimate.
double laplace_time_avg_coefficient(double eps, double a, double v);

// exp[(a / v) eps / (1 + sqrt(1 - eps)) int_0^t U]^{1/2} for a deterministic source integral.
double laplace_time_avg_rhs(double eps, double a, double v, double integral_u);

// z^2 varpi(delta)
double event_control_radius(double z2, double delta);

// E V^{2n} = (2n)! / (2^n n!) for V ~ N(0, 1), and its lower bound sqrt(2) e^{-1} (2n/e)^n.
double gaussian_even_moment(int n);
double stirling_lower_bound(int n);

struct BoundsReport {
    std::vector<double> t_grid;
    std::vector<double> tau;
    std::vector<double> sigma2;
    std::vector<double> pi;
    double pi_inf = 0.0;
    std::vector<double> delta_grid;
    std::vector<double> varpi;
    double chi = 0.0;
    std::optional<LyapunovRate> rate;  // absent when rho(S) = 0
    ConditionFlags flags;
    std::vector<double> signal_radius;             // [delta]
    std::vector<std::vector<double>> ekf_radius;  // [delta][t]
};

BoundsReport make_bounds_report(const ProblemConstants& c, double alpha,
                                const std::vector<double>& t_grid,
                                const std::vector<double>& delta_grid, double dist2);

void to_json(nlohmann::json& j, const ProblemConstants& c);
void to_json(nlohmann::json& j, const ConditionFlags& f);
void to_json(nlohmann::json& j, const LyapunovRate& r);
void to_json(nlohmann::json& j, const BoundsReport& r);

} // namespace ekbf
