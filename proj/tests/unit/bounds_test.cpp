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


#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "ekbf/bounds.hpp"
#include "ekbf/error.hpp"
#include "test_util.hpp"

namespace ekbf {
namespace {

constexpr double kE = std::numbers::e;

template <class F>
Errc error_code(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no ekbf::Error thrown";
    return Errc::InvalidArgument;
}

ProblemConstants constants(double lambda_dA, double lambda_A, double trR1, double rhoS,
                           double trP0 = 0.0, double kappa = 0.0)
{
    ProblemConstants c;
    c.lambda_dA = lambda_dA;
    c.lambda_A = lambda_A;
    c.trR1 = trR1;
    c.rhoS = rhoS;
    c.trP0 = trP0;
    c.kappa_dA = kappa;
    c.rhoP0 = trP0;
    c.r1 = 1;
    return c;
}

GronwallSchedule constant_schedule(double a, double w, double u, double v)
{
    return {[a](double) { return a; }, [w](double) { return w; }, [u](double) { return u; },
            [v](double) { return v; }};
}

TEST(Trace, EnvelopeValues)
{
    const auto c = constants(2.0, 1.0, 1.0, 1.0, 1.0);
    EXPECT_DOUBLE_EQ(tau_t(c, 0.0), 1.0 + 0.5);
    EXPECT_NEAR(tau_t(c, 1e6), 0.5, 1e-12);
    EXPECT_NEAR(tau_t(c, std::log(2.0) / 2.0), 1.0, 1e-15);
    EXPECT_EQ(error_code([] { (void)tau_t(constants(0.0, 1.0, 1.0, 1.0), 1.0); }), Errc::NotStable);
    double prev = tau_t(c, 0.0);
    for (double t = 0.1; t < 10.0; t += 0.1) {
        const double cur = tau_t(c, t);
        EXPECT_LT(cur, prev);
        EXPECT_GE(cur, 0.5);
        prev = cur;
    }
}

TEST(SigmaPi, Values)
{
    const auto flat = constants(2.0, 1.0, 1.0, 1.0, 0.0);
    for (double t : {0.0, 1.0, 50.0}) {
        const SigmaPi s = sigma_pi(flat, t);
        EXPECT_NEAR(s.pi, 0.25, 1e-15);
        EXPECT_NEAR(s.sigma2, 1.5, 1e-15);
        EXPECT_NEAR(s.pi_inf, 0.25, 1e-15);
        EXPECT_NEAR(s.sigma2_inf(), 1.5, 1e-15);
    }
    const SigmaPi blind = sigma_pi(constants(2.0, 1.0, 1.0, 0.0, 3.0), 1.0);
    EXPECT_EQ(blind.sigma2, 1.0);
    const SigmaPi transient = sigma_pi(constants(2.0, 1.0, 1.0, 1.0, 1.0), 0.0);
    EXPECT_NEAR(transient.pi, 1.5 * 1.5, 1e-15);
}

TEST(Varpi, Values)
{
    EXPECT_NEAR(varpi(0.0), kE * kE / (2.0 * std::sqrt(2.0)), 1e-13);
    EXPECT_NEAR(varpi(0.0), 2.61233, 1e-4 * 2.61233);
    EXPECT_NEAR(varpi(1.0), 2.5 * kE * kE / std::sqrt(2.0), 1e-13);
    EXPECT_NEAR(varpi(1.0), 13.0616, 1e-4 * 13.0616);
    EXPECT_NEAR(varpi(4.0), kE * kE / std::sqrt(2.0) * 6.5, 1e-12);
    EXPECT_NEAR(varpi(4.0), 33.9603, 1e-4 * 33.9603);
    EXPECT_EQ(error_code([] { (void)varpi(-0.1); }), Errc::InvalidArgument);
    for (double d = 0.0; d < 10.0; d += 0.05) EXPECT_LT(varpi(d), varpi(d + 0.05));
}

TEST(Chi, ValuesAndGaussianMgf)
{
    auto c = constants(1.0, 0.5, 1.0, 1.0, 1.0);
    EXPECT_DOUBLE_EQ(chi(c), 4.0);
    c.r1 = 2;
    EXPECT_DOUBLE_EQ(chi(c), 8.0);
    // E exp(||N(0, P0)||^2 / chi) = prod_i (1 - 2 p_i / chi)^{-1/2}.
    Rng rng(41);
    for (std::size_t r : {1u, 2u, 3u, 6u, 10u}) {
        const SymMat P0 = test::random_psd(r, rng, 0.01);
        ProblemConstants pc;
        pc.r1 = r;
        pc.rhoP0 = max_eigenvalue(P0);
        const double x = chi(pc);
        const SymEigen eig = jacobi_eigen(P0);
        double mgf = 1.0;
        for (double p : eig.values) mgf /= std::sqrt(1.0 - 2.0 * p / x);
        EXPECT_LE(mgf, kE);
    }
    ProblemConstants unit;
    unit.r1 = 1;
    unit.rhoP0 = 1.0;
    EXPECT_NEAR(1.0 / std::sqrt(1.0 - 2.0 / chi(unit)), std::sqrt(2.0), 1e-15);
}

TEST(Radii, SignalRadius)
{
    EXPECT_NEAR(signal_radius(constants(2.0, 1.0, 1.0, 1.0), 1.0), 13.0616, 1e-4 * 13.0616);
    EXPECT_NEAR(signal_radius(constants(2.0, 1.0, 2.0, 1.0), 1.0),
                2.0 * signal_radius(constants(2.0, 1.0, 1.0, 1.0), 1.0), 1e-12);
    EXPECT_NEAR(signal_radius(constants(2.0, 0.5, 3.0, 1.0), 0.0), 2.61233 * 6.0, 1e-4 * 2.61233 * 6.0);
    EXPECT_EQ(error_code([] { (void)signal_radius(constants(2.0, 0.0, 1.0, 1.0), 1.0); }),
              Errc::NotStable);
    // Composition with the generic event radius.
    const auto c = constants(3.0, 1.5, 0.7, 1.0);
    EXPECT_DOUBLE_EQ(signal_radius(c, 2.0), event_control_radius(c.trR1 / c.lambda_A, 2.0));
}

TEST(Radii, EkfRadiusLimits)
{
    const auto c = constants(2.0, 1.0, 1.0, 1.0, 2.0);
    const double s2 = 1.0 + 2.0 * (1.0 / 2.0) * (1.0 / 2.0);
    EXPECT_NEAR(ekf_radius(c, 1.0, 1e4, 3.0, 2.0), 4.0 * varpi(1.0) * 1.0 * s2, 1e-9);
    EXPECT_NEAR(ekf_radius(c, 0.0, 0.0, 0.0, 0.0), 4.0 * varpi(0.0) * 1.0 * s2 / 1.0, 1e-12);
    // Initial distance enters as 2 e^{-lambda_dA t} dist2.
    EXPECT_NEAR(ekf_radius(c, 0.5, 0.7, 1.0, 0.0) - ekf_radius(c, 0.5, 0.7, 0.0, 0.0),
                2.0 * std::exp(-1.4), 1e-12);
}

TEST(Radii, RampFactor)
{
    EXPECT_NEAR(ramp(1.0, 1.0, 1.0), std::exp(-1.0), 1e-15);
    EXPECT_NEAR(ramp(1.0, 1.0, 1.0), 0.367879, 1e-6);
    for (double t : {0.1, 1.0, 5.0}) {
        EXPECT_NEAR(ramp(1.0, 3.0, t), (std::exp(-t) - std::exp(-3.0 * t)) / 2.0, 1e-15);
        EXPECT_NEAR(ramp(3.0, 1.0, t), (std::exp(-t) - std::exp(-3.0 * t)) / 2.0, 1e-15);
        for (double gap : {1e-6, 1e-9, 1e-11, 1e-13}) {
            EXPECT_NEAR(ramp(1.0, 1.0 + gap, t), ramp(1.0, 1.0, t), 1e-5 * std::max(gap * 1e6, 1e-6));
        }
    }
    EXPECT_EQ(ramp(1.0, 2.0, 0.0), 0.0);
}

TEST(Radii, EkfRadiusDecreasesInTimeWithoutInitialCovariance)
{
    const auto c = constants(2.0, 1.0, 1.0, 1.0, 2.0);
    double prev = ekf_radius(c, 1.0, 0.0, 4.0, 0.0);
    for (double t = 0.05; t < 15.0; t += 0.05) {
        const double cur = ekf_radius(c, 1.0, t, 4.0, 0.0);
        EXPECT_LE(cur, prev);
        prev = cur;
    }
    // With trp > 0 the ramp term starts at 0 and rises first.
    EXPECT_GT(ekf_radius(c, 1.0, 0.5, 0.0, 2.0), ekf_radius(c, 1.0, 0.0, 0.0, 2.0));
}

TEST(Conditions, Example)
{
    const auto c = constants(5.0, 2.5, 0.01, 1.0);
    const ConditionFlags f = check_conditions(c, 1.1);
    EXPECT_TRUE(f.stable);
    EXPECT_TRUE(f.regularity);
    EXPECT_DOUBLE_EQ(f.regularity_threshold, 4.0);
    const double lhs = 4.0 * kE * 1.1 * std::sqrt(0.2) * 0.004 * (1.0 + 2.0 * 0.002 * 0.2);
    EXPECT_NEAR(f.contraction_lhs, lhs, 1e-15);
    EXPECT_NEAR(f.contraction_lhs, 0.0214, 5e-5);
    EXPECT_TRUE(f.contraction);
    EXPECT_TRUE(f.all());
}

TEST(Conditions, Failures)
{
    EXPECT_FALSE(check_conditions(constants(5.0, 2.5, 0.01, 100.0), 1.1).regularity);
    const ConditionFlags degenerate = check_conditions(constants(5.0, 2.5, 0.0, 1.0), 1.1);
    EXPECT_TRUE(degenerate.regularity);
    EXPECT_TRUE(degenerate.contraction);
    EXPECT_EQ(degenerate.contraction_lhs, 0.0);
    EXPECT_FALSE(check_conditions(constants(5.0, 2.5, 1.0, 1.0, 0.0, 20.0), 1.1).regularity);
    EXPECT_FALSE(check_conditions(constants(-1.0, 2.5, 1.0, 1.0), 1.1).all());
    EXPECT_EQ(error_code([] { (void)check_conditions(constants(5.0, 2.5, 0.01, 1.0), 1.0); }),
              Errc::InvalidArgument);
    // Larger alpha only makes the contraction test harder.
    EXPECT_LT(check_conditions(constants(5.0, 2.5, 0.01, 1.0), 1.1).contraction_lhs,
              check_conditions(constants(5.0, 2.5, 0.01, 1.0), 2.0).contraction_lhs);
}

TEST(Lyapunov, Example)
{
    const LyapunovRate r = lyapunov_rate(constants(1.0, 0.5, 1.0, 1.0 / 16.0));
    EXPECT_NEAR(r.Lambda, 0.796875, 1e-15);
    EXPECT_NEAR(r.delta_exp, 2.0, 1e-15);
    EXPECT_TRUE(r.lower_bound_holds);
    EXPECT_NEAR(lyapunov_rate(constants(3.0, 1.5, 1.0, 1e-14)).Lambda, 3.0, 1e-6);
    EXPECT_EQ(error_code([] { (void)lyapunov_rate(constants(1.0, 0.5, 1.0, 0.0)); }),
              Errc::InvalidArgument);
}

TEST(Lyapunov, MonotoneInKappaAndRhoS)
{
    for (double rho = 0.01; rho < 1.25; rho += 0.01) {
        const auto a = lyapunov_rate(constants(5.0, 2.5, 0.5, rho));
        const auto b = lyapunov_rate(constants(5.0, 2.5, 0.5, rho + 0.01));
        EXPECT_LT(b.Lambda, a.Lambda);
        EXPECT_GT(a.delta_exp, 1.0);
    }
    for (double k = 0.0; k < 5.0; k += 0.1) {
        EXPECT_LT(lyapunov_rate(constants(5.0, 2.5, 0.5, 1.0, 0.0, k + 0.1)).Lambda,
                  lyapunov_rate(constants(5.0, 2.5, 0.5, 1.0, 0.0, k)).Lambda);
    }
}

TEST(Moments, FilterBound)
{
    const auto c = constants(2.0, 1.0, 1.0, 1.0, 0.0);
    for (int n = 1; n <= 4; ++n)
        EXPECT_NEAR(moment_bound_xhat(c, n, 3.0), (2.0 * n - 1.0) * 1.0 * 1.5 / 2.0, 1e-14);
    const auto p = constants(2.0, 1.0, 1.0, 1.0, 1.5);
    EXPECT_NEAR(moment_bound_xhat(p, 1, 100.0), 1.5 / 2.0, 1e-12);
    EXPECT_NEAR(moment_bound_xhat(p, 2, 1.0),
                3.0 * (0.75 + (std::exp(-1.0) - std::exp(-2.0)) * 1.0 * 2.25), 1e-14);
    EXPECT_EQ(error_code([&] { (void)moment_bound_xhat(c, 0, 1.0); }), Errc::InvalidArgument);
}

TEST(Moments, SignalBound)
{
    EXPECT_DOUBLE_EQ(signal_moment_bound(constants(2.0, 1.0, 1.0, 1.0), 1), 0.5);
    const auto c = constants(2.0, 0.4, 1.3, 1.0);
    for (int n = 1; n < 6; ++n)
        EXPECT_NEAR(signal_moment_bound(c, n + 1) - signal_moment_bound(c, n), 1.3 / 0.4, 1e-13);
}

TEST(Gronwall, GeometricMomentBound)
{
    // w = 0: deterministic decay, equality.
    EXPECT_NEAR(hilbert_rhs(2, 1.0, 0.0, 3.0, 4.0), std::exp(-3.0) * 4.0, 1e-15);
    // n = 2, a = 1, w = 1/2: exponent (-a + w/2) t.
    EXPECT_NEAR(hilbert_rhs(2, 1.0, 0.5, 2.0, 1.0), std::exp(-1.5), 1e-15);
    // It dominates the exact geometric moment E Y^{n/2} = exp(t n/2 (-a - w/4 + n w/4)).
    for (int n = 1; n <= 4; ++n)
        for (double t : {0.5, 1.0, 5.0}) {
            const double exact = std::exp(t * (0.5 * n * (-1.0 - 0.125) + n * n * 0.5 / 8.0));
            EXPECT_LE(exact, hilbert_rhs(n, 1.0, 0.5, t, 1.0) * (1.0 + 1e-14));
        }
}

TEST(Gronwall, SourcedBound)
{
    const double T = 4.0;
    EXPECT_EQ(gronwall_moment_rhs(2, constant_schedule(1.0, 0.5, 0.0, 0.0), T, 1e-3), 0.0);
    for (double a : {0.5, 1.0, 2.0}) {
        const double u = 0.7;
        EXPECT_NEAR(gronwall_moment_rhs(1, constant_schedule(a, 0.0, u, 0.0), T, 1e-3),
                    u * (1.0 - std::exp(-a * T)) / a, 1e-6 * u / a);
    }
    const auto sched = GronwallSchedule{[](double s) { return 1.0 + 0.5 * std::sin(s); },
                                        [](double s) { return 0.2 * s / (1.0 + s); },
                                        [](double s) { return 1.0 + s * s / 10.0; },
                                        [](double) { return 0.3; }};
    const double coarse = gronwall_moment_rhs(3, sched, T, 1e-3);
    const double fine = gronwall_moment_rhs(3, sched, T, 5e-4);
    EXPECT_LT(std::abs(coarse - fine), 1e-6 * fine);
    EXPECT_EQ(error_code([&] { (void)gronwall_moment_rhs(2, sched, T, 0.0); }),
              Errc::InvalidArgument);
}

TEST(Gronwall, SourcedBoundFailsWithMultiplicativeNoise)
{
    // dY = (-Y + 1) dt + sqrt(0.5) Y dB from Y_0 = 0 has E Y_t = 1 - e^{-t}, but the
    // sourced estimate evaluates to 2 (e^{-t/4} - e^{-3t/4}), which tends to 0.
    const double T = 10.0;
    const double rhs = gronwall_moment_rhs(2, constant_schedule(1.0, 0.5, 1.0, 0.0), T, 1e-3);
    EXPECT_NEAR(rhs, 2.0 * (std::exp(-0.25 * T) - std::exp(-0.75 * T)), 1e-6);
    EXPECT_LT(rhs, 1.0 - std::exp(-T));
}

TEST(Laplace, Values)
{
    EXPECT_NEAR(laplace_rhs(1.0, 0.0, 1.0), 0.5 + kE / (2.0 * std::sqrt(2.0)), 1e-15);
    EXPECT_NEAR(laplace_rhs(1.0, 0.0, 1.0), 1.46106, 1e-5);
    EXPECT_NEAR(laplace_rhs(1.0, 2.0, 2.0), 1.46106, 1e-5);
    // u = v, eps -> 0: grows like eps^{-1/2}.
    for (double eps : {1e-6, 1e-8, 1e-10}) {
        EXPECT_NEAR(std::sqrt(eps) * laplace_rhs(eps, 1.0, 1.0), kE / (2.0 * std::sqrt(2.0)),
                    1e-3 * std::sqrt(eps) / 1e-6);
    }
    EXPECT_EQ(error_code([] { (void)laplace_rhs(0.0, 1.0, 1.0); }), Errc::InvalidArgument);
    EXPECT_EQ(error_code([] { (void)laplace_rhs(1.5, 1.0, 1.0); }), Errc::InvalidArgument);
    EXPECT_EQ(error_code([] { (void)laplace_rhs(0.5, 1.0, 0.0); }), Errc::InvalidArgument);
}

TEST(Laplace, TimeAverage)
{
    EXPECT_NEAR(laplace_time_avg_coefficient(0.5, 2.0, 1.0), 0.5, 1e-15);
    EXPECT_NEAR(laplace_time_avg_rhs(1.0, 2.0, 1.0, 3.0), std::exp(3.0), 1e-12);
    EXPECT_EQ(laplace_time_avg_rhs(0.0, 2.0, 1.0, 3.0), 1.0);
    EXPECT_EQ(error_code([] { (void)laplace_time_avg_rhs(0.5, 1.0, 0.0, 1.0); }),
              Errc::InvalidArgument);
}

TEST(EventControl, Values)
{
    EXPECT_NEAR(event_control_radius(1.0, 0.0), 2.61233, 1e-4 * 2.61233);
    EXPECT_EQ(error_code([] { (void)event_control_radius(-1.0, 0.0); }), Errc::InvalidArgument);
}

TEST(EventControl, GaussianTailOracle)
{
    // Z = |N(0,1)| satisfies E(Z^{2n})^{1/n} = ((2n-1)!!)^{1/n} <= n, so z^2 = 1 and
    // P(Z^2 <= varpi(delta)) = erf(sqrt(varpi / 2)) must exceed 1 - e^{-delta}.
    for (int n = 1; n <= 20; ++n) EXPECT_LE(std::pow(gaussian_even_moment(n), 1.0 / n), n);
    for (double delta : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
        const double radius = event_control_radius(1.0, delta);
        EXPECT_GE(std::erf(std::sqrt(radius / 2.0)), 1.0 - std::exp(-delta));
    }
}

TEST(EventControl, GaussianMomentsAndStirling)
{
    EXPECT_EQ(gaussian_even_moment(0), 1.0);
    EXPECT_EQ(gaussian_even_moment(1), 1.0);
    EXPECT_EQ(gaussian_even_moment(2), 3.0);
    EXPECT_EQ(gaussian_even_moment(4), 105.0);
    for (int n = 0; n <= 40; ++n) {
        EXPECT_LE(stirling_lower_bound(n), gaussian_even_moment(n));
        if (n >= 5) {
            // (2n-1)!! ~ sqrt(2) (2n/e)^n, so the ratio tends to 1/e.
            EXPECT_GT(stirling_lower_bound(n) / gaussian_even_moment(n), 0.35);
        }
    }
}

TEST(Report, Json)
{
    const auto c = constants(5.0, 2.5, 0.01, 1.0, 2.0);
    const BoundsReport r = make_bounds_report(c, 1.1, {0.0, 1.0, 5.0}, {0.5, 1.0}, 1.0);
    ASSERT_EQ(r.tau.size(), 3u);
    ASSERT_EQ(r.ekf_radius.size(), 2u);
    ASSERT_TRUE(r.rate.has_value());
    const nlohmann::json j = r;
    EXPECT_TRUE(j.contains("flags"));
    EXPECT_DOUBLE_EQ(j.at("flags").at("contraction_lhs").get<double>(),
                     check_conditions(c, 1.1).contraction_lhs);
    EXPECT_DOUBLE_EQ(j.at("Lambda").get<double>(), lyapunov_rate(c).Lambda);
    EXPECT_DOUBLE_EQ(j.at("delta_exponent").get<double>(), lyapunov_rate(c).delta_exp);

    const BoundsReport blind = make_bounds_report(constants(5.0, 2.5, 0.01, 0.0), 1.1, {1.0}, {1.0}, 0.0);
    EXPECT_FALSE(blind.rate.has_value());
    const nlohmann::json jb = blind;
    EXPECT_TRUE(jb.at("Lambda").is_null());
}

} // namespace
} // namespace ekbf
