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
#include <memory>
#include <vector>

#include <gtest/gtest.h>

#include "ekbf/error.hpp"
#include "ekbf/models.hpp"
#include "test_util.hpp"

namespace ekbf {
namespace {

using test::max_abs_diff;

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

SignalModel quad_cubic_identity(Vec q = {0.0, 0.0})
{
    return SignalModel::quadratic_cubic(SymMat::identity(2), std::move(q), SymMat::identity(2), 1.0,
                                        SymMat::identity(2));
}

SignalModel quad_cubic_general()
{
    return SignalModel::quadratic_cubic(SymMat{{2.0, 0.3}, {0.3, 1.0}}, Vec{0.5, -0.3},
                                        SymMat{{0.8, -0.2}, {-0.2, 0.5}}, 1.5,
                                        0.5 * SymMat::identity(2));
}

SignalModel interacting(std::size_t r, double u1, double u2, double k1, double k2, double beta = 1.0)
{
    return SignalModel::interacting(r, pairwise_cubic_interaction(u1, u2, k1, k2, beta),
                                    SymMat::identity(r));
}

SignalModel conjugated_quad_cubic(double scale)
{
    const double c = std::cos(0.7), s = std::sin(0.7);
    const Mat T = scale * Mat{{c, -s}, {s, c}};
    return SignalModel::conjugated(std::make_shared<const SignalModel>(quad_cubic_general()), T,
                                   SymMat::identity(2));
}

std::vector<SignalModel> model_zoo()
{
    std::vector<SignalModel> zoo;
    zoo.push_back(SignalModel::linear(Mat{{-1.0, 0.5}, {-0.2, -2.0}}, SymMat::identity(2)));
    zoo.push_back(quad_cubic_identity({0.4, -0.1}));
    zoo.push_back(quad_cubic_general());
    zoo.push_back(interacting(2, 1.0, 0.3, 0.4, 0.7));
    zoo.push_back(interacting(3, 1.0, 0.5, 0.2, 0.6, 0.8));
    zoo.push_back(interacting(4, 0.5, 0.2, 0.1, 0.3));
    zoo.push_back(conjugated_quad_cubic(2.0));
    return zoo;
}

Mat finite_difference_jacobian(const SignalModel& m, const Vec& x, double h)
{
    const std::size_t n = x.size();
    Mat J(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        Vec xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const Vec d = (1.0 / (2.0 * h)) * (drift(m, xp) - drift(m, xm));
        for (std::size_t i = 0; i < n; ++i) J(i, j) = d[i];
    }
    return J;
}

TEST(Models, DriftExamples)
{
    const SignalModel lin = SignalModel::linear(-1.0 * Mat::identity(2), SymMat::identity(2));
    EXPECT_EQ(drift(lin, Vec{1.0, 2.0}), (Vec{-1.0, -2.0}));
    EXPECT_EQ(drift(quad_cubic_identity(), Vec{0.0, 0.0}), (Vec{0.0, 0.0}));
    EXPECT_LT(max_abs_diff(drift(quad_cubic_identity(), Vec{1.0, 0.0}), Vec{-2.0, 0.0}), 1e-15);
    EXPECT_EQ(error_code([&] { (void)drift(lin, Vec{1.0}); }), Errc::DimensionMismatch);
}

TEST(Models, QuadraticCubicDriftIsMinusBetaGradient)
{
    const SymMat Q1{{2.0, 0.3}, {0.3, 1.0}};
    const Vec q{0.5, -0.3};
    const SymMat Q2{{0.8, -0.2}, {-0.2, 0.5}};
    const double beta = 1.5;
    const SignalModel m = quad_cubic_general();
    auto V = [&](const Vec& x) {
        const double quad2 = dot(x, Q2.mat() * x);
        return 0.5 * dot(x, Q1.mat() * x) + dot(q, x) + std::pow(quad2, 1.5) / 3.0;
    };
    Rng rng(21);
    for (int k = 0; k < 200; ++k) {
        const Vec x = test::random_vec(2, rng, 3.0);
        const double h = 1e-6;
        for (std::size_t i = 0; i < 2; ++i) {
            Vec xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            const double g = (V(xp) - V(xm)) / (2.0 * h);
            EXPECT_NEAR(drift(m, x)[i], -beta * g, 1e-6 * std::max(1.0, std::abs(g)));
        }
    }
}

TEST(Models, JacobianMatchesCentralDifferences)
{
    Rng rng(22);
    for (const SignalModel& m : model_zoo()) {
        for (int k = 0; k < 200; ++k) {
            const Vec x = test::random_vec(m.dim(), rng, 3.0);
            const Mat J = drift_jacobian(m, x);
            const Mat F = finite_difference_jacobian(m, x, 1e-6);
            const double scale = std::max(1.0, frobenius_norm(J));
            EXPECT_LT(max_abs_diff(J, F), 1e-5 * scale);
        }
    }
}

TEST(Models, JacobianSpecialCases)
{
    const Mat A{{-1.0, 0.5}, {-0.2, -2.0}};
    const SignalModel lin = SignalModel::linear(A, SymMat::identity(2));
    EXPECT_EQ(drift_jacobian(lin, Vec{3.0, -4.0}), A);
    EXPECT_LT(max_abs_diff(drift_jacobian(quad_cubic_general(), Vec{0.0, 0.0}),
                           -1.5 * Mat{{2.0, 0.3}, {0.3, 1.0}}),
              1e-15);
}

TEST(Models, GradientJacobiansAreExactlySymmetric)
{
    Rng rng(23);
    for (const SignalModel& m : model_zoo()) {
        if (!m.is_gradient()) continue;
        for (int k = 0; k < 100; ++k) {
            const Mat J = drift_jacobian(m, test::random_vec(m.dim(), rng, 5.0));
            EXPECT_EQ(J, J.transpose());
        }
    }
}

TEST(Models, RegularityConstantExamples)
{
    for (std::size_t r : {1u, 3u}) {
        const auto c = regularity_constants(
            SignalModel::linear(-0.7 * Mat::identity(r), SymMat::identity(r)));
        EXPECT_NEAR(c.lambda_dA, 1.4, 1e-14);
        EXPECT_NEAR(c.lambda_A, 0.7, 1e-14);
        EXPECT_EQ(c.kappa_dA, 0.0);
    }
    const auto qc = regularity_constants(quad_cubic_identity());
    EXPECT_NEAR(qc.lambda_dA, 0.5, 1e-14);
    EXPECT_NEAR(qc.kappa_dA, 2.0, 1e-14);
    const auto ia = regularity_constants(interacting(3, 1.0, 0.5, 0.0, 0.0));
    EXPECT_NEAR(ia.lambda_dA, 1.0, 1e-14);
    EXPECT_EQ(ia.kappa_dA, 0.0);
}

TEST(Models, InteractingPairFactor)
{
    // r1 = 3: (r1-1) sqrt(2(r1-1)) = 2(r1-1) = 4.
    EXPECT_NEAR(regularity_constants(interacting(3, 1.0, 0.0, 0.0, 1.0)).kappa_dA, 4.0, 1e-14);
    // r1 = 2 uses 2(r1-1) = 2, which exceeds sqrt 2.
    EXPECT_NEAR(regularity_constants(interacting(2, 1.0, 0.0, 0.0, 1.0)).kappa_dA, 2.0, 1e-14);
    // r1 = 5: 4 sqrt 8 dominates 8.
    EXPECT_NEAR(regularity_constants(interacting(5, 1.0, 0.0, 0.0, 1.0)).kappa_dA,
                4.0 * std::sqrt(8.0), 1e-12);
}

TEST(Models, TwoParticleJacobianLipschitzExceedsRootTwo)
{
    // Along x = (d/2, -d/2) the Hessian of the pair term grows like 2 kappa2 |x - y|,
    // so a sqrt(2) kappa2 constant is too small when r1 = 2.
    const SignalModel m = interacting(2, 1.0, 0.0, 0.0, 1.0);
    const Vec x{0.5, -0.5};
    const Vec y{1.0, -1.0};
    const double ratio =
        operator_norm(drift_jacobian(m, x) - drift_jacobian(m, y)) / norm(x - y);
    EXPECT_NEAR(ratio, 2.0, 1e-12);
    EXPECT_GT(ratio, std::sqrt(2.0) * 1.01);
}

TEST(Models, ConstantsErrors)
{
    EXPECT_EQ(error_code([] {
                  (void)regularity_constants(SignalModel::quadratic_cubic(
                      SymMat::diagonal({1.0, -1.0}), Vec{0.0, 0.0}, SymMat::identity(2), 1.0,
                      SymMat::identity(2)));
              }),
              Errc::ModelNotContractive);
    EXPECT_EQ(error_code([] {
                  (void)regularity_constants(
                      SignalModel::linear(Mat{{0.0, 1.0}, {-1.0, 0.0}}, SymMat::identity(2)));
              }),
              Errc::ModelNotContractive);
    EXPECT_EQ(error_code([] { (void)regularity_constants(interacting(3, -1.0, 0.2, 0.0, 0.0)); }),
              Errc::ModelNotContractive);
    EXPECT_EQ(error_code([] {
                  (void)SignalModel::quadratic_cubic(SymMat::identity(2), Vec{0.0, 0.0},
                                                     SymMat::identity(2), 0.0, SymMat::identity(2));
              }),
              Errc::InvalidArgument);
    EXPECT_EQ(error_code([] {
                  (void)SignalModel::linear(-1.0 * Mat::identity(2), SymMat::diagonal({1.0, -1.0}));
              }),
              Errc::NotPSD);
}

TEST(Models, ConjugatedConstants)
{
    const auto base = regularity_constants(quad_cubic_general());
    const auto conj = regularity_constants(conjugated_quad_cubic(2.0));
    EXPECT_DOUBLE_EQ(conj.lambda_dA, base.lambda_dA);
    EXPECT_DOUBLE_EQ(conj.lambda_A, base.lambda_A);
    EXPECT_NEAR(conj.kappa_dA, base.kappa_dA / 2.0, 1e-12);

    const SignalModel skewed = SignalModel::conjugated(
        std::make_shared<const SignalModel>(quad_cubic_general()), Mat{{1.0, 0.5}, {0.0, 1.0}},
        SymMat::identity(2));
    EXPECT_EQ(error_code([&] { (void)regularity_constants(skewed); }), Errc::ModelNotContractive);

    // A linear base collapses to T A T^{-1}.
    const Mat A{{-1.0, 0.3}, {0.0, -2.0}};
    const Mat T{{1.0, 0.5}, {0.0, 1.0}};
    const SignalModel lin = SignalModel::conjugated(
        std::make_shared<const SignalModel>(SignalModel::linear(A, SymMat::identity(2))), T,
        SymMat::identity(2));
    ASSERT_TRUE(std::holds_alternative<LinearDrift>(lin.family()));
    EXPECT_LT(max_abs_diff(std::get<LinearDrift>(lin.family()).A, T * A * inverse(T)), 1e-14);
}

TEST(Models, LipschitzCheckExamples)
{
    Rng rng(24);
    EXPECT_EQ(lipschitz_empirical_check(
                  SignalModel::linear(-1.0 * Mat::identity(3), SymMat::identity(3)), 1000, 1.0, rng),
              0.0);
    EXPECT_LE(lipschitz_empirical_check(quad_cubic_identity(), 10000, 1.0, rng), 2.0 * (1 + 1e-6));
    EXPECT_EQ(error_code([&] { (void)lipschitz_empirical_check(quad_cubic_identity(), 0, 1.0, rng); }),
              Errc::InvalidArgument);
}

TEST(Models, SampledLipschitzRatiosStayBelowConstants)
{
    Rng rng(25);
    for (const SignalModel& m : model_zoo()) {
        const double kappa = regularity_constants(m).kappa_dA;
        const double sampled = lipschitz_empirical_check(m, 10000, 3.0, rng);
        EXPECT_LE(sampled, kappa * (1.0 + 1e-6));
    }
}

TEST(Models, MonotonicityAndJacobianSpectrumMatchConstants)
{
    Rng rng(26);
    for (const SignalModel& m : model_zoo()) {
        const auto c = regularity_constants(m);
        for (int k = 0; k < 10000; ++k) {
            const Vec x = test::random_in_ball(m.dim(), rng, 10.0);
            const Vec y = test::random_in_ball(m.dim(), rng, 10.0);
            const double gap2 = squared_norm(x - y);
            EXPECT_LE(dot(x - y, drift(m, x) - drift(m, y)), -c.lambda_A * gap2 + 1e-8 * gap2);
            EXPECT_LE(sym_spectral_abscissa(drift_jacobian(m, x)), -c.lambda_dA + 1e-9);
        }
    }
}

TEST(Models, ObservationParams)
{
    const ObservationModel scalar = observation_params(Mat{{2.0}}, SymMat{{1.0}});
    EXPECT_DOUBLE_EQ(scalar.rho_S(), 4.0);
    EXPECT_TRUE(scalar.condition_s());
    const ObservationModel id = observation_params(Mat::identity(2), SymMat::identity(2));
    EXPECT_DOUBLE_EQ(id.rho_S(), 1.0);
    EXPECT_TRUE(id.condition_s());
    EXPECT_EQ(id.S(), SymMat::identity(2));
    const ObservationModel diag = observation_params(Mat::diagonal({1.0, 2.0}), SymMat::identity(2));
    EXPECT_FALSE(diag.condition_s());
    EXPECT_DOUBLE_EQ(diag.rho_S(), 4.0);
    EXPECT_EQ(error_code([] { (void)observation_params(Mat{{1.0}}, SymMat{{0.0}}); }), Errc::NotPD);
}

TEST(Models, CanonicalChangeOfBasis)
{
    const SignalModel lin = SignalModel::linear(-1.0 * Mat::identity(2), SymMat::diagonal({1.0, 0.5}));
    const auto same = canonical_change_of_basis(lin, observation_params(Mat::identity(2), SymMat::identity(2)));
    EXPECT_LT(max_abs_diff(same.transform, Mat::identity(2)), 1e-15);

    const auto scaled = canonical_change_of_basis(lin, observation_params(2.0 * Mat::identity(2), SymMat::identity(2)));
    EXPECT_LT(max_abs_diff(std::get<LinearDrift>(scaled.model.family()).A, -1.0 * Mat::identity(2)), 1e-15);
    EXPECT_LT(max_abs_diff(scaled.model.R1(), 4.0 * SymMat::diagonal({1.0, 0.5})), 1e-14);
    EXPECT_DOUBLE_EQ(scaled.obs.rho_S(), 1.0);
    EXPECT_TRUE(scaled.obs.condition_s());

    // Nonlinear drift: the transformed drift is T A(T^{-1} z).
    const SignalModel qc = quad_cubic_general();
    const ObservationModel obs(Mat{{1.0, 0.4}, {0.0, 2.0}}, SymMat{{2.0, 0.3}, {0.3, 1.0}});
    const auto canon = canonical_change_of_basis(qc, obs);
    EXPECT_TRUE(canon.obs.condition_s());
    Rng rng(27);
    for (int k = 0; k < 50; ++k) {
        const Vec z = test::random_vec(2, rng, 2.0);
        const Vec expect = canon.transform * drift(qc, solve(canon.transform, z));
        EXPECT_LT(max_abs_diff(drift(canon.model, z), expect), 1e-12);
    }

    EXPECT_EQ(error_code([&] {
                  (void)canonical_change_of_basis(lin, observation_params(Mat{{1.0, 1.0}}, SymMat{{1.0}}));
              }),
              Errc::NotReducible);
    EXPECT_EQ(error_code([&] {
                  (void)canonical_change_of_basis(
                      lin, observation_params(Mat{{1.0, 1.0}, {1.0, 1.0}}, SymMat::identity(2)));
              }),
              Errc::NotReducible);
}

} // namespace
} // namespace ekbf
