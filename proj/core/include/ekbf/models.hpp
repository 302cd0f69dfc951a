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

// Signal drift families and observation models.
//
// A signal is dX = A(X) dt + R1^{1/2} dW on R^r1. Three drift families are
// built in:
//
//   linear           A(x) = A x
//   quadratic-cubic  A(x) = -beta grad V(x),
//                    V(x) = <Q1 x, x>/2 + <q, x> + <Q2 x, x>^{3/2} / 3
//   interacting      A(x) = -beta grad V(x),
//                    V(x) = sum_i U1(x_i) + sum_{i != j} U2(x_i, x_j)
//
// plus the conjugation z = T x used to bring a problem into canonical
// form, where T = R2^{-1/2} B.

#include <array>
#include <functional>
#include <memory>
#include <variant>

#include "ekbf/linalg.hpp"
#include "ekbf/rng.hpp"

namespace ekbf {

struct LinearDrift {
    Mat A;
};

struct QuadraticCubicDrift {
    SymMat Q1;
    Vec q;
    SymMat Q2;
    double beta = 1.0;
};

// Scalar potentials for the interacting family. The constants are the
// caller's certificate: U1'' >= u1, Hess U2 >= u2 I, and kappa1 / kappa2 are
// Lipschitz constants of U1'' and Hess U2 (operator norm).
struct InteractingDrift {
    double u1 = 0.0;
    double u2 = 0.0;
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    double beta = 1.0;
    std::function<double(double)> dU1;
    std::function<double(double)> d2U1;
    // (d1 U2, d2 U2) at (a, b)
    std::function<std::array<double, 2>(double, double)> dU2;
    // (d11 U2, d12 U2, d22 U2) at (a, b)
    std::function<std::array<double, 3>(double, double)> d2U2;
};

// U1(x) = u1 x^2/2 + kappa1 |x|^3/6,
// U2(a,b) = u2 (a^2+b^2)/2 + k |a-b|^3/6 with k = kappa2 / (2 sqrt 2),
// which meets the certificate exactly.
InteractingDrift pairwise_cubic_interaction(double u1, double u2, double kappa1, double kappa2,
                                            double beta);

class SignalModel;

struct ConjugatedDrift {
    std::shared_ptr<const SignalModel> base;
    Mat T;
    Mat T_inv;
    bool conformal = false;  // T'T == c^2 Id
};

using DriftFamily = std::variant<LinearDrift, QuadraticCubicDrift, InteractingDrift, ConjugatedDrift>;

class SignalModel {
public:
    static SignalModel linear(Mat A, SymMat R1);
    static SignalModel quadratic_cubic(SymMat Q1, Vec q, SymMat Q2, double beta, SymMat R1);
    static SignalModel interacting(std::size_t dim, InteractingDrift drift, SymMat R1);
    static SignalModel conjugated(std::shared_ptr<const SignalModel> base, Mat T, SymMat R1);

    std::size_t dim() const noexcept { return dim_; }
    const DriftFamily& family() const noexcept { return family_; }
    const SymMat& R1() const noexcept { return R1_; }
    const SymMat& R1_sqrt() const noexcept { return R1_sqrt_; }
    // true for the gradient-flow families, whose Jacobian is symmetric.
    bool is_gradient() const noexcept;

private:
    SignalModel(std::size_t dim, DriftFamily family, SymMat R1);

    std::size_t dim_ = 0;
    DriftFamily family_;
    SymMat R1_;
    SymMat R1_sqrt_;
};

struct RegularityConstants {
    double lambda_dA = 0.0;  // -sup_x lambda_max(dA + dA') lower bound
    double kappa_dA = 0.0;   // Lipschitz constant of the Jacobian
    double lambda_A = 0.0;   // monotonicity constant of the drift
};

Vec drift(const SignalModel& model, const Vec& x);

// For the quadratic-cubic family the cubic Hessian terms are dropped once
// <Q2 x, x> < 1e-14; they vanish continuously at the origin.
Mat drift_jacobian(const SignalModel& model, const Vec& x);

RegularityConstants regularity_constants(const SignalModel& model);

// Largest sampled ||dA(x) - dA(y)||_2 / ||x - y|| over pairs in a ball.
// Half of the pairs are far apart, half are close (probing the derivative).
double lipschitz_empirical_check(const SignalModel& model, int n_samples, double radius, Rng& rng);

class ObservationModel {
public:
    ObservationModel(Mat B, SymMat R2);

    const Mat& B() const noexcept { return B_; }
    const SymMat& R2() const noexcept { return R2_; }
    const SymMat& R2_sqrt() const noexcept { return R2_sqrt_; }
    const SymMat& S() const noexcept { return S_; }
    // B' R2^{-1}
    const Mat& gain() const noexcept { return gain_; }
    double rho_S() const noexcept { return rho_S_; }
    // S == rho(S) Id within 1e-10 max(1, rho(S)) in Frobenius norm.
    bool condition_s() const noexcept { return condition_s_; }
    std::size_t signal_dim() const noexcept { return B_.cols(); }
    std::size_t obs_dim() const noexcept { return B_.rows(); }

private:
    Mat B_;
    SymMat R2_;
    SymMat R2_sqrt_;
    Mat gain_;
    SymMat S_;
    double rho_S_ = 0.0;
    bool condition_s_ = false;
};

ObservationModel observation_params(const Mat& B, const SymMat& R2);

struct CanonicalProblem {
    SignalModel model;
    ObservationModel obs;
    Mat transform;  // T = R2^{-1/2} B, new state z = T x
};

// z = R2^{-1/2} B x, y' = R2^{-1/2} y. Requires r1 == r2 and T invertible.
CanonicalProblem canonical_change_of_basis(const SignalModel& model, const ObservationModel& obs);

} // namespace ekbf
