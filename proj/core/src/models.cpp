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

#include "ekbf/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ekbf/error.hpp"

namespace ekbf {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_dim(const SignalModel& model, const Vec& x)
{
    if (x.size() != model.dim()) {
        throw Error(Errc::DimensionMismatch, "state has dimension " + std::to_string(x.size()) +
                                                 ", model expects " +
                                                 std::to_string(model.dim()));
    }
}

// T'T == c^2 I; returns c, or 0 when T is not a scaled orthogonal matrix.
double conformal_scale(const Mat& T)
{
    const SymMat gram(T.transpose() * T);
    const double c2 = trace(gram) / static_cast<double>(gram.dim());
    const Mat diff = gram.mat() - c2 * Mat::identity(gram.dim());
    if (c2 > 0.0 && frobenius_norm(diff) <= 1e-10 * c2) {
        return std::sqrt(c2);
    }
    return 0.0;
}

Vec grad_interacting(const InteractingDrift& d, const Vec& x)
{
    const std::size_t n = x.size();
    Vec g(n);
    for (std::size_t i = 0; i < n; ++i) {
        double gi = d.dU1(x[i]);
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i) {
                continue;
            }
            gi += d.dU2(x[i], x[k])[0] + d.dU2(x[k], x[i])[1];
        }
        g[i] = gi;
    }
    return g;
}

Mat hessian_interacting(const InteractingDrift& d, const Vec& x)
{
    const std::size_t n = x.size();
    Mat h(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double hii = d.d2U1(x[i]);
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i) {
                continue;
            }
            hii += d.d2U2(x[i], x[k])[0] + d.d2U2(x[k], x[i])[2];
        }
        h(i, i) = hii;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double hij = d.d2U2(x[i], x[j])[1] + d.d2U2(x[j], x[i])[1];
            h(i, j) = hij;
            h(j, i) = hij;
        }
    }
    return h;
}

} // namespace

InteractingDrift pairwise_cubic_interaction(double u1, double u2, double kappa1, double kappa2,
                                            double beta)
{
    const double k = kappa2 / (2.0 * std::sqrt(2.0));
    InteractingDrift d;
    d.u1 = u1;
    d.u2 = u2;
    d.kappa1 = kappa1;
    d.kappa2 = kappa2;
    d.beta = beta;
    d.dU1 = [u1, kappa1](double x) { return u1 * x + 0.5 * kappa1 * x * std::abs(x); };
    d.d2U1 = [u1, kappa1](double x) { return u1 + kappa1 * std::abs(x); };
    d.dU2 = [u2, k](double a, double b) {
        const double r = a - b;
        const double c = 0.5 * k * r * std::abs(r);
        return std::array<double, 2>{u2 * a + c, u2 * b - c};
    };
    d.d2U2 = [u2, k](double a, double b) {
        const double c = k * std::abs(a - b);
        return std::array<double, 3>{u2 + c, -c, u2 + c};
    };
    return d;
}

// ---------------------------------------------------------------- SignalModel

SignalModel::SignalModel(std::size_t dim, DriftFamily family, SymMat R1)
    : dim_(dim), family_(std::move(family)), R1_(std::move(R1))
{
    if (dim_ == 0) {
        throw Error(Errc::DimensionMismatch, "signal dimension must be at least 1");
    }
    if (R1_.dim() != dim_) {
        throw Error(Errc::DimensionMismatch, "R1 must be " + std::to_string(dim_) + "x" +
                                                 std::to_string(dim_));
    }
    R1_sqrt_ = sym_sqrt(R1_);
}

SignalModel SignalModel::linear(Mat A, SymMat R1)
{
    if (!A.is_square()) {
        throw Error(Errc::DimensionMismatch, "linear drift matrix must be square");
    }
    const std::size_t n = A.rows();
    return SignalModel(n, LinearDrift{std::move(A)}, std::move(R1));
}

SignalModel SignalModel::quadratic_cubic(SymMat Q1, Vec q, SymMat Q2, double beta, SymMat R1)
{
    const std::size_t n = Q1.dim();
    if (Q2.dim() != n || q.size() != n) {
        throw Error(Errc::DimensionMismatch, "Q1, q, Q2 must share one dimension");
    }
    if (!(beta > 0.0)) {
        throw Error(Errc::InvalidArgument, "beta must be positive");
    }
    return SignalModel(n, QuadraticCubicDrift{std::move(Q1), std::move(q), std::move(Q2), beta},
                       std::move(R1));
}

SignalModel SignalModel::interacting(std::size_t dim, InteractingDrift drift, SymMat R1)
{
    if (!(drift.beta > 0.0)) {
        throw Error(Errc::InvalidArgument, "beta must be positive");
    }
    if (!drift.dU1 || !drift.d2U1 || !drift.dU2 || !drift.d2U2) {
        throw Error(Errc::InvalidArgument, "interacting drift needs all four potential callbacks");
    }
    return SignalModel(dim, std::move(drift), std::move(R1));
}

SignalModel SignalModel::conjugated(std::shared_ptr<const SignalModel> base, Mat T, SymMat R1)
{
    if (!base) {
        throw Error(Errc::InvalidArgument, "conjugated drift needs a base model");
    }
    if (T.rows() != base->dim() || T.cols() != base->dim()) {
        throw Error(Errc::DimensionMismatch, "change of basis must be square of model dimension");
    }
    Mat T_inv = inverse(T);
    if (const auto* lin = std::get_if<LinearDrift>(&base->family())) {
        return linear(T * (lin->A * T_inv), std::move(R1));
    }
    const std::size_t n = base->dim();
    const bool conformal = conformal_scale(T) > 0.0;
    return SignalModel(
        n, ConjugatedDrift{std::move(base), std::move(T), std::move(T_inv), conformal},
        std::move(R1));
}

bool SignalModel::is_gradient() const noexcept
{
    return std::visit(overloaded{
                          [](const LinearDrift& d) { return d.A == d.A.transpose(); },
                          [](const QuadraticCubicDrift&) { return true; },
                          [](const InteractingDrift&) { return true; },
                          [](const ConjugatedDrift& d) {
                              return d.base->is_gradient() && d.conformal;
                          },
                      },
                      family_);
}

// ---------------------------------------------------------------- drift

Vec drift(const SignalModel& model, const Vec& x)
{
    require_dim(model, x);
    return std::visit(overloaded{
                          [&](const LinearDrift& d) { return d.A * x; },
                          [&](const QuadraticCubicDrift& d) {
                              const Vec q2x = d.Q2.mat() * x;
                              const double s = std::sqrt(std::max(dot(q2x, x), 0.0));
                              Vec g = d.q + d.Q1.mat() * x + s * q2x;
                              return -d.beta * g;
                          },
                          [&](const InteractingDrift& d) {
                              return -d.beta * grad_interacting(d, x);
                          },
                          [&](const ConjugatedDrift& d) {
                              return d.T * drift(*d.base, d.T_inv * x);
                          },
                      },
                      model.family());
}

Mat drift_jacobian(const SignalModel& model, const Vec& x)
{
    require_dim(model, x);
    return std::visit(overloaded{
                          [&](const LinearDrift& d) { return d.A; },
                          [&](const QuadraticCubicDrift& d) {
                              Mat h = d.Q1.mat();
                              const Vec q2x = d.Q2.mat() * x;
                              const double s2 = dot(q2x, x);
                              if (s2 >= 1e-14) {
                                  const double s = std::sqrt(s2);
                                  const std::size_t n = x.size();
                                  for (std::size_t i = 0; i < n; ++i) {
                                      for (std::size_t j = i; j < n; ++j) {
                                          const double v =
                                              s * d.Q2(i, j) + q2x[i] * q2x[j] / s;
                                          h(i, j) += v;
                                          if (j != i) {
                                              h(j, i) += v;
                                          }
                                      }
                                  }
                              }
                              return -d.beta * h;
                          },
                          [&](const InteractingDrift& d) {
                              return -d.beta * hessian_interacting(d, x);
                          },
                          [&](const ConjugatedDrift& d) {
                              Mat J = d.T * (drift_jacobian(*d.base, d.T_inv * x) * d.T_inv);
                              if (d.conformal && d.base->is_gradient()) {
                                  return symmetrize(J).mat();
                              }
                              return J;
                          },
                      },
                      model.family());
}

// ---------------------------------------------------------------- constants

RegularityConstants regularity_constants(const SignalModel& model)
{
    return std::visit(
        overloaded{
            [](const LinearDrift& d) {
                const double abscissa = sym_spectral_abscissa(d.A);
                if (!(abscissa < 0.0)) {
                    throw Error(Errc::ModelNotContractive,
                                "lambda_max(A + A') = " + std::to_string(abscissa));
                }
                return RegularityConstants{-abscissa, 0.0, -abscissa / 2.0};
            },
            [](const QuadraticCubicDrift& d) {
                const double q1_min = min_eigenvalue(d.Q1);
                const double q2_min = min_eigenvalue(d.Q2);
                if (!(q1_min > 0.0) || !(q2_min > 0.0)) {
                    throw Error(Errc::ModelNotContractive, "Q1 and Q2 must be positive definite");
                }
                const double lambda = d.beta * q1_min / 2.0;
                const double kappa = d.beta * 2.0 * std::pow(max_eigenvalue(d.Q2), 1.5);
                return RegularityConstants{lambda, kappa, lambda / 2.0};
            },
            [&](const InteractingDrift& d) {
                const double r = static_cast<double>(model.dim());
                const double v = d.u1 + (r - 1.0) * d.u2;
                if (!(v > 0.0)) {
                    throw Error(Errc::ModelNotContractive,
                                "u1 + (r1 - 1) u2 = " + std::to_string(v));
                }
                const double lambda = d.beta * v / 2.0;
                // The (r1-1) sqrt(2(r1-1)) pairwise factor undercounts for r1 = 2;
                // 2(r1-1) holds for every dimension and coincides at r1 = 3.
                const double pair_factor =
                    std::max((r - 1.0) * std::sqrt(2.0 * (r - 1.0)), 2.0 * (r - 1.0));
                const double kappa = d.beta * (d.kappa1 + d.kappa2 * pair_factor);
                return RegularityConstants{lambda, kappa, lambda / 2.0};
            },
            [](const ConjugatedDrift& d) {
                const double c = conformal_scale(d.T);
                if (c == 0.0) {
                    throw Error(Errc::ModelNotContractive,
                                "regularity constants are not available for a non-conformal "
                                "change of basis of a nonlinear drift");
                }
                RegularityConstants base = regularity_constants(*d.base);
                base.kappa_dA /= c;
                return base;
            },
        },
        model.family());
}

double lipschitz_empirical_check(const SignalModel& model, int n_samples, double radius, Rng& rng)
{
    if (n_samples < 1) {
        throw Error(Errc::InvalidArgument, "n_samples must be at least 1");
    }
    const std::size_t n = model.dim();
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif;
    auto unit = [&] {
        Vec v(n);
        double len = 0.0;
        while (len == 0.0) {
            for (double& x : v) {
                x = gauss(rng);
            }
            len = norm(v);
        }
        return (1.0 / len) * v;
    };
    auto in_ball = [&] {
        const double r = radius * std::pow(unif(rng), 1.0 / static_cast<double>(n));
        return r * unit();
    };

    double worst = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        const Vec x = in_ball();
        const Vec y = (s % 2 == 0) ? in_ball() : x + (1e-4 * radius) * unit();
        const double gap = norm(x - y);
        if (gap == 0.0) {
            continue;
        }
        const double diff = operator_norm(drift_jacobian(model, x) - drift_jacobian(model, y));
        worst = std::max(worst, diff / gap);
    }
    return worst;
}

// ---------------------------------------------------------------- observations

ObservationModel::ObservationModel(Mat B, SymMat R2) : B_(std::move(B)), R2_(std::move(R2))
{
    if (R2_.dim() != B_.rows()) {
        throw Error(Errc::DimensionMismatch, "R2 must match the observation dimension");
    }
    const SymMat R2_inv = spd_inverse(R2_);
    R2_sqrt_ = sym_sqrt(R2_);
    gain_ = B_.transpose() * R2_inv.mat();
    S_ = SymMat(gain_ * B_);
    rho_S_ = max_eigenvalue(S_);
    const Mat diff = S_.mat() - rho_S_ * Mat::identity(S_.dim());
    condition_s_ = rho_S_ > 0.0 && frobenius_norm(diff) <= 1e-10 * std::max(1.0, rho_S_);
}

ObservationModel observation_params(const Mat& B, const SymMat& R2) { return {B, R2}; }

CanonicalProblem canonical_change_of_basis(const SignalModel& model, const ObservationModel& obs)
{
    if (obs.obs_dim() != obs.signal_dim() || obs.signal_dim() != model.dim()) {
        throw Error(Errc::NotReducible, "change of basis needs r1 == r2 == model dimension");
    }
    const Mat T = spd_inverse_sqrt(obs.R2()).mat() * obs.B();
    try {
        (void)inverse(T);
    } catch (const Error&) {
        throw Error(Errc::NotReducible, "R2^{-1/2} B is not invertible");
    }
    SymMat R1_new = congruence(T.transpose(), model.R1());
    auto base = std::make_shared<const SignalModel>(model);
    SignalModel transformed = SignalModel::conjugated(std::move(base), T, std::move(R1_new));
    const std::size_t n = model.dim();
    return CanonicalProblem{std::move(transformed),
                            ObservationModel(Mat::identity(n), SymMat::identity(n)), T};
}

} // namespace ekbf
