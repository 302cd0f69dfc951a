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

#include "ekbf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ekbf/error.hpp"

namespace ekbf {

namespace {

[[noreturn, gnu::noinline, gnu::cold]] void size_mismatch(std::size_t a, std::size_t b,
                                                         const char* what)
{
    throw Error(Errc::DimensionMismatch,
                std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
}

[[noreturn, gnu::noinline, gnu::cold]] void shape_mismatch(const Mat& a, const Mat& b,
                                                          const char* what)
{
    throw Error(Errc::DimensionMismatch,
                std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                    std::to_string(b.cols()));
}

inline void require_same_size(std::size_t a, std::size_t b, const char* what)
{
    if (a != b) [[unlikely]] {
        size_mismatch(a, b, what);
    }
}

inline void require_same_shape(const Mat& a, const Mat& b, const char* what)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) [[unlikely]] {
        shape_mismatch(a, b, what);
    }
}

void require_finite(const Mat& m, const char* what)
{
    if (!all_finite(m)) {
        throw Error(Errc::InvalidMatrix, std::string(what) + ": non-finite entry");
    }
}

Mat reassemble(const SymEigen& e, const Vec& values)
{
    const std::size_t n = values.size();
    Mat out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                s += e.vectors(i, k) * values[k] * e.vectors(j, k);
            }
            out(i, j) = s;
        }
    }
    return out;
}

double max_abs(const Vec& v)
{
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

} // namespace

// ---------------------------------------------------------------- Vec

Vec& Vec::operator+=(const Vec& o)
{
    require_same_size(size(), o.size(), "Vec +=");
    for (std::size_t i = 0; i < size(); ++i) {
        v_[i] += o.v_[i];
    }
    return *this;
}

Vec& Vec::operator-=(const Vec& o)
{
    require_same_size(size(), o.size(), "Vec -=");
    for (std::size_t i = 0; i < size(); ++i) {
        v_[i] -= o.v_[i];
    }
    return *this;
}

Vec& Vec::operator*=(double s) noexcept
{
    for (double& x : v_) {
        x *= s;
    }
    return *this;
}

Vec operator+(Vec a, const Vec& b) { return a += b; }
Vec operator-(Vec a, const Vec& b) { return a -= b; }
Vec operator-(Vec a) { return a *= -1.0; }
Vec operator*(double s, Vec a) { return a *= s; }
Vec operator*(Vec a, double s) { return a *= s; }

double dot(const Vec& a, const Vec& b)
{
    require_same_size(a.size(), b.size(), "dot");
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double squared_norm(const Vec& a) noexcept
{
    return std::inner_product(a.begin(), a.end(), a.begin(), 0.0);
}

double norm(const Vec& a) noexcept { return std::sqrt(squared_norm(a)); }

bool all_finite(const Vec& a) noexcept
{
    return std::all_of(a.begin(), a.end(), [](double x) { return std::isfinite(x); });
}

// ---------------------------------------------------------------- Mat

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size())
{
    a_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        require_same_size(r.size(), cols_, "Mat row length");
        a_.insert(a_.end(), r.begin(), r.end());
    }
}

Mat Mat::identity(std::size_t n)
{
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Mat Mat::diagonal(const Vec& d)
{
    Mat m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        m(i, i) = d[i];
    }
    return m;
}

Mat Mat::column(const Vec& v)
{
    Mat m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) {
        m(i, 0) = v[i];
    }
    return m;
}

Mat Mat::transpose() const
{
    Mat t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            t(j, i) = (*this)(i, j);
        }
    }
    return t;
}

Mat& Mat::operator+=(const Mat& o)
{
    require_same_shape(*this, o, "Mat +=");
    for (std::size_t i = 0; i < a_.size(); ++i) {
        a_[i] += o.a_[i];
    }
    return *this;
}

Mat& Mat::operator-=(const Mat& o)
{
    require_same_shape(*this, o, "Mat -=");
    for (std::size_t i = 0; i < a_.size(); ++i) {
        a_[i] -= o.a_[i];
    }
    return *this;
}

Mat& Mat::operator*=(double s) noexcept
{
    for (double& x : a_) {
        x *= s;
    }
    return *this;
}

Mat operator+(Mat a, const Mat& b) { return a += b; }
Mat operator-(Mat a, const Mat& b) { return a -= b; }
Mat operator*(double s, Mat a) { return a *= s; }

Mat operator*(const Mat& a, const Mat& b)
{
    require_same_size(a.cols(), b.rows(), "Mat * Mat");
    Mat c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                c(i, j) += aik * b(k, j);
            }
        }
    }
    return c;
}

Vec operator*(const Mat& a, const Vec& x)
{
    require_same_size(a.cols(), x.size(), "Mat * Vec");
    Vec y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) {
            s += a(i, j) * x[j];
        }
        y[i] = s;
    }
    return y;
}

double trace(const Mat& m)
{
    if (!m.is_square()) {
        throw Error(Errc::DimensionMismatch, "trace of a non-square matrix");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        s += m(i, i);
    }
    return s;
}

bool all_finite(const Mat& m) noexcept
{
    const auto v = m.values();
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// ---------------------------------------------------------------- SymMat

SymMat::SymMat(const Mat& m) : m_(m)
{
    if (!m.is_square()) {
        throw Error(Errc::DimensionMismatch, "SymMat from a non-square matrix");
    }
    for (std::size_t i = 0; i < m_.rows(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            m_(i, j) = m_(j, i);
        }
    }
}

SymMat& SymMat::operator+=(const SymMat& o)
{
    m_ += o.m_;
    return *this;
}

SymMat& SymMat::operator-=(const SymMat& o)
{
    m_ -= o.m_;
    return *this;
}

SymMat& SymMat::operator*=(double s) noexcept
{
    m_ *= s;
    return *this;
}

SymMat operator+(SymMat a, const SymMat& b) { return a += b; }
SymMat operator-(SymMat a, const SymMat& b) { return a -= b; }
SymMat operator*(double s, SymMat a) { return a *= s; }

SymMat symmetrize(const Mat& m)
{
    if (!m.is_square()) {
        throw Error(Errc::DimensionMismatch, "symmetrize of a non-square matrix");
    }
    Mat s(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = i; j < m.cols(); ++j) {
            s(i, j) = 0.5 * (m(i, j) + m(j, i));
        }
    }
    return SymMat(s);
}

SymMat congruence(const Mat& m, const SymMat& n)
{
    return SymMat(m.transpose() * (n.mat() * m));
}

// ---------------------------------------------------------------- spectra

SymEigen jacobi_eigen(const SymMat& sym)
{
    require_finite(sym, "jacobi_eigen");
    const std::size_t n = sym.dim();
    Mat a = sym.mat();
    Mat v = Mat::identity(n);

    const double scale = std::max(frobenius_norm(a), 1e-300);
    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                off += 2.0 * a(p, q) * a(p, q);
            }
        }
        if (std::sqrt(off) <= 1e-12 * scale) {
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) {
                    continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
    SymEigen out{Vec(n), Mat(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) {
            out.vectors(i, k) = v(i, order[k]);
        }
    }
    return out;
}

double max_eigenvalue(const SymMat& m)
{
    const SymEigen e = jacobi_eigen(m);
    return e.values[e.values.size() - 1];
}

double min_eigenvalue(const SymMat& m) { return jacobi_eigen(m).values[0]; }

double sym_spectral_abscissa(const Mat& m)
{
    if (!m.is_square()) {
        throw Error(Errc::DimensionMismatch, "sym_spectral_abscissa needs a square matrix");
    }
    return max_eigenvalue(SymMat(m + m.transpose()));
}

double frobenius_inner(const Mat& p, const Mat& q)
{
    require_same_shape(p, q, "frobenius_inner");
    const auto a = p.values();
    const auto b = q.values();
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double frobenius_norm(const Mat& p) { return std::sqrt(frobenius_inner(p, p)); }

double operator_norm(const Mat& m)
{
    require_finite(m, "operator_norm");
    return std::sqrt(std::max(0.0, max_eigenvalue(SymMat(m.transpose() * m))));
}

bool is_psd(const SymMat& m)
{
    return min_eigenvalue(m) >= -kPsdTolerance;
}

namespace {

// LDL' without pivoting; true iff every pivot is strictly positive.
bool is_positive_definite_fast(const SymMat& m)
{
    const std::size_t n = m.dim();
    Mat l(n, n);
    Vec d(n);
    for (std::size_t j = 0; j < n; ++j) {
        double dj = m(j, j);
        for (std::size_t k = 0; k < j; ++k) {
            dj -= l(j, k) * l(j, k) * d[k];
        }
        if (!(dj > 0.0)) {
            return false;
        }
        d[j] = dj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) {
                s -= l(i, k) * l(j, k) * d[k];
            }
            l(i, j) = s / dj;
        }
    }
    return true;
}

} // namespace

SymMat psd_project(const SymMat& m)
{
    require_finite(m, "psd_project");
    if (is_positive_definite_fast(m)) {
        return m;
    }
    const SymEigen e = jacobi_eigen(m);
    Vec clipped = e.values;
    for (double& x : clipped) {
        x = std::max(x, 0.0);
    }
    return SymMat(reassemble(e, clipped));
}

SymMat sym_sqrt(const SymMat& m)
{
    const SymEigen e = jacobi_eigen(m);
    const double tol = kPsdTolerance * std::max(1.0, max_abs(e.values));
    Vec roots(e.values.size());
    for (std::size_t k = 0; k < roots.size(); ++k) {
        if (e.values[k] < -tol) {
            throw Error(Errc::NotPSD, "sym_sqrt: eigenvalue " + std::to_string(e.values[k]));
        }
        roots[k] = std::sqrt(std::max(e.values[k], 0.0));
    }
    return SymMat(reassemble(e, roots));
}

namespace {

SymMat spd_power(const SymMat& m, double power, const char* what)
{
    const SymEigen e = jacobi_eigen(m);
    const double floor = 1e-14 * std::max(1.0, max_abs(e.values));
    Vec p(e.values.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (!(e.values[k] > floor)) {
            throw Error(Errc::NotPD, std::string(what) + ": eigenvalue " +
                                         std::to_string(e.values[k]));
        }
        p[k] = std::pow(e.values[k], power);
    }
    return SymMat(reassemble(e, p));
}

} // namespace

SymMat spd_inverse(const SymMat& m) { return spd_power(m, -1.0, "spd_inverse"); }

SymMat spd_inverse_sqrt(const SymMat& m) { return spd_power(m, -0.5, "spd_inverse_sqrt"); }

Mat inverse(const Mat& m)
{
    if (!m.is_square()) {
        throw Error(Errc::DimensionMismatch, "inverse of a non-square matrix");
    }
    require_finite(m, "inverse");
    const std::size_t n = m.rows();
    Mat a = m;
    Mat inv = Mat::identity(n);
    double scale = 0.0;
    for (double x : m.values()) {
        scale = std::max(scale, std::abs(x));
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) {
                pivot = r;
            }
        }
        if (std::abs(a(pivot, col)) <= 1e-13 * std::max(scale, 1e-300)) {
            throw Error(Errc::SingularMatrix, "inverse: matrix is singular");
        }
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a(col, j), a(pivot, j));
                std::swap(inv(col, j), inv(pivot, j));
            }
        }
        const double d = a(col, col);
        for (std::size_t j = 0; j < n; ++j) {
            a(col, j) /= d;
            inv(col, j) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) {
                continue;
            }
            const double f = a(r, col);
            if (f == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                a(r, j) -= f * a(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

Vec solve(const Mat& a, const Vec& b) { return inverse(a) * b; }

} // namespace ekbf
