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

// Small dense real linear algebra. Dimensions are expected to stay in the
// single or low double digits; storage is inline up to 16 entries.

#include <cstddef>
#include <initializer_list>
#include <span>

#include <boost/container/small_vector.hpp>

namespace ekbf {

using Storage = boost::container::small_vector<double, 16>;

class Vec {
public:
    Vec() = default;
    explicit Vec(std::size_t n, double fill = 0.0) : v_(n, fill) {}
    Vec(std::initializer_list<double> init) : v_(init.begin(), init.end()) {}
    explicit Vec(std::span<const double> values) : v_(values.begin(), values.end()) {}

    std::size_t size() const noexcept { return v_.size(); }
    double& operator[](std::size_t i) noexcept { return v_[i]; }
    double operator[](std::size_t i) const noexcept { return v_[i]; }
    double* data() noexcept { return v_.data(); }
    const double* data() const noexcept { return v_.data(); }
    auto begin() noexcept { return v_.begin(); }
    auto end() noexcept { return v_.end(); }
    auto begin() const noexcept { return v_.begin(); }
    auto end() const noexcept { return v_.end(); }
    std::span<const double> values() const noexcept { return {v_.data(), v_.size()}; }

    Vec& operator+=(const Vec& o);
    Vec& operator-=(const Vec& o);
    Vec& operator*=(double s) noexcept;

    friend bool operator==(const Vec& a, const Vec& b) noexcept { return a.v_ == b.v_; }

private:
    Storage v_;
};

Vec operator+(Vec a, const Vec& b);
Vec operator-(Vec a, const Vec& b);
Vec operator-(Vec a);
Vec operator*(double s, Vec a);
Vec operator*(Vec a, double s);

double dot(const Vec& a, const Vec& b);
double squared_norm(const Vec& a) noexcept;
double norm(const Vec& a) noexcept;
bool all_finite(const Vec& a) noexcept;

// Row-major r x c matrix.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill)
    {
    }
    Mat(std::initializer_list<std::initializer_list<double>> rows);

    static Mat identity(std::size_t n);
    static Mat diagonal(const Vec& d);
    static Mat column(const Vec& v);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * cols_ + j]; }
    std::span<const double> values() const noexcept { return {a_.data(), a_.size()}; }

    Mat transpose() const;

    Mat& operator+=(const Mat& o);
    Mat& operator-=(const Mat& o);
    Mat& operator*=(double s) noexcept;

    friend bool operator==(const Mat& a, const Mat& b) noexcept
    {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.a_ == b.a_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Storage a_;
};

Mat operator+(Mat a, const Mat& b);
Mat operator-(Mat a, const Mat& b);
Mat operator*(double s, Mat a);
Mat operator*(const Mat& a, const Mat& b);
Vec operator*(const Mat& a, const Vec& x);

double trace(const Mat& m);
bool all_finite(const Mat& m) noexcept;

// Symmetric matrix. Construction from a general matrix copies the upper
// triangle onto the lower one, so entries(i,j) == entries(j,i) always holds.
class SymMat {
public:
    SymMat() = default;
    explicit SymMat(const Mat& m);
    SymMat(std::initializer_list<std::initializer_list<double>> rows) : SymMat(Mat(rows)) {}

    static SymMat identity(std::size_t n) { return SymMat(Mat::identity(n)); }
    static SymMat zeros(std::size_t n) { return SymMat(Mat(n, n)); }
    static SymMat diagonal(const Vec& d) { return SymMat(Mat::diagonal(d)); }

    std::size_t dim() const noexcept { return m_.rows(); }
    double operator()(std::size_t i, std::size_t j) const noexcept { return m_(i, j); }
    const Mat& mat() const noexcept { return m_; }
    operator const Mat&() const noexcept { return m_; }

    SymMat& operator+=(const SymMat& o);
    SymMat& operator-=(const SymMat& o);
    SymMat& operator*=(double s) noexcept;

    friend bool operator==(const SymMat& a, const SymMat& b) noexcept { return a.m_ == b.m_; }

private:
    Mat m_;
};

SymMat operator+(SymMat a, const SymMat& b);
SymMat operator-(SymMat a, const SymMat& b);
SymMat operator*(double s, SymMat a);

// (M + M') / 2
SymMat symmetrize(const Mat& m);
// M' N M, symmetric whenever N is.
SymMat congruence(const Mat& m, const SymMat& n);

struct SymEigen {
    Vec values;   // ascending
    Mat vectors;  // column k is the unit eigenvector of values[k]
};

// Cyclic Jacobi rotations; stops once the off-diagonal Frobenius norm drops
// below 1e-12 relative to the matrix norm.
SymEigen jacobi_eigen(const SymMat& m);

double max_eigenvalue(const SymMat& m);
double min_eigenvalue(const SymMat& m);

// lambda_max(M + M'), without the factor 1/2.
double sym_spectral_abscissa(const Mat& m);

double frobenius_inner(const Mat& p, const Mat& q);
double frobenius_norm(const Mat& p);

// Largest singular value.
double operator_norm(const Mat& m);

// Eigenvalues in [-1e-10, 0) are rounding noise and are treated as zero.
inline constexpr double kPsdTolerance = 1e-10;

// Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped to 0).
SymMat psd_project(const SymMat& m);
SymMat sym_sqrt(const SymMat& m);
SymMat spd_inverse(const SymMat& m);
SymMat spd_inverse_sqrt(const SymMat& m);
bool is_psd(const SymMat& m);

Mat inverse(const Mat& m);
Vec solve(const Mat& a, const Vec& b);

} // namespace ekbf
