// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

// Small dense linear algebra shared by every module. Everything here is
// plain row-major double storage; problems in this library are desk-scale
// (matrices of a few hundred entries), so clarity beats blocking tricks.

namespace owa {

inline constexpr const char* kLibraryVersion = "0.1.0";

using Vec = std::vector<double>;
using Rng = std::mt19937_64;

struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    const double* row(int i) const { return a.data() + static_cast<size_t>(i) * cols; }
    double* row(int i) { return a.data() + static_cast<size_t>(i) * cols; }

    Vec row_vec(int i) const { return Vec(row(i), row(i) + cols); }
};

inline double dot(const Vec& x, const Vec& y) {
    return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
}

inline double nrm2(const Vec& x) { return std::sqrt(dot(x, x)); }

inline double nrm_inf(const Vec& x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

inline double sum(const Vec& x) { return std::accumulate(x.begin(), x.end(), 0.0); }

inline Vec operator+(const Vec& x, const Vec& y) {
    Vec r(x.size());
    for (size_t i = 0; i < x.size(); ++i) r[i] = x[i] + y[i];
    return r;
}

inline Vec operator-(const Vec& x, const Vec& y) {
    Vec r(x.size());
    for (size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
    return r;
}

inline Vec operator*(double s, const Vec& x) {
    Vec r(x.size());
    for (size_t i = 0; i < x.size(); ++i) r[i] = s * x[i];
    return r;
}

inline void axpy(double s, const Vec& x, Vec& y) {
    for (size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

/// y = A x
inline Vec matvec(const Mat& A, const Vec& x) {
    Vec y(A.rows, 0.0);
    for (int i = 0; i < A.rows; ++i) {
        const double* r = A.row(i);
        double s = 0.0;
        for (int j = 0; j < A.cols; ++j) s += r[j] * x[j];
        y[i] = s;
    }
    return y;
}

/// y = A^T x
inline Vec matTvec(const Mat& A, const Vec& x) {
    Vec y(A.cols, 0.0);
    for (int i = 0; i < A.rows; ++i) {
        const double* r = A.row(i);
        for (int j = 0; j < A.cols; ++j) y[j] += r[j] * x[i];
    }
    return y;
}

inline Mat matmul(const Mat& A, const Mat& B) {
    Mat C(A.rows, B.cols, 0.0);
    for (int i = 0; i < A.rows; ++i)
        for (int k = 0; k < A.cols; ++k) {
            const double aik = A(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < B.cols; ++j) C(i, j) += aik * B(k, j);
        }
    return C;
}

inline Mat transpose(const Mat& A) {
    Mat T(A.cols, A.rows);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) T(j, i) = A(i, j);
    return T;
}

/// Solves A x = b by LU with partial pivoting. Empty optional when A is
/// numerically singular (pivot below tol).
inline std::optional<Vec> solve_lu(Mat A, Vec b, double tol = 1e-12) {
    const int n = A.rows;
    if (n != A.cols || static_cast<int>(b.size()) != n) throw std::invalid_argument("solve_lu: shape");
    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(A(i, k)) > std::abs(A(p, k))) p = i;
        if (std::abs(A(p, k)) < tol) return std::nullopt;
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(A(k, j), A(p, j));
            std::swap(b[k], b[p]);
        }
        for (int i = k + 1; i < n; ++i) {
            const double f = A(i, k) / A(k, k);
            if (f == 0.0) continue;
            A(i, k) = 0.0;
            for (int j = k + 1; j < n; ++j) A(i, j) -= f * A(k, j);
            b[i] -= f * b[k];
        }
    }
    Vec x(n, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= A(i, j) * x[j];
        x[i] = s / A(i, i);
    }
    return x;
}

/// Minimum-norm-ish least squares via ridge-regularized normal equations.
/// Used only as a fallback on degenerate systems.
inline Vec solve_least_squares(const Mat& A, const Vec& b, double ridge = 1e-10) {
    Mat AtA(A.cols, A.cols, 0.0);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) {
            const double aij = A(i, j);
            if (aij == 0.0) continue;
            for (int k = 0; k < A.cols; ++k) AtA(j, k) += aij * A(i, k);
        }
    double scale = 0.0;
    for (int j = 0; j < A.cols; ++j) scale = std::max(scale, AtA(j, j));
    for (int j = 0; j < A.cols; ++j) AtA(j, j) += ridge * std::max(scale, 1.0);
    Vec Atb = matTvec(A, b);
    auto x = solve_lu(std::move(AtA), std::move(Atb), 0.0);
    if (!x) throw std::runtime_error("solve_least_squares: normal equations singular");
    return *x;
}

/// Stable argsort: ascending order of values, ties keep original index order.
inline std::vector<int> argsort_ascending(const Vec& v) {
    std::vector<int> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
    return idx;
}

/// Stable argsort: descending order of values, ties keep original index order.
inline std::vector<int> argsort_descending(const Vec& v) {
    std::vector<int> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] > v[b]; });
    return idx;
}

inline bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline bool all_finite(const Mat& m) {
    for (double x : m.a)
        if (!std::isfinite(x)) return false;
    return true;
}

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double normal(Rng& rng, double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(rng);
}

inline Vec random_vec(Rng& rng, int n, double lo, double hi) {
    Vec v(n);
    for (double& x : v) x = uniform(rng, lo, hi);
    return v;
}

inline Mat random_mat(Rng& rng, int r, int c, double lo, double hi) {
    Mat m(r, c);
    for (double& x : m.a) x = uniform(rng, lo, hi);
    return m;
}

}  // namespace owa
