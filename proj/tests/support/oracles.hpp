#ifndef RPCL_TESTS_ORACLES_HPP
#define RPCL_TESTS_ORACLES_HPP

// Test-only reference implementations. These stay deliberately naive and
// independent of the library's solve paths: Gauss-Jordan elimination with
// partial pivoting, explicit normal equations, plain loops. They exist so the
// production code has something dumber than itself to be checked against.

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "rpcl/numerics.hpp"

namespace rpcl::test {

using numerics::DenseMatrix;
using numerics::index_t;

// Dense inverse by Gauss-Jordan with partial pivoting.
inline DenseMatrix gauss_jordan_inverse(const DenseMatrix& a) {
    const index_t n = a.rows();
    if (a.cols() != n) throw std::invalid_argument("gauss_jordan_inverse: not square");
    std::vector<std::vector<double>> aug(n, std::vector<double>(2 * n, 0.0));
    for (index_t i = 0; i < n; ++i) {
        for (index_t j = 0; j < n; ++j) aug[i][j] = a(i, j);
        aug[i][n + i] = 1.0;
    }
    for (index_t col = 0; col < n; ++col) {
        index_t pivot = col;
        for (index_t r = col + 1; r < n; ++r)
            if (std::abs(aug[r][col]) > std::abs(aug[pivot][col])) pivot = r;
        if (aug[pivot][col] == 0.0)
            throw std::runtime_error("gauss_jordan_inverse: singular matrix");
        std::swap(aug[col], aug[pivot]);
        const double d = aug[col][col];
        for (index_t j = 0; j < 2 * n; ++j) aug[col][j] /= d;
        for (index_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = aug[r][col];
            if (f == 0.0) continue;
            for (index_t j = 0; j < 2 * n; ++j) aug[r][j] -= f * aug[col][j];
        }
    }
    DenseMatrix inv(n, n);
    for (index_t i = 0; i < n; ++i)
        for (index_t j = 0; j < n; ++j) inv(i, j) = aug[i][n + j];
    return inv;
}

// Naive O(n^3) matrix product, no Eigen anywhere near it.
inline DenseMatrix naive_multiply(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix out(a.rows(), b.cols());
    for (index_t i = 0; i < a.rows(); ++i)
        for (index_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (index_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

inline DenseMatrix naive_transpose(const DenseMatrix& a) {
    DenseMatrix out(a.cols(), a.rows());
    for (index_t i = 0; i < a.rows(); ++i)
        for (index_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

// Reference ridge regression: invert the full normal matrix and multiply.
inline DenseMatrix ridge_oracle(const DenseMatrix& h, const DenseMatrix& y,
                                double lambda) {
    const DenseMatrix ht = naive_transpose(h);
    DenseMatrix normal = naive_multiply(ht, h);
    for (index_t i = 0; i < normal.rows(); ++i) normal(i, i) += lambda;
    return naive_multiply(gauss_jordan_inverse(normal), naive_multiply(ht, y));
}

inline DenseMatrix random_matrix(std::mt19937_64& rng, index_t rows, index_t cols,
                                 double scale = 1.0) {
    std::normal_distribution<double> dist(0.0, scale);
    DenseMatrix m(rows, cols);
    for (index_t i = 0; i < rows; ++i)
        for (index_t j = 0; j < cols; ++j) m(i, j) = dist(rng);
    return m;
}

// Random SPD matrix with spectrum in [low, high].
inline DenseMatrix random_spd(std::mt19937_64& rng, index_t n, double low, double high) {
    DenseMatrix b = random_matrix(rng, n, n);
    DenseMatrix a = naive_multiply(naive_transpose(b), b);
    double max_diag = 0.0;
    for (index_t i = 0; i < n; ++i) max_diag = std::max(max_diag, a(i, i));
    const double f = max_diag > 0.0 ? (high - low) / max_diag : 0.0;
    for (index_t i = 0; i < n; ++i) {
        for (index_t j = 0; j < n; ++j) a(i, j) *= f;
        a(i, i) += low;
    }
    return a;
}

inline double rel_fro_err(const DenseMatrix& got, const DenseMatrix& want) {
    const double denom = 1.0 + numerics::frobenius_norm(want);
    return numerics::frobenius_norm(got - want) / denom;
}

}  // namespace rpcl::test

#endif  // RPCL_TESTS_ORACLES_HPP
