#include "rpcl/numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

namespace rpcl::numerics {

namespace {

using EigenRowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<EigenRowMajor>;
using ConstMap = Eigen::Map<const EigenRowMajor>;

ConstMap map_of(const DenseMatrix& m) {
    return ConstMap(m.raw(), static_cast<Eigen::Index>(m.rows()),
                    static_cast<Eigen::Index>(m.cols()));
}

Map map_of(DenseMatrix& m) {
    return Map(m.raw(), static_cast<Eigen::Index>(m.rows()),
               static_cast<Eigen::Index>(m.cols()));
}

[[noreturn]] void throw_shape(const char* op, const DenseMatrix& a, const DenseMatrix& b) {
    std::ostringstream msg;
    msg << op << ": incompatible shapes " << a.rows() << "x" << a.cols() << " and "
        << b.rows() << "x" << b.cols();
    throw DimensionError(msg.str());
}

}  // namespace

DenseMatrix::DenseMatrix(index_t rows, index_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(index_t rows, index_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
        std::ostringstream msg;
        msg << "DenseMatrix: " << data_.size() << " entries for a " << rows_ << "x"
            << cols_ << " matrix";
        throw DimensionError(msg.str());
    }
}

DenseMatrix DenseMatrix::identity(index_t n) {
    DenseMatrix m(n, n);
    for (index_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::from_rows(
    std::initializer_list<std::initializer_list<double>> rows) {
    const index_t r = rows.size();
    const index_t c = r == 0 ? 0 : rows.begin()->size();
    DenseMatrix m(r, c);
    index_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) throw DimensionError("from_rows: ragged row lengths");
        index_t j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a.data() == b.data();
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw_shape("add", a, b);
    DenseMatrix out(a.rows(), a.cols());
    map_of(out) = map_of(a) + map_of(b);
    return out;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw_shape("subtract", a, b);
    DenseMatrix out(a.rows(), a.cols());
    map_of(out) = map_of(a) - map_of(b);
    return out;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw_shape("multiply", a, b);
    DenseMatrix out(a.rows(), b.cols());
    if (!out.empty() && a.cols() > 0) map_of(out) = map_of(a) * map_of(b);
    return out;
}

DenseMatrix scale(const DenseMatrix& a, double factor) {
    DenseMatrix out(a.rows(), a.cols());
    map_of(out) = map_of(a) * factor;
    return out;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix out(a.cols(), a.rows());
    map_of(out) = map_of(a).transpose();
    return out;
}

DenseMatrix transpose_multiply(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows()) throw_shape("transpose_multiply", a, b);
    DenseMatrix out(a.cols(), b.cols());
    if (!out.empty() && a.rows() > 0) map_of(out) = map_of(a).transpose() * map_of(b);
    return out;
}

DenseMatrix gram(const DenseMatrix& a) {
    DenseMatrix g = transpose_multiply(a, a);
    // Mirror the lower triangle so the result is exactly symmetric.
    for (index_t i = 0; i < g.rows(); ++i)
        for (index_t j = i + 1; j < g.cols(); ++j) g(i, j) = g(j, i);
    return g;
}

DenseMatrix hcat(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.empty() && a.rows() == 0) return b;
    if (b.empty() && b.rows() == 0) return a;
    if (a.rows() != b.rows()) throw_shape("hcat", a, b);
    DenseMatrix out(a.rows(), a.cols() + b.cols());
    for (index_t i = 0; i < a.rows(); ++i) {
        for (index_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
        for (index_t j = 0; j < b.cols(); ++j) out(i, a.cols() + j) = b(i, j);
    }
    return out;
}

DenseMatrix vcat(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() == 0) return b;
    if (b.rows() == 0) return a;
    if (a.cols() != b.cols()) throw_shape("vcat", a, b);
    DenseMatrix out(a.rows() + b.rows(), a.cols());
    for (index_t i = 0; i < a.rows(); ++i)
        for (index_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
    for (index_t i = 0; i < b.rows(); ++i)
        for (index_t j = 0; j < b.cols(); ++j) out(a.rows() + i, j) = b(i, j);
    return out;
}

DenseMatrix columns(const DenseMatrix& a, index_t first, index_t count) {
    if (first + count > a.cols()) {
        std::ostringstream msg;
        msg << "columns: slice [" << first << ", " << first + count << ") of "
            << a.cols() << " columns";
        throw DimensionError(msg.str());
    }
    DenseMatrix out(a.rows(), count);
    for (index_t i = 0; i < a.rows(); ++i)
        for (index_t j = 0; j < count; ++j) out(i, j) = a(i, first + j);
    return out;
}

bool all_finite(const DenseMatrix& a) {
    for (double v : a.data())
        if (!std::isfinite(v)) return false;
    return true;
}

void require_finite(const DenseMatrix& a, const char* what) {
    if (!all_finite(a)) {
        throw NumericError(std::string(what) + ": non-finite entries");
    }
}

double frobenius_norm(const DenseMatrix& a) {
    if (a.empty()) return 0.0;
    return map_of(a).norm();
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw_shape("max_abs_diff", a, b);
    if (a.empty()) return 0.0;
    return (map_of(a) - map_of(b)).cwiseAbs().maxCoeff();
}

// --- SPD factorization -------------------------------------------------------

SpdFactor spd_factorize(const DenseMatrix& a) {
    if (a.rows() != a.cols()) throw_shape("spd_factorize", a, a);
    require_finite(a, "spd_factorize input");
    const index_t n = a.rows();

    EigenRowMajor sym(n, n);
    {
        ConstMap am = map_of(a);
        sym = 0.5 * (am + am.transpose());
    }
    Eigen::LLT<EigenRowMajor> llt(sym);
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("spd_factorize: matrix is not numerically positive definite");
    }

    DenseMatrix lower(n, n);
    map_of(lower) = llt.matrixL();
    for (index_t i = 0; i < n; ++i) {
        const double d = lower(i, i);
        if (!(d > 0.0) || !std::isfinite(d)) {
            throw NotPositiveDefinite("spd_factorize: non-positive pivot");
        }
    }
    return SpdFactor(std::move(lower));
}

SpdFactor SpdFactor::from_lower(DenseMatrix lower) {
    if (lower.rows() != lower.cols()) {
        throw DimensionError("SpdFactor::from_lower: factor must be square");
    }
    require_finite(lower, "SpdFactor::from_lower");
    for (index_t i = 0; i < lower.rows(); ++i) {
        if (!(lower(i, i) > 0.0)) {
            throw NotPositiveDefinite("SpdFactor::from_lower: non-positive pivot");
        }
        for (index_t j = i + 1; j < lower.cols(); ++j) lower(i, j) = 0.0;
    }
    return SpdFactor(std::move(lower));
}

DenseMatrix SpdFactor::solve(const DenseMatrix& b) const {
    if (b.rows() != dimension()) throw_shape("SpdFactor::solve", lower_, b);
    DenseMatrix out = b;
    if (out.empty()) return out;
    auto l = map_of(lower_);
    auto x = map_of(out);
    l.triangularView<Eigen::Lower>().solveInPlace(x);
    l.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
    return out;
}

DenseMatrix SpdFactor::solve_lower(const DenseMatrix& b) const {
    if (b.rows() != dimension()) throw_shape("SpdFactor::solve_lower", lower_, b);
    DenseMatrix out = b;
    if (out.empty()) return out;
    auto l = map_of(lower_);
    auto x = map_of(out);
    l.triangularView<Eigen::Lower>().solveInPlace(x);
    return out;
}

DenseMatrix SpdFactor::reconstruct() const {
    DenseMatrix out(dimension(), dimension());
    if (dimension() == 0) return out;
    auto l = map_of(lower_);
    map_of(out) = l * l.transpose();
    return out;
}

DenseMatrix ridge_solve(const DenseMatrix& h, const DenseMatrix& y, double lambda) {
    if (!(lambda > 0.0)) throw NumericError("ridge_solve: lambda must be positive");
    if (h.rows() != y.rows()) throw_shape("ridge_solve", h, y);
    require_finite(h, "ridge_solve H");
    require_finite(y, "ridge_solve Y");
    const index_t l = h.cols();

    DenseMatrix normal = gram(h);
    for (index_t i = 0; i < l; ++i) normal(i, i) += lambda;
    return spd_factorize(normal).solve(transpose_multiply(h, y));
}

// --- eigen extremes ----------------------------------------------------------

namespace {

bool is_diagonal(const DenseMatrix& a) {
    for (index_t i = 0; i < a.rows(); ++i)
        for (index_t j = 0; j < a.cols(); ++j)
            if (i != j && a(i, j) != 0.0) return false;
    return true;
}

// Deterministic xorshift-seeded start vector; eigen_extremes must be a pure
// function of its input.
Eigen::VectorXd start_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    std::uint64_t s = 0x9e3779b97f4a7c15ULL;
    for (Eigen::Index i = 0; i < n; ++i) {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        v[i] = static_cast<double>(s >> 11) / 9007199254740992.0 - 0.5;
    }
    return v;
}

// Largest-magnitude eigenvalue of a symmetric matrix by power iteration.
// For symmetric A, |rayleigh - lambda| <= ||A v - rayleigh v|| / ||v||, so the
// residual test directly certifies the 1e-8 relative contract.
double dominant_eigenvalue(const EigenRowMajor& a) {
    const Eigen::Index n = a.rows();
    Eigen::VectorXd v = start_vector(n).normalized();
    double rayleigh = 0.0;
    const int max_iters = 20000;
    for (int it = 0; it < max_iters; ++it) {
        Eigen::VectorXd av = a * v;
        const double norm = av.norm();
        if (norm == 0.0) return 0.0;
        rayleigh = v.dot(av);
        const double resid = (av - rayleigh * v).norm();
        if (resid <= 1e-10 * std::max(1.0, std::abs(rayleigh))) break;
        v = av / norm;
    }
    return rayleigh;
}

std::pair<double, double> extremes_power(const EigenRowMajor& a) {
    const double mu = dominant_eigenvalue(a);
    // Shift so the opposite end of the spectrum becomes dominant.
    EigenRowMajor shifted = a;
    shifted.diagonal().array() -= mu;
    const double nu = dominant_eigenvalue(shifted);
    const double other = mu + nu;
    return {std::min(mu, other), std::max(mu, other)};
}

}  // namespace

std::pair<double, double> eigen_extremes(const DenseMatrix& a) {
    if (a.rows() != a.cols()) throw_shape("eigen_extremes", a, a);
    if (a.rows() == 0) throw DimensionError("eigen_extremes: empty matrix");
    require_finite(a, "eigen_extremes input");
    const index_t n = a.rows();

    if (is_diagonal(a)) {
        double lo = a(0, 0), hi = a(0, 0);
        for (index_t i = 1; i < n; ++i) {
            lo = std::min(lo, a(i, i));
            hi = std::max(hi, a(i, i));
        }
        return {lo, hi};
    }

    EigenRowMajor sym(n, n);
    {
        ConstMap am = map_of(a);
        sym = 0.5 * (am + am.transpose());
    }
    if (n <= kEigenDirectLimit) {
        Eigen::SelfAdjointEigenSolver<EigenRowMajor> solver(sym, Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success) {
            throw NumericError("eigen_extremes: eigensolver failed to converge");
        }
        const auto& evals = solver.eigenvalues();
        return {evals(0), evals(evals.size() - 1)};
    }
    return extremes_power(sym);
}

double condition_number(const DenseMatrix& a) {
    const auto [lo, hi] = eigen_extremes(a);
    if (lo <= 0.0) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

DenseMatrix cosine_similarity_matrix(const DenseMatrix& b) {
    require_finite(b, "cosine_similarity_matrix input");
    const index_t n = b.rows();
    const index_t l = b.cols();

    std::vector<double> norms(l, 0.0);
    for (index_t j = 0; j < l; ++j) {
        double s = 0.0;
        for (index_t i = 0; i < n; ++i) s += b(i, j) * b(i, j);
        norms[j] = std::sqrt(s);
        if (norms[j] <= 1e-12) {
            std::ostringstream msg;
            msg << "cosine_similarity_matrix: column " << j << " has norm " << norms[j];
            throw DegenerateColumn(msg.str());
        }
    }

    DenseMatrix c(l, l);
    for (index_t i = 0; i < l; ++i) {
        c(i, i) = 1.0;
        for (index_t j = i + 1; j < l; ++j) {
            double dot = 0.0;
            for (index_t k = 0; k < n; ++k) dot += b(k, i) * b(k, j);
            const double v = std::clamp(dot / (norms[i] * norms[j]), -1.0, 1.0);
            c(i, j) = v;
            c(j, i) = v;
        }
    }
    return c;
}

}  // namespace rpcl::numerics
