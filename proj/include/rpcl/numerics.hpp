#ifndef RPCL_NUMERICS_HPP
#define RPCL_NUMERICS_HPP

#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

#include "rpcl/errors.hpp"

// Dense linear-algebra kernel. Everything downstream (projection layer,
// supervisory criteria, recursive classifier, diagnostics) goes through the
// types and operations here; no other module touches raw matrix math.
//
// All arithmetic is IEEE-754 64-bit. Values are immutable after construction
// for every caller that only holds a const reference, and all free functions
// are pure; sharing across threads is safe.

namespace rpcl::numerics {

using index_t = std::size_t;

// Row-major dense real matrix. 0x0 and Nx0/0xN shapes are valid and show up
// routinely (empty projection layers, zero-column residual slices).
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(index_t rows, index_t cols);  // zero-filled
    DenseMatrix(index_t rows, index_t cols, std::vector<double> entries);

    static DenseMatrix identity(index_t n);
    // Literal construction for tests and small fixtures; every row must have
    // the same length.
    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    index_t rows() const { return rows_; }
    index_t cols() const { return cols_; }
    index_t size() const { return rows_ * cols_; }
    bool empty() const { return size() == 0; }

    double operator()(index_t i, index_t j) const { return data_[i * cols_ + j]; }
    double& operator()(index_t i, index_t j) { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }
    double* raw() { return data_.data(); }
    const double* raw() const { return data_.data(); }

private:
    index_t rows_ = 0;
    index_t cols_ = 0;
    std::vector<double> data_;  // row-major, rows_*cols_ entries
};

bool operator==(const DenseMatrix& a, const DenseMatrix& b);

// Basic algebra. Shape mismatches throw DimensionError.
DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix scale(const DenseMatrix& a, double factor);
DenseMatrix transpose(const DenseMatrix& a);

// AᵀB without forming Aᵀ.
DenseMatrix transpose_multiply(const DenseMatrix& a, const DenseMatrix& b);
// AᵀA, symmetrized exactly by mirroring the lower triangle.
DenseMatrix gram(const DenseMatrix& a);

// Column-block concatenation/extraction.
DenseMatrix hcat(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix columns(const DenseMatrix& a, index_t first, index_t count);
DenseMatrix vcat(const DenseMatrix& a, const DenseMatrix& b);

bool all_finite(const DenseMatrix& a);
// Throws NumericError if any entry of `a` is NaN/Inf; `what` names the
// offending operand in the message.
void require_finite(const DenseMatrix& a, const char* what);

double frobenius_norm(const DenseMatrix& a);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
// Reconstructs the (symmetrized) input to 1e-10 relative; every diagonal
// entry is strictly positive.
class SpdFactor {
public:
    SpdFactor() = default;

    index_t dimension() const { return lower_.rows(); }
    const DenseMatrix& lower() const { return lower_; }

    // Solves (L Lᵀ) X = B.
    DenseMatrix solve(const DenseMatrix& b) const;
    // Forward substitution only: solves L X = B. Used for incremental factor
    // extension, where the Schur block completes the factorization.
    DenseMatrix solve_lower(const DenseMatrix& b) const;
    DenseMatrix reconstruct() const;  // L·Lᵀ

    // Assembles a factor from an externally built lower triangle (incremental
    // block append). Validates the diagonal.
    static SpdFactor from_lower(DenseMatrix lower);

private:
    explicit SpdFactor(DenseMatrix lower) : lower_(std::move(lower)) {}
    friend SpdFactor spd_factorize(const DenseMatrix& a);

    DenseMatrix lower_;
};

// Factorizes (A + Aᵀ)/2; recursive updates accumulate asymmetry, so symmetry
// is enforced here rather than assumed. Throws NotPositiveDefinite when the
// input is not numerically SPD.
SpdFactor spd_factorize(const DenseMatrix& a);

// argmin_W ‖HW − Y‖_F² + λ‖W‖_F², computed through the SPD solve of
// (HᵀH + λI) W = HᵀY.
DenseMatrix ridge_solve(const DenseMatrix& h, const DenseMatrix& y, double lambda);

// Smallest and largest eigenvalue of a symmetric matrix, 1e-8 relative.
// Full tridiagonalization-based solve up to kEigenDirectLimit; deterministic
// power iteration (with a spectral shift for the opposite end) above, since
// diagnostics matrices can reach the projection-layer dimension.
inline constexpr index_t kEigenDirectLimit = 512;
std::pair<double, double> eigen_extremes(const DenseMatrix& a);

// λ_max / λ_min via eigen_extremes; +inf when λ_min is numerically <= 0.
double condition_number(const DenseMatrix& a);

// c_ij = ⟨b_i, b_j⟩ / (‖b_i‖‖b_j‖) over the columns of B; diagonal exactly 1,
// off-diagonals clamped into [-1, 1]. Throws DegenerateColumn when a column
// norm is <= 1e-12.
DenseMatrix cosine_similarity_matrix(const DenseMatrix& b);

}  // namespace rpcl::numerics

#endif  // RPCL_NUMERICS_HPP
