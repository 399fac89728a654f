#ifndef RPCL_SUPERVISORY_HPP
#define RPCL_SUPERVISORY_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "rpcl/diagnostics.hpp"
#include "rpcl/numerics.hpp"
#include "rpcl/rpl.hpp"

// Acceptance criteria and the incremental construction loop.
//
// The layer grows block by block. For accepted features H (N x L), targets Y
// (N x C) and ridge weights W, the state keeps the residual E = Y - HW, the
// Gram H^T H and a Cholesky factor of (H^T H + lambda I). Appending a
// candidate block H_s touches only the Schur complement
//
//   S = (H_s^T H_s + lambda I) - H_s^T H (H^T H + lambda I)^{-1} H^T H_s
//
// of the augmented ridge Gram: the exact new ridge solution is the old one,
// zero-padded, plus a correction proportional to S^{-1} H_s^T E. The MGSM
// criterion accepts H_s when the correction removes at least a (1-r) share of
// the residual energy and the re-adjustment coupling term stays nonnegative,
// which together contract ||E||_F^2 by a factor of at most r per block.

namespace rpcl::supervisory {

using numerics::DenseMatrix;
using numerics::SpdFactor;
using numerics::index_t;
using rpl::BasisBlock;
using rpl::GaussianSampler;
using rpl::RplModel;
using rpl::XiSchedule;
using diagnostics::TerminationReason;

// Accepted-feature bookkeeping. Value type: apply_block returns a new state.
class GramState {
public:
    // Empty state over the given targets; weights start 0 x C, E = Y.
    GramState(DenseMatrix targets, double lambda);

    index_t sample_count() const { return targets_.rows(); }
    index_t output_count() const { return targets_.cols(); }
    index_t unit_count() const { return features_.cols(); }  // L
    double lambda() const { return lambda_; }

    const DenseMatrix& targets() const { return targets_; }
    const DenseMatrix& accepted_features() const { return features_; }
    const DenseMatrix& gram() const { return gram_; }
    const SpdFactor& factor() const { return factor_; }  // chol(H^T H + lambda I)
    const DenseMatrix& weights() const { return weights_; }
    const DenseMatrix& residual() const { return residual_; }
    double residual_fro() const { return numerics::frobenius_norm(residual_); }

private:
    DenseMatrix targets_;    // Y, N x C
    DenseMatrix features_;   // H, N x L
    DenseMatrix gram_;       // H^T H
    SpdFactor factor_;       // chol(H^T H + lambda I); empty while L = 0
    DenseMatrix weights_;    // W, L x C
    DenseMatrix residual_;   // E = Y - H W
    double lambda_;
    std::size_t blocks_since_refactor_ = 0;

    friend GramState apply_block(const GramState& state, const DenseMatrix& h_s);
};

struct CriterionReport {
    bool accepted = false;
    double lhs_aggregate = 0.0;       // sum over output columns of the criterion LHS
    double threshold = 0.0;           // (1-r) ||E||_F^2
    double coupling_aggregate = 0.0;  // summed re-adjustment coupling terms
    // ||E_{L-s}||_F^2 - ||E_L||_F^2 when accepted (exact residual
    // decomposition: lhs + coupling), 0 otherwise.
    double improvement = 0.0;
    double schur_lambda_min = 0.0;    // smallest eigenvalue of S, for diagnostics
};

enum class Strategy { MGSM, SCSM, RI };

struct ConstructionConfig {
    double r = 0.99;                  // contraction rate, in (0,1)
    double epsilon = 0.01;            // residual tolerance
    index_t s = 50;                   // hidden units per candidate block
    index_t b_max = 10;               // candidate blocks per iteration
    double lambda = 0.01;             // ridge coefficient
    XiSchedule xi_schedule{0.0008, 0.0001, 0.004};
    index_t max_units = 0;            // safety cap; 0 = 20 * s * |schedule|
    Strategy strategy = Strategy::MGSM;
    // Strict variant: require the inequality and R >= 0 per output
    // column instead of the summed (Frobenius) aggregates.
    bool per_column_criterion = false;
    double ri_xi = 1.0;               // fixed sampling scale for the RI baseline

    index_t effective_max_units() const;
    index_t effective_block_size() const;  // SCSM is unit-by-unit
    void validate() const;
};

// Lower-right block of the blockwise inverse of the augmented ridge Gram.
// Falls back to H_s^T H_s + lambda I for an empty state.
DenseMatrix schur_complement(const GramState& state, const DenseMatrix& h_s);

// Evaluates the block acceptance rule: per output column q, with
// v_q = H_s^T e_q,
//
//   2 v_q^T S^{-1} v_q - v_q^T S^{-1} H_s^T H_s S^{-1} v_q >= (1-r) ||e_q||^2
//
// plus a nonnegative coupling term R_q. Aggregation over columns is by
// summation by default (Frobenius form) or strictly per column when
// `per_column` is set. Acceptance requires both the inequality and the
// nonnegative coupling.
CriterionReport evaluate_mgsm(const GramState& state, const DenseMatrix& h_s,
                              double r, bool per_column = false);

// Greedy single-unit rule: <e_q, h>^2 >= ||h||^2 (1 - r - mu) ||e_q||^2 must
// hold for every output column q.
bool evaluate_scsm(const GramState& state, const DenseMatrix& h, double mu, double r);

// Appends the candidate features and re-solves the ridge problem exactly
// through the Schur complement; weights match a from-scratch ridge solve on
// [H, H_s] to 1e-8 relative. The Cholesky factor is extended incrementally
// and rebuilt from scratch every kRefactorInterval accepted blocks to bound
// drift.
inline constexpr std::size_t kRefactorInterval = 20;
GramState apply_block(const GramState& state, const DenseMatrix& h_s);

// Per-candidate instrumentation hook; receives every evaluated candidate's
// report. Read-only: the callback cannot alter the construction.
using CandidateObserver = std::function<void(const CriterionReport&)>;

struct ConstructionResult {
    RplModel model;
    GramState state;
    diagnostics::RunDiagnostics diag;
};

// Algorithm: while ||E||_F > epsilon, draw b_max candidate blocks at the
// current scale xi, evaluate them all, and apply the accepted candidate with
// the largest improvement (ties to the lowest sampling index). If none is
// accepted, advance xi through the schedule; xi resets to xi_min after each
// accepted block. Stops with ResidualMet, XiExhausted or MaxUnits.
//  - SCSM evaluates unit-by-unit (s = 1) with mu_L = (1-r)/(L+1).
//  - RI skips the criterion entirely and grows at the fixed scale ri_xi
//    until max_units.
ConstructionResult construct(const DenseMatrix& z, const DenseMatrix& y,
                             const ConstructionConfig& cfg, GaussianSampler& rng,
                             const CandidateObserver& observer = {});

}  // namespace rpcl::supervisory

#endif  // RPCL_SUPERVISORY_HPP
