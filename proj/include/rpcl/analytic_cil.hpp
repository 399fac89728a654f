#ifndef RPCL_ANALYTIC_CIL_HPP
#define RPCL_ANALYTIC_CIL_HPP

#include <cstdint>
#include <vector>

#include "rpcl/numerics.hpp"
#include "rpcl/rpl.hpp"

// Exemplar-free incremental classifier on frozen projection features.
//
// The state is the sufficient statistic P_t = lambda I + sum_k H_k^T H_k and
// the ridge weights. Each task contributes
//
//   P_t = P_{t-1} + H_t^T H_t
//   W_t = W_{t-1} + P_t^{-1} H_t^T (Y_t - H_t W_{t-1}),
//
// which is algebraically identical to a joint ridge fit on all features seen
// so far with zero-padded labels; no past samples are ever stored.

namespace rpcl::cil {

using numerics::DenseMatrix;
using numerics::index_t;

using ClassId = std::uint32_t;

// One task's data; class ids must be disjoint from every other task.
struct TaskBatch {
    DenseMatrix features;          // N_t x d backbone features
    std::vector<ClassId> labels;   // length N_t
    std::size_t task_index = 0;    // t, 1-based

    void validate() const;
};

class SufficientStatistic {
public:
    const DenseMatrix& p() const { return p_; }
    const DenseMatrix& weights() const { return weights_; }
    const std::vector<ClassId>& classes_seen() const { return classes_; }
    std::size_t stage() const { return stage_; }
    double lambda() const { return lambda_; }
    index_t unit_count() const { return p_.rows(); }

private:
    DenseMatrix p_;                 // L x L, symmetric, spectrum >= lambda
    DenseMatrix weights_;           // L x |classes_|
    std::vector<ClassId> classes_;  // acquisition order
    std::size_t stage_ = 0;
    double lambda_ = 0.0;

    friend SufficientStatistic init_stat(const DenseMatrix&, const DenseMatrix&, double,
                                         const std::vector<ClassId>&);
    friend SufficientStatistic expand_classes(const SufficientStatistic&,
                                              const std::vector<ClassId>&);
    friend SufficientStatistic rls_update(const SufficientStatistic&, const DenseMatrix&,
                                          const DenseMatrix&);
};

// P = H^T H + lambda I at stage 1. `class_ids` names the columns of `weights`
// in order.
SufficientStatistic init_stat(const DenseMatrix& h_init, const DenseMatrix& weights,
                              double lambda, const std::vector<ClassId>& class_ids);

// Widens the weight matrix with zero columns for the new classes; P is
// untouched. Ids must be new and mutually distinct.
SufficientStatistic expand_classes(const SufficientStatistic& stat,
                                   const std::vector<ClassId>& new_class_ids);

// One recursive ridge step. `y_t` is one-hot over all classes seen so far
// (columns for earlier classes are zero during the current task); old-class
// columns still move through the correction term. A fresh SPD factorization
// of P_t is taken each stage.
SufficientStatistic rls_update(const SufficientStatistic& stat, const DenseMatrix& h_t,
                               const DenseMatrix& y_t);

// One-hot rows of `labels` laid out over `classes_seen` column order.
DenseMatrix one_hot(const std::vector<ClassId>& labels,
                    const std::vector<ClassId>& classes_seen);

// argmax over seen classes of project(Z) * weights; score ties resolve to the
// lowest class id.
std::vector<ClassId> predict(const SufficientStatistic& stat, const rpl::RplModel& model,
                             const DenseMatrix& z);

// Scores-only variant for callers that already hold projected features.
std::vector<ClassId> predict_features(const SufficientStatistic& stat,
                                      const DenseMatrix& h);

}  // namespace rpcl::cil

#endif  // RPCL_ANALYTIC_CIL_HPP
