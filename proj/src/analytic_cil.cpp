#include "rpcl/analytic_cil.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace rpcl::cil {

using numerics::frobenius_norm;
using numerics::gram;
using numerics::require_finite;
using numerics::spd_factorize;
using numerics::transpose_multiply;

void TaskBatch::validate() const {
    if (features.rows() == 0) throw DimensionError("TaskBatch: needs at least one sample");
    if (labels.size() != features.rows()) {
        throw DimensionError("TaskBatch: one label per feature row");
    }
    require_finite(features, "TaskBatch features");
}

SufficientStatistic init_stat(const DenseMatrix& h_init, const DenseMatrix& weights,
                              double lambda, const std::vector<ClassId>& class_ids) {
    if (!(lambda > 0.0)) throw NumericError("init_stat: lambda must be positive");
    if (h_init.cols() != weights.rows()) {
        throw DimensionError("init_stat: H columns must match weight rows");
    }
    if (weights.cols() != class_ids.size()) {
        throw DimensionError("init_stat: one class id per weight column");
    }
    {
        std::unordered_set<ClassId> seen(class_ids.begin(), class_ids.end());
        if (seen.size() != class_ids.size()) {
            throw DuplicateClass("init_stat: repeated class id");
        }
    }
    require_finite(h_init, "init_stat H");
    require_finite(weights, "init_stat weights");

    SufficientStatistic stat;
    stat.p_ = gram(h_init);
    for (index_t i = 0; i < stat.p_.rows(); ++i) stat.p_(i, i) += lambda;
    stat.weights_ = weights;
    stat.classes_ = class_ids;
    stat.stage_ = 1;
    stat.lambda_ = lambda;
    return stat;
}

SufficientStatistic expand_classes(const SufficientStatistic& stat,
                                   const std::vector<ClassId>& new_class_ids) {
    std::unordered_set<ClassId> seen(stat.classes_.begin(), stat.classes_.end());
    for (ClassId id : new_class_ids) {
        if (!seen.insert(id).second) {
            std::ostringstream msg;
            msg << "expand_classes: class id " << id << " already registered";
            throw DuplicateClass(msg.str());
        }
    }

    SufficientStatistic next = stat;
    if (new_class_ids.empty()) return next;

    DenseMatrix widened(stat.weights_.rows(), stat.weights_.cols() + new_class_ids.size());
    for (index_t i = 0; i < stat.weights_.rows(); ++i)
        for (index_t j = 0; j < stat.weights_.cols(); ++j)
            widened(i, j) = stat.weights_(i, j);
    next.weights_ = std::move(widened);
    next.classes_.insert(next.classes_.end(), new_class_ids.begin(), new_class_ids.end());
    return next;
}

SufficientStatistic rls_update(const SufficientStatistic& stat, const DenseMatrix& h_t,
                               const DenseMatrix& y_t) {
    if (h_t.rows() == 0) throw DimensionError("rls_update: empty task batch");
    if (h_t.cols() != stat.unit_count()) {
        throw DimensionError("rls_update: feature width must match P");
    }
    if (y_t.rows() != h_t.rows() || y_t.cols() != stat.weights_.cols()) {
        throw DimensionError("rls_update: labels must be one-hot over all seen classes");
    }
    require_finite(h_t, "rls_update H_t");
    require_finite(y_t, "rls_update Y_t");

    SufficientStatistic next = stat;
    next.p_ = stat.p_ + gram(h_t);
    const DenseMatrix correction =
        transpose_multiply(h_t, y_t - h_t * stat.weights_);
    next.weights_ = stat.weights_ + spd_factorize(next.p_).solve(correction);
    next.stage_ = stat.stage_ + 1;
    return next;
}

DenseMatrix one_hot(const std::vector<ClassId>& labels,
                    const std::vector<ClassId>& classes_seen) {
    DenseMatrix y(labels.size(), classes_seen.size());
    for (index_t i = 0; i < labels.size(); ++i) {
        const auto it = std::find(classes_seen.begin(), classes_seen.end(), labels[i]);
        if (it == classes_seen.end()) {
            std::ostringstream msg;
            msg << "one_hot: label " << labels[i] << " is not a seen class";
            throw DimensionError(msg.str());
        }
        y(i, static_cast<index_t>(it - classes_seen.begin())) = 1.0;
    }
    return y;
}

std::vector<ClassId> predict_features(const SufficientStatistic& stat,
                                      const DenseMatrix& h) {
    if (h.cols() != stat.unit_count()) {
        throw DimensionError("predict: feature width must match the statistic");
    }
    if (stat.classes_seen().empty()) throw DimensionError("predict: no classes seen");

    const DenseMatrix scores = h * stat.weights();
    std::vector<ClassId> out(h.rows());
    for (index_t i = 0; i < h.rows(); ++i) {
        index_t best = 0;
        for (index_t j = 1; j < scores.cols(); ++j) {
            const double s = scores(i, j), b = scores(i, best);
            if (s > b || (s == b && stat.classes_seen()[j] < stat.classes_seen()[best])) {
                best = j;
            }
        }
        out[i] = stat.classes_seen()[best];
    }
    return out;
}

std::vector<ClassId> predict(const SufficientStatistic& stat, const rpl::RplModel& model,
                             const DenseMatrix& z) {
    if (model.total_units() != stat.unit_count()) {
        throw DimensionError("predict: model width must match the statistic");
    }
    return predict_features(stat, rpl::project(z, model));
}

}  // namespace rpcl::cil
