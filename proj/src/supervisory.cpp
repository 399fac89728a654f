#include "rpcl/supervisory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace rpcl::supervisory {

using numerics::all_finite;
using numerics::columns;
using numerics::frobenius_norm;
using numerics::gram;
using numerics::hcat;
using numerics::require_finite;
using numerics::spd_factorize;
using numerics::transpose_multiply;
using numerics::vcat;

GramState::GramState(DenseMatrix targets, double lambda)
    : targets_(std::move(targets)),
      features_(targets_.rows(), 0),
      gram_(0, 0),
      weights_(0, targets_.cols()),
      residual_(targets_),
      lambda_(lambda) {
    if (!(lambda_ > 0.0)) throw NumericError("GramState: lambda must be positive");
    require_finite(targets_, "GramState targets");
}

index_t ConstructionConfig::effective_block_size() const {
    return strategy == Strategy::SCSM ? 1 : s;
}

index_t ConstructionConfig::effective_max_units() const {
    if (max_units > 0) return max_units;
    return 20 * effective_block_size() * xi_schedule.values().size();
}

void ConstructionConfig::validate() const {
    if (!(r > 0.0 && r < 1.0)) throw NumericError("ConstructionConfig: r must be in (0,1)");
    if (!(epsilon > 0.0)) throw NumericError("ConstructionConfig: epsilon must be positive");
    if (s == 0) throw NumericError("ConstructionConfig: s must be >= 1");
    if (b_max == 0) throw NumericError("ConstructionConfig: b_max must be >= 1");
    if (!(lambda > 0.0)) throw NumericError("ConstructionConfig: lambda must be positive");
    if (!(ri_xi > 0.0)) throw NumericError("ConstructionConfig: ri_xi must be positive");
    if (effective_max_units() < effective_block_size()) {
        throw NumericError("ConstructionConfig: max_units must admit at least one block");
    }
}

namespace {

void check_candidate(const GramState& state, const DenseMatrix& h_s) {
    if (h_s.rows() != state.sample_count()) {
        std::ostringstream msg;
        msg << "candidate block has " << h_s.rows() << " rows, state has "
            << state.sample_count() << " samples";
        throw DimensionError(msg.str());
    }
    if (h_s.cols() == 0) throw DimensionError("candidate block has no columns");
    require_finite(h_s, "candidate block");
}

// Everything both criteria and apply_block need about one candidate.
struct BlockProducts {
    DenseMatrix cross;      // H^T H_s, L x s
    DenseMatrix cand_gram;  // H_s^T H_s
    DenseMatrix schur;      // S, symmetric s x s
};

BlockProducts block_products(const GramState& state, const DenseMatrix& h_s) {
    BlockProducts p;
    p.cross = transpose_multiply(state.accepted_features(), h_s);
    p.cand_gram = gram(h_s);

    DenseMatrix s_mat = p.cand_gram;
    for (index_t i = 0; i < s_mat.rows(); ++i) s_mat(i, i) += state.lambda();
    if (state.unit_count() > 0) {
        // S = (H_s^T H_s + lambda I) - X^T X with X = L^{-1} H^T H_s,
        // L the Cholesky factor of (H^T H + lambda I).
        const DenseMatrix x = state.factor().solve_lower(p.cross);
        s_mat = s_mat - gram(x);
    }
    if (!all_finite(s_mat)) throw NumericError("schur_complement: non-finite intermediate");
    p.schur = std::move(s_mat);
    return p;
}

struct BlockEvaluation {
    std::vector<double> lhs;        // per output column
    std::vector<double> coupling;   // per output column
    double lhs_sum = 0.0;
    double coupling_sum = 0.0;
    double schur_lambda_min = 0.0;
};

// Shared residual-decomposition arithmetic: per output column q with
// v_q = H_s^T e_q and w_q = S^{-1} v_q,
//   lhs_q     = 2 v_q.w_q - w_q.(H_s^T H_s) w_q
//   R_q       = -2 e_q.u_q + 2 z_q.u_q - u_q.u_q,
// where z = H_s w and u = H (H^T H + lambda I)^{-1} H^T H_s w. Their sum is
// the exact drop in ||e_q||^2 produced by the ridge-exact block update.
BlockEvaluation evaluate_block(const GramState& state, const DenseMatrix& h_s,
                               const BlockProducts& products) {
    const index_t c = state.output_count();
    const DenseMatrix& e = state.residual();

    const SpdFactor s_factor = spd_factorize(products.schur);
    const DenseMatrix v = transpose_multiply(h_s, e);   // s x C
    const DenseMatrix w = s_factor.solve(v);            // S^{-1} v
    const DenseMatrix gw = products.cand_gram * w;      // (H_s^T H_s) w
    const DenseMatrix z = h_s * w;                      // N x C

    DenseMatrix u(state.sample_count(), c);
    if (state.unit_count() > 0) {
        const DenseMatrix k = state.factor().solve(products.cross * w);  // L x C
        u = state.accepted_features() * k;
    }

    BlockEvaluation eval;
    eval.lhs.resize(c);
    eval.coupling.resize(c);
    for (index_t q = 0; q < c; ++q) {
        double vw = 0.0, wgw = 0.0;
        for (index_t i = 0; i < v.rows(); ++i) {
            vw += v(i, q) * w(i, q);
            wgw += w(i, q) * gw(i, q);
        }
        double eu = 0.0, zu = 0.0, uu = 0.0;
        for (index_t i = 0; i < u.rows(); ++i) {
            eu += e(i, q) * u(i, q);
            zu += z(i, q) * u(i, q);
            uu += u(i, q) * u(i, q);
        }
        eval.lhs[q] = 2.0 * vw - wgw;
        eval.coupling[q] = -2.0 * eu + 2.0 * zu - uu;
        eval.lhs_sum += eval.lhs[q];
        eval.coupling_sum += eval.coupling[q];
    }
    eval.schur_lambda_min = numerics::eigen_extremes(products.schur).first;
    return eval;
}

}  // namespace

DenseMatrix schur_complement(const GramState& state, const DenseMatrix& h_s) {
    check_candidate(state, h_s);
    return block_products(state, h_s).schur;
}

CriterionReport evaluate_mgsm(const GramState& state, const DenseMatrix& h_s,
                              double r, bool per_column) {
    check_candidate(state, h_s);
    if (!(r > 0.0 && r < 1.0)) throw NumericError("evaluate_mgsm: r must be in (0,1)");

    const BlockProducts products = block_products(state, h_s);
    const BlockEvaluation eval = evaluate_block(state, h_s, products);
    const DenseMatrix& e = state.residual();

    CriterionReport report;
    report.lhs_aggregate = eval.lhs_sum;
    report.coupling_aggregate = eval.coupling_sum;
    report.schur_lambda_min = eval.schur_lambda_min;

    const double resid_energy = frobenius_norm(e) * frobenius_norm(e);
    report.threshold = (1.0 - r) * resid_energy;

    if (per_column) {
        bool ok = true;
        for (index_t q = 0; q < state.output_count() && ok; ++q) {
            double col_energy = 0.0;
            for (index_t i = 0; i < e.rows(); ++i) col_energy += e(i, q) * e(i, q);
            ok = eval.lhs[q] >= (1.0 - r) * col_energy && eval.coupling[q] >= 0.0;
        }
        report.accepted = ok;
    } else {
        report.accepted =
            report.lhs_aggregate >= report.threshold && report.coupling_aggregate >= 0.0;
    }
    if (report.accepted) {
        report.improvement = report.lhs_aggregate + report.coupling_aggregate;
    }
    return report;
}

bool evaluate_scsm(const GramState& state, const DenseMatrix& h, double mu, double r) {
    check_candidate(state, h);
    if (h.cols() != 1) throw DimensionError("evaluate_scsm: single candidate column");
    if (!(r > 0.0 && r < 1.0)) throw NumericError("evaluate_scsm: r must be in (0,1)");
    if (mu < 0.0 || mu > 1.0 - r) {
        throw NumericError("evaluate_scsm: mu must satisfy 0 <= mu <= 1-r");
    }

    const DenseMatrix& e = state.residual();
    double h_energy = 0.0;
    for (index_t i = 0; i < h.rows(); ++i) h_energy += h(i, 0) * h(i, 0);

    for (index_t q = 0; q < state.output_count(); ++q) {
        double eh = 0.0, e_energy = 0.0;
        for (index_t i = 0; i < e.rows(); ++i) {
            eh += e(i, q) * h(i, 0);
            e_energy += e(i, q) * e(i, q);
        }
        if (eh * eh < h_energy * (1.0 - r - mu) * e_energy) return false;
    }
    return true;
}

GramState apply_block(const GramState& state, const DenseMatrix& h_s) {
    check_candidate(state, h_s);
    const index_t l_old = state.unit_count();
    const index_t s = h_s.cols();

    const BlockProducts products = block_products(state, h_s);
    const SpdFactor s_factor = spd_factorize(products.schur);

    GramState next = state;

    // Exact ridge update through the Schur complement:
    //   W_L = [W ; 0] + [-(H^T H + lambda I)^{-1} H^T H_s ; I] S^{-1} H_s^T E
    const DenseMatrix v = transpose_multiply(h_s, state.residual());
    const DenseMatrix bottom = s_factor.solve(v);  // s x C
    if (l_old > 0) {
        const DenseMatrix k = state.factor().solve(products.cross * bottom);
        next.weights_ = vcat(state.weights() - k, bottom);
        next.residual_ =
            state.residual() - h_s * bottom + state.accepted_features() * k;
    } else {
        next.weights_ = bottom;
        next.residual_ = state.residual() - h_s * bottom;
    }

    next.features_ = hcat(state.accepted_features(), h_s);

    DenseMatrix new_gram(l_old + s, l_old + s);
    for (index_t i = 0; i < l_old; ++i)
        for (index_t j = 0; j < l_old; ++j) new_gram(i, j) = state.gram()(i, j);
    for (index_t i = 0; i < l_old; ++i)
        for (index_t j = 0; j < s; ++j) {
            new_gram(i, l_old + j) = products.cross(i, j);
            new_gram(l_old + j, i) = products.cross(i, j);
        }
    for (index_t i = 0; i < s; ++i)
        for (index_t j = 0; j < s; ++j)
            new_gram(l_old + i, l_old + j) = products.cand_gram(i, j);
    next.gram_ = std::move(new_gram);

    next.blocks_since_refactor_ = state.blocks_since_refactor_ + 1;
    if (l_old == 0 || next.blocks_since_refactor_ >= kRefactorInterval) {
        // Full rebuild: refresh the factor from the accumulated Gram and
        // re-solve, bounding drift of the cached inverse.
        DenseMatrix ridge_gram = next.gram_;
        for (index_t i = 0; i < ridge_gram.rows(); ++i) ridge_gram(i, i) += state.lambda();
        next.factor_ = spd_factorize(ridge_gram);
        next.weights_ =
            next.factor_.solve(transpose_multiply(next.features_, next.targets_));
        next.residual_ = next.targets_ - next.features_ * next.weights_;
        next.blocks_since_refactor_ = 0;
    } else {
        // Incremental Cholesky append: with L11 the old factor and
        // X = L11^{-1} H^T H_s, the extended factor is [[L11, 0], [X^T, L22]]
        // where L22 L22^T = S.
        const DenseMatrix x = state.factor().solve_lower(products.cross);
        DenseMatrix lower(l_old + s, l_old + s);
        for (index_t i = 0; i < l_old; ++i)
            for (index_t j = 0; j <= i; ++j) lower(i, j) = state.factor().lower()(i, j);
        for (index_t i = 0; i < s; ++i)
            for (index_t j = 0; j < l_old; ++j) lower(l_old + i, j) = x(j, i);
        for (index_t i = 0; i < s; ++i)
            for (index_t j = 0; j <= i; ++j)
                lower(l_old + i, l_old + j) = s_factor.lower()(i, j);
        next.factor_ = SpdFactor::from_lower(std::move(lower));
    }

    if (!all_finite(next.weights_) || !all_finite(next.residual_)) {
        throw NumericError("apply_block: non-finite update");
    }
    return next;
}

namespace {

struct Candidate {
    BasisBlock block;
    DenseMatrix features;
    bool accepted = false;
    CriterionReport report;
    bool evaluated = false;
};

}  // namespace

ConstructionResult construct(const DenseMatrix& z, const DenseMatrix& y,
                             const ConstructionConfig& cfg, GaussianSampler& rng,
                             const CandidateObserver& observer) {
    cfg.validate();
    if (z.rows() == 0) throw DimensionError("construct: no samples");
    if (z.rows() != y.rows()) throw DimensionError("construct: Z and Y row mismatch");
    require_finite(z, "construct Z");
    require_finite(y, "construct Y");

    const index_t d = z.cols();
    const index_t block_size = cfg.effective_block_size();
    const index_t max_units = cfg.effective_max_units();
    const auto& xi_values = cfg.xi_schedule.values();

    ConstructionResult result{RplModel(d), GramState(y, cfg.lambda), {}};
    result.diag.initial_residual_fro = result.state.residual_fro();

    index_t xi_index = 0;
    std::size_t iteration = 0;
    auto termination = TerminationReason::ResidualMet;

    while (true) {
        if (result.state.residual_fro() <= cfg.epsilon) {
            termination = TerminationReason::ResidualMet;
            break;
        }
        if (result.model.total_units() + block_size > max_units) {
            termination = TerminationReason::MaxUnits;
            break;
        }

        diagnostics::ConstructionLogRecord record;
        record.iteration = iteration;

        if (cfg.strategy == Strategy::RI) {
            // Unguided baseline: accept every draw at the fixed scale.
            BasisBlock block = rpl::sample_block(rng, d, block_size, cfg.ri_xi);
            DenseMatrix h_s = rpl::activate(z, block);
            result.state = apply_block(result.state, h_s);
            result.model.append(std::move(block));

            record.xi = cfg.ri_xi;
            record.candidates_sampled = 1;
            record.accepted = true;
            record.accepted_index = 0;
        } else {
            const double xi = xi_values[xi_index];
            record.xi = xi;
            record.candidates_sampled = cfg.b_max;
            record.has_criterion = true;

            std::vector<Candidate> candidates;
            candidates.reserve(cfg.b_max);
            for (index_t j = 0; j < cfg.b_max; ++j) {
                BasisBlock block = rpl::sample_block(rng, d, block_size, xi);
                DenseMatrix features = rpl::activate(z, block);
                candidates.push_back({std::move(block), std::move(features), false, {}, false});
            }

            const double mu =
                (1.0 - cfg.r) / static_cast<double>(result.model.total_units() + 1);
            for (auto& cand : candidates) {
                try {
                    cand.report = evaluate_mgsm(result.state, cand.features, cfg.r,
                                                cfg.per_column_criterion);
                    if (cfg.strategy == Strategy::SCSM) {
                        cand.report.accepted =
                            evaluate_scsm(result.state, cand.features, mu, cfg.r);
                        cand.report.improvement = cand.report.accepted
                                                      ? cand.report.lhs_aggregate +
                                                            cand.report.coupling_aggregate
                                                      : 0.0;
                    }
                    cand.accepted = cand.report.accepted;
                    cand.evaluated = true;
                } catch (const NotPositiveDefinite&) {
                    // Pathologically collinear draw; treat as rejected.
                    cand.accepted = false;
                }
                if (observer && cand.evaluated) observer(cand.report);
            }

            // Largest improvement wins; ties go to the earliest draw.
            std::size_t best = candidates.size();
            for (std::size_t j = 0; j < candidates.size(); ++j) {
                if (!candidates[j].accepted) continue;
                if (best == candidates.size() ||
                    candidates[j].report.improvement > candidates[best].report.improvement) {
                    best = j;
                }
            }

            if (best < candidates.size()) {
                result.state = apply_block(result.state, candidates[best].features);
                result.model.append(std::move(candidates[best].block));
                record.accepted = true;
                record.accepted_index = best;
                record.lhs_aggregate = candidates[best].report.lhs_aggregate;
                record.threshold = candidates[best].report.threshold;
                record.coupling_aggregate = candidates[best].report.coupling_aggregate;
                xi_index = 0;
            } else {
                // Log how close the nearest miss came.
                std::size_t closest = candidates.size();
                for (std::size_t j = 0; j < candidates.size(); ++j) {
                    if (!candidates[j].evaluated) continue;
                    if (closest == candidates.size() ||
                        candidates[j].report.lhs_aggregate >
                            candidates[closest].report.lhs_aggregate) {
                        closest = j;
                    }
                }
                if (closest < candidates.size()) {
                    record.lhs_aggregate = candidates[closest].report.lhs_aggregate;
                    record.threshold = candidates[closest].report.threshold;
                    record.coupling_aggregate = candidates[closest].report.coupling_aggregate;
                }
                ++xi_index;
            }
        }

        record.residual_fro = result.state.residual_fro();
        record.total_units = result.model.total_units();
        result.diag.construction_log.push_back(record);
        ++iteration;

        if (cfg.strategy != Strategy::RI && !record.accepted && xi_index >= xi_values.size()) {
            termination = TerminationReason::XiExhausted;
            break;
        }
    }

    result.diag.final_hidden_size = result.model.total_units();
    result.diag.termination = termination;
    return result;
}

}  // namespace rpcl::supervisory
