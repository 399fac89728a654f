#ifndef RPCL_METRICS_HPP
#define RPCL_METRICS_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "rpcl/diagnostics.hpp"
#include "rpcl/numerics.hpp"
#include "rpcl/rpl.hpp"

// Evaluation metrics over the incremental run plus the diagnostic tables
// (P_t norm and eigenvalue traces, basis cosine similarity). Tables are
// emitted as comma-separated files with a header row; file names are fixed.

namespace rpcl::metrics {

using numerics::DenseMatrix;
using numerics::index_t;

// a[t][j] = test accuracy on task j after stage t, defined for 1 <= j <= t <= T.
// Stored lower-triangular: entry(t, j) with 1-based indices.
class AccuracyGrid {
public:
    explicit AccuracyGrid(std::vector<std::size_t> test_sizes);

    std::size_t stages() const { return rows_.size(); }
    const std::vector<std::size_t>& test_sizes() const { return test_sizes_; }

    // Appends the accuracies of stage t = stages()+1 (length must be t).
    void push_stage(std::vector<double> per_task_accuracy);

    double entry(std::size_t t, std::size_t j) const;  // 1-based, j <= t

    // Pooled accuracy on the union of test splits 1..i, weighted by test-set
    // sizes.
    double cumulative_accuracy(std::size_t i) const;

private:
    std::vector<std::size_t> test_sizes_;
    std::vector<std::vector<double>> rows_;
};

// A_T: pooled accuracy over all tasks after the last stage.
double a_last(const AccuracyGrid& grid);
// (1/T) sum_i A_i.
double a_avg(const AccuracyGrid& grid);
// Average forgetting: mean over tasks j < T of (running max of a[.][j]) -
// a[T][j]; the running max includes the final stage, so the result is
// nonnegative by construction. Requires T >= 2.
double f_avg(const AccuracyGrid& grid);

struct PtTraceRow {
    std::size_t stage;
    double pt_fro;
};

struct EigTraceRow {
    std::size_t stage;
    double lambda_min;
    double lambda_max;
    double condition;
};

std::vector<PtTraceRow> trace_pt(const std::vector<diagnostics::StageSnapshot>& snapshots);
std::vector<EigTraceRow> trace_eigs(const std::vector<diagnostics::StageSnapshot>& snapshots);

struct CosineSummary {
    DenseMatrix matrix;       // cosine similarities of sampled basis columns
    double mean_abs_offdiag;  // 0 for a single column
    index_t sampled_columns;
};

// Cosine similarity across the model's basis parameter vectors [w_i; b_i].
// When the layer is wider than sample_cap, columns are down-sampled with a
// uniform stride to bound the matrix.
CosineSummary basis_cosine(const rpl::RplModel& model, index_t sample_cap = 512);

// Condition number of H^T H on (at most) row_cap uniformly strided rows of H.
double feature_gram_condition(const DenseMatrix& h, index_t row_cap = 512);

// --- CSV emission ------------------------------------------------------------
// Fixed file names, one header row each, LF line endings, deterministic
// formatting ("%.17g" for reals) so identical runs write identical bytes.

struct MetricsRow {
    std::uint64_t seed;
    std::string strategy;
    double a_last;
    double a_avg;
    double f_avg;  // NaN renders as empty when T < 2
    std::size_t final_hidden_size;
};

std::string format_double(double v);

void write_construction_log(const std::string& path,
                            const std::vector<diagnostics::ConstructionLogRecord>& log);
void write_stage_snapshots(const std::string& path,
                           const std::vector<diagnostics::StageSnapshot>& snapshots);
void write_accuracy_grid(const std::string& path, const AccuracyGrid& grid);
void write_metrics(const std::string& path, const std::vector<MetricsRow>& rows);
void write_pt_trace(const std::string& path, const std::vector<PtTraceRow>& rows);
void write_eig_trace(const std::string& path, const std::vector<EigTraceRow>& rows);
void write_cosine_summary(const std::string& path, const CosineSummary& summary,
                          diagnostics::TerminationReason termination,
                          std::size_t final_hidden_size);

}  // namespace rpcl::metrics

#endif  // RPCL_METRICS_HPP
