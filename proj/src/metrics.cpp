#include "rpcl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rpcl::diagnostics {

std::string to_string(TerminationReason reason) {
    switch (reason) {
        case TerminationReason::ResidualMet: return "residual_met";
        case TerminationReason::XiExhausted: return "xi_exhausted";
        case TerminationReason::MaxUnits: return "max_units";
    }
    return "unknown";
}

}  // namespace rpcl::diagnostics

namespace rpcl::metrics {

AccuracyGrid::AccuracyGrid(std::vector<std::size_t> test_sizes)
    : test_sizes_(std::move(test_sizes)) {
    for (std::size_t s : test_sizes_) {
        if (s == 0) throw IncompleteGrid("AccuracyGrid: empty test split");
    }
}

void AccuracyGrid::push_stage(std::vector<double> per_task_accuracy) {
    const std::size_t t = rows_.size() + 1;
    if (per_task_accuracy.size() != t) {
        std::ostringstream msg;
        msg << "AccuracyGrid: stage " << t << " needs " << t << " accuracies, got "
            << per_task_accuracy.size();
        throw IncompleteGrid(msg.str());
    }
    if (t > test_sizes_.size()) throw IncompleteGrid("AccuracyGrid: more stages than tasks");
    for (double a : per_task_accuracy) {
        if (!(a >= 0.0 && a <= 1.0)) throw IncompleteGrid("AccuracyGrid: accuracy outside [0,1]");
    }
    rows_.push_back(std::move(per_task_accuracy));
}

double AccuracyGrid::entry(std::size_t t, std::size_t j) const {
    if (t < 1 || t > rows_.size() || j < 1 || j > t) {
        throw IncompleteGrid("AccuracyGrid: entry outside the lower triangle");
    }
    return rows_[t - 1][j - 1];
}

double AccuracyGrid::cumulative_accuracy(std::size_t i) const {
    if (i < 1 || i > rows_.size()) throw IncompleteGrid("AccuracyGrid: stage out of range");
    double weighted = 0.0;
    std::size_t total = 0;
    for (std::size_t j = 1; j <= i; ++j) {
        weighted += entry(i, j) * static_cast<double>(test_sizes_[j - 1]);
        total += test_sizes_[j - 1];
    }
    return weighted / static_cast<double>(total);
}

double a_last(const AccuracyGrid& grid) {
    if (grid.stages() == 0) throw IncompleteGrid("a_last: empty grid");
    return grid.cumulative_accuracy(grid.stages());
}

double a_avg(const AccuracyGrid& grid) {
    const std::size_t t = grid.stages();
    if (t == 0) throw IncompleteGrid("a_avg: empty grid");
    double sum = 0.0;
    for (std::size_t i = 1; i <= t; ++i) sum += grid.cumulative_accuracy(i);
    return sum / static_cast<double>(t);
}

double f_avg(const AccuracyGrid& grid) {
    const std::size_t t = grid.stages();
    if (t < 2) throw UndefinedMetric("f_avg: needs at least two stages");
    double sum = 0.0;
    for (std::size_t j = 1; j <= t - 1; ++j) {
        double peak = 0.0;
        for (std::size_t stage = j; stage <= t; ++stage) {
            peak = std::max(peak, grid.entry(stage, j));
        }
        sum += peak - grid.entry(t, j);
    }
    return sum / static_cast<double>(t - 1);
}

std::vector<PtTraceRow> trace_pt(const std::vector<diagnostics::StageSnapshot>& snapshots) {
    std::vector<PtTraceRow> rows;
    rows.reserve(snapshots.size());
    for (const auto& s : snapshots) rows.push_back({s.stage, s.pt_fro});
    return rows;
}

std::vector<EigTraceRow> trace_eigs(const std::vector<diagnostics::StageSnapshot>& snapshots) {
    std::vector<EigTraceRow> rows;
    rows.reserve(snapshots.size());
    for (const auto& s : snapshots) {
        rows.push_back({s.stage, s.pt_lambda_min, s.pt_lambda_max, s.pt_condition});
    }
    return rows;
}

CosineSummary basis_cosine(const rpl::RplModel& model, index_t sample_cap) {
    if (sample_cap == 0) sample_cap = 1;
    const index_t l = model.total_units();
    CosineSummary out{DenseMatrix(0, 0), 0.0, 0};
    if (l == 0) return out;

    // Basis vectors are the stacked parameter columns [w_i; b_i].
    const index_t d = model.feature_dim();
    DenseMatrix basis(d + 1, l);
    index_t col = 0;
    for (const auto& block : model.blocks()) {
        for (index_t j = 0; j < block.units(); ++j, ++col) {
            for (index_t i = 0; i < d; ++i) basis(i, col) = block.input_weights()(i, j);
            basis(d, col) = block.biases()[j];
        }
    }

    const index_t kept = std::min(l, sample_cap);
    DenseMatrix sampled(d + 1, kept);
    for (index_t j = 0; j < kept; ++j) {
        const index_t src = j * l / kept;  // uniform stride
        for (index_t i = 0; i <= d; ++i) sampled(i, j) = basis(i, src);
    }

    out.matrix = numerics::cosine_similarity_matrix(sampled);
    out.sampled_columns = kept;
    if (kept > 1) {
        double sum = 0.0;
        for (index_t i = 0; i < kept; ++i)
            for (index_t j = 0; j < kept; ++j)
                if (i != j) sum += std::abs(out.matrix(i, j));
        out.mean_abs_offdiag = sum / static_cast<double>(kept * (kept - 1));
    }
    return out;
}

double feature_gram_condition(const DenseMatrix& h, index_t row_cap) {
    if (row_cap == 0) row_cap = 1;
    const index_t n = h.rows();
    if (n <= row_cap) return numerics::condition_number(numerics::gram(h));

    DenseMatrix sub(row_cap, h.cols());
    for (index_t i = 0; i < row_cap; ++i) {
        const index_t src = i * n / row_cap;
        for (index_t j = 0; j < h.cols(); ++j) sub(i, j) = h(src, j);
    }
    return numerics::condition_number(numerics::gram(sub));
}

// --- CSV emission ------------------------------------------------------------

std::string format_double(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

}  // namespace

void write_construction_log(const std::string& path,
                            const std::vector<diagnostics::ConstructionLogRecord>& log) {
    auto out = open_out(path);
    out << "iteration,xi,candidates_sampled,accepted_index,residual_fro,"
           "lhs_aggregate,threshold,coupling_aggregate,total_units\n";
    for (const auto& r : log) {
        out << r.iteration << ',' << format_double(r.xi) << ',' << r.candidates_sampled
            << ',';
        if (r.accepted) out << r.accepted_index;
        out << ',' << format_double(r.residual_fro) << ',';
        if (r.has_criterion) {
            out << format_double(r.lhs_aggregate) << ',' << format_double(r.threshold)
                << ',' << format_double(r.coupling_aggregate);
        } else {
            out << ",,";
        }
        out << ',' << r.total_units << '\n';
    }
}

void write_stage_snapshots(const std::string& path,
                           const std::vector<diagnostics::StageSnapshot>& snapshots) {
    auto out = open_out(path);
    out << "stage,pt_fro,pt_lambda_min,pt_lambda_max,pt_condition,per_task_accuracies\n";
    for (const auto& s : snapshots) {
        out << s.stage << ',' << format_double(s.pt_fro) << ','
            << format_double(s.pt_lambda_min) << ',' << format_double(s.pt_lambda_max)
            << ',' << format_double(s.pt_condition) << ',';
        for (std::size_t j = 0; j < s.per_task_accuracy.size(); ++j) {
            if (j) out << ';';
            out << format_double(s.per_task_accuracy[j]);
        }
        out << '\n';
    }
}

void write_accuracy_grid(const std::string& path, const AccuracyGrid& grid) {
    auto out = open_out(path);
    out << "stage,task,accuracy,task_test_size\n";
    for (std::size_t t = 1; t <= grid.stages(); ++t) {
        for (std::size_t j = 1; j <= t; ++j) {
            out << t << ',' << j << ',' << format_double(grid.entry(t, j)) << ','
                << grid.test_sizes()[j - 1] << '\n';
        }
    }
}

void write_metrics(const std::string& path, const std::vector<MetricsRow>& rows) {
    auto out = open_out(path);
    out << "seed,strategy,a_last,a_avg,f_avg,final_hidden_size\n";
    for (const auto& r : rows) {
        out << r.seed << ',' << r.strategy << ',' << format_double(r.a_last) << ','
            << format_double(r.a_avg) << ',' << format_double(r.f_avg) << ','
            << r.final_hidden_size << '\n';
    }
}

void write_pt_trace(const std::string& path, const std::vector<PtTraceRow>& rows) {
    auto out = open_out(path);
    out << "stage,pt_fro\n";
    for (const auto& r : rows) out << r.stage << ',' << format_double(r.pt_fro) << '\n';
}

void write_eig_trace(const std::string& path, const std::vector<EigTraceRow>& rows) {
    auto out = open_out(path);
    out << "stage,lambda_min,lambda_max,condition\n";
    for (const auto& r : rows) {
        out << r.stage << ',' << format_double(r.lambda_min) << ','
            << format_double(r.lambda_max) << ',' << format_double(r.condition) << '\n';
    }
}

void write_cosine_summary(const std::string& path, const CosineSummary& summary,
                          diagnostics::TerminationReason termination,
                          std::size_t final_hidden_size) {
    auto out = open_out(path);
    out << "mean_abs_offdiag,sampled_columns,final_hidden_size,termination\n";
    out << format_double(summary.mean_abs_offdiag) << ',' << summary.sampled_columns
        << ',' << final_hidden_size << ',' << diagnostics::to_string(termination) << '\n';
}

}  // namespace rpcl::metrics
