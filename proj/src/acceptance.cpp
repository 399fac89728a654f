#include "rpcl/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "rpcl/analytic_cil.hpp"
#include "rpcl/data_io.hpp"
#include "rpcl/metrics.hpp"
#include "rpcl/runner.hpp"
#include "rpcl/supervisory.hpp"

namespace rpcl::acceptance {

namespace {

namespace fs = std::filesystem;

using cil::ClassId;
using diagnostics::TerminationReason;
using numerics::DenseMatrix;
using numerics::frobenius_norm;
using numerics::index_t;
using supervisory::ConstructionConfig;
using supervisory::GramState;
using supervisory::Strategy;

constexpr double kInf = std::numeric_limits<double>::infinity();

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

double mixed_rel_err(const DenseMatrix& got, const DenseMatrix& want) {
    return frobenius_norm(got - want) / (1.0 + frobenius_norm(want));
}

DenseMatrix random_matrix(std::mt19937_64& rng, index_t rows, index_t cols,
                          double scale = 1.0) {
    std::normal_distribution<double> dist(0.0, scale);
    DenseMatrix m(rows, cols);
    for (index_t i = 0; i < rows; ++i)
        for (index_t j = 0; j < cols; ++j) m(i, j) = dist(rng);
    return m;
}

double median(std::vector<double> values) {
    if (values.empty()) return kInf;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Scaled exploration set for the desk-scale synthetic features (the paper-
// default schedule targets backbone-feature norms and stays in the sigmoid's
// linear regime here).
rpl::XiSchedule desk_schedule() { return rpl::XiSchedule(0.25, 0.25, 4.0); }

ConstructionConfig desk_config(Strategy strategy, double epsilon, index_t max_units) {
    ConstructionConfig cfg;
    cfg.r = 0.99;
    cfg.epsilon = epsilon;
    cfg.s = 10;
    cfg.b_max = 5;
    cfg.lambda = 0.01;
    cfg.xi_schedule = desk_schedule();
    cfg.max_units = max_units;
    cfg.strategy = strategy;
    return cfg;
}

io::SyntheticSpec blob_spec(index_t classes, index_t train_per_class, index_t d,
                            double spread, std::uint64_t seed) {
    io::SyntheticSpec spec;
    spec.classes = classes;
    spec.train_per_class = train_per_class;
    spec.test_per_class = 15;
    spec.feature_dim = d;
    spec.cluster_spread = spread;
    spec.seed = seed;
    return spec;
}

DenseMatrix one_hot_sorted(const std::vector<ClassId>& labels) {
    std::vector<ClassId> classes(labels.begin(), labels.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    return cil::one_hot(labels, classes);
}

// --- shared run caches --------------------------------------------------------

struct InstrumentedRun {
    supervisory::ConstructionResult result;
    std::vector<double> schur_mins;
};

InstrumentedRun run_instrumented(const DenseMatrix& z, const DenseMatrix& y,
                                 const ConstructionConfig& cfg, std::uint64_t seed) {
    rpl::GaussianSampler rng(seed);
    std::vector<double> mins;
    auto result = supervisory::construct(
        z, y, cfg, rng,
        [&](const supervisory::CriterionReport& report) {
            mins.push_back(report.schur_lambda_min);
        });
    return {std::move(result), std::move(mins)};
}

struct CompactnessSeedRun {
    io::SyntheticData data;
    InstrumentedRun mgsm;
};

struct Context {
    Options opts;
    std::optional<std::vector<InstrumentedRun>> contraction_runs;
    double contraction_seconds = 0.0;
    std::optional<std::vector<CompactnessSeedRun>> compactness_runs;
    double compactness_seconds = 0.0;
};

// Criterion-3 instances: blobs with d=16, N=300, C=6; 20 seeded constructions.
// Small blocks keep the acceptance sequence deep (several blocks per run)
// so the contraction property is exercised well past the first block.
const std::vector<InstrumentedRun>& contraction_runs(Context& ctx) {
    if (!ctx.contraction_runs) {
        Timer timer;
        std::vector<InstrumentedRun> runs;
        for (std::uint64_t k = 0; k < 20; ++k) {
            const auto data = io::generate_synthetic(blob_spec(6, 50, 16, 0.5, 300 + k));
            const DenseMatrix y = one_hot_sorted(data.train.labels);
            auto cfg = desk_config(Strategy::MGSM, 1.0, 600);
            cfg.s = 2;
            cfg.xi_schedule = rpl::XiSchedule(1.0, 0.5, 6.0);
            runs.push_back(run_instrumented(data.train.features, y, cfg, k));
        }
        ctx.contraction_runs = std::move(runs);
        ctx.contraction_seconds = timer.seconds();
    }
    return *ctx.contraction_runs;
}

// Criterion-5/6 task: redundancy = d/2 blobs (C=4, N=200, d=16). The MGSM
// compactness runs are shared; the conditioning check adds its own matched
// runs on the same data.
const std::vector<CompactnessSeedRun>& compactness_runs(Context& ctx) {
    if (!ctx.compactness_runs) {
        Timer timer;
        std::vector<CompactnessSeedRun> runs;
        for (std::uint64_t k = 0; k < 10; ++k) {
            auto spec = blob_spec(4, 50, 16, 0.5, 400 + k);
            spec.redundancy = 8;  // d/2
            auto data = io::generate_synthetic(spec);
            const DenseMatrix y = one_hot_sorted(data.train.labels);
            auto cfg = desk_config(Strategy::MGSM, 5.0, 600);
            cfg.b_max = 10;
            auto mgsm = run_instrumented(data.train.features, y, cfg, k);
            runs.push_back({std::move(data), std::move(mgsm)});
        }
        ctx.compactness_runs = std::move(runs);
        ctx.compactness_seconds = timer.seconds();
    }
    return *ctx.compactness_runs;
}

// Full library-level pipeline over a synthetic CIL protocol (mirrors cmd_run
// without the file layer).
struct PipelineOutcome {
    supervisory::ConstructionResult construction;
    cil::SufficientStatistic stat;
    metrics::AccuracyGrid grid;
    std::vector<diagnostics::StageSnapshot> snapshots;
    io::TaskSplit tasks;
};

std::vector<ClassId> sorted_ids(const std::vector<ClassId>& labels) {
    std::vector<ClassId> ids(labels.begin(), labels.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

diagnostics::StageSnapshot snapshot_of(const cil::SufficientStatistic& stat,
                                       std::vector<double> per_task) {
    diagnostics::StageSnapshot snap;
    snap.stage = stat.stage();
    snap.per_task_accuracy = std::move(per_task);
    if (stat.unit_count() > 0) {
        snap.pt_fro = frobenius_norm(stat.p());
        const auto [lo, hi] = numerics::eigen_extremes(stat.p());
        snap.pt_lambda_min = lo;
        snap.pt_lambda_max = hi;
        snap.pt_condition = lo > 0.0 ? hi / lo : kInf;
    }
    return snap;
}

PipelineOutcome run_pipeline(const io::SyntheticSpec& spec, index_t m, index_t n,
                             const ConstructionConfig& cfg, std::uint64_t seed) {
    const auto data = io::generate_synthetic(spec);
    auto tasks = io::split_tasks(data.train, data.test, m, n, seed);

    const auto& first = tasks.train.front();
    const auto classes1 = sorted_ids(first.labels);
    rpl::GaussianSampler rng(seed);
    auto construction = supervisory::construct(
        first.features, cil::one_hot(first.labels, classes1), cfg, rng);

    auto stat = cil::init_stat(construction.state.accepted_features(),
                               construction.state.weights(), cfg.lambda, classes1);

    std::vector<std::size_t> test_sizes;
    for (const auto& batch : tasks.test) test_sizes.push_back(batch.features.rows());
    metrics::AccuracyGrid grid(test_sizes);
    std::vector<diagnostics::StageSnapshot> snapshots;

    auto evaluate = [&](std::size_t upto) {
        std::vector<double> per_task;
        for (std::size_t j = 0; j < upto; ++j) {
            const auto predicted =
                cil::predict(stat, construction.model, tasks.test[j].features);
            per_task.push_back(cli::accuracy(predicted, tasks.test[j].labels));
        }
        grid.push_stage(per_task);
        snapshots.push_back(snapshot_of(stat, per_task));
    };
    evaluate(1);

    for (std::size_t t = 2; t <= tasks.train.size(); ++t) {
        const auto& batch = tasks.train[t - 1];
        stat = cil::expand_classes(stat, sorted_ids(batch.labels));
        const DenseMatrix h_t = rpl::project(batch.features, construction.model);
        stat = cil::rls_update(stat, h_t, cil::one_hot(batch.labels, stat.classes_seen()));
        evaluate(t);
    }

    return {std::move(construction), std::move(stat), std::move(grid),
            std::move(snapshots), std::move(tasks)};
}

// --- criterion 1 ---------------------------------------------------------------

CheckResult check_joint_ridge_equivalence(Context& ctx) {
    Timer timer;
    const double limit = 1e-8 * ctx.opts.tolerance_scale;
    std::mt19937_64 rng(1001);
    const double lambdas[] = {0.01, 0.1, 1.0};

    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t stages = 2 + rep % 4;                   // T <= 5
        const index_t l = 1 + rng() % 40;                         // L <= 40
        const double lambda = lambdas[rep % 3];

        // Disjoint class ids, at most 6 in total.
        std::vector<std::vector<ClassId>> task_classes(stages);
        ClassId next_id = 0;
        for (std::size_t t = 0; t < stages; ++t) {
            const index_t count = (t == 0 || next_id + 2 + (stages - t - 1) <= 6)
                                      ? 1 + rng() % 2
                                      : 1;
            for (index_t c = 0; c < count && next_id < 6; ++c)
                task_classes[t].push_back(next_id++);
            if (task_classes[t].empty()) task_classes[t].push_back(next_id++);
        }

        struct Task {
            DenseMatrix h;
            std::vector<ClassId> labels;
        };
        std::vector<Task> tasks(stages);
        for (std::size_t t = 0; t < stages; ++t) {
            const index_t n_t = 20 + rng() % 81;  // N_t <= 100... well, <= 100 rows
            tasks[t].h = random_matrix(rng, n_t, l);
            std::uniform_int_distribution<std::size_t> pick(0, task_classes[t].size() - 1);
            for (index_t i = 0; i < n_t; ++i)
                tasks[t].labels.push_back(task_classes[t][pick(rng)]);
        }

        // Incremental route.
        auto stat = cil::init_stat(
            tasks[0].h,
            numerics::ridge_solve(tasks[0].h, cil::one_hot(tasks[0].labels, task_classes[0]),
                                  lambda),
            lambda, task_classes[0]);
        for (std::size_t t = 1; t < stages; ++t) {
            stat = cil::expand_classes(stat, task_classes[t]);
            stat = cil::rls_update(stat, tasks[t].h,
                                   cil::one_hot(tasks[t].labels, stat.classes_seen()));
        }

        // Stacked joint ridge with zero-padded labels.
        DenseMatrix h_all(0, 0), y_all(0, 0);
        for (const auto& task : tasks) {
            h_all = numerics::vcat(h_all, task.h);
            y_all = numerics::vcat(y_all, cil::one_hot(task.labels, stat.classes_seen()));
        }
        const DenseMatrix joint = numerics::ridge_solve(h_all, y_all, lambda);

        DenseMatrix got = stat.weights();
        if (ctx.opts.perturb_weight_update != 0.0) {
            got(0, 0) += ctx.opts.perturb_weight_update;
        }
        worst = std::max(worst, mixed_rel_err(got, joint));
    }

    CheckResult res;
    res.name = "joint_ridge_equivalence";
    res.seconds = timer.seconds();
    res.passed = worst <= limit && res.seconds < 10.0;
    res.detail = "50 instances, max rel err " + fmt(worst) + " (limit " + fmt(limit) + ")";
    return res;
}

// --- criterion 2 ---------------------------------------------------------------

CheckResult check_block_update_exactness(Context& ctx) {
    Timer timer;
    const double limit = 1e-8 * ctx.opts.tolerance_scale;
    std::mt19937_64 rng(1002);
    const double lambdas[] = {0.01, 0.1, 1.0};

    double worst = 0.0;
    int blocks_done = 0;
    for (int seq = 0; seq < 10; ++seq) {
        const index_t n = 30 + rng() % 40;
        const index_t c = 1 + rng() % 4;
        const double lambda = lambdas[seq % 3];
        const DenseMatrix y = random_matrix(rng, n, c);
        GramState state(y, lambda);
        DenseMatrix accumulated(n, 0);
        for (int b = 0; b < 10; ++b) {
            const index_t s = 1 + rng() % 5;
            const DenseMatrix h_s = random_matrix(rng, n, s);
            accumulated = numerics::hcat(accumulated, h_s);
            state = supervisory::apply_block(state, h_s);

            DenseMatrix got = state.weights();
            if (ctx.opts.perturb_weight_update != 0.0) {
                got(0, 0) += ctx.opts.perturb_weight_update;
            }
            worst = std::max(
                worst, mixed_rel_err(got, numerics::ridge_solve(accumulated, y, lambda)));
            ++blocks_done;
        }
    }

    CheckResult res;
    res.name = "block_update_exactness";
    res.seconds = timer.seconds();
    res.passed = worst <= limit && blocks_done == 100 && res.seconds < 10.0;
    res.detail = std::to_string(blocks_done) + " blocks, max rel err " + fmt(worst) +
                 " (limit " + fmt(limit) + ")";
    return res;
}

// --- criteria 3 and 4 -----------------------------------------------------------

CheckResult check_contraction(Context& ctx) {
    const auto& runs = contraction_runs(ctx);
    Timer timer;
    const double slack = 1e-9 * ctx.opts.tolerance_scale;
    const double r = 0.99;

    std::size_t accepted_total = 0;
    double worst_margin = -kInf;  // positive margin = violation
    bool geometric_ok = true;
    for (const auto& run : runs) {
        double prev_sq = run.result.diag.initial_residual_fro *
                         run.result.diag.initial_residual_fro;
        double bound = prev_sq;
        for (const auto& rec : run.result.diag.construction_log) {
            if (!rec.accepted) continue;
            const double cur_sq = rec.residual_fro * rec.residual_fro;
            worst_margin =
                std::max(worst_margin, cur_sq - (r * prev_sq + slack * (1.0 + prev_sq)));
            bound = r * bound + slack * (1.0 + prev_sq);
            if (cur_sq > bound) geometric_ok = false;
            prev_sq = cur_sq;
            ++accepted_total;
        }
    }

    CheckResult res;
    res.name = "residual_contraction";
    res.seconds = timer.seconds() + ctx.contraction_seconds;
    res.passed = accepted_total > 0 && worst_margin <= 0.0 && geometric_ok &&
                 res.seconds < 60.0;
    res.detail = std::to_string(accepted_total) + " accepted blocks over 20 runs, worst "
                 "contraction margin " + fmt(worst_margin) +
                 (geometric_ok ? ", geometric bound held" : ", GEOMETRIC BOUND VIOLATED");
    return res;
}

CheckResult check_schur_positivity(Context& ctx) {
    const auto& runs = contraction_runs(ctx);
    Timer timer;
    const double lambda = 0.01;
    const double floor = lambda - 1e-9 * ctx.opts.tolerance_scale;

    std::size_t evaluated = 0;
    double smallest = kInf;
    for (const auto& run : runs) {
        for (double m : run.schur_mins) {
            smallest = std::min(smallest, m);
            ++evaluated;
        }
    }

    CheckResult res;
    res.name = "schur_positivity";
    res.seconds = timer.seconds();
    res.passed = evaluated > 0 && smallest >= floor;
    res.detail = std::to_string(evaluated) + " evaluated blocks, min lambda_min(S) " +
                 fmt(smallest) + " (floor " + fmt(floor) + ")";
    return res;
}

// --- criterion 5 ----------------------------------------------------------------

CheckResult check_compactness_vs_ri(Context& ctx) {
    const auto& runs = compactness_runs(ctx);
    Timer timer;

    std::vector<double> mgsm_counts, ri_counts;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        const auto& diag = runs[k].mgsm.result.diag;
        mgsm_counts.push_back(diag.termination == TerminationReason::ResidualMet
                                  ? static_cast<double>(diag.final_hidden_size)
                                  : kInf);

        const DenseMatrix y = one_hot_sorted(runs[k].data.train.labels);
        auto cfg = desk_config(Strategy::RI, 5.0, 1200);
        rpl::GaussianSampler rng(5000 + k);
        const auto ri =
            supervisory::construct(runs[k].data.train.features, y, cfg, rng);
        ri_counts.push_back(ri.diag.termination == TerminationReason::ResidualMet
                                ? static_cast<double>(ri.diag.final_hidden_size)
                                : kInf);
    }

    const double med_mgsm = median(mgsm_counts);
    const double med_ri = median(ri_counts);

    CheckResult res;
    res.name = "compactness_vs_ri";
    res.seconds = timer.seconds() + ctx.compactness_seconds;
    res.passed = std::isfinite(med_mgsm) && med_mgsm <= med_ri && res.seconds < 120.0;
    res.detail = "median units to target residual: mgsm " + fmt(med_mgsm) + ", ri " +
                 fmt(med_ri);
    return res;
}

// --- criterion 6 ----------------------------------------------------------------

CheckResult check_conditioning_vs_scsm(Context& ctx) {
    const auto& runs = compactness_runs(ctx);
    Timer timer;

    // Small MGSM blocks here: joint evaluation then rejects candidates that
    // only duplicate already-accepted directions, which is the diversity
    // mechanism this check mirrors; the SCSM side is grown unit-by-unit to
    // the same final dimension.
    std::vector<double> mgsm_cond, scsm_cond;
    std::size_t dimension_mismatches = 0;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        const DenseMatrix y = one_hot_sorted(runs[k].data.train.labels);

        auto mgsm_cfg = desk_config(Strategy::MGSM, 1e-6, 600);
        mgsm_cfg.s = 2;
        mgsm_cfg.b_max = 10;
        mgsm_cfg.xi_schedule = rpl::XiSchedule(1.0, 0.5, 6.0);
        rpl::GaussianSampler mgsm_rng(k);
        const auto mgsm =
            supervisory::construct(runs[k].data.train.features, y, mgsm_cfg, mgsm_rng);
        if (mgsm.model.total_units() == 0) continue;
        mgsm_cond.push_back(
            metrics::feature_gram_condition(mgsm.state.accepted_features()));

        auto scsm_cfg = desk_config(Strategy::SCSM, 1e-12, mgsm.model.total_units());
        scsm_cfg.b_max = 10;
        scsm_cfg.xi_schedule = rpl::XiSchedule(1.0, 0.5, 6.0);
        rpl::GaussianSampler scsm_rng(6000 + k);
        const auto scsm =
            supervisory::construct(runs[k].data.train.features, y, scsm_cfg, scsm_rng);
        if (scsm.model.total_units() != mgsm.model.total_units()) ++dimension_mismatches;
        scsm_cond.push_back(
            metrics::feature_gram_condition(scsm.state.accepted_features()));
    }

    const double med_mgsm = median(mgsm_cond);
    const double med_scsm = median(scsm_cond);

    CheckResult res;
    res.name = "conditioning_vs_scsm";
    res.seconds = timer.seconds();
    res.passed = !mgsm_cond.empty() && med_mgsm <= med_scsm;
    res.detail = "median feature-gram condition: mgsm " + fmt(med_mgsm) + ", scsm " +
                 fmt(med_scsm) +
                 (dimension_mismatches
                      ? " (" + std::to_string(dimension_mismatches) + " scsm runs below the matched dimension)"
                      : "");
    return res;
}

// --- criterion 7 ----------------------------------------------------------------

CheckResult check_pt_monotonicity_floor(Context& ctx) {
    Timer timer;
    const double lambda = 0.01;
    const double floor = lambda - 1e-9 * ctx.opts.tolerance_scale;

    bool monotone = true, floored = true;
    std::size_t stages_checked = 0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto spec = blob_spec(10, 40, 8, 0.4, 500 + seed);
        const auto outcome =
            run_pipeline(spec, 0, 2, desk_config(Strategy::MGSM, 1.5, 400), seed);
        double prev = 0.0;
        for (const auto& snap : outcome.snapshots) {
            if (snap.pt_fro < prev) monotone = false;
            if (snap.pt_lambda_min < floor) floored = false;
            prev = snap.pt_fro;
            ++stages_checked;
        }
    }

    CheckResult res;
    res.name = "pt_monotonicity_floor";
    res.seconds = timer.seconds();
    res.passed = stages_checked > 0 && monotone && floored;
    res.detail = std::to_string(stages_checked) + " stages over 3 runs: ||P_t||_F " +
                 (monotone ? "non-decreasing" : "DECREASED") + ", lambda_min " +
                 (floored ? "floored at lambda" : "BELOW lambda");
    return res;
}

// --- criterion 8 ----------------------------------------------------------------

CheckResult check_metric_formulas(Context& ctx) {
    Timer timer;
    const double tol = 1e-12 * ctx.opts.tolerance_scale;

    bool ok = true;
    std::ostringstream why;

    {
        metrics::AccuracyGrid g({50, 50});
        g.push_stage({0.9});
        g.push_stage({0.8, 0.6});
        ok = ok && std::abs(metrics::a_avg(g) - 0.8) <= tol;
        ok = ok && std::abs(metrics::a_last(g) - 0.7) <= tol;
        ok = ok && std::abs(metrics::f_avg(g) - 0.1) <= tol;
    }
    {
        metrics::AccuracyGrid g({10, 10, 10});
        g.push_stage({0.7});
        g.push_stage({0.9, 0.9});
        g.push_stage({0.8, 0.9, 0.5});
        ok = ok && std::abs(metrics::f_avg(g) - 0.05) <= tol;
    }
    {
        metrics::AccuracyGrid g({10, 10, 10});
        g.push_stage({1.0});
        g.push_stage({1.0, 1.0});
        g.push_stage({1.0, 1.0, 1.0});
        ok = ok && std::abs(metrics::a_last(g) - 1.0) <= tol &&
             std::abs(metrics::a_avg(g) - 1.0) <= tol &&
             std::abs(metrics::f_avg(g)) <= tol;
    }
    if (!ok) why << "hand-computed examples diverged; ";

    std::size_t negative = 0;
    std::mt19937_64 rng(1008);
    std::uniform_real_distribution<double> acc(0.0, 1.0);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t stages = 2 + rng() % 6;
        metrics::AccuracyGrid g(std::vector<std::size_t>(stages, 10));
        for (std::size_t t = 1; t <= stages; ++t) {
            std::vector<double> row(t);
            for (auto& v : row) v = acc(rng);
            g.push_stage(std::move(row));
        }
        if (metrics::f_avg(g) < 0.0) ++negative;
    }
    if (negative > 0) why << negative << " random grids with negative f_avg";

    CheckResult res;
    res.name = "metric_formulas";
    res.seconds = timer.seconds();
    res.passed = ok && negative == 0;
    res.detail = res.passed ? "hand examples exact, 1000 random grids nonnegative"
                            : why.str();
    return res;
}

// --- criterion 9 ----------------------------------------------------------------

std::map<std::string, std::string> dir_contents(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        files[fs::relative(entry.path(), root).string()] = std::move(buf).str();
    }
    return files;
}

CheckResult check_run_determinism(Context& ctx) {
    Timer timer;

    const fs::path scratch = ctx.opts.scratch_dir.empty()
                                 ? fs::temp_directory_path() / "rpcl_acceptance_scratch"
                                 : fs::path(ctx.opts.scratch_dir);
    fs::remove_all(scratch);
    fs::create_directories(scratch);

    const fs::path spec_path = scratch / "synthetic.cfg";
    std::ofstream(spec_path) << "classes = 4\ntrain_per_class = 30\ntest_per_class = 10\n"
                             << "feature_dim = 8\ncluster_spread = 0.4\nseed = 7\n";
    const fs::path config_path = scratch / "run.cfg";
    std::ofstream(config_path) << "s = 10\nb_max = 5\nepsilon = 1.5\nmax_units = 300\n"
                               << "xi_min = 0.25\ndelta_xi = 0.25\nxi_max = 4\n";

    cli::RunManifest manifest;
    manifest.config_path = config_path.string();
    manifest.synthetic_spec_path = spec_path.string();
    manifest.strategies = {Strategy::MGSM};
    manifest.seeds = {11};
    manifest.increment = 2;

    manifest.out_dir = (scratch / "out_a").string();
    const int code_a = cli::cmd_run(manifest);
    manifest.out_dir = (scratch / "out_b").string();
    const int code_b = cli::cmd_run(manifest);

    const auto a = dir_contents(scratch / "out_a");
    const auto b = dir_contents(scratch / "out_b");

    bool identical = code_a == code_b && a.size() == b.size();
    std::size_t csvs = 0;
    if (identical) {
        for (const auto& [rel, bytes] : a) {
            const auto it = b.find(rel);
            if (it == b.end() || it->second != bytes) {
                identical = false;
                break;
            }
            ++csvs;
        }
    }
    fs::remove_all(scratch);

    CheckResult res;
    res.name = "run_determinism";
    res.seconds = timer.seconds();
    res.passed = identical && csvs > 0;
    res.detail = identical ? std::to_string(csvs) + " files byte-identical across reruns"
                           : "reruns diverged";
    return res;
}

// --- criterion 10 ---------------------------------------------------------------

CheckResult check_end_to_end_sanity([[maybe_unused]] Context& ctx) {
    Timer timer;
    const double lambda = 0.01;

    const auto spec = blob_spec(10, 40, 8, 0.3, 777);
    const auto outcome =
        run_pipeline(spec, 0, 2, desk_config(Strategy::MGSM, 1.5, 400), 3);
    const double a_last = metrics::a_last(outcome.grid);

    // Joint ridge on the same frozen projection features, all tasks at once.
    DenseMatrix h_all(0, 0), y_all(0, 0);
    for (const auto& batch : outcome.tasks.train) {
        h_all = numerics::vcat(h_all, rpl::project(batch.features, outcome.construction.model));
        y_all = numerics::vcat(y_all,
                               cil::one_hot(batch.labels, outcome.stat.classes_seen()));
    }
    const DenseMatrix joint = numerics::ridge_solve(h_all, y_all, lambda);

    std::size_t hits = 0, total = 0;
    const auto& classes = outcome.stat.classes_seen();
    for (const auto& batch : outcome.tasks.test) {
        const DenseMatrix scores =
            rpl::project(batch.features, outcome.construction.model) * joint;
        for (index_t i = 0; i < scores.rows(); ++i) {
            index_t best = 0;
            for (index_t j = 1; j < scores.cols(); ++j) {
                const double s = scores(i, j), bsc = scores(i, best);
                if (s > bsc || (s == bsc && classes[j] < classes[best])) best = j;
            }
            if (classes[best] == batch.labels[i]) ++hits;
            ++total;
        }
    }
    const double joint_acc = static_cast<double>(hits) / static_cast<double>(total);

    CheckResult res;
    res.name = "end_to_end_sanity";
    res.seconds = timer.seconds();
    res.passed = outcome.construction.model.total_units() > 0 &&
                 a_last >= 0.95 * joint_acc - 1e-12;
    res.detail = "A_last " + fmt(a_last) + ", joint-ridge accuracy " + fmt(joint_acc) +
                 ", L* " + std::to_string(outcome.construction.model.total_units());
    return res;
}

using CheckFn = CheckResult (*)(Context&);

struct NamedCheck {
    const char* name;
    CheckFn fn;
};

constexpr NamedCheck kChecks[] = {
    {"joint_ridge_equivalence", check_joint_ridge_equivalence},
    {"block_update_exactness", check_block_update_exactness},
    {"residual_contraction", check_contraction},
    {"schur_positivity", check_schur_positivity},
    {"compactness_vs_ri", check_compactness_vs_ri},
    {"conditioning_vs_scsm", check_conditioning_vs_scsm},
    {"pt_monotonicity_floor", check_pt_monotonicity_floor},
    {"metric_formulas", check_metric_formulas},
    {"run_determinism", check_run_determinism},
    {"end_to_end_sanity", check_end_to_end_sanity},
};

}  // namespace

std::vector<std::string> check_names() {
    std::vector<std::string> names;
    for (const auto& check : kChecks) names.emplace_back(check.name);
    return names;
}

std::vector<CheckResult> run_all(const Options& options, std::ostream& out) {
    Context ctx;
    ctx.opts = options;
    std::vector<CheckResult> results;
    for (const auto& check : kChecks) {
        CheckResult res = check.fn(ctx);
        out << (res.passed ? "[PASS] " : "[FAIL] ") << res.name << ": " << res.detail
            << " (" << fmt(res.seconds) << "s)\n";
        out.flush();
        results.push_back(std::move(res));
    }
    return results;
}

int run_cli(const Options& options, std::ostream& out) {
    const auto results = run_all(options, out);
    std::size_t failed = 0;
    for (const auto& res : results)
        if (!res.passed) ++failed;
    out << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed")
        << " (" << results.size() << " total)\n";
    return failed == 0 ? 0 : 1;
}

}  // namespace rpcl::acceptance
