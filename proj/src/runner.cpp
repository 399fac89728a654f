#include "rpcl/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include "rpcl/analytic_cil.hpp"
#include "rpcl/metrics.hpp"

namespace rpcl::cli {

namespace fs = std::filesystem;

using cil::ClassId;
using diagnostics::TerminationReason;
using numerics::DenseMatrix;
using numerics::index_t;

Strategy parse_strategy(const std::string& name) {
    if (name == "mgsm") return Strategy::MGSM;
    if (name == "scsm") return Strategy::SCSM;
    if (name == "ri") return Strategy::RI;
    throw MalformedValue("unknown strategy \"" + name + "\" (expected mgsm|scsm|ri)");
}

std::string strategy_name(Strategy strategy) {
    switch (strategy) {
        case Strategy::MGSM: return "mgsm";
        case Strategy::SCSM: return "scsm";
        case Strategy::RI: return "ri";
    }
    return "unknown";
}

void RunManifest::validate() const {
    if (seeds.empty()) throw MalformedValue("manifest: at least one seed required");
    std::set<std::uint64_t> distinct(seeds.begin(), seeds.end());
    if (distinct.size() != seeds.size()) {
        throw MalformedValue("manifest: seeds must be distinct");
    }
    if (strategies.empty()) throw MalformedValue("manifest: at least one strategy");
    if (synthetic_spec_path.empty() == features_dir.empty()) {
        throw MalformedValue(
            "manifest: exactly one data source (--synthetic or --features) required");
    }
    if (out_dir.empty()) throw MalformedValue("manifest: output directory required");
    if (initial_classes > 0 && increment == 0) {
        throw MalformedValue("manifest: protocol with m > 0 needs n >= 1");
    }
}

double accuracy(const std::vector<ClassId>& predicted, const std::vector<ClassId>& truth) {
    if (predicted.size() != truth.size() || truth.empty()) {
        throw DimensionError("accuracy: label vectors must match and be nonempty");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (predicted[i] == truth[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

namespace {

std::vector<ClassId> sorted_classes(const std::vector<ClassId>& labels) {
    std::vector<ClassId> ids(labels.begin(), labels.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

io::TaskSplit load_feature_dir(const std::string& dir) {
    io::TaskSplit split;
    split.protocol = "files";
    for (std::size_t t = 1;; ++t) {
        std::ostringstream stem;
        stem << "task_" << t;
        const fs::path base = fs::path(dir) / stem.str();
        const std::string train_mat = base.string() + "_train.fmat";
        if (!fs::exists(train_mat)) break;

        cil::TaskBatch train;
        train.task_index = t;
        train.features = io::read_matrix(train_mat);
        train.labels = io::read_labels(base.string() + "_train.lvec");
        train.validate();

        cil::TaskBatch test;
        test.task_index = t;
        test.features = io::read_matrix(base.string() + "_test.fmat");
        test.labels = io::read_labels(base.string() + "_test.lvec");
        test.validate();

        split.train.push_back(std::move(train));
        split.test.push_back(std::move(test));
    }
    if (split.train.empty()) {
        throw IoError("no task files found under " + dir +
                      " (expected task_1_train.fmat etc.)");
    }
    return split;
}

io::RunConfig load_config(const RunManifest& manifest) {
    if (manifest.config_path.empty()) return io::RunConfig{};
    return io::parse_config(manifest.config_path);
}

int termination_exit_code(TerminationReason reason) {
    switch (reason) {
        case TerminationReason::ResidualMet: return kExitOk;
        case TerminationReason::XiExhausted: return kExitXiExhausted;
        case TerminationReason::MaxUnits: return kExitMaxUnits;
    }
    return kExitUsage;
}

fs::path pair_dir(const RunManifest& manifest, Strategy strategy, std::uint64_t seed) {
    std::ostringstream leaf;
    leaf << "seed_" << seed;
    const fs::path dir = fs::path(manifest.out_dir) / strategy_name(strategy) / leaf.str();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string());
    return dir;
}

void write_construction_summary(const fs::path& dir, Strategy strategy,
                                std::uint64_t seed,
                                const supervisory::ConstructionResult& result) {
    std::ofstream out(dir / "construction_summary.csv", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write construction summary under " + dir.string());
    out << "strategy,seed,termination,final_hidden_size,initial_residual_fro,"
           "final_residual_fro\n";
    out << strategy_name(strategy) << ',' << seed << ','
        << diagnostics::to_string(result.diag.termination) << ','
        << result.diag.final_hidden_size << ','
        << metrics::format_double(result.diag.initial_residual_fro) << ','
        << metrics::format_double(result.state.residual_fro()) << '\n';
}

void write_construction_outputs(const fs::path& dir, Strategy strategy,
                                std::uint64_t seed,
                                supervisory::ConstructionResult& result) {
    const auto cosine = metrics::basis_cosine(result.model);
    result.diag.cosine_summary = cosine.mean_abs_offdiag;

    io::save_model((dir / "model.rplm").string(), result.model);
    metrics::write_construction_log((dir / "construction_log.csv").string(),
                                    result.diag.construction_log);
    metrics::write_cosine_summary((dir / "cosine_summary.csv").string(), cosine,
                                  result.diag.termination,
                                  result.diag.final_hidden_size);
    write_construction_summary(dir, strategy, seed, result);
}

supervisory::ConstructionResult construct_first_task(const io::TaskSplit& tasks,
                                                     const io::RunConfig& config,
                                                     Strategy strategy,
                                                     std::uint64_t seed) {
    const auto& first = tasks.train.front();
    const auto classes = sorted_classes(first.labels);
    const DenseMatrix y = cil::one_hot(first.labels, classes);
    rpl::GaussianSampler rng(seed);
    return supervisory::construct(first.features, y, config.construction(strategy), rng);
}

diagnostics::StageSnapshot snapshot_of(const cil::SufficientStatistic& stat,
                                       std::vector<double> per_task_accuracy) {
    diagnostics::StageSnapshot snap;
    snap.stage = stat.stage();
    snap.per_task_accuracy = std::move(per_task_accuracy);
    if (stat.unit_count() > 0) {
        snap.pt_fro = numerics::frobenius_norm(stat.p());
        const auto [lo, hi] = numerics::eigen_extremes(stat.p());
        snap.pt_lambda_min = lo;
        snap.pt_lambda_max = hi;
        snap.pt_condition =
            lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    }
    return snap;
}

}  // namespace

io::TaskSplit load_tasks(const RunManifest& manifest, std::uint64_t seed) {
    if (!manifest.features_dir.empty()) return load_feature_dir(manifest.features_dir);

    const auto spec = io::parse_synthetic_spec(manifest.synthetic_spec_path);
    const auto data = io::generate_synthetic(spec);
    const index_t n =
        manifest.increment == 0 ? spec.classes : manifest.increment;
    return io::split_tasks(data.train, data.test, manifest.initial_classes, n, seed);
}

int cmd_construct(const RunManifest& manifest) {
    manifest.validate();
    const auto config = load_config(manifest);

    int exit_code = kExitOk;
    for (Strategy strategy : manifest.strategies) {
        for (std::uint64_t seed : manifest.seeds) {
            const auto tasks = load_tasks(manifest, seed);
            auto result = construct_first_task(tasks, config, strategy, seed);
            const auto dir = pair_dir(manifest, strategy, seed);
            write_construction_outputs(dir, strategy, seed, result);

            std::cerr << "[construct] " << strategy_name(strategy) << " seed " << seed
                      << ": " << diagnostics::to_string(result.diag.termination)
                      << ", L*=" << result.diag.final_hidden_size << ", ||E||="
                      << result.state.residual_fro() << "\n";

            const int code = termination_exit_code(result.diag.termination);
            if (exit_code == kExitOk && code != kExitOk) exit_code = code;
        }
    }
    return exit_code;
}

int cmd_run(const RunManifest& manifest) {
    manifest.validate();
    const auto config = load_config(manifest);

    std::vector<metrics::MetricsRow> rows;
    int exit_code = kExitOk;

    for (Strategy strategy : manifest.strategies) {
        for (std::uint64_t seed : manifest.seeds) {
            const auto tasks = load_tasks(manifest, seed);
            const std::size_t stage_count = tasks.train.size();

            auto result = construct_first_task(tasks, config, strategy, seed);
            const auto dir = pair_dir(manifest, strategy, seed);
            write_construction_outputs(dir, strategy, seed, result);
            const int code = termination_exit_code(result.diag.termination);
            if (exit_code == kExitOk && code != kExitOk) exit_code = code;

            // Stage 1: ridge weights from construction become the classifier.
            const auto classes1 = sorted_classes(tasks.train.front().labels);
            auto stat = cil::init_stat(result.state.accepted_features(),
                                       result.state.weights(), config.lambda, classes1);

            std::vector<std::size_t> test_sizes;
            for (const auto& batch : tasks.test) test_sizes.push_back(batch.features.rows());
            metrics::AccuracyGrid grid(test_sizes);

            auto evaluate_stage = [&](std::size_t t) {
                std::vector<double> per_task;
                for (std::size_t j = 0; j < t; ++j) {
                    const auto predicted =
                        cil::predict(stat, result.model, tasks.test[j].features);
                    per_task.push_back(accuracy(predicted, tasks.test[j].labels));
                }
                grid.push_stage(per_task);
                result.diag.stage_snapshots.push_back(snapshot_of(stat, per_task));
            };
            evaluate_stage(1);

            for (std::size_t t = 2; t <= stage_count; ++t) {
                const auto& batch = tasks.train[t - 1];
                stat = cil::expand_classes(stat, sorted_classes(batch.labels));
                const DenseMatrix h_t = rpl::project(batch.features, result.model);
                const DenseMatrix y_t = cil::one_hot(batch.labels, stat.classes_seen());
                stat = cil::rls_update(stat, h_t, y_t);
                evaluate_stage(t);
            }

            metrics::write_stage_snapshots((dir / "stage_snapshots.csv").string(),
                                           result.diag.stage_snapshots);
            metrics::write_accuracy_grid((dir / "accuracy_grid.csv").string(), grid);
            metrics::write_pt_trace((dir / "pt_trace.csv").string(),
                                    metrics::trace_pt(result.diag.stage_snapshots));
            metrics::write_eig_trace((dir / "eig_trace.csv").string(),
                                     metrics::trace_eigs(result.diag.stage_snapshots));

            metrics::MetricsRow row;
            row.seed = seed;
            row.strategy = strategy_name(strategy);
            row.a_last = metrics::a_last(grid);
            row.a_avg = metrics::a_avg(grid);
            row.f_avg = stage_count >= 2 ? metrics::f_avg(grid)
                                         : std::numeric_limits<double>::quiet_NaN();
            row.final_hidden_size = result.diag.final_hidden_size;
            rows.push_back(row);

            std::cerr << "[run] " << strategy_name(strategy) << " seed " << seed
                      << ": A_last=" << row.a_last << " A_avg=" << row.a_avg
                      << " L*=" << row.final_hidden_size << "\n";
        }
    }

    metrics::write_metrics((fs::path(manifest.out_dir) / "metrics.csv").string(), rows);
    return exit_code;
}

}  // namespace rpcl::cli
