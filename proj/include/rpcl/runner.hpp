#ifndef RPCL_RUNNER_HPP
#define RPCL_RUNNER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rpcl/data_io.hpp"
#include "rpcl/diagnostics.hpp"
#include "rpcl/supervisory.hpp"

// Batch orchestration behind the CLI: construction-only runs and the full
// construct -> incremental-update -> evaluate pipeline, per seed and strategy,
// with every table written under the manifest's output directory. Progress
// goes to stderr; machine-readable output only to files.

namespace rpcl::cli {

using supervisory::Strategy;

// Exit codes shared with the command line.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitXiExhausted = 3;
inline constexpr int kExitMaxUnits = 4;

Strategy parse_strategy(const std::string& name);         // "mgsm" | "scsm" | "ri"
std::string strategy_name(Strategy strategy);

struct RunManifest {
    std::string config_path;          // empty = built-in defaults
    std::string synthetic_spec_path;  // exactly one data source must be set
    std::string features_dir;
    std::vector<Strategy> strategies{Strategy::MGSM};
    std::vector<std::uint64_t> seeds{0};
    std::string out_dir;
    numerics::index_t initial_classes = 0;  // protocol B-m
    numerics::index_t increment = 0;        // protocol Inc-n; 0 = single task

    void validate() const;  // throws Error on an unusable manifest
};

// Builds the projection layer on task-1 data for every (strategy, seed) pair;
// writes model.rplm, construction_log.csv, construction_summary.csv and
// cosine_summary.csv under <out>/<strategy>/seed_<seed>/. Returns the exit
// code of the first pair that did not stop at the residual target.
int cmd_construct(const RunManifest& manifest);

// Full pipeline per (strategy, seed): construct, initialize the sufficient
// statistic, per-task recursive updates, evaluation on the cumulative test
// splits. Adds stage_snapshots.csv, accuracy_grid.csv, pt_trace.csv,
// eig_trace.csv per pair and one metrics.csv at the output root.
int cmd_run(const RunManifest& manifest);

// Fraction of agreeing labels; used for the accuracy grid.
double accuracy(const std::vector<cil::ClassId>& predicted,
                const std::vector<cil::ClassId>& truth);

// Loads/derives the per-task splits exactly the way cmd_run does (synthetic
// generation + seeded protocol split, or .fmat/.lvec discovery). Exposed for
// the acceptance suite.
io::TaskSplit load_tasks(const RunManifest& manifest, std::uint64_t seed);

}  // namespace rpcl::cli

#endif  // RPCL_RUNNER_HPP
