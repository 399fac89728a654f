#ifndef RPCL_DATA_IO_HPP
#define RPCL_DATA_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rpcl/analytic_cil.hpp"
#include "rpcl/numerics.hpp"
#include "rpcl/rpl.hpp"
#include "rpcl/supervisory.hpp"

// File formats, synthetic data, task splitting and configuration parsing.
//
// Matrices travel in a fixed little-endian binary container (magic "FMAT",
// u32 rows, u32 cols, row-major f64 payload) and label vectors in "LVEC"
// (u32 count, u32 ids). Round-trips are bit-exact; backbone features
// extracted offline enter the pipeline only through these files. A CSV
// import shim exists for interoperability.

namespace rpcl::io {

using cil::ClassId;
using cil::TaskBatch;
using numerics::DenseMatrix;
using numerics::index_t;

DenseMatrix read_matrix(const std::string& path);
void write_matrix(const std::string& path, const DenseMatrix& m);

std::vector<ClassId> read_labels(const std::string& path);
void write_labels(const std::string& path, const std::vector<ClassId>& labels);

// Comma-separated numeric rows, no header. All rows must have equal length.
DenseMatrix read_matrix_csv(const std::string& path);

// Projection-layer container: magic "RPLM", u32 feature dim, u32 activation
// tag, u32 block count, then per block u32 s, f64 xi, row-major d*s weights,
// s biases. Bit-exact round-trip.
void save_model(const std::string& path, const rpl::RplModel& model);
rpl::RplModel load_model(const std::string& path);

// --- synthetic data ----------------------------------------------------------

// Gaussian class clusters with optional per-task mean drift and exact-copy
// redundant feature dimensions (plus 1e-6 jitter), standing in for backbone
// features. Pure function of the spec.
struct SyntheticSpec {
    index_t classes = 10;
    index_t train_per_class = 50;
    index_t test_per_class = 20;
    index_t feature_dim = 16;
    double cluster_spread = 0.5;
    double domain_gap = 0.0;        // mean drift magnitude per drift group
    index_t redundancy = 0;         // trailing dims copied from earlier ones
    index_t classes_per_task = 1;   // drift group size (task size at generation)
    std::uint64_t seed = 0;

    void validate() const;
};

struct LabeledSet {
    DenseMatrix features;
    std::vector<ClassId> labels;
};

struct SyntheticData {
    LabeledSet train;
    LabeledSet test;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

// --- task splitting ----------------------------------------------------------

// Class-incremental split "B-m Inc-n": the first task holds m classes (or n
// when m = 0, the equal split) and every subsequent task holds n.
// Class-to-task assignment is a seeded permutation of the class ids.
struct TaskSplit {
    std::vector<TaskBatch> train;
    std::vector<TaskBatch> test;  // matching order
    std::string protocol;         // e.g. "B-4 Inc-3"
};

TaskSplit split_tasks(const LabeledSet& train, const LabeledSet& test, index_t m,
                      index_t n, std::uint64_t seed);

// --- configuration -----------------------------------------------------------

// `key = value` lines, '#' to end-of-line comments, case-sensitive
// lower_snake keys. Unknown keys and out-of-range values are errors; missing
// keys fall back to the defaults below.
struct RunConfig {
    double r = 0.99;
    double epsilon = 0.01;
    double lambda = 0.01;
    index_t s = 50;
    index_t b_max = 10;
    double xi_min = 0.0008;
    double delta_xi = 0.0001;
    double xi_max = 0.004;
    index_t max_units = 0;  // 0 = derived default
    double ri_xi = 1.0;
    bool per_column_criterion = false;

    supervisory::ConstructionConfig construction(supervisory::Strategy strategy) const;
};

RunConfig parse_config(const std::string& path);

// Same grammar, synthetic-spec schema (keys: classes, train_per_class,
// test_per_class, feature_dim, cluster_spread, domain_gap, redundancy,
// classes_per_task, seed).
SyntheticSpec parse_synthetic_spec(const std::string& path);

}  // namespace rpcl::io

#endif  // RPCL_DATA_IO_HPP
