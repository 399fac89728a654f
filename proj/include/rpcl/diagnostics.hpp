#ifndef RPCL_DIAGNOSTICS_HPP
#define RPCL_DIAGNOSTICS_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

// Plain record types shared between the construction loop, the incremental
// classifier and the metrics/CSV layer. Kept free of behavior so every module
// can emit or consume them without depending on each other.

namespace rpcl::diagnostics {

enum class TerminationReason { ResidualMet, XiExhausted, MaxUnits };

std::string to_string(TerminationReason reason);

// One construction iteration. `iteration` doubles as the logical timestamp:
// it is strictly increasing and, unlike wall-clock stamps, survives the
// byte-identical-rerun requirement.
struct ConstructionLogRecord {
    std::size_t iteration = 0;
    double xi = 0.0;
    std::size_t candidates_sampled = 0;
    bool accepted = false;
    std::size_t accepted_index = 0;   // candidate index within the iteration
    double residual_fro = 0.0;        // ||E||_F after the iteration
    // Criterion aggregates of the applied candidate (best rejected candidate
    // when nothing was accepted); unset for the RI strategy.
    bool has_criterion = false;
    double lhs_aggregate = 0.0;
    double threshold = 0.0;
    double coupling_aggregate = 0.0;
    std::size_t total_units = 0;      // L after the iteration
};

// One incremental stage of the classifier.
struct StageSnapshot {
    std::size_t stage = 0;            // t
    double pt_fro = 0.0;              // ||P_t||_F
    double pt_lambda_min = 0.0;
    double pt_lambda_max = 0.0;
    double pt_condition = 0.0;
    // a_{t,j} for j = 1..t, in task order.
    std::vector<double> per_task_accuracy;
};

struct RunDiagnostics {
    std::vector<ConstructionLogRecord> construction_log;
    std::vector<StageSnapshot> stage_snapshots;
    std::size_t final_hidden_size = 0;  // L* = sum of accepted block sizes
    double initial_residual_fro = 0.0;  // ||E||_F before the first block
    double cosine_summary = 0.0;        // mean |off-diagonal| of the basis cosine matrix
    TerminationReason termination = TerminationReason::ResidualMet;
};

}  // namespace rpcl::diagnostics

#endif  // RPCL_DIAGNOSTICS_HPP
