#ifndef RPCL_ACCEPTANCE_HPP
#define RPCL_ACCEPTANCE_HPP

#include <ostream>
#include <string>
#include <vector>

// Property-based acceptance suite. Each check is a desk-scale mirror of a
// guarantee the pipeline is supposed to provide (algebraic equivalences,
// per-block contraction, Schur positivity, conditioning and compactness
// comparisons, metric formulas, bytewise determinism). `verify` runs them on
// built-in synthetic instances and prints one pass/fail line per check.

namespace rpcl::acceptance {

struct Options {
    // Scales every numeric tolerance; 1.0 = the pinned defaults.
    double tolerance_scale = 1.0;
    // Test hook: corrupts the incrementally updated weights by this magnitude
    // before the equivalence comparisons. Nonzero values must make the suite
    // fail; used to prove the checks can actually discriminate.
    double perturb_weight_update = 0.0;
    // Scratch directory for checks that write files (determinism). Empty =
    // a fresh directory under the system temp path.
    std::string scratch_dir;
};

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;   // measured value(s)
    double seconds = 0.0;
};

std::vector<std::string> check_names();

// Runs every check in order; `out` receives one line per check as it
// completes.
std::vector<CheckResult> run_all(const Options& options, std::ostream& out);

// Convenience wrapper: 0 when everything passed, 1 otherwise.
int run_cli(const Options& options, std::ostream& out);

}  // namespace rpcl::acceptance

#endif  // RPCL_ACCEPTANCE_HPP
