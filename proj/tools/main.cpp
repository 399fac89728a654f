#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rpcl/acceptance.hpp"
#include "rpcl/errors.hpp"
#include "rpcl/runner.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& csv) {
    std::vector<std::string> parts;
    std::string current;
    for (char c : csv) {
        if (c == ',') {
            if (!current.empty()) parts.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) parts.push_back(current);
    return parts;
}

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
    std::vector<std::uint64_t> seeds;
    for (const auto& part : split_csv(csv)) {
        try {
            std::size_t used = 0;
            seeds.push_back(std::stoull(part, &used));
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw rpcl::MalformedValue("--seeds: bad seed \"" + part + "\"");
        }
    }
    return seeds;
}

// "B-m,Inc-n", e.g. B-0,Inc-5.
void parse_protocol(const std::string& text, rpcl::numerics::index_t& m,
                    rpcl::numerics::index_t& n) {
    const auto parts = split_csv(text);
    if (parts.size() != 2 || parts[0].rfind("B-", 0) != 0 ||
        parts[1].rfind("Inc-", 0) != 0) {
        throw rpcl::MalformedValue("--protocol: expected B-m,Inc-n, got \"" + text + "\"");
    }
    try {
        m = std::stoull(parts[0].substr(2));
        n = std::stoull(parts[1].substr(4));
    } catch (const std::exception&) {
        throw rpcl::MalformedValue("--protocol: bad counts in \"" + text + "\"");
    }
}

struct CommonFlags {
    std::string config;
    std::string synthetic;
    std::string features;
    std::string out;
    std::string seeds = "0";
    std::string strategies = "mgsm";
    std::string protocol;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config, "run configuration file (key = value lines)");
    cmd->add_option("--synthetic", flags.synthetic, "synthetic dataset spec file");
    cmd->add_option("--features", flags.features,
                    "directory of task_<t>_{train,test}.{fmat,lvec} files");
    cmd->add_option("--out", flags.out,
                    "output directory (default: $RPCL_OUTPUT_ROOT)");
    cmd->add_option("--seeds", flags.seeds, "comma-separated run seeds (default 0)");
    cmd->add_option("--strategy", flags.strategies,
                    "mgsm|scsm|ri; a comma list sweeps strategies");
    cmd->add_option("--protocol", flags.protocol,
                    "class-incremental protocol B-m,Inc-n (synthetic data only)");
}

rpcl::cli::RunManifest manifest_from(const CommonFlags& flags) {
    rpcl::cli::RunManifest manifest;
    manifest.config_path = flags.config;
    manifest.synthetic_spec_path = flags.synthetic;
    manifest.features_dir = flags.features;
    manifest.out_dir = flags.out;
    if (manifest.out_dir.empty()) {
        if (const char* root = std::getenv("RPCL_OUTPUT_ROOT")) manifest.out_dir = root;
    }
    manifest.seeds = parse_seeds(flags.seeds);
    manifest.strategies.clear();
    for (const auto& name : split_csv(flags.strategies)) {
        manifest.strategies.push_back(rpcl::cli::parse_strategy(name));
    }
    if (!flags.protocol.empty()) {
        parse_protocol(flags.protocol, manifest.initial_classes, manifest.increment);
    }
    return manifest;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Guided random-projection continual learner"};
    app.require_subcommand(1);

    CommonFlags construct_flags, run_flags;
    auto* construct_cmd = app.add_subcommand(
        "construct", "Build the projection layer on task-1 data and write the model");
    add_common(construct_cmd, construct_flags);
    auto* run_cmd = app.add_subcommand(
        "run", "Full pipeline: construct, per-task recursive updates, metrics");
    add_common(run_cmd, run_flags);

    bool list_only = false;
    rpcl::acceptance::Options verify_options;
    auto* verify_cmd = app.add_subcommand("verify", "Run the acceptance check suite");
    verify_cmd->add_flag("--list", list_only, "print check names and exit");
    verify_cmd->add_option("--verify-tolerance", verify_options.tolerance_scale,
                           "scale factor applied to the numeric tolerances");
    verify_cmd->add_option("--perturb-weight-update", verify_options.perturb_weight_update,
                           "self-test hook: corrupt the incremental weight updates by "
                           "this magnitude (the suite must then fail)");
    verify_cmd->add_option("--scratch", verify_options.scratch_dir,
                           "scratch directory for file-writing checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return rpcl::cli::kExitUsage;
    }

    try {
        if (verify_cmd->parsed()) {
            if (list_only) {
                for (const auto& name : rpcl::acceptance::check_names()) {
                    std::cout << name << "\n";
                }
                return 0;
            }
            return rpcl::acceptance::run_cli(verify_options, std::cout);
        }
        if (construct_cmd->parsed()) {
            return rpcl::cli::cmd_construct(manifest_from(construct_flags));
        }
        return rpcl::cli::cmd_run(manifest_from(run_flags));
    } catch (const rpcl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return rpcl::cli::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return rpcl::cli::kExitUsage;
    }
}
