#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rpcl/data_io.hpp"
#include "rpcl/runner.hpp"

using namespace rpcl;
using namespace rpcl::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("rpcl_runner_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

std::size_t line_count(const std::string& text) {
    std::size_t lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    return lines;
}

// Small separable synthetic task plus a desk-scale construction config.
void write_inputs(const TempDir& dir) {
    std::ofstream(dir.file("synthetic.cfg"))
        << "classes = 4\ntrain_per_class = 30\ntest_per_class = 10\n"
        << "feature_dim = 8\ncluster_spread = 0.4\nseed = 21\n";
    std::ofstream(dir.file("run.cfg"))
        << "s = 10\nb_max = 5\nepsilon = 1.5\nmax_units = 200\n"
        << "xi_min = 0.25\ndelta_xi = 0.25\nxi_max = 4\n";
}

RunManifest base_manifest(const TempDir& dir) {
    RunManifest manifest;
    manifest.config_path = dir.file("run.cfg");
    manifest.synthetic_spec_path = dir.file("synthetic.cfg");
    manifest.out_dir = dir.file("out");
    manifest.increment = 2;
    return manifest;
}

}  // namespace

TEST_SUITE("manifest") {
    TEST_CASE("duplicate seeds are rejected") {
        TempDir dir;
        write_inputs(dir);
        auto manifest = base_manifest(dir);
        manifest.seeds = {3, 3};
        CHECK_THROWS_AS(manifest.validate(), MalformedValue);
    }

    TEST_CASE("exactly one data source") {
        TempDir dir;
        write_inputs(dir);
        auto manifest = base_manifest(dir);
        manifest.features_dir = dir.file("features");
        CHECK_THROWS_AS(manifest.validate(), MalformedValue);
        manifest.features_dir.clear();
        manifest.synthetic_spec_path.clear();
        CHECK_THROWS_AS(manifest.validate(), MalformedValue);
    }

    TEST_CASE("strategy names round-trip") {
        CHECK(parse_strategy("mgsm") == Strategy::MGSM);
        CHECK(parse_strategy("scsm") == Strategy::SCSM);
        CHECK(parse_strategy("ri") == Strategy::RI);
        CHECK_THROWS_AS(parse_strategy("bogus"), MalformedValue);
        CHECK(strategy_name(Strategy::SCSM) == "scsm");
    }
}

TEST_SUITE("cmd_construct") {
    TEST_CASE("smoke run writes model and nonempty log") {
        TempDir dir;
        write_inputs(dir);
        const auto manifest = base_manifest(dir);
        CHECK(cmd_construct(manifest) == kExitOk);

        const fs::path pair = fs::path(manifest.out_dir) / "mgsm" / "seed_0";
        CHECK(fs::exists(pair / "model.rplm"));
        const auto log = read_file(pair / "construction_log.csv");
        CHECK(line_count(log) >= 2);  // header + at least one iteration
        const auto summary = read_file(pair / "construction_summary.csv");
        CHECK(summary.find("residual_met") != std::string::npos);

        const auto model = io::load_model((pair / "model.rplm").string());
        CHECK(model.total_units() > 0);
    }

    TEST_CASE("unwritable output directory is an I/O error") {
        TempDir dir;
        write_inputs(dir);
        auto manifest = base_manifest(dir);
        std::ofstream(dir.file("blocker")) << "x";
        manifest.out_dir = dir.file("blocker");  // a file, not a directory
        CHECK_THROWS_AS(cmd_construct(manifest), Error);
    }

    TEST_CASE("ri strategy leaves criterion columns empty and exits max_units") {
        TempDir dir;
        write_inputs(dir);
        std::ofstream(dir.file("run.cfg"))
            << "s = 10\nb_max = 5\nepsilon = 0.000001\nmax_units = 30\n"
            << "xi_min = 0.25\ndelta_xi = 0.25\nxi_max = 4\n";
        auto manifest = base_manifest(dir);
        manifest.strategies = {Strategy::RI};
        CHECK(cmd_construct(manifest) == kExitMaxUnits);

        const auto log =
            read_file(fs::path(manifest.out_dir) / "ri" / "seed_0" / "construction_log.csv");
        std::istringstream lines(log);
        std::string line;
        std::getline(lines, line);  // header
        std::getline(lines, line);
        // iteration,xi,candidates,accepted,residual,lhs,threshold,coupling,units
        CHECK(line.find(",,,") != std::string::npos);
    }

    TEST_CASE("hopeless schedule reports xi exhaustion") {
        TempDir dir;
        write_inputs(dir);
        std::ofstream(dir.file("run.cfg"))
            << "s = 5\nb_max = 2\nepsilon = 0.000001\nmax_units = 100\n"
            << "xi_min = 0.000000001\ndelta_xi = 1\nxi_max = 0.000000001\n";
        const auto manifest = base_manifest(dir);
        CHECK(cmd_construct(manifest) == kExitXiExhausted);
    }
}

TEST_SUITE("cmd_run") {
    TEST_CASE("one metrics row per seed") {
        TempDir dir;
        write_inputs(dir);
        auto manifest = base_manifest(dir);
        manifest.seeds = {1, 2, 3};
        CHECK(cmd_run(manifest) == kExitOk);

        const auto metrics = read_file(fs::path(manifest.out_dir) / "metrics.csv");
        CHECK(line_count(metrics) == 4);  // header + 3 rows

        for (std::uint64_t seed : manifest.seeds) {
            const fs::path pair =
                fs::path(manifest.out_dir) / "mgsm" / ("seed_" + std::to_string(seed));
            CHECK(fs::exists(pair / "stage_snapshots.csv"));
            CHECK(fs::exists(pair / "accuracy_grid.csv"));
            CHECK(fs::exists(pair / "pt_trace.csv"));
            CHECK(fs::exists(pair / "eig_trace.csv"));
            CHECK(fs::exists(pair / "cosine_summary.csv"));
        }
    }

    TEST_CASE("strategy sweep emits one row per pair") {
        TempDir dir;
        write_inputs(dir);
        auto manifest = base_manifest(dir);
        manifest.seeds = {5, 6};
        manifest.strategies = {Strategy::MGSM, Strategy::RI};
        cmd_run(manifest);
        const auto metrics = read_file(fs::path(manifest.out_dir) / "metrics.csv");
        CHECK(line_count(metrics) == 5);  // header + 2x2
        CHECK(metrics.find("5,mgsm") != std::string::npos);
        CHECK(metrics.find("6,ri") != std::string::npos);
    }

    TEST_CASE("accuracy grid covers the lower triangle") {
        TempDir dir;
        write_inputs(dir);
        const auto manifest = base_manifest(dir);
        cmd_run(manifest);
        const auto grid =
            read_file(fs::path(manifest.out_dir) / "mgsm" / "seed_0" / "accuracy_grid.csv");
        // 4 classes, increment 2 -> 2 stages -> rows (1,1), (2,1), (2,2)
        CHECK(line_count(grid) == 4);
    }
}

TEST_SUITE("load_tasks") {
    TEST_CASE("feature directory discovery") {
        TempDir dir;
        std::mt19937_64 rng(7);
        std::normal_distribution<double> g;
        for (int t = 1; t <= 2; ++t) {
            numerics::DenseMatrix train(6, 3), test(4, 3);
            for (auto* m : {&train, &test})
                for (numerics::index_t i = 0; i < m->rows(); ++i)
                    for (numerics::index_t j = 0; j < 3; ++j) (*m)(i, j) = g(rng);
            std::vector<cil::ClassId> train_labels, test_labels;
            for (int i = 0; i < 6; ++i)
                train_labels.push_back(static_cast<cil::ClassId>(2 * t + i % 2));
            for (int i = 0; i < 4; ++i)
                test_labels.push_back(static_cast<cil::ClassId>(2 * t + i % 2));
            const std::string stem = dir.file("task_" + std::to_string(t));
            io::write_matrix(stem + "_train.fmat", train);
            io::write_labels(stem + "_train.lvec", train_labels);
            io::write_matrix(stem + "_test.fmat", test);
            io::write_labels(stem + "_test.lvec", test_labels);
        }

        RunManifest manifest;
        manifest.features_dir = dir.path.string();
        manifest.out_dir = dir.file("out");
        const auto tasks = load_tasks(manifest, 0);
        REQUIRE(tasks.train.size() == 2);
        CHECK(tasks.train[0].features.rows() == 6);
        CHECK(tasks.test[1].features.rows() == 4);
        CHECK(tasks.train[1].labels[0] == 4);
    }

    TEST_CASE("missing directory is an error") {
        RunManifest manifest;
        manifest.features_dir = "/nonexistent/rpcl/features";
        manifest.out_dir = "/tmp/out";
        CHECK_THROWS_AS(load_tasks(manifest, 0), Error);
    }
}

TEST_SUITE("accuracy_helper") {
    TEST_CASE("counts agreements") {
        CHECK(accuracy({1, 2, 3}, {1, 2, 4}) == doctest::Approx(2.0 / 3.0));
        CHECK_THROWS_AS(accuracy({1}, {1, 2}), DimensionError);
    }
}
