#include "doctest.h"

#include <cmath>
#include <limits>

#include "rpcl/rpl.hpp"
#include "support/oracles.hpp"

using namespace rpcl;
using namespace rpcl::rpl;
using numerics::DenseMatrix;
using numerics::index_t;

TEST_SUITE("xi_schedule") {
    TEST_CASE("default exploration set has 33 values") {
        const XiSchedule sched(0.0008, 0.0001, 0.004);
        CHECK(sched.values().size() == 33);
        CHECK(sched.values().front() == doctest::Approx(0.0008));
        CHECK(sched.values().back() == doctest::Approx(0.004));
    }

    TEST_CASE("degenerate single-value schedule") {
        const XiSchedule sched(1.0, 0.5, 1.0);
        CHECK(sched.values().size() == 1);
        CHECK(sched.values()[0] == 1.0);
    }

    TEST_CASE("invalid parameters") {
        CHECK_THROWS_AS(XiSchedule(0.0, 0.1, 1.0), NumericError);
        CHECK_THROWS_AS(XiSchedule(2.0, 0.1, 1.0), NumericError);
        CHECK_THROWS_AS(XiSchedule(0.5, 0.0, 1.0), NumericError);
    }
}

TEST_SUITE("sample_block") {
    TEST_CASE("same seed, same block") {
        GaussianSampler a(1234), b(1234);
        const auto blk_a = sample_block(a, 5, 3, 0.7);
        const auto blk_b = sample_block(b, 5, 3, 0.7);
        CHECK(blk_a.input_weights() == blk_b.input_weights());
        CHECK(blk_a.biases() == blk_b.biases());
        // subsequent draws also aligned
        CHECK(a.next(1.0) == b.next(1.0));
    }

    TEST_CASE("sample standard deviation tracks xi") {
        GaussianSampler rng(2024);
        const double xi = 0.0008;
        const auto blk = sample_block(rng, 768, 50, xi);
        CHECK(blk.input_weights().size() == 38400);

        double sum = 0.0, sq = 0.0;
        for (double v : blk.input_weights().data()) {
            sum += v;
            sq += v * v;
        }
        const double n = static_cast<double>(blk.input_weights().size());
        const double stddev = std::sqrt(sq / n - (sum / n) * (sum / n));
        CHECK(stddev == doctest::Approx(xi).epsilon(0.05));
    }

    TEST_CASE("degenerate parameters") {
        GaussianSampler rng(1);
        CHECK_THROWS_AS(sample_block(rng, 0, 3, 1.0), DimensionError);
        CHECK_THROWS_AS(sample_block(rng, 3, 0, 1.0), DimensionError);
        CHECK_THROWS_AS(sample_block(rng, 3, 3, 0.0), NumericError);
    }

    TEST_CASE("non-finite bias rejected at construction") {
        DenseMatrix w(2, 1);
        CHECK_THROWS_AS(
            BasisBlock(w, {std::numeric_limits<double>::infinity()}, 1.0),
            NumericError);
    }
}

TEST_SUITE("activate") {
    TEST_CASE("zero input, zero bias gives one half") {
        DenseMatrix w(3, 2);
        w(0, 0) = 1.0;
        w(1, 1) = -2.0;
        const BasisBlock blk(w, {0.0, 0.0}, 1.0);
        const auto h = activate(DenseMatrix(4, 3), blk);
        for (double v : h.data()) CHECK(v == 0.5);
    }

    TEST_CASE("scalar closed form") {
        DenseMatrix w(1, 1);
        w(0, 0) = 1.0;
        const BasisBlock blk(w, {0.0}, 1.0);
        DenseMatrix z(1, 1);
        z(0, 0) = 1.0;
        const auto h = activate(z, blk);
        CHECK(h(0, 0) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-12));
    }

    TEST_CASE("dimension mismatch") {
        DenseMatrix w(3, 1);
        const BasisBlock blk(w, {0.0}, 1.0);
        CHECK_THROWS_AS(activate(DenseMatrix(2, 4), blk), DimensionError);
    }

    TEST_CASE("saturated pre-activations stay inside (0,1)") {
        DenseMatrix w(1, 2);
        w(0, 0) = 1.0;
        w(0, 1) = -1.0;
        const BasisBlock blk(w, {0.0, 0.0}, 1.0);
        DenseMatrix z(1, 1);
        z(0, 0) = 5000.0;  // saturates sigmoid in double either direction
        const auto h = activate(z, blk);
        CHECK(h(0, 0) < 1.0);
        CHECK(h(0, 0) > 0.0);
        CHECK(h(0, 1) > 0.0);
        CHECK(h(0, 1) < 1.0);
    }
}

TEST_SUITE("project") {
    TEST_CASE("empty model yields N x 0") {
        const RplModel model(4);
        const auto h = project(DenseMatrix(7, 4), model);
        CHECK(h.rows() == 7);
        CHECK(h.cols() == 0);
    }

    TEST_CASE("single block equals activate") {
        GaussianSampler rng(7);
        RplModel model(3);
        const auto blk = sample_block(rng, 3, 1, 0.5);
        model.append(blk);
        std::mt19937_64 data_rng(8);
        const auto z = test::random_matrix(data_rng, 6, 3);
        CHECK(project(z, model) == activate(z, blk));
    }

    TEST_CASE("two blocks concatenate in acceptance order") {
        GaussianSampler rng(9);
        RplModel model(4);
        const auto b1 = sample_block(rng, 4, 2, 0.5);
        const auto b2 = sample_block(rng, 4, 3, 1.5);
        model.append(b1);
        model.append(b2);
        CHECK(model.total_units() == 5);

        std::mt19937_64 data_rng(10);
        const auto z = test::random_matrix(data_rng, 5, 4);
        const auto h = project(z, model);
        CHECK(numerics::columns(h, 0, 2) == activate(z, b1));
        CHECK(numerics::columns(h, 2, 3) == activate(z, b2));
    }

    TEST_CASE("activation columns live strictly inside (0, sqrt(N))") {
        GaussianSampler rng(11);
        RplModel model(6);
        model.append(sample_block(rng, 6, 8, 2.0));
        std::mt19937_64 data_rng(12);
        const auto z = test::random_matrix(data_rng, 30, 6, 10.0);
        const auto h = project(z, model);
        for (index_t j = 0; j < h.cols(); ++j) {
            double norm2 = 0.0;
            for (index_t i = 0; i < h.rows(); ++i) {
                CHECK(h(i, j) > 0.0);
                CHECK(h(i, j) < 1.0);
                norm2 += h(i, j) * h(i, j);
            }
            CHECK(norm2 > 0.0);
            CHECK(norm2 < static_cast<double>(h.rows()));
        }
    }

    TEST_CASE("block with wrong feature dim cannot be appended") {
        GaussianSampler rng(13);
        RplModel model(4);
        CHECK_THROWS_AS(model.append(sample_block(rng, 5, 1, 1.0)), DimensionError);
    }
}
