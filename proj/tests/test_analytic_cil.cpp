#include "doctest.h"

#include <algorithm>
#include <random>
#include <vector>

#include "rpcl/analytic_cil.hpp"
#include "support/oracles.hpp"

using namespace rpcl;
using namespace rpcl::cil;
using numerics::DenseMatrix;
using numerics::frobenius_norm;
using numerics::index_t;

namespace {

// Random multi-task instance: per-task features plus disjoint class ids.
struct TaskData {
    DenseMatrix h;
    std::vector<ClassId> class_ids;
    std::vector<ClassId> labels;
};

std::vector<TaskData> random_tasks(std::mt19937_64& rng, index_t l, std::size_t t_count,
                                   index_t classes_per_task, index_t rows_per_task) {
    std::vector<TaskData> tasks;
    ClassId next_id = 0;
    for (std::size_t t = 0; t < t_count; ++t) {
        TaskData task;
        task.h = test::random_matrix(rng, rows_per_task, l);
        for (index_t c = 0; c < classes_per_task; ++c) task.class_ids.push_back(next_id++);
        std::uniform_int_distribution<std::size_t> pick(0, task.class_ids.size() - 1);
        for (index_t i = 0; i < rows_per_task; ++i)
            task.labels.push_back(task.class_ids[pick(rng)]);
        tasks.push_back(std::move(task));
    }
    return tasks;
}

// Drives the full incremental recursion and returns the final statistic.
SufficientStatistic run_sequence(const std::vector<TaskData>& tasks, double lambda) {
    const auto& first = tasks.front();
    const DenseMatrix y1 = one_hot(first.labels, first.class_ids);
    SufficientStatistic stat = init_stat(
        first.h, numerics::ridge_solve(first.h, y1, lambda), lambda, first.class_ids);
    for (std::size_t t = 1; t < tasks.size(); ++t) {
        stat = expand_classes(stat, tasks[t].class_ids);
        stat = rls_update(stat, tasks[t].h,
                          one_hot(tasks[t].labels, stat.classes_seen()));
    }
    return stat;
}

// Joint oracle: stack all features, zero-pad all labels, ridge-solve once.
DenseMatrix joint_solution(const std::vector<TaskData>& tasks, double lambda) {
    std::vector<ClassId> all_classes;
    for (const auto& t : tasks)
        all_classes.insert(all_classes.end(), t.class_ids.begin(), t.class_ids.end());
    DenseMatrix h_all(0, 0);
    DenseMatrix y_all(0, 0);
    for (const auto& t : tasks) {
        h_all = numerics::vcat(h_all, t.h);
        y_all = numerics::vcat(y_all, one_hot(t.labels, all_classes));
    }
    return test::ridge_oracle(h_all, y_all, lambda);
}

}  // namespace

TEST_SUITE("init_stat") {
    TEST_CASE("identity features, unit lambda") {
        const auto h = DenseMatrix::identity(2);
        const auto stat = init_stat(h, numerics::ridge_solve(h, h, 1.0), 1.0, {0, 1});
        CHECK(numerics::max_abs_diff(stat.p(), numerics::scale(DenseMatrix::identity(2), 2.0)) <
              1e-14);
        CHECK(stat.stage() == 1);
        CHECK(stat.classes_seen() == std::vector<ClassId>{0, 1});
    }

    TEST_CASE("P is symmetric with spectrum floored at lambda") {
        std::mt19937_64 rng(201);
        const double lambda = 0.05;
        const auto h = test::random_matrix(rng, 20, 8);
        const auto y = test::random_matrix(rng, 20, 3);
        const auto stat =
            init_stat(h, numerics::ridge_solve(h, y, lambda), lambda, {5, 9, 2});
        for (index_t i = 0; i < 8; ++i)
            for (index_t j = 0; j < 8; ++j) CHECK(stat.p()(i, j) == stat.p()(j, i));
        const auto [lo, hi] = numerics::eigen_extremes(stat.p());
        CHECK(lo >= lambda - 1e-9);
        CHECK(hi >= lo);
    }

    TEST_CASE("empty model edge") {
        const auto stat = init_stat(DenseMatrix(4, 0), DenseMatrix(0, 1), 0.1, {3});
        CHECK(stat.p().rows() == 0);
        CHECK(stat.unit_count() == 0);
    }

    TEST_CASE("duplicate ids rejected") {
        const auto h = DenseMatrix::identity(2);
        CHECK_THROWS_AS(init_stat(h, DenseMatrix(2, 2), 1.0, {1, 1}), DuplicateClass);
    }
}

TEST_SUITE("expand_classes") {
    TEST_CASE("new columns are exactly zero") {
        const auto h = DenseMatrix::identity(3);
        auto stat = init_stat(h, numerics::ridge_solve(h, DenseMatrix(3, 3), 1.0), 1.0,
                              {0, 1, 2});
        const auto p_before = stat.p();
        stat = expand_classes(stat, {7, 8});
        CHECK(stat.weights().cols() == 5);
        CHECK(stat.classes_seen() == std::vector<ClassId>{0, 1, 2, 7, 8});
        for (index_t i = 0; i < 3; ++i) {
            CHECK(stat.weights()(i, 3) == 0.0);
            CHECK(stat.weights()(i, 4) == 0.0);
        }
        CHECK(stat.p() == p_before);
    }

    TEST_CASE("adding nothing is the identity operation") {
        const auto h = DenseMatrix::identity(2);
        auto stat = init_stat(h, numerics::ridge_solve(h, h, 1.0), 1.0, {0, 1});
        const auto again = expand_classes(stat, {});
        CHECK(again.weights() == stat.weights());
        CHECK(again.classes_seen() == stat.classes_seen());
    }

    TEST_CASE("duplicates anywhere are rejected") {
        const auto h = DenseMatrix::identity(2);
        auto stat = init_stat(h, numerics::ridge_solve(h, h, 1.0), 1.0, {0, 1});
        CHECK_THROWS_AS(expand_classes(stat, {1}), DuplicateClass);
        CHECK_THROWS_AS(expand_classes(stat, {4, 4}), DuplicateClass);
    }
}

TEST_SUITE("rls_update") {
    TEST_CASE("two identity tasks match the stacked ridge solution") {
        const double lambda = 1.0;
        const auto h = DenseMatrix::identity(2);
        // task 1: classes {0,1}; task 2: classes {2,3}
        auto stat = init_stat(
            h, numerics::ridge_solve(h, DenseMatrix::identity(2), lambda), lambda, {0, 1});
        stat = expand_classes(stat, {2, 3});
        const auto y2 = one_hot({2, 3}, stat.classes_seen());
        stat = rls_update(stat, h, y2);

        const auto h_all = numerics::vcat(h, h);
        const auto y_all =
            numerics::vcat(one_hot({0, 1}, stat.classes_seen()), y2);
        CHECK(test::rel_fro_err(stat.weights(),
                                numerics::ridge_solve(h_all, y_all, lambda)) < 1e-12);
        CHECK(stat.stage() == 2);
    }

    TEST_CASE("old-class columns move through the correction term") {
        std::mt19937_64 rng(211);
        auto tasks = random_tasks(rng, 6, 3, 2, 15);
        const double lambda = 0.1;
        const auto stat = run_sequence(tasks, lambda);
        const auto joint = joint_solution(tasks, lambda);
        CHECK(test::rel_fro_err(stat.weights(), joint) < 1e-8);
        // Sanity: the old-class block is not frozen at its stage-1 values.
        const auto y1 = one_hot(tasks[0].labels, tasks[0].class_ids);
        const auto w1 = numerics::ridge_solve(tasks[0].h, y1, lambda);
        double drift = 0.0;
        for (index_t i = 0; i < w1.rows(); ++i)
            for (index_t j = 0; j < w1.cols(); ++j)
                drift = std::max(drift, std::abs(stat.weights()(i, j) - w1(i, j)));
        CHECK(drift > 1e-6);
    }

    TEST_CASE("empty batch is rejected") {
        const auto h = DenseMatrix::identity(2);
        auto stat = init_stat(h, numerics::ridge_solve(h, h, 1.0), 1.0, {0, 1});
        CHECK_THROWS_AS(rls_update(stat, DenseMatrix(0, 2), DenseMatrix(0, 2)),
                        DimensionError);
    }

    TEST_CASE("joint-ridge equivalence over random sequences") {
        std::mt19937_64 rng(212);
        for (int rep = 0; rep < 10; ++rep) {
            const auto tasks = random_tasks(rng, 4 + rng() % 10, 2 + rng() % 3,
                                            1 + rng() % 3, 8 + rng() % 20);
            const double lambda = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
            const auto stat = run_sequence(tasks, lambda);
            CHECK(test::rel_fro_err(stat.weights(), joint_solution(tasks, lambda)) < 1e-8);
        }
    }

    TEST_CASE("P accumulates exactly and its norm is non-decreasing") {
        std::mt19937_64 rng(213);
        const auto tasks = random_tasks(rng, 7, 4, 2, 12);
        const double lambda = 0.2;

        const auto& first = tasks.front();
        const auto y1 = one_hot(first.labels, first.class_ids);
        auto stat = init_stat(first.h, numerics::ridge_solve(first.h, y1, lambda),
                              lambda, first.class_ids);
        DenseMatrix expected_p = numerics::gram(first.h);
        for (index_t i = 0; i < 7; ++i) expected_p(i, i) += lambda;

        double prev_norm = frobenius_norm(stat.p());
        for (std::size_t t = 1; t < tasks.size(); ++t) {
            stat = expand_classes(stat, tasks[t].class_ids);
            stat = rls_update(stat, tasks[t].h,
                              one_hot(tasks[t].labels, stat.classes_seen()));
            expected_p = expected_p + numerics::gram(tasks[t].h);
            CHECK(frobenius_norm(stat.p() - expected_p) <=
                  1e-10 * frobenius_norm(expected_p));
            const auto [lo, hi] = numerics::eigen_extremes(stat.p());
            CHECK(lo >= lambda - 1e-9);
            const double norm = frobenius_norm(stat.p());
            CHECK(norm >= prev_norm);
            prev_norm = norm;
        }
    }

    TEST_CASE("final weights are invariant to task order") {
        std::mt19937_64 rng(214);
        auto tasks = random_tasks(rng, 6, 3, 2, 10);
        const double lambda = 0.05;
        const auto in_order = run_sequence(tasks, lambda);

        auto shuffled = tasks;
        std::swap(shuffled[0], shuffled[2]);
        const auto out_of_order = run_sequence(shuffled, lambda);

        // Columns are keyed by class id; realign before comparing.
        const auto& ref_classes = in_order.classes_seen();
        DenseMatrix realigned(out_of_order.weights().rows(), ref_classes.size());
        for (index_t j = 0; j < ref_classes.size(); ++j) {
            const auto& cls = out_of_order.classes_seen();
            const auto it = std::find(cls.begin(), cls.end(), ref_classes[j]);
            REQUIRE(it != cls.end());
            const index_t src = static_cast<index_t>(it - cls.begin());
            for (index_t i = 0; i < realigned.rows(); ++i)
                realigned(i, j) = out_of_order.weights()(i, src);
        }
        CHECK(test::rel_fro_err(realigned, in_order.weights()) < 1e-7);
    }
}

TEST_SUITE("predict") {
    TEST_CASE("dominant column wins everywhere") {
        const auto h = DenseMatrix::identity(3);
        auto stat = init_stat(h, DenseMatrix(3, 0), 0.5, {});
        stat = expand_classes(stat, {4, 9});
        // Hand-build weights: column of class 4 dominates.
        auto forced = rls_update(
            stat, numerics::scale(h, 1.0),
            DenseMatrix::from_rows({{5.0, 0.0}, {5.0, 0.0}, {5.0, 0.0}}));
        const auto labels = predict_features(forced, h);
        for (ClassId c : labels) CHECK(c == 4);
    }

    TEST_CASE("exact ties resolve to the lowest class id") {
        // Two classes with identical weight columns; id order reversed.
        const auto h = DenseMatrix::identity(2);
        auto stat = init_stat(h, DenseMatrix(2, 0), 1.0, {});
        stat = expand_classes(stat, {9, 3});
        const auto y = DenseMatrix::from_rows({{1.0, 1.0}, {1.0, 1.0}});
        stat = rls_update(stat, h, y);
        CHECK(stat.weights()(0, 0) == stat.weights()(0, 1));
        const auto labels = predict_features(stat, h);
        for (ClassId c : labels) CHECK(c == 3);
    }

    TEST_CASE("identical inputs give identical labels") {
        std::mt19937_64 rng(221);
        const auto tasks = random_tasks(rng, 5, 2, 2, 10);
        const auto stat = run_sequence(tasks, 0.1);
        const auto z = test::random_matrix(rng, 6, 5);
        CHECK(predict_features(stat, z) == predict_features(stat, z));
    }

    TEST_CASE("width mismatch is rejected") {
        const auto h = DenseMatrix::identity(2);
        const auto stat = init_stat(h, numerics::ridge_solve(h, h, 1.0), 1.0, {0, 1});
        CHECK_THROWS_AS(predict_features(stat, DenseMatrix(3, 5)), DimensionError);
    }

    TEST_CASE("projection features beat a raw-feature ridge on toy blobs") {
        // Directional: the nonlinear layer adds capacity over a linear ridge
        // fit on Z itself, measured as training accuracy.
        std::mt19937_64 rng(222);
        const index_t per_class = 60, d = 6;
        const std::vector<ClassId> classes{0, 1, 2};
        DenseMatrix z(per_class * 3, d);
        std::vector<ClassId> labels;
        std::normal_distribution<double> noise(0.0, 0.9);
        std::normal_distribution<double> unit(0.0, 1.0);
        DenseMatrix means(3, d);
        for (index_t c = 0; c < 3; ++c)
            for (index_t j = 0; j < d; ++j) means(c, j) = 2.5 * unit(rng);
        for (index_t c = 0; c < 3; ++c)
            for (index_t i = 0; i < per_class; ++i) {
                for (index_t j = 0; j < d; ++j)
                    z(c * per_class + i, j) = means(c, j) + noise(rng);
                labels.push_back(static_cast<ClassId>(c));
            }
        const DenseMatrix y = one_hot(labels, classes);
        const double lambda = 0.01;

        // Full pipeline: random layer + ridge head.
        rpl::GaussianSampler sampler(9);
        rpl::RplModel model(d);
        for (int b = 0; b < 6; ++b) model.append(rpl::sample_block(sampler, d, 10, 1.0));
        const DenseMatrix h = rpl::project(z, model);
        auto stat =
            init_stat(h, numerics::ridge_solve(h, y, lambda), lambda, classes);
        const auto rpl_predictions = predict(stat, model, z);

        // Baseline: lambda-matched ridge on the raw features.
        const DenseMatrix w_raw = numerics::ridge_solve(z, y, lambda);
        const DenseMatrix raw_scores = z * w_raw;
        std::size_t rpl_hits = 0, raw_hits = 0;
        for (index_t i = 0; i < z.rows(); ++i) {
            if (rpl_predictions[i] == labels[i]) ++rpl_hits;
            index_t best = 0;
            for (index_t j = 1; j < 3; ++j)
                if (raw_scores(i, j) > raw_scores(i, best)) best = j;
            if (classes[best] == labels[i]) ++raw_hits;
        }
        CHECK(rpl_hits >= raw_hits);
    }
}
