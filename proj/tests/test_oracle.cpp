#include <gtest/gtest.h>

#include <random>

#include "mmvm/machine.hpp"
#include "mmvm/oracle.hpp"
#include "mmvm/stdlib.hpp"
#include "support/fixtures.hpp"

using namespace mmvm;

TEST(Oracle, GeometricSeries) {
  auto d = oracle::dense_run(fixtures::geometric_program(), 5, {"arg1 id s"});
  EXPECT_EQ(d.at(1, "arg1 id s"), 1.0);
  EXPECT_EQ(d.at(2, "arg1 id s"), 1.5);
  EXPECT_EQ(d.at(3, "arg1 id s"), 1.75);
}

TEST(Oracle, ControllerDelay) {
  Program p;
  p.signature = ca_signature(1.0);
  ElementName e{"arg1 id x", "white u"};
  p.apply(build_constant_controller(e, 0.25, p.signature));
  auto model = oracle::build_dense_model(p);
  oracle::Vector x(model->x_names.size(), 0.0);
  oracle::Vector y(model->y_names.size(), 0.0);
  auto col = std::find(model->y_names.begin(), model->y_names.end(), e.column) - model->y_names.begin();
  auto row = std::find(model->x_names.begin(), model->x_names.end(), e.row) - model->x_names.begin();
  for (std::int64_t t = 0; t < 5; ++t) {
    std::tie(x, y) = oracle::dense_step(*model, x, y, t);
    double a = oracle::dense_coefficients(*model, x, t + 1)[static_cast<std::size_t>(col)][static_cast<std::size_t>(row)];
    EXPECT_EQ(a, t + 1 >= 2 ? 0.25 : 0.0) << "t=" << t + 1;
  }
}

TEST(Oracle, CapacityIsEnforced) {
  Program p;
  p.signature = ca_signature(1.0);
  for (int i = 0; i < 150; ++i) p.matrix.set("arg1 id n" + std::to_string(i), "white u", constant_source(0.5));
  EXPECT_THROW(oracle::build_dense_model(p), std::length_error);
  EXPECT_NO_THROW(oracle::build_dense_model(p, 400));
}

TEST(Oracle, AgreesWithSparseEngineOnRandomPrograms) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 30; ++i) {
    Program p = fixtures::random_program(rng, {.stochastic = i % 3 == 0});
    auto nodes = fixtures::all_nodes(p);
    auto report = oracle::compare_trajectories(run(p, 60, nodes), oracle::dense_run(p, 60, nodes), 1e-12);
    EXPECT_TRUE(report.pass) << "program " << i << " first divergence at t=" << report.first->t << " in "
                             << report.first->node;
  }
}

TEST(Oracle, PerturbedCoefficientIsFlagged) {
  Program p = fixtures::geometric_program();
  Program q = p;
  q.matrix.set("arg1 id s", "id s", constant_source(0.5 + 1e-9));
  auto report = oracle::compare_trajectories(run(p, 30, {"arg1 id s"}), oracle::dense_run(q, 30, {"arg1 id s"}), 1e-12);
  EXPECT_FALSE(report.pass);
  ASSERT_TRUE(report.first);
  EXPECT_EQ(report.first->t, 2);
  EXPECT_EQ(report.first->node, "arg1 id s");
}

TEST(Oracle, MismatchedTrajectoriesRejected) {
  Program p = fixtures::geometric_program();
  EXPECT_THROW(oracle::compare_trajectories(run(p, 3, {"arg1 id s"}), oracle::dense_run(p, 4, {"arg1 id s"}), 1e-12),
               std::invalid_argument);
}
