#include <gtest/gtest.h>

#include "mmvm/elements.hpp"
#include "mmvm/machine.hpp"
#include "mmvm/stdlib.hpp"
#include "support/fixtures.hpp"

using namespace mmvm;

TEST(Schedule, StepAndLinear) {
  Schedule lin{Schedule::Mode::linear, {{0, 0.0}, {10, 1.0}}};
  EXPECT_DOUBLE_EQ(lin.value(5), 0.5);
  EXPECT_EQ(lin.value(-3), 0.0);
  EXPECT_EQ(lin.value(10), 1.0);
  EXPECT_EQ(lin.value(1000), 1.0);

  Schedule step{Schedule::Mode::step, {{2, 1.0}, {5, -1.0}}};
  EXPECT_EQ(step.value(0), 1.0);
  EXPECT_EQ(step.value(4), 1.0);
  EXPECT_EQ(step.value(5), -1.0);
  EXPECT_EQ(step.max_abs(), 1.0);

  EXPECT_TRUE(lin.valid());
  EXPECT_FALSE((Schedule{Schedule::Mode::step, {{3, 1.0}, {3, 2.0}}}).valid());
  EXPECT_FALSE(Schedule{}.valid());
}

TEST(Classify, AllClasses) {
  Signature sig = ca_signature(0.5);
  ElementName e{"arg1 prop c", "white u"};
  ElementSource k = constant_source(0.3);
  ElementSource s = external_source(Schedule{Schedule::Mode::step, {{0, 1.0}}});
  ElementSource own = node_source("id (arg1 prop c)#(white u)");
  ElementSource other = node_source("id (arg1 prop c)#(black u)");
  ElementSource plain = node_source("prop d");
  ElementSource junk = node_source("not a node");
  EXPECT_EQ(classify_element(e, nullptr, sig), OrderClass::zero);
  EXPECT_EQ(classify_element(e, &k, sig), OrderClass::first);
  EXPECT_EQ(classify_element(e, &s, sig), OrderClass::sesquialteral);
  EXPECT_EQ(classify_element(e, &own, sig), OrderClass::fully_higher_order);
  EXPECT_EQ(classify_element(e, &other, sig), OrderClass::specialized);
  EXPECT_EQ(classify_element(e, &plain, sig), OrderClass::specialized);
  EXPECT_EQ(classify_element(e, &junk, sig), OrderClass::specialized);
  EXPECT_EQ(to_string(OrderClass::fully_higher_order), "fully-higher-order");
}

TEST(Controller, Names) {
  Signature sig = ca_signature(0.5);
  ElementName e{"arg1 prop c", "white u"};
  EXPECT_EQ(controller_node_for(e, sig).raw, "id (arg1 prop c)#(white u)");
  EXPECT_EQ(controller_input_for(e, sig).raw, "arg1 id (arg1 prop c)#(white u)");
}

TEST(Controller, ConstantValueArrivesOneTickLate) {
  Program p;
  p.signature = ca_signature(1.0);
  ElementName e{"arg1 id x", "white u"};
  p.apply(build_constant_controller(e, 0.25, p.signature));

  MachineState s = init_machine(p);
  EXPECT_EQ(s.coefficient(e.column, e.row), 0.0);
  s = step(s);
  EXPECT_EQ(s.coefficient(e.column, e.row), 0.0);
  for (int t = 2; t < 10; ++t) {
    s = step(s);
    EXPECT_EQ(s.coefficient(e.column, e.row), 0.25) << "t=" << t;
  }
}

TEST(Controller, PolicyChecks) {
  Signature sig = ca_signature(1.0);
  ElementName e{"arg1 id x", "white u"};
  EXPECT_THROW(build_constant_controller(e, -0.5, sig, Policy::nonneg), std::invalid_argument);
  EXPECT_THROW(build_constant_controller(e, 1.5, sig, Policy::substochastic), std::invalid_argument);
  EXPECT_NO_THROW(build_constant_controller(e, -0.5, sig, Policy::free));
  Signature no_unit({ops::identity()}, "id");
  EXPECT_THROW(build_constant_controller({"arg1 id x", "id y"}, 0.5, no_unit), std::invalid_argument);
}

// A controller fed by schedule s(t) behaves like a sesquialteral element
// with schedule s(t - 1).
TEST(Controller, MixedModeShiftEquivalence) {
  Signature sig = ca_signature(1.0);
  ElementName e{"arg1 id y", "white u"};
  Schedule s{Schedule::Mode::linear, {{0, 0.0}, {4, 0.8}, {9, -0.3}, {15, 0.5}}};
  Schedule shifted = s;
  for (auto& [t, _] : shifted.points) ++t;

  Program direct;
  direct.signature = sig;
  direct.matrix.set(e.column, e.row, external_source(shifted));
  direct.matrix.set(e.column, "id y", constant_source(0.5));

  Program controlled = direct;
  ElementName unit{"arg1 id (arg1 id y)#(white u)", "white (arg1 id y)#(white u)"};
  controlled.matrix.set(e.column, e.row, node_source("id (arg1 id y)#(white u)"));
  controlled.matrix.set(unit.column, unit.row, external_source(s));

  auto a = run(direct, 40, {"arg1 id y", "id y"});
  auto b = run(controlled, 40, {"arg1 id y", "id y"});
  EXPECT_EQ(a.values, b.values);
}
