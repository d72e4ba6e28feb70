#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "pbci/nn/ops.hpp"
#include "pbci/nn/tape.hpp"

namespace {

using namespace pbci::nn;

TEST(Tensor, ShapeAndData) {
  Tensor<float> t({2, 3}, 1.5f);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_EQ(shape_string(t.shape()), "[2,3]");
  EXPECT_THROW(Tensor<float>({2, 2}, std::vector<float>(3)), std::invalid_argument);
  const auto r = t.reshaped({3, 2});
  EXPECT_EQ(r.dim(0), 3u);
  EXPECT_THROW((void)t.reshaped({4, 2}), std::invalid_argument);
  EXPECT_TRUE(t.all_finite());
  t[0] = std::numeric_limits<float>::infinity();
  EXPECT_FALSE(t.all_finite());
  Parameter<double> p("w", Tensor<double>({4}, 2.0));
  EXPECT_EQ(p.grad.shape(), p.value.shape());
}

TEST(Tape, SumGivesOnesGradient) {
  Parameter<double> p("p", Tensor<double>({2, 3}, 0.7));
  Tape<double> tape;
  tape.backward(sum(tape, tape.parameter(p)));
  for (double g : p.grad.values()) EXPECT_EQ(g, 1.0);
}

TEST(Tape, ZeroTimesFunctionGivesZeroGradient) {
  Parameter<double> p("p", Tensor<double>({3}, 2.0));
  Tape<double> tape;
  const auto v = tape.parameter(p);
  tape.backward(scale(tape, sum(tape, square(tape, v)), 0.0));
  for (double g : p.grad.values()) EXPECT_EQ(g, 0.0);
}

TEST(Tape, UnreachableParameterGetsZeroGradient) {
  Parameter<double> used("a", Tensor<double>({2}, 1.0));
  Parameter<double> unused("b", Tensor<double>({2}, 1.0));
  unused.grad.fill(5.0);
  Tape<double> tape;
  const auto a = tape.parameter(used);
  (void)tape.parameter(unused);
  tape.backward(sum(tape, a));
  for (double g : unused.grad.values()) EXPECT_EQ(g, 0.0);
}

TEST(Tape, SharedParameterAccumulatesBothPaths) {
  // dense(x, x, 0) = x . x, so the gradient 2x arrives through both inputs.
  Parameter<double> p("p", Tensor<double>({1, 3}, std::vector<double>{1.0, -2.0, 0.5}));
  Parameter<double> b("b", Tensor<double>({1}, 0.0));
  Tape<double> tape;
  const auto a = tape.parameter(p);
  EXPECT_EQ(tape.parameter(p).id, a.id);
  tape.backward(sum(tape, dense(tape, a, a, tape.parameter(b))));
  EXPECT_DOUBLE_EQ(p.grad[0], 2.0);
  EXPECT_DOUBLE_EQ(p.grad[1], -4.0);
  EXPECT_DOUBLE_EQ(p.grad[2], 1.0);
  EXPECT_DOUBLE_EQ(b.grad[0], 1.0);
}

TEST(Tape, NonScalarLossIsRejected) {
  Parameter<double> p("p", Tensor<double>({2}, 1.0));
  Tape<double> tape;
  EXPECT_THROW(tape.backward(tape.parameter(p)), std::invalid_argument);
}

TEST(Tape, CheckedModeNamesTheOp) {
  Parameter<double> p("p", Tensor<double>({2}, 1e200));
  Tape<double> tape(true);
  try {
    (void)square(tape, tape.parameter(p));
    FAIL() << "expected overflow to be caught";
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("square"), std::string::npos) << e.what();
  }
  Tape<double> unchecked(false);
  EXPECT_NO_THROW((void)square(unchecked, unchecked.parameter(p)));
}

TEST(Tape, NodesAreVisitedOnceInReverseOrder) {
  std::vector<std::size_t> visits;
  Tape<double> tape;
  Parameter<double> p("p", Tensor<double>({1}, 1.0));
  auto v = tape.parameter(p);
  for (int i = 0; i < 3; ++i) {
    v = tape.record("probe", tape.value(v), {v}, [&visits, v](Tape<double>& t, std::size_t node) {
      visits.push_back(node);
      t.grad(v)[0] += t.grad_of(node)[0];
    });
  }
  tape.backward(sum(tape, v));
  ASSERT_EQ(visits.size(), 3u);
  EXPECT_GT(visits[0], visits[1]);
  EXPECT_GT(visits[1], visits[2]);
  EXPECT_EQ(p.grad[0], 1.0);
}

}  // namespace
