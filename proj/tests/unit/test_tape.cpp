#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "jointgen/errors.hpp"
#include "jointgen/tape.hpp"
#include "test_support.hpp"

using namespace jointgen;
using jointgen::testing::check_gradients;

namespace {

struct Fixture {
  ParameterStore store;
  Rng rng{11};

  Parameter& param(const std::string& name, Shape shape, double lo = -1.0, double hi = 1.0) {
    Parameter& p = store.create(name, std::move(shape));
    for (std::size_t i = 0; i < p.value.size(); ++i) p.value[i] = rng.uniform(lo, hi);
    return p;
  }
  Tensor weights(std::size_t n) {
    Tensor t({n});
    for (std::size_t i = 0; i < n; ++i) t[i] = rng.uniform(-1.0, 1.0);
    return t;
  }
};

// Reduces any vector to a scalar with fixed random weights so every output
// entry carries a distinct gradient.
Var project(Tape& tape, Var v, const Tensor& w) {
  return ad::dot(v, tape.constant(w));
}

Var flatten_sum(Tape& tape, Var m, const Tensor& w) {
  const Tensor& val = m.value();
  std::vector<Var> rows;
  if (val.rank() == 2) {
    for (std::size_t r = 0; r < val.rows(); ++r) rows.push_back(ad::row(m, r));
    return project(tape, ad::concat(rows), w);
  }
  return project(tape, m, w);
}

constexpr double kTolerance = 1e-6;

}  // namespace

TEST(Tape, ForwardValuesOfElementwiseOps) {
  Tape tape;
  const Var a = tape.constant(Tensor::vector({1.0, -2.0}));
  const Var b = tape.constant(Tensor::vector({3.0, 0.5}));
  EXPECT_EQ(ad::add(a, b).value(), Tensor::vector({4.0, -1.5}));
  EXPECT_EQ(ad::sub(a, b).value(), Tensor::vector({-2.0, -2.5}));
  EXPECT_EQ(ad::mul(a, b).value(), Tensor::vector({3.0, -1.0}));
  EXPECT_EQ(ad::scale(a, 2.0).value(), Tensor::vector({2.0, -4.0}));
  EXPECT_EQ(ad::one_minus(a).value(), Tensor::vector({0.0, 3.0}));
  EXPECT_DOUBLE_EQ(ad::dot(a, b).value()[0], 2.0);
  EXPECT_DOUBLE_EQ(ad::sum(a).value()[0], -1.0);
}

TEST(Tape, ShapeMismatchThrows) {
  Tape tape;
  const Var a = tape.constant(Tensor::vector({1.0, 2.0}));
  const Var b = tape.constant(Tensor::vector({1.0, 2.0, 3.0}));
  EXPECT_THROW(ad::add(a, b), DimensionError);
  EXPECT_THROW(ad::matmul(a, b), DimensionError);
}

TEST(Tape, SigmoidIsStableForLargeInputs) {
  Tape tape;
  const Var s = ad::sigmoid(tape.constant(Tensor::vector({-800.0, 0.0, 800.0})));
  EXPECT_EQ(s.value()[0], 0.0);
  EXPECT_DOUBLE_EQ(s.value()[1], 0.5);
  EXPECT_EQ(s.value()[2], 1.0);
}

TEST(Tape, SoftmaxSumsToOneAndMasksExactly) {
  Tape tape;
  const Var x = tape.constant(Tensor::vector({1000.0, 2.0, -3.0, 999.0}));
  const unsigned char mask[] = {1, 1, 0, 1};
  const Tensor p = ad::softmax(x, mask).value();
  EXPECT_EQ(p[2], 0.0);
  EXPECT_NEAR(p[0] + p[1] + p[3], 1.0, 1e-12);
  EXPECT_TRUE(p.all_finite());
}

TEST(Tape, SoftmaxAllMaskedThrows) {
  Tape tape;
  const Var x = tape.constant(Tensor::vector({1.0, 2.0}));
  const unsigned char mask[] = {0, 0};
  EXPECT_THROW(ad::softmax(x, mask), InvalidMaskError);
}

TEST(Tape, EntropyTreatsZeroLogZeroAsZero) {
  Tape tape;
  const Var p = tape.constant(Tensor::vector({0.5, 0.5, 0.0}));
  EXPECT_NEAR(ad::entropy(p).value()[0], std::log(2.0), 1e-15);
}

TEST(Tape, LogFloorClampsZero) {
  Tape tape;
  const Var l = ad::log(tape.constant(Tensor::scalar(0.0)), 1e-12);
  EXPECT_NEAR(l.value()[0], std::log(1e-12), 1e-12);
}

TEST(Tape, ScatterAddDropsNegativeIndices) {
  Tape tape;
  const Var x = tape.constant(Tensor::vector({0.1, 0.2, 0.3, 0.4}));
  const int index[] = {2, 0, -1, 2};
  const Tensor out = ad::scatter_add(x, index, 3).value();
  EXPECT_DOUBLE_EQ(out[0], 0.2);
  EXPECT_DOUBLE_EQ(out[1], 0.0);
  EXPECT_DOUBLE_EQ(out[2], 0.1 + 0.4);
}

TEST(Tape, GatherRowOutOfRangeThrows) {
  Tape tape;
  const Var table = tape.constant(Tensor({3, 2}));
  EXPECT_THROW(ad::gather_row(table, 3), VocabularyError);
}

TEST(Tape, BackwardRequiresScalar) {
  Tape tape;
  ParameterStore store;
  Parameter& p = store.create("p", {2});
  const Var v = ad::tanh(tape.parameter(p));
  EXPECT_THROW(tape.backward(v), ContractError);
}

TEST(Tape, ParameterLeafIsCachedAndGradientsAccumulate) {
  ParameterStore store;
  Parameter& p = store.create("p", {1});
  p.value[0] = 3.0;
  for (int pass = 0; pass < 2; ++pass) {
    Tape tape;
    EXPECT_EQ(tape.parameter(p).id, tape.parameter(p).id);
    const Var x = tape.parameter(p);
    tape.backward(ad::mul(x, x));
  }
  EXPECT_DOUBLE_EQ(p.gradient[0], 12.0);  // two passes of d(x^2)/dx = 6
}

TEST(Tape, BackwardVisitsEveryRecordedOp) {
  ParameterStore store;
  Parameter& p = store.create("p", {2});
  Tape tape;
  const Var x = tape.parameter(p);
  const Var y = ad::sum(ad::tanh(x));
  EXPECT_EQ(tape.backward(y), 2u);
}

TEST(TapeGradients, ElementwiseAndReductions) {
  Fixture f;
  Parameter& a = f.param("a", {5});
  Parameter& b = f.param("b", {5});
  Parameter& s = f.param("s", {1});
  const Tensor w = f.weights(5);
  const Tensor factor = f.weights(5);
  const auto r = check_gradients(
      [&](Tape& t) {
        const Var va = t.parameter(a), vb = t.parameter(b), vs = t.parameter(s);
        Var v = ad::add(ad::mul(ad::tanh(va), ad::sigmoid(vb)), ad::sub(va, ad::scale(vb, 0.3)));
        v = ad::add(v, ad::scale_by(ad::one_minus(va), vs));
        v = ad::mul_constant(v, factor);
        return ad::add(project(t, v, w), ad::sum(ad::mul(va, vb)));
      },
      {&a, &b, &s});
  EXPECT_LT(r.max_relative_error, kTolerance) << r.worst;
}

TEST(TapeGradients, LogAndEntropy) {
  Fixture f;
  Parameter& a = f.param("a", {4}, 0.2, 2.0);
  const auto r = check_gradients(
      [&](Tape& t) {
        const Var va = t.parameter(a);
        const Var p = ad::softmax(va);
        return ad::add(ad::entropy(p), ad::sum(ad::log(va)));
      },
      {&a});
  EXPECT_LT(r.max_relative_error, kTolerance) << r.worst;
}

TEST(TapeGradients, MaskedSoftmax) {
  Fixture f;
  Parameter& a = f.param("a", {6});
  const Tensor w = f.weights(6);
  const unsigned char mask[] = {1, 0, 1, 1, 0, 1};
  const auto r = check_gradients(
      [&](Tape& t) { return project(t, ad::softmax(t.parameter(a), mask), w); }, {&a});
  EXPECT_LT(r.max_relative_error, kTolerance) << r.worst;
}

TEST(TapeGradients, MatrixProducts) {
  Fixture f;
  Parameter& m = f.param("m", {3, 4});
  Parameter& n = f.param("n", {4, 2});
  Parameter& k = f.param("k", {5, 4});
  Parameter& x = f.param("x", {4});
  Parameter& v = f.param("v", {3});
  Parameter& b = f.param("b", {3});
  const Tensor w6 = f.weights(6), w15 = f.weights(15), w3 = f.weights(3), w4 = f.weights(4);
  const auto r = check_gradients(
      [&](Tape& t) {
        const Var vm = t.parameter(m);
        Var loss = flatten_sum(t, ad::matmul(vm, t.parameter(n)), w6);
        loss = ad::add(loss, flatten_sum(t, ad::matmul_nt(vm, t.parameter(k)), w15));
        loss = ad::add(loss, project(t, ad::affine(vm, t.parameter(x), t.parameter(b)), w3));
        loss = ad::add(loss, project(t, ad::vecmat(t.parameter(v), vm), w4));
        return loss;
      },
      {&m, &n, &k, &x, &v, &b});
  EXPECT_LT(r.max_relative_error, kTolerance) << r.worst;
}

TEST(TapeGradients, StructuralOps) {
  Fixture f;
  Parameter& a = f.param("a", {3});
  Parameter& b = f.param("b", {3});
  Parameter& table = f.param("table", {4, 3});
  const Tensor w = f.weights(5);
  const Tensor w6 = f.weights(6);
  const auto r = check_gradients(
      [&](Tape& t) {
        const Var va = t.parameter(a), vb = t.parameter(b);
        const Var joined = ad::concat({va, vb});
        Var loss = project(t, ad::slice(joined, 1, 5), w);
        const Var rows[] = {va, ad::gather_row(t.parameter(table), 2), vb};
        const Var stacked = ad::stack(rows);
        loss = ad::add(loss, project(t, ad::concat({ad::row(stacked, 1), ad::row(stacked, 2)}), w6));
        const Var picks[] = {ad::pick(va, 0), ad::pick(vb, 2)};
        return ad::add(loss, ad::mul(ad::sum_scalars(picks), ad::pick(va, 1)));
      },
      {&a, &b, &table});
  EXPECT_LT(r.max_relative_error, kTolerance) << r.worst;
}

TEST(TapeGradients, ScatterAndAdditiveScores) {
  Fixture f;
  Parameter& x = f.param("x", {5});
  Parameter& keys = f.param("keys", {5, 3});
  Parameter& query = f.param("query", {3});
  Parameter& wv = f.param("w", {3});
  Parameter& bias = f.param("bias", {1});
  const int index[] = {1, 3, 1, -1, 0};
  const Tensor w4 = f.weights(4), w5 = f.weights(5);
  const auto r = check_gradients(
      [&](Tape& t) {
        Var loss = project(t, ad::scatter_add(t.parameter(x), index, 4), w4);
        const Var scores = ad::additive_scores(t.parameter(keys), t.parameter(query),
                                               t.parameter(wv), t.parameter(bias));
        return ad::add(loss, project(t, scores, w5));
      },
      {&x, &keys, &query, &wv, &bias});
  EXPECT_LT(r.max_relative_error, kTolerance) << r.worst;
}

TEST(TapeGradients, AdditiveScoresMatchExplicitFormula) {
  Fixture f;
  Parameter& keys = f.param("keys", {4, 3});
  Parameter& query = f.param("query", {3});
  Parameter& wv = f.param("w", {3});
  Parameter& bias = f.param("bias", {1});
  Tape t;
  const Tensor s = ad::additive_scores(t.parameter(keys), t.parameter(query), t.parameter(wv),
                                       t.parameter(bias))
                       .value();
  for (std::size_t i = 0; i < 4; ++i) {
    double expected = bias.value[0];
    for (std::size_t j = 0; j < 3; ++j) {
      expected += wv.value[j] * std::tanh(keys.value.at(i, j) + query.value[j]);
    }
    EXPECT_NEAR(s[i], expected, 1e-14);
  }
}

TEST(TapeMatmul, IdentityLeavesMatrixUnchanged) {
  Tape t;
  const Var eye = t.constant(Tensor::matrix(2, 2, {1, 0, 0, 1}));
  const Var m = t.constant(Tensor::matrix(2, 2, {1, 2, 3, 4}));
  EXPECT_EQ(ad::matmul(eye, m).value(), Tensor::matrix(2, 2, {1, 2, 3, 4}));
}

TEST(TapeMatmul, SelectorRow) {
  Tape t;
  const Var r = t.constant(Tensor::matrix(1, 2, {1, 0}));
  const Var c = t.constant(Tensor::matrix(2, 1, {2, 5}));
  EXPECT_EQ(ad::matmul(r, c).value(), Tensor::matrix(1, 1, {2}));
}

TEST(TapeMatmul, HandComputedProduct) {
  Tape t;
  const Var a = t.constant(Tensor::matrix(2, 2, {1, 2, 3, 4}));
  const Var b = t.constant(Tensor::matrix(2, 2, {5, 6, 7, 8}));
  EXPECT_EQ(ad::matmul(a, b).value(), Tensor::matrix(2, 2, {19, 22, 43, 50}));
}

TEST(TapeMatmul, MismatchNamesBothShapes) {
  Tape t;
  const Var a = t.constant(Tensor({2, 3}));
  const Var b = t.constant(Tensor({2, 3}));
  try {
    ad::matmul(a, b);
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2x3]"), std::string::npos) << msg;
  }
}

TEST(TapeSoftmax, EqualLogitsAreUniform) {
  Tape t;
  const Tensor p = ad::softmax(t.constant(Tensor::vector({0, 0, 0, 0}))).value();
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(p[i], 0.25);
}

TEST(TapeSoftmax, SaturatesWithoutOverflow) {
  Tape t;
  const Tensor p = ad::softmax(t.constant(Tensor::vector({1000, 0}))).value();
  EXPECT_NEAR(p[0], 1.0, 1e-9);
  EXPECT_NEAR(p[1], 0.0, 1e-9);
}

TEST(TapeSoftmax, LogCountsGiveProportionalMass) {
  Tape t;
  const Tensor p =
      ad::softmax(t.constant(Tensor::vector({std::log(1.0), std::log(2.0), std::log(3.0)})))
          .value();
  EXPECT_NEAR(p[0], 1.0 / 6, 1e-12);
  EXPECT_NEAR(p[1], 2.0 / 6, 1e-12);
  EXPECT_NEAR(p[2], 3.0 / 6, 1e-12);
}

TEST(TapeBackward, SumGivesAllOnes) {
  ParameterStore store;
  Parameter& p = store.create("p", {3});
  p.value = Tensor::vector({0.3, -1.0, 2.0});
  Tape t;
  t.backward(ad::sum(t.parameter(p)));
  EXPECT_EQ(p.gradient, Tensor::vector({1, 1, 1}));
}

TEST(TapeBackward, SelfDotGivesTwiceValue) {
  ParameterStore store;
  Parameter& p = store.create("p", {3});
  p.value = Tensor::vector({0.3, -1.0, 2.0});
  Tape t;
  const Var v = t.parameter(p);
  t.backward(ad::dot(v, v));
  EXPECT_EQ(p.gradient, Tensor::vector({0.6, -2.0, 4.0}));
}
