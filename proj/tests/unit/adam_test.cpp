// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "adam.hpp"
#include "fd.hpp"

namespace guidelab {
namespace {

TEST(Adam, FirstStepIsElementwiseSign) {
  std::mt19937_64 rng(1);
  const Vec g = testing::randn(50, rng);
  AdamState st(50);
  const Vec out = adam_transform(g, st);
  EXPECT_EQ(st.step, 1);
  for (Eigen::Index i = 0; i < 50; ++i) {
    EXPECT_EQ(std::signbit(out(i)), std::signbit(g(i)));
    EXPECT_NEAR(out(i), g(i) / (std::abs(g(i)) + 1e-8), 1e-12);
  }
}

TEST(Adam, ConstantGradientConvergesToSign) {
  Vec g(4);
  g << 0.1, -3.0, 7.5, -0.02;
  AdamState st(4);
  Vec out;
  for (int k = 0; k < 1000; ++k) out = adam_transform(g, st);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(out(i), g(i) > 0 ? 1.0 : -1.0, 1e-6);
}

TEST(Adam, ZeroIsAFixedPoint) {
  AdamState st(6);
  for (int k = 0; k < 5; ++k) {
    const Vec out = adam_transform(Vec::Zero(6), st);
    EXPECT_EQ(out, Vec::Zero(6));
  }
  EXPECT_EQ(st.m, Vec::Zero(6));
  EXPECT_EQ(st.v, Vec::Zero(6));
}

TEST(Adam, MatchesReferenceRecurrence) {
  std::mt19937_64 rng(2);
  AdamParams p{0.8, 0.99, 0.5, 1e-6};
  AdamState st(3, p);
  Vec m = Vec::Zero(3), v = Vec::Zero(3);
  for (int k = 1; k <= 20; ++k) {
    const Vec g = testing::randn(3, rng);
    m = p.beta1 * m + (1 - p.beta1) * g;
    v = p.beta2 * v + (1 - p.beta2) * g.cwiseProduct(g);
    const Vec mh = m / (1 - std::pow(p.beta1, k));
    const Vec vh = v / (1 - std::pow(p.beta2, k));
    const Vec want = p.eta * mh.array() / (vh.array().sqrt() + p.eps);
    EXPECT_LT((adam_transform(g, st) - want).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Adam, LazyShapeThenFixed) {
  AdamState st;
  EXPECT_NO_THROW(adam_transform(Vec::Ones(3), st));
  EXPECT_THROW(adam_transform(Vec::Ones(4), st), Error);
}

}  // namespace
}  // namespace guidelab
