// Copyright (c) 2026 The ctxbias Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "ctxbias/attention.hpp"
#include "ctxbias/losses.hpp"
#include "ctxbias/simbank.hpp"
#include "test_support.hpp"

namespace ctxbias {
namespace {

constexpr double kStep = 1e-5;

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

// Central difference of f along coordinate i of x.
double central(const std::function<double(const VectorXd&)>& f, VectorXd x, Eigen::Index i) {
  const double x0 = x(i);
  x(i) = x0 + kStep;
  const double up = f(x);
  x(i) = x0 - kStep;
  const double down = f(x);
  return (up - down) / (2 * kStep);
}

TEST(FocalLoss, HandValue) {
  VectorXd q(1), y(1);
  q << 0.5;
  y << 1;
  EXPECT_NEAR(focal_loss(q, y, FocalParams{}), 0.75 * 0.25 * std::log(2.0), 1e-12);
  EXPECT_NEAR(focal_loss(q, y, FocalParams{}), 0.12996, 1e-5);
}

TEST(FocalLoss, PerfectPredictionTendsToZero) {
  VectorXd y(1);
  y << 1;
  double prev = INFINITY;
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-5}) {
    VectorXd q(1);
    q << 1 - eps;
    double l = focal_loss(q, y, FocalParams{0.3, 1.5});
    EXPECT_LT(l, prev);
    prev = l;
  }
  EXPECT_LT(prev, 1e-12);
}

TEST(FocalLoss, GammaZeroIsHalfCrossEntropy) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int trial = 0; trial < 100; ++trial) {
    VectorXd q(7), y(7);
    double bce = 0.0;
    for (int i = 0; i < 7; ++i) {
      q(i) = u(rng);
      y(i) = rng() % 2;
      bce -= y(i) * std::log(q(i)) + (1 - y(i)) * std::log(1 - q(i));
    }
    EXPECT_NEAR(focal_loss(q, y, FocalParams{0.5, 0.0}), 0.5 * bce, 1e-12);
  }
}

TEST(FocalLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  for (int trial = 0; trial < 100; ++trial) {
    FocalParams p{std::uniform_real_distribution<double>(0.05, 0.95)(rng),
                  std::uniform_real_distribution<double>(0.0, 3.0)(rng)};
    VectorXd q(5), y(5);
    for (int i = 0; i < 5; ++i) {
      q(i) = u(rng);
      y(i) = rng() % 2;
    }
    VectorXd g = focal_loss_grad(q, y, p);
    auto f = [&](const VectorXd& x) { return focal_loss(x, y, p); };
    for (int i = 0; i < 5; ++i) ASSERT_LE(rel_err(g(i), central(f, q, i)), 1e-4) << trial;
  }
}

TEST(FocalLoss, GradientIsZeroOnTheClamp) {
  VectorXd q(2), y(2);
  q << 0.0, 1.0;
  y << 1, 0;
  EXPECT_EQ(focal_loss_grad(q, y, FocalParams{}), VectorXd::Zero(2));
  EXPECT_TRUE(std::isfinite(focal_loss(q, y, FocalParams{})));
}

TEST(FocalParams, Validation) {
  EXPECT_THROW((FocalParams{0.0, 2.0}).validate(), Error);
  EXPECT_THROW((FocalParams{0.5, -1.0}).validate(), Error);
  EXPECT_NO_THROW(FocalParams{}.validate());
}

TEST(PhrasePool, ZeroAndOneHotLabels) {
  std::mt19937_64 rng(3);
  MatrixXd e = MatrixXd::Random(6, 4);
  EXPECT_EQ(phrase_pool(e, VectorXd::Zero(6)), VectorXd::Zero(4));
  VectorXd y = VectorXd::Zero(6);
  y(2) = 1;
  EXPECT_EQ(phrase_pool(e, y), e.row(2).transpose());
}

TEST(PhrasePool, MatchesLoopOracle) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    MatrixXd e = MatrixXd::Random(7, 5);
    VectorXd y(7);
    for (int i = 0; i < 7; ++i) y(i) = rng() % 2;
    VectorXd got = phrase_pool(e, y);
    for (int k = 0; k < 5; ++k) {
      double acc = 0.0;
      for (int u = 0; u < 7; ++u) acc += y(u) * e(u, k);
      ASSERT_NEAR(got(k), acc, 1e-14);
    }
  }
}

TEST(CosineSims, ParallelOrthogonalAndRandom) {
  MatrixXd p(2, 3);
  p << 2, 0, 0,
       0, 5, 0;
  VectorXd e(3);
  e << 3, 0, 0;
  VectorXd s = cosine_sims(e, p);
  EXPECT_DOUBLE_EQ(s(0), 1.0);
  EXPECT_DOUBLE_EQ(s(1), 0.0);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 100; ++trial) {
    MatrixXd phr(6, 8);
    VectorXd q(8);
    for (Eigen::Index i = 0; i < phr.size(); ++i) phr.data()[i] = n(rng);
    for (int i = 0; i < 8; ++i) q(i) = n(rng);
    VectorXd got = cosine_sims(q, phr);
    for (int m = 0; m < 6; ++m) {
      double dot = 0, nq = 0, np = 0;
      for (int k = 0; k < 8; ++k) {
        dot += q(k) * phr(m, k);
        nq += q(k) * q(k);
        np += phr(m, k) * phr(m, k);
      }
      ASSERT_NEAR(got(m), dot / std::sqrt(nq * np), 1e-12);
      ASSERT_LE(std::abs(got(m)), 1.0 + 1e-12);
    }
  }
}

TEST(CosineSims, ZeroNormIsADomainError) {
  MatrixXd p = MatrixXd::Identity(2, 2);
  try {
    cosine_sims(VectorXd::Zero(2), p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "domain");
  }
  p.row(1).setZero();
  EXPECT_THROW(cosine_sims(VectorXd::Ones(2), p), Error);
}

TEST(ContrastiveLoss, Examples) {
  VectorXd s(3), y(3);
  s << 1, 0, 0;
  y << 1, 0, 0;
  EXPECT_DOUBLE_EQ(contrastive_loss(s, y), -1.0);
  VectorXd s2(2), y2(2);
  s2 << 0.5, 0.5;
  y2 << 1, 0;
  EXPECT_DOUBLE_EQ(contrastive_loss(s2, y2), 0.0);
}

TEST(ContrastiveLoss, LoopOracleLinearityAndGradient) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    VectorXd s(9), y(9);
    double acc = 0.0;
    for (int i = 0; i < 9; ++i) {
      s(i) = u(rng);
      y(i) = rng() % 2;
      acc += y(i) ? -s(i) : s(i);
    }
    ASSERT_NEAR(contrastive_loss(s, y), acc, 1e-14);
    const double a = 3.0 * u(rng);
    ASSERT_NEAR(contrastive_loss((a * s).eval(), y), a * contrastive_loss(s, y), 1e-12);
    VectorXd g = contrastive_loss_grad(s, y);
    auto f = [&](const VectorXd& x) { return contrastive_loss(x, y); };
    for (int i = 0; i < 9; ++i) ASSERT_LE(rel_err(g(i), central(f, s, i)), 1e-4);
  }
}

TEST(TokenCe, OneHotAndUniform) {
  MatrixXd onehot = MatrixXd::Zero(3, 4);
  onehot(0, 1) = onehot(1, 3) = onehot(2, 0) = 1.0;
  EXPECT_DOUBLE_EQ(token_ce(onehot, {1, 3, 0}), 0.0);
  MatrixXd uniform = MatrixXd::Constant(3, 10, 0.1);
  EXPECT_NEAR(token_ce(uniform, {0, 5, 9}), 3 * std::log(10.0), 1e-12);
  EXPECT_NEAR(token_ce(uniform, {0, 5, 9}), 6.9078, 1e-4);
  EXPECT_THROW(token_ce(uniform, {0, 5, 10}), Error);
  EXPECT_THROW(token_ce(uniform, {0, 5}), Error);
}

TEST(TokenCe, LoopOracleAndGradient) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    MatrixXd q = (MatrixXd::Random(4, 6).array() + 1.5).matrix();
    for (int r = 0; r < 4; ++r) q.row(r) /= q.row(r).sum();
    TokenSeq y(4);
    double acc = 0.0;
    for (int u = 0; u < 4; ++u) {
      y[u] = static_cast<int>(rng() % 6);
      acc -= std::log(q(u, y[u]));
    }
    ASSERT_NEAR(token_ce(q, y), acc, 1e-12);
    MatrixXd g = token_ce_grad(q, y);
    for (int u = 0; u < 4; ++u) {
      for (int v = 0; v < 6; ++v) {
        MatrixXd hi = q, lo = q;
        hi(u, v) += kStep;
        lo(u, v) -= kStep;
        double fd = (token_ce(hi, y) - token_ce(lo, y)) / (2 * kStep);
        ASSERT_LE(rel_err(g(u, v), fd), 1e-4);
      }
    }
  }
}

TEST(TotalLoss, Sums) {
  EXPECT_EQ(total_loss(0.0, 0.0, 0.0), 0.0);
  EXPECT_EQ(total_loss(1.0, 2.0, 3.0), 6.0);
}

TEST(TotalLoss, ZeroNoiseBundlesAreNearlyFree) {
  Vocabulary vocab = testing::cjk_vocab(40);
  BiasingList list = BiasingList::from_phrases({{2, 3}, {4, 5, 6}, {7, 8}, {9, 10}});
  double total = 0.0;
  for (int i = 0; i < 10; ++i) {
    Utterance utt = testing::span_utterance("utt" + std::to_string(i), list, 1 + i % 4, i % 3,
                                            9, 20 + i);
    ReferenceLabels y = make_labels(utt, list);
    CorrelationBundle b = synth_bundle(utt, list, y, NoiseSpec{}, vocab);
    EmbeddingBank emb = synth_embeddings(utt, list, NoiseSpec{}, 32);
    auto att = cross_attention(emb.acoustic, emb.phrase, 1);
    VectorXd pooled = phrase_pool(att.biased, y.y_list);
    double l_phr = contrastive_loss(cosine_sims(pooled, emb.phrase), y.y_phr);
    total += total_loss(focal_loss(b.q_list, y.y_list, FocalParams{}), l_phr,
                        token_ce(b.q_tok, y.y_tok));
  }
  EXPECT_LE(total, 1e-3);
}

}  // namespace
}  // namespace ctxbias
