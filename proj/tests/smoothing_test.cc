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

#include <random>

#include "ctxbias/simbank.hpp"
#include "ctxbias/smoothing.hpp"
#include "test_support.hpp"

namespace ctxbias {
namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

TEST(TriangularSmooth, HandConvolution) {
  VectorXd out = triangular_smooth(vec({0, 1, 0}), SmoothingParams{0.6});
  EXPECT_NEAR(out(0), 0.2, 1e-12);
  EXPECT_NEAR(out(1), 0.6, 1e-12);
  EXPECT_NEAR(out(2), 0.2, 1e-12);
}

TEST(TriangularSmooth, ConstantsAndIdentity) {
  VectorXd c = VectorXd::Constant(7, 0.37);
  EXPECT_TRUE(triangular_smooth(c, SmoothingParams{0.6}).isApprox(c, 1e-15));
  VectorXd q = (VectorXd::Random(9).array() * 0.5 + 0.5).matrix();
  EXPECT_EQ(triangular_smooth(q, SmoothingParams{1.0}), q);
  VectorXd one = vec({0.8});
  EXPECT_NEAR(triangular_smooth(one, SmoothingParams{0.3})(0), 0.8, 1e-15);
}

TEST(TriangularSmooth, ShiftEquivariantAwayFromEdges) {
  VectorXd q = VectorXd::Zero(12);
  q(4) = 0.9;
  q(5) = 0.4;
  VectorXd shifted = VectorXd::Zero(12);
  shifted(6) = 0.9;
  shifted(7) = 0.4;
  VectorXd a = triangular_smooth(q, SmoothingParams{}), b = triangular_smooth(shifted, SmoothingParams{});
  for (int u = 2; u < 10; ++u) EXPECT_NEAR(a(u), b(u + 2), 1e-15);
  for (int u = 0; u < 12; ++u) {
    EXPECT_GE(a(u), 0.0);
    EXPECT_LE(a(u), 1.0);
  }
}

TEST(EstimatePhraseLength, FloorRoundingAndCap) {
  EXPECT_EQ(estimate_phrase_length(VectorXd::Zero(5)), 1);
  EXPECT_EQ(estimate_phrase_length(vec({1.2, 1.2})), 2);
  EXPECT_EQ(estimate_phrase_length(vec({1.0, 1.0, 0.5})), 3);
  EXPECT_EQ(estimate_phrase_length(vec({1.0, 1.0, 0.49})), 2);
  EXPECT_EQ(estimate_phrase_length(VectorXd::Ones(4)), 4);
  EXPECT_EQ(estimate_phrase_length(VectorXd::Constant(3, 1.4)), 3);
}

TEST(EstimatePhraseLength, TwoTokenSpanAtZeroNoise) {
  VectorXd q = vec({0, 0, 1, 1, 0, 0});
  EXPECT_EQ(estimate_phrase_length(triangular_smooth(q, SmoothingParams{})), 2);
}

TEST(LocateWindow, Examples) {
  VectorXd q = vec({0, 1, 1, 0, 0});
  EXPECT_EQ(locate_window(q, 2, 1), 1);
  for (int u = 0; u < 5; ++u) EXPECT_EQ(locate_window(q, 1, u), u);
  VectorXd flat = VectorXd::Constant(8, 0.3);
  EXPECT_EQ(locate_window(flat, 3, 5), 3);
  EXPECT_EQ(locate_window(flat, 3, 0), 0);
}

TEST(LocateWindow, ClipsToValidStarts) {
  VectorXd q = vec({0, 0, 0, 0, 1, 1});
  EXPECT_EQ(locate_window(q, 2, 5), 4);
  EXPECT_EQ(locate_window(q, 3, 5), 3);
  EXPECT_THROW(locate_window(q, 7, 0), Error);
  EXPECT_THROW(locate_window(q, 2, 6), Error);
}

TEST(LocateWindow, MatchesBruteForce) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 15);
    VectorXd q(n);
    for (int i = 0; i < n; ++i) q(i) = std::round(unit(rng) * 4) / 4;
    const int len = 1 + static_cast<int>(rng() % n);
    for (int u = 0; u < n; ++u) {
      int best = -1;
      double best_sum = -1;
      for (int j = std::max(0, u - len + 1); j <= std::min(n - len, u + len - 1); ++j) {
        double s = q.segment(j, len).sum();
        if (s > best_sum + 1e-12) {
          best_sum = s;
          best = j;
        }
      }
      if (best < 0) best = std::clamp(u, 0, n - len);
      ASSERT_EQ(locate_window(q, len, u), best) << "n=" << n << " len=" << len << " u=" << u;
    }
  }
}

TEST(GuidedPhraseSmooth, UnitWindowIsElementwiseTanh) {
  MatrixXd q_phr = MatrixXd::Random(5, 3).cwiseAbs();
  VectorXd q_list = vec({0.2, 0.1, 0.1, 0.05, 0.0});
  VectorXd q_slist = triangular_smooth(q_list, SmoothingParams{});
  ASSERT_EQ(estimate_phrase_length(q_slist), 1);
  MatrixXd out = guided_phrase_smooth(q_phr, q_list, q_slist);
  EXPECT_TRUE(out.isApprox(q_phr.array().tanh().matrix(), 1e-15));
}

TEST(GuidedPhraseSmooth, ZeroInputGivesZero) {
  VectorXd q_list = vec({0, 1, 1, 0});
  MatrixXd out = guided_phrase_smooth(MatrixXd::Zero(4, 3), q_list, triangular_smooth(q_list, SmoothingParams{}));
  EXPECT_EQ(out, MatrixXd::Zero(4, 3));
}

TEST(GuidedPhraseSmooth, ZeroNoiseSpanSelectsGold) {
  Vocabulary vocab = testing::cjk_vocab(30);
  BiasingList list = BiasingList::from_phrases({{2, 3}, {4, 5}, {6, 7}});
  Utterance utt = testing::span_utterance("u", list, 2, 3, 8, 20);
  CorrelationBundle b = ScorerBank(utt, list, vocab, NoiseSpec{}).score_all(false);
  VectorXd q_slist = triangular_smooth(b.q_list, SmoothingParams{});
  MatrixXd out = guided_phrase_smooth(b.q_phr, b.q_list, q_slist);
  for (int u : {3, 4}) {
    Eigen::Index arg;
    out.row(u).maxCoeff(&arg);
    EXPECT_EQ(arg, 2);
  }
  EXPECT_GE(out.minCoeff(), 0.0);
  EXPECT_LT(out.maxCoeff(), 1.0);
}

TEST(GuidedPhraseSmooth, WindowSumsAtSelectedStart) {
  MatrixXd q_phr(5, 2);
  q_phr << 0.1, 0.9,
           0.2, 0.8,
           0.7, 0.3,
           0.6, 0.4,
           0.5, 0.5;
  VectorXd q_list = vec({0.0, 0.2, 0.9, 0.8, 0.1});
  VectorXd q_slist = triangular_smooth(q_list, SmoothingParams{});
  const int len = estimate_phrase_length(q_slist);
  ASSERT_EQ(len, 2);
  MatrixXd out = guided_phrase_smooth(q_phr, q_list, q_slist);
  for (int u = 0; u < 5; ++u) {
    int j = locate_window(q_list, len, u);
    RowVectorXd expect = (q_phr.row(j) + q_phr.row(j + 1)).array().tanh();
    EXPECT_TRUE(out.row(u).isApprox(expect, 1e-15));
  }
}

// Per-step margin between the two largest phrase scores.
double margin(const RowVectorXd& row) {
  RowVectorXd r = row;
  std::sort(r.data(), r.data() + r.size(), std::greater<>());
  return r(0) - r(1);
}

// A one-hot row has margin 1 and tanh of a window sum is below 1, so the
// zero-noise margin after smoothing is exactly tanh(L') rather than >= 1.
TEST(GuidedPhraseSmooth, ZeroNoiseMarginIsTanhOfLength) {
  Vocabulary vocab = testing::cjk_vocab(60);
  BiasingList list = BiasingList::from_phrases({{2, 3}, {4, 5, 6}, {7, 8, 9, 10}, {11, 12}});
  for (int m = 1; m <= 4; ++m) {
    Utterance utt = testing::span_utterance("z", list, m, 2, 12, 50);
    CorrelationBundle b = ScorerBank(utt, list, vocab, NoiseSpec{}).score_all(false);
    VectorXd q_slist = triangular_smooth(b.q_list, SmoothingParams{});
    const int len = estimate_phrase_length(q_slist);
    EXPECT_EQ(len, list.phrase(m).length());
    MatrixXd out = guided_phrase_smooth(b.q_phr, b.q_list, q_slist);
    const auto& sp = utt.spans[0];
    for (int u = sp.start; u < sp.end; ++u) {
      EXPECT_DOUBLE_EQ(margin(b.q_phr.row(u)), 1.0);
      EXPECT_NEAR(margin(out.row(u)), std::tanh(static_cast<double>(len)), 1e-12);
      Eigen::Index arg;
      out.row(u).maxCoeff(&arg);
      EXPECT_EQ(arg, m);
    }
  }
}

TEST(GuidedPhraseSmooth, JitteredSpansKeepGoldArgmax) {
  Vocabulary vocab = testing::cjk_vocab(60);
  std::vector<TokenSeq> phrases;
  for (int i = 0; i < 12; ++i) phrases.push_back({2 + 2 * i, 3 + 2 * i, 40 + i % 5});
  BiasingList list = BiasingList::from_phrases(phrases);
  int before = 0, after = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    NoiseSpec spec;
    spec.seed = seed;
    spec.score_jitter_sigma = 0.15;
    const int m = 1 + static_cast<int>(seed % 12);
    Utterance utt = testing::span_utterance("u" + std::to_string(seed), list, m, 2 + seed % 4, 10, 55);
    CorrelationBundle b = ScorerBank(utt, list, vocab, spec).score_all(false);
    MatrixXd out = guided_phrase_smooth(b.q_phr, b.q_list, triangular_smooth(b.q_list, SmoothingParams{}));
    const auto& sp = utt.spans[0];
    for (int u = sp.start; u < sp.end; ++u) {
      Eigen::Index a0, a1;
      b.q_phr.row(u).maxCoeff(&a0);
      out.row(u).maxCoeff(&a1);
      before += a0 == m;
      after += a1 == m;
    }
  }
  EXPECT_GE(after, before);
}

TEST(GuidedPhraseSmooth, RejectsMismatchedLengths) {
  EXPECT_THROW(guided_phrase_smooth(MatrixXd::Zero(3, 2), VectorXd::Zero(4), VectorXd::Zero(3)), Error);
}

}  // namespace
}  // namespace ctxbias
