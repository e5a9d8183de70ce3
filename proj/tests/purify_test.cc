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

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "ctxbias/harness.hpp"
#include "ctxbias/purify.hpp"
#include "ctxbias/simbank.hpp"
#include "test_support.hpp"

namespace ctxbias {
namespace {

GroupScorer bank_scorer(const ScorerBank& bank) {
  return [&bank](std::span<const int> group) {
    std::vector<int> ids{BiasingList::kNoBiasIndex};
    ids.insert(ids.end(), group.begin(), group.end());
    CorrelationBundle b = bank.score(ids, false);
    return GroupScores{std::move(b.q_list), std::move(b.q_phr)};
  };
}

std::vector<int> flatten(const std::vector<std::vector<int>>& groups) {
  std::vector<int> all;
  for (const auto& g : groups) all.insert(all.end(), g.begin(), g.end());
  std::sort(all.begin(), all.end());
  return all;
}

TEST(GroupPhrases, SizesAndCoverage) {
  auto two = group_phrases(150, 75, 9);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0].size(), 75u);
  EXPECT_EQ(two[1].size(), 75u);
  auto one = group_phrases(10, 75, 9);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].size(), 10u);
  auto odd = group_phrases(1196, 75, 9);
  EXPECT_EQ(odd.size(), 16u);
  EXPECT_EQ(odd.back().size(), 1196u - 15 * 75);
  std::vector<int> all(1196);
  std::iota(all.begin(), all.end(), 0);
  EXPECT_EQ(flatten(odd), all);
  EXPECT_THROW(group_phrases(0, 75, 1), Error);
  EXPECT_THROW(group_phrases(5, 0, 1), Error);
}

TEST(GroupPhrases, SeededShuffle) {
  EXPECT_EQ(group_phrases(200, 75, 3), group_phrases(200, 75, 3));
  EXPECT_NE(group_phrases(200, 75, 3), group_phrases(200, 75, 4));
  std::vector<int> items{10, 20, 30, 40, 50};
  EXPECT_EQ(flatten(group_phrases(items, 2, 1)), items);
}

TEST(SelectWinners, Examples) {
  MatrixXd q_phr = MatrixXd::Constant(3, 4, 0.25);
  EXPECT_TRUE(select_winners(VectorXd::Constant(3, 0.5), q_phr, 0.5, 10).empty());
  VectorXd q_list = VectorXd::Zero(3);
  q_list(1) = 0.9;
  q_phr.row(1) << 0, 0, 1, 0;
  EXPECT_EQ(select_winners(q_list, q_phr, 0.5, 1), std::vector<int>{2});
  EXPECT_EQ(select_winners(q_list, q_phr, 0.5, 10), (std::vector<int>{0, 1, 2, 3}));
  MatrixXd tie = MatrixXd::Constant(3, 4, 0.25);
  EXPECT_EQ(select_winners(q_list, tie, 0.5, 2), (std::vector<int>{0, 1}));
}

TEST(SelectWinners, DisjointStepsUnion) {
  const int width = 25;
  MatrixXd q_phr = MatrixXd::Zero(2, width);
  for (int i = 0; i < 10; ++i) {
    q_phr(0, i) = 1.0 - 0.01 * i;
    q_phr(1, 24 - i) = 1.0 - 0.01 * i;
  }
  std::vector<int> got = select_winners(VectorXd::Ones(2), q_phr, 0.5, 10);
  std::vector<int> expect;
  for (int i = 0; i < 10; ++i) expect.push_back(i);
  for (int i = 15; i < 25; ++i) expect.push_back(i);
  EXPECT_EQ(got, expect);
}

TEST(SelectWinners, MatchesBruteForceRanking) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int steps = 1 + static_cast<int>(rng() % 6), width = 1 + static_cast<int>(rng() % 30);
    const int n_top = 1 + static_cast<int>(rng() % 12);
    VectorXd q_list = VectorXd::NullaryExpr(steps, [&] { return (rng() % 10) / 9.0; });
    MatrixXd q_phr = MatrixXd::NullaryExpr(steps, width, [&] { return (rng() % 7) / 6.0; });
    std::set<int> expect;
    for (int u = 0; u < steps; ++u) {
      if (!(q_list(u) > 0.5)) continue;
      for (int i = 0; i < width; ++i) {
        int better = 0;
        for (int j = 0; j < width; ++j)
          better += q_phr(u, j) > q_phr(u, i) || (q_phr(u, j) == q_phr(u, i) && j < i);
        if (better < n_top) expect.insert(i);
      }
    }
    ASSERT_EQ(select_winners(q_list, q_phr, 0.5, n_top), std::vector<int>(expect.begin(), expect.end()));
  }
}

class PurifyFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ExperimentConfig cfg;
    cfg.corpus.n_utterances = 12;
    cfg.list_lengths = {51, 201, 1196};
    corpus_ = new Corpus(generate_corpus(cfg, 1));
  }
  static void TearDownTestSuite() {
    delete corpus_;
    corpus_ = nullptr;
  }
  static Corpus* corpus_;
};
Corpus* PurifyFixture::corpus_ = nullptr;

TEST_F(PurifyFixture, ZeroNoiseRetainsGold) {
  for (int m : {51, 201, 1196}) {
    BiasingList list = corpus_->list(m);
    for (const Utterance& utt : corpus_->utterances) {
      ScorerBank bank(utt, list, corpus_->vocab, NoiseSpec{});
      PurifyParams p;
      p.shuffle_seed = 5;
      PurifyResult g = gcp(list.size(), bank_scorer(bank), p);
      PurifyResult o = ocp(list.size(), bank_scorer(bank), p);
      for (const auto& sp : utt.spans) {
        EXPECT_TRUE(std::binary_search(g.kept.begin() + 1, g.kept.end(), sp.phrase)) << utt.id << " M=" << m;
        EXPECT_TRUE(std::binary_search(o.kept.begin() + 1, o.kept.end(), sp.phrase)) << utt.id << " M=" << m;
      }
      EXPECT_EQ(g.kept.front(), BiasingList::kNoBiasIndex);
      EXPECT_LE(g.m_pur(), list.size());
    }
  }
}

TEST_F(PurifyFixture, RoundCountAndBounds) {
  BiasingList list = corpus_->list(1196);
  for (const Utterance& utt : corpus_->utterances) {
    NoiseSpec spec;
    spec.seed = 3;
    spec.score_jitter_sigma = 0.1;
    spec.distractor_boost = 0.3;
    ScorerBank bank(utt, list, corpus_->vocab, spec);
    PurifyParams p;
    p.shuffle_seed = 17;
    PurifyResult r = gcp(list.size(), bank_scorer(bank), p);
    ASSERT_GE(r.audit.size(), 1u);
    ASSERT_LE(r.audit.size(), static_cast<size_t>(p.n_r));
    size_t previous = list.num_real();
    for (const auto& round : r.audit) {
      size_t winners = 0;
      for (const auto& w : round.winners) {
        EXPECT_LE(w.size(), static_cast<size_t>(p.n_top * utt.length()));
        winners += w.size();
      }
      EXPECT_EQ(flatten(round.groups).size(), previous);
      EXPECT_LE(winners, previous);
      EXPECT_LE(winners, round.groups.size() * p.n_top * static_cast<size_t>(utt.length()));
      previous = winners;
    }
    EXPECT_EQ(static_cast<size_t>(r.m_pur()), previous + 1);
    std::vector<int> sorted = r.kept;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sorted, r.kept);
    EXPECT_EQ(std::adjacent_find(r.kept.begin(), r.kept.end()), r.kept.end());
  }
}

TEST_F(PurifyFixture, SmallListSkipsCompetition) {
  BiasingList list = corpus_->list(51);
  ScorerBank bank(corpus_->utterances[0], list, corpus_->vocab, NoiseSpec{});
  PurifyResult r = gcp(list.size(), bank_scorer(bank), PurifyParams{});
  EXPECT_TRUE(r.audit.empty());
  std::vector<int> all(list.size());
  std::iota(all.begin(), all.end(), 0);
  EXPECT_EQ(r.kept, all);
}

TEST_F(PurifyFixture, OnceCompetitionBound) {
  BiasingList list = corpus_->list(51);
  // Exactly one step clears the list threshold.
  MatrixXd q_phr = MatrixXd::Random(6, list.size()).cwiseAbs();
  VectorXd q_list = VectorXd::Zero(6);
  q_list(3) = 0.95;
  GroupScorer scorer = [&](std::span<const int> group) {
    MatrixXd cols(6, static_cast<Eigen::Index>(group.size()) + 1);
    cols.col(0) = q_phr.col(0);
    for (size_t i = 0; i < group.size(); ++i) cols.col(i + 1) = q_phr.col(group[i]);
    return GroupScores{q_list, cols};
  };
  PurifyResult r = ocp(list.size(), scorer, PurifyParams{});
  EXPECT_LE(r.m_pur(), 11);
  EXPECT_EQ(r.m_pur(), 11);
  ASSERT_EQ(r.audit.size(), 1u);
  EXPECT_EQ(r.audit[0].groups.size(), 1u);
}

TEST_F(PurifyFixture, OnceCompetitionIsOneGlobalSelection) {
  BiasingList list = corpus_->list(201);
  NoiseSpec spec;
  spec.seed = 8;
  spec.score_jitter_sigma = 0.2;
  spec.distractor_boost = 0.5;
  for (const Utterance& utt : corpus_->utterances) {
    ScorerBank bank(utt, list, corpus_->vocab, spec);
    PurifyParams p;
    PurifyResult r = ocp(list.size(), bank_scorer(bank), p);
    std::vector<int> ids(list.size());
    std::iota(ids.begin(), ids.end(), 0);
    CorrelationBundle b = bank.score(ids, false);
    std::vector<int> expect{0};
    for (int i : select_winners(b.q_list, b.q_phr.rightCols(list.num_real()), p.thres_list, p.n_top))
      expect.push_back(i + 1);
    EXPECT_EQ(r.kept, expect);
  }
}

TEST_F(PurifyFixture, GroupedWithOneRoundOverWholeListMatchesOnce) {
  // With group_size covering every real phrase the guard sees G = 1 and
  // keeps the list whole; one group short of that forces a single round.
  BiasingList list = corpus_->list(201);
  const Utterance& utt = corpus_->utterances[2];
  ScorerBank bank(utt, list, corpus_->vocab, NoiseSpec{});
  PurifyParams whole;
  whole.group_size = list.num_real();
  whole.n_r = 1;
  EXPECT_EQ(gcp(list.size(), bank_scorer(bank), whole).m_pur(), list.size());
  EXPECT_LT(ocp(list.size(), bank_scorer(bank), whole).m_pur(), list.size());
}

TEST_F(PurifyFixture, Deterministic) {
  BiasingList list = corpus_->list(1196);
  NoiseSpec spec;
  spec.seed = 4;
  spec.score_jitter_sigma = 0.1;
  ScorerBank bank(corpus_->utterances[1], list, corpus_->vocab, spec);
  PurifyParams p;
  p.shuffle_seed = 99;
  PurifyResult a = gcp(list.size(), bank_scorer(bank), p), b = gcp(list.size(), bank_scorer(bank), p);
  EXPECT_EQ(a.kept, b.kept);
  ASSERT_EQ(a.audit.size(), b.audit.size());
  for (size_t i = 0; i < a.audit.size(); ++i) {
    EXPECT_EQ(a.audit[i].groups, b.audit[i].groups);
    EXPECT_EQ(a.audit[i].winners, b.audit[i].winners);
  }
}

TEST(PurifyParams, Validation) {
  PurifyParams p;
  EXPECT_NO_THROW(p.validate());
  p.n_top = 0;
  EXPECT_THROW(p.validate(), Error);
  p = PurifyParams{};
  p.thres_list = 1.5;
  EXPECT_THROW(p.validate(), Error);
  p = PurifyParams{};
  p.group_size = 0;
  EXPECT_THROW(p.validate(), Error);
  p = PurifyParams{};
  p.n_r = 0;
  EXPECT_THROW(p.validate(), Error);
}

TEST(RestrictPhi, Cases) {
  Vocabulary vocab = testing::cjk_vocab(20);
  BiasingList list = BiasingList::from_phrases({{2, 3}, {4, 5, 6}, {3, 7}, {8, 9}});
  PhiMask phi = build_phi(list, vocab);
  std::vector<int> all{0, 1, 2, 3, 4};
  RestrictedPhi same = restrict_phi(phi, all);
  EXPECT_EQ(same.phi.matrix, phi.matrix);
  RestrictedPhi none = restrict_phi(phi, {0});
  for (int v = 0; v < vocab.size(); ++v) EXPECT_EQ(none.active_tokens[v], v == Vocabulary::kNoBias);
  EXPECT_THROW(restrict_phi(phi, {0, 5}), Error);
}

TEST(RestrictPhi, EqualsRebuiltSublist) {
  Vocabulary vocab = testing::cjk_vocab(40);
  std::mt19937_64 rng(21);
  std::vector<TokenSeq> phrases;
  for (int i = 0; i < 30; ++i) phrases.push_back({2 + i, 2 + (i * 7 + 3) % 40, 2 + (i * 13 + 5) % 40});
  BiasingList list = BiasingList::from_phrases(phrases);
  PhiMask phi = build_phi(list, vocab);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> kept{0};
    for (int i = 1; i < list.size(); ++i)
      if (rng() % 3 == 0) kept.push_back(i);
    RestrictedPhi r = restrict_phi(phi, kept);
    PhiMask rebuilt = build_phi(list.subset(kept), vocab);
    ASSERT_EQ(r.phi.matrix, rebuilt.matrix);
    for (int v = 0; v < vocab.size(); ++v) ASSERT_EQ(r.active_tokens[v], rebuilt.matrix.col(v).any());
  }
}

}  // namespace
}  // namespace ctxbias
