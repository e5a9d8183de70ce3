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

#ifndef CTXBIAS_PURIFY_HPP_
#define CTXBIAS_PURIFY_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ctxbias/corpus.hpp"
#include "ctxbias/tensor.hpp"

namespace ctxbias {

struct PurifyParams {
  int group_size = 75;
  int n_r = 2;
  double thres_list = 0.5;
  int n_top = 10;
  std::uint64_t shuffle_seed = 0;

  void validate() const;
};

// Scores of one group. q_phr has |group| + 1 columns: column 0 is the
// no-bias entry, column i + 1 is group[i].
struct GroupScores {
  VectorXd q_list;
  MatrixXd q_phr;
};

// Scores a group of list indices (real phrases only) against the utterance;
// the no-bias entry is implied.
using GroupScorer = std::function<GroupScores(std::span<const int> group)>;

struct PurifyRound {
  int round = 0;
  std::vector<std::vector<int>> groups;   // list indices
  std::vector<std::vector<int>> winners;  // list indices, per group
};

struct PurifyResult {
  std::vector<int> kept;  // ascending list indices, no-bias first
  std::vector<PurifyRound> audit;
  int m_pur() const { return static_cast<int>(kept.size()); }
};

// Seeded shuffle of `items` sliced into ceil(n / group_size) contiguous
// groups; the last group may be short.
std::vector<std::vector<int>> group_phrases(const std::vector<int>& items, int group_size,
                                            std::uint64_t seed);
// Groups the indices [0, m).
std::vector<std::vector<int>> group_phrases(int m, int group_size, std::uint64_t seed);

// Group-local winners: at every step whose list correlation exceeds
// `thres_list`, the `n_top` phrases with the largest masked phrase
// correlation (ties to the smaller index); union over steps, ascending.
std::vector<int> select_winners(const VectorXd& q_list, const MatrixXd& q_phr, double thres_list,
                                int n_top);

// Group competitive purification over a list of `list_size` entries. Rounds
// run while fewer than n_r rounds have passed and more than one group is
// needed, so a list that fits in one group is returned whole.
PurifyResult gcp(int list_size, const GroupScorer& scorer, const PurifyParams& params);

// Once competitive purification: a single competition over the whole list.
PurifyResult ocp(int list_size, const GroupScorer& scorer, const PurifyParams& params);

struct RestrictedPhi {
  PhiMask phi;                      // kept rows, in `kept` order
  std::vector<bool> active_tokens;  // tokens of at least one kept phrase
};

RestrictedPhi restrict_phi(const PhiMask& phi, const std::vector<int>& kept);

}  // namespace ctxbias

#endif  // CTXBIAS_PURIFY_HPP_
