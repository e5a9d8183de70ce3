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

#include "ctxbias/purify.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "ctxbias/rng.hpp"

namespace ctxbias {

void PurifyParams::validate() const {
  if (group_size < 1) throw Error("config", "group_size must be positive");
  if (n_r < 1) throw Error("config", "n_r must be positive");
  if (!(thres_list >= 0.0 && thres_list <= 1.0)) throw Error("config", "thres_list must be in [0, 1]");
  if (n_top < 1) throw Error("config", "n_top must be positive");
}

std::vector<std::vector<int>> group_phrases(const std::vector<int>& items, int group_size,
                                            std::uint64_t seed) {
  if (group_size < 1) throw Error("config", "group_size must be positive");
  std::vector<int> order = items;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<int>> groups;
  for (size_t begin = 0; begin < order.size(); begin += group_size) {
    size_t end = std::min(order.size(), begin + static_cast<size_t>(group_size));
    groups.emplace_back(order.begin() + begin, order.begin() + end);
  }
  return groups;
}

std::vector<std::vector<int>> group_phrases(int m, int group_size, std::uint64_t seed) {
  if (m < 1) throw Error("config", "group_phrases: need at least one item");
  std::vector<int> items(m);
  std::iota(items.begin(), items.end(), 0);
  return group_phrases(items, group_size, seed);
}

std::vector<int> select_winners(const VectorXd& q_list, const MatrixXd& q_phr, double thres_list,
                                int n_top) {
  require_shape(q_phr.rows() == q_list.size(), "select_winners: step counts differ");
  const int width = static_cast<int>(q_phr.cols());
  std::vector<char> won(width, 0);
  std::vector<int> order(width);
  for (Eigen::Index u = 0; u < q_list.size(); ++u) {
    if (!(q_list(u) > thres_list)) continue;
    std::iota(order.begin(), order.end(), 0);
    const int k = std::min(n_top, width);
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
      if (q_phr(u, a) != q_phr(u, b)) return q_phr(u, a) > q_phr(u, b);
      return a < b;
    });
    for (int i = 0; i < k; ++i) won[order[i]] = 1;
  }
  std::vector<int> out;
  for (int i = 0; i < width; ++i) {
    if (won[i]) out.push_back(i);
  }
  return out;
}

namespace {

int num_groups(size_t n, int group_size) {
  return static_cast<int>((n + group_size - 1) / group_size);
}

// One competition: score every group, keep its winners, merge.
std::vector<int> compete(const std::vector<std::vector<int>>& groups, const GroupScorer& scorer,
                         const PurifyParams& p, PurifyRound& log) {
  std::vector<int> merged;
  log.groups = groups;
  for (const auto& g : groups) {
    GroupScores s = scorer(g);
    require_shape(s.q_phr.cols() == static_cast<Eigen::Index>(g.size()) + 1,
                  "purify: scorer returned the wrong number of columns");
    std::vector<int> local = select_winners(s.q_list, s.q_phr.rightCols(g.size()), p.thres_list,
                                            p.n_top);
    std::vector<int> won;
    won.reserve(local.size());
    for (int i : local) won.push_back(g[i]);
    merged.insert(merged.end(), won.begin(), won.end());
    log.winners.push_back(std::move(won));
  }
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  return merged;
}

std::vector<int> real_indices(int list_size) {
  if (list_size < 1) throw Error("config", "purify: list must hold the no-bias entry");
  std::vector<int> ids(list_size - 1);
  std::iota(ids.begin(), ids.end(), 1);
  return ids;
}

PurifyResult finish(std::vector<int> candidates, std::vector<PurifyRound> audit) {
  PurifyResult r;
  r.kept.reserve(candidates.size() + 1);
  r.kept.push_back(BiasingList::kNoBiasIndex);
  std::sort(candidates.begin(), candidates.end());
  r.kept.insert(r.kept.end(), candidates.begin(), candidates.end());
  r.audit = std::move(audit);
  return r;
}

}  // namespace

PurifyResult gcp(int list_size, const GroupScorer& scorer, const PurifyParams& params) {
  params.validate();
  std::vector<int> candidates = real_indices(list_size);
  std::vector<PurifyRound> audit;
  int groups = num_groups(candidates.size(), params.group_size);
  for (int round = 1; round <= params.n_r && groups > 1; ++round) {
    PurifyRound log;
    log.round = round;
    auto split = group_phrases(candidates, params.group_size,
                               hash_key({params.shuffle_seed, static_cast<std::uint64_t>(round)}));
    candidates = compete(split, scorer, params, log);
    audit.push_back(std::move(log));
    groups = num_groups(candidates.size(), params.group_size);
  }
  return finish(std::move(candidates), std::move(audit));
}

PurifyResult ocp(int list_size, const GroupScorer& scorer, const PurifyParams& params) {
  params.validate();
  std::vector<int> candidates = real_indices(list_size);
  std::vector<PurifyRound> audit;
  if (!candidates.empty()) {
    PurifyRound log;
    log.round = 1;
    candidates = compete({candidates}, scorer, params, log);
    audit.push_back(std::move(log));
  }
  return finish(std::move(candidates), std::move(audit));
}

RestrictedPhi restrict_phi(const PhiMask& phi, const std::vector<int>& kept) {
  RestrictedPhi out;
  out.phi.matrix.resize(static_cast<Eigen::Index>(kept.size()), phi.vocab_size());
  out.active_tokens.assign(phi.vocab_size(), false);
  for (size_t i = 0; i < kept.size(); ++i) {
    if (kept[i] < 0 || kept[i] >= phi.num_phrases()) {
      throw Error("index", "restrict_phi: kept index out of range");
    }
    out.phi.matrix.row(static_cast<Eigen::Index>(i)) = phi.matrix.row(kept[i]);
    for (int v = 0; v < phi.vocab_size(); ++v) {
      if (phi.matrix(kept[i], v) != 0.0) out.active_tokens[v] = true;
    }
  }
  return out;
}

}  // namespace ctxbias
