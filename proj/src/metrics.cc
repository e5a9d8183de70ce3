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

#include "ctxbias/metrics.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

namespace ctxbias {

EditCounts& EditCounts::operator+=(const EditCounts& o) {
  substitutions += o.substitutions;
  insertions += o.insertions;
  deletions += o.deletions;
  ref_length += o.ref_length;
  return *this;
}

EditCounts cer(const TokenSeq& hyp, const TokenSeq& ref) {
  if (ref.empty()) throw Error("domain", "cer: empty reference");
  const size_t n = ref.size();
  const size_t m = hyp.size();
  // cost(i, j): distance between ref[0, i) and hyp[0, j).
  std::vector<std::vector<int>> cost(n + 1, std::vector<int>(m + 1));
  for (size_t i = 0; i <= n; ++i) cost[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= m; ++j) cost[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      int diag = cost[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cost[i][j] = std::min({diag, cost[i - 1][j] + 1, cost[i][j - 1] + 1});
    }
  }
  EditCounts c;
  c.ref_length = static_cast<long>(n);
  size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        cost[i][j] == cost[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      if (ref[i - 1] != hyp[j - 1]) ++c.substitutions;
      --i;
      --j;
    } else if (i > 0 && cost[i][j] == cost[i - 1][j] + 1) {
      ++c.deletions;
      --i;
    } else {
      ++c.insertions;
      --j;
    }
  }
  return c;
}

double PhraseCounts::f1() const {
  double p = precision();
  double r = recall();
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

PhraseCounts& PhraseCounts::operator+=(const PhraseCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

PhraseCounts phrase_counts(const TokenSeq& hyp, const Utterance& utt, const PhraseMatcher& matcher) {
  std::unordered_map<int, long> ref_count;
  std::unordered_map<int, long> hyp_count;
  for (const auto& s : utt.spans) ++ref_count[s.phrase];
  for (const auto& match : matcher.scan(hyp)) ++hyp_count[match.phrase];
  PhraseCounts c;
  for (const auto& [phrase, n] : ref_count) {
    auto it = hyp_count.find(phrase);
    long hit = it == hyp_count.end() ? 0 : std::min(n, it->second);
    c.tp += hit;
    c.fn += n - hit;
  }
  for (const auto& [phrase, n] : hyp_count) {
    auto it = ref_count.find(phrase);
    long hit = it == ref_count.end() ? 0 : std::min(n, it->second);
    c.fp += n - hit;
  }
  return c;
}

PrfScores phrase_prf(const std::vector<TokenSeq>& hyps, const std::vector<Utterance>& utts,
                     const BiasingList& list) {
  if (hyps.size() != utts.size()) throw Error("shape", "phrase_prf: hypothesis/utterance counts differ");
  PhraseMatcher matcher(list);
  PrfScores s;
  for (size_t i = 0; i < hyps.size(); ++i) s.counts += phrase_counts(hyps[i], utts[i], matcher);
  s.precision = s.counts.precision();
  s.recall = s.counts.recall();
  s.f1 = s.counts.f1();
  return s;
}

std::optional<double> utterance_retention(const PurifyResult& result, const Utterance& utt) {
  std::set<int> gold;
  for (const auto& s : utt.spans) gold.insert(s.phrase);
  if (gold.empty()) return std::nullopt;
  long kept = 0;
  for (int g : gold) {
    if (std::binary_search(result.kept.begin(), result.kept.end(), g)) ++kept;
  }
  return static_cast<double>(kept) / static_cast<double>(gold.size());
}

double retention_rate(const std::vector<PurifyResult>& results, const std::vector<Utterance>& utts) {
  if (results.size() != utts.size()) throw Error("shape", "retention_rate: result/utterance counts differ");
  double sum = 0.0;
  long n = 0;
  for (size_t i = 0; i < utts.size(); ++i) {
    if (auto r = utterance_retention(results[i], utts[i])) {
      sum += *r;
      ++n;
    }
  }
  return n ? sum / n : 1.0;
}

double rtf(double decode_seconds, double audio_seconds) {
  if (!(audio_seconds > 0.0)) throw Error("domain", "rtf: audio duration must be positive");
  return decode_seconds / audio_seconds;
}

std::optional<double> MetricsReport::retention() const {
  if (!has_retention) return std::nullopt;
  return retention_count ? retention_sum / retention_count : 1.0;
}

double MetricsReport::rtf() const {
  return audio_seconds > 0.0 ? ctxbias::rtf(decode_seconds, audio_seconds) : 0.0;
}

MetricsReport& MetricsReport::operator+=(const MetricsReport& o) {
  edits += o.edits;
  phrases += o.phrases;
  retention_sum += o.retention_sum;
  retention_count += o.retention_count;
  has_retention = has_retention || o.has_retention;
  decode_seconds += o.decode_seconds;
  audio_seconds += o.audio_seconds;
  utterances += o.utterances;
  return *this;
}

}  // namespace ctxbias
