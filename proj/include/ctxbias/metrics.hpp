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

#ifndef CTXBIAS_METRICS_HPP_
#define CTXBIAS_METRICS_HPP_

#include <optional>
#include <vector>

#include "ctxbias/corpus.hpp"
#include "ctxbias/jointdecode.hpp"
#include "ctxbias/purify.hpp"

namespace ctxbias {

struct EditCounts {
  long substitutions = 0;
  long insertions = 0;
  long deletions = 0;
  long ref_length = 0;

  long errors() const { return substitutions + insertions + deletions; }
  double rate() const { return ref_length ? static_cast<double>(errors()) / ref_length : 0.0; }
  EditCounts& operator+=(const EditCounts& o);
};

// Unit-cost Levenshtein alignment of hyp against ref. Throws on an empty
// reference.
EditCounts cer(const TokenSeq& hyp, const TokenSeq& ref);

// Exact-match phrase counts. 0/0 ratios are reported as 1.
struct PhraseCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;

  double precision() const { return tp + fp ? static_cast<double>(tp) / (tp + fp) : 1.0; }
  double recall() const { return tp + fn ? static_cast<double>(tp) / (tp + fn) : 1.0; }
  double f1() const;
  PhraseCounts& operator+=(const PhraseCounts& o);
};

// One utterance: reference occurrences come from the gold spans, hypothesis
// occurrences from the matcher's scan.
PhraseCounts phrase_counts(const TokenSeq& hyp, const Utterance& utt, const PhraseMatcher& matcher);

struct PrfScores {
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;
  PhraseCounts counts;
};

PrfScores phrase_prf(const std::vector<TokenSeq>& hyps, const std::vector<Utterance>& utts,
                     const BiasingList& list);

// Mean over utterances with at least one gold phrase of the fraction of
// their distinct gold phrases present in the kept set.
double retention_rate(const std::vector<PurifyResult>& results, const std::vector<Utterance>& utts);

// Per-utterance retention, or nullopt when the utterance has no gold phrase.
std::optional<double> utterance_retention(const PurifyResult& result, const Utterance& utt);

double rtf(double decode_seconds, double audio_seconds);

struct MetricsReport {
  EditCounts edits;
  PhraseCounts phrases;
  // Sum and count of per-utterance retention over utterances with gold phrases.
  double retention_sum = 0.0;
  long retention_count = 0;
  bool has_retention = false;
  double decode_seconds = 0.0;
  double audio_seconds = 0.0;
  long utterances = 0;

  double cer() const { return edits.rate(); }
  double precision() const { return phrases.precision(); }
  double recall() const { return phrases.recall(); }
  double f1() const { return phrases.f1(); }
  std::optional<double> retention() const;
  double rtf() const;

  // Associative and commutative.
  MetricsReport& operator+=(const MetricsReport& o);
};

}  // namespace ctxbias

#endif  // CTXBIAS_METRICS_HPP_
