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

#ifndef CTXBIAS_HARNESS_HPP_
#define CTXBIAS_HARNESS_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "ctxbias/config.hpp"
#include "ctxbias/corpus.hpp"
#include "ctxbias/metrics.hpp"

namespace ctxbias {

// Seeded synthetic corpus. The list of length M is full_list.prefix(M), so
// shorter lists are index-wise subsets of longer ones. Gold phrases are the
// first (min length - 1) real phrases and therefore belong to every list.
struct Corpus {
  Vocabulary vocab;
  BiasingList full_list;
  std::vector<Utterance> utterances;
  int num_gold = 0;

  BiasingList list(int m) const { return full_list.prefix(m); }
};

Corpus generate_corpus(const ExperimentConfig& config, std::uint64_t seed);

// Derived seeds of one sweep seed.
std::uint64_t corpus_seed(const ExperimentConfig& config, std::uint64_t seed);
NoiseSpec noise_for_seed(const ExperimentConfig& config, std::uint64_t seed);
std::uint64_t shuffle_seed_for(const NoiseSpec& noise, const Utterance& utt);

struct CellKey {
  Method method = Method::kBaseline;
  int list_length = 0;
  std::uint64_t seed = 0;
  auto operator<=>(const CellKey&) const = default;
};

struct CellReport {
  CellKey key;
  MetricsReport metrics;
  // Purified methods: sum of kept list sizes (no-bias included).
  long kept_sum = 0;
  // Post-processed methods: utterances whose final hypothesis holds fewer
  // list phrases than the backbone, and utterances whose final hypothesis
  // has a higher CER than the contextual one.
  long count_violations = 0;
  long cer_violations = 0;
};

using SweepResult = std::map<CellKey, CellReport>;

// Decodes every utterance of every (method, length, seed) cell. Utterances
// are spread over config.workers threads and reduced in utterance order.
SweepResult run_sweep(const ExperimentConfig& config);

// Cells of one seed on an existing corpus.
std::vector<CellReport> run_cells(const ExperimentConfig& config, const Corpus& corpus,
                                  std::uint64_t seed);

// Cell JSON with every timing-dependent value under the "timing" key.
std::string cell_json(const CellReport& cell);
CellReport parse_cell_json(const std::string& text);

// Rows are methods, columns list lengths, entries "CER // R|P|F1" in
// percent, pooled over seeds.
std::string format_table(const std::vector<CellReport>& cells);
// method,list_length,decode_seconds,audio_seconds,rtf pooled over seeds.
std::string format_rtf_csv(const std::vector<CellReport>& cells);

// Writes cells/<method>_M<len>_s<seed>.json, table.txt and rtf.csv under
// `dir`; returns the written paths.
std::vector<std::string> emit_report(const std::vector<CellReport>& cells, const std::string& dir);
// Reads back the cells/ directory of a previous emit_report.
std::vector<CellReport> load_cells(const std::string& dir);

}  // namespace ctxbias

#endif  // CTXBIAS_HARNESS_HPP_
