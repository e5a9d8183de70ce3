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

#ifndef CTXBIAS_CORPUS_HPP_
#define CTXBIAS_CORPUS_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ctxbias/tensor.hpp"

namespace ctxbias {

// Character vocabulary. Index 0 is the unknown/blank symbol and index 1 the
// no-bias symbol; regular tokens follow in insertion order. Every token has
// one seeded confusable partner that the synthetic backbone may emit in its
// place.
class Vocabulary {
 public:
  static constexpr int kUnknown = 0;
  static constexpr int kNoBias = 1;
  static constexpr std::string_view kUnknownSymbol = "<unk>";
  static constexpr std::string_view kNoBiasSymbol = "<no-bias>";

  // `tokens` are the regular tokens; they must be distinct and must not
  // contain the reserved symbols.
  explicit Vocabulary(const std::vector<std::string>& tokens,
                      std::uint64_t confusable_seed = 0);

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string& token(int index) const { return tokens_.at(index); }
  // kUnknown when absent.
  int index(std::string_view token) const;
  bool contains(std::string_view token) const;
  int confusable(int index) const { return confusable_.at(index); }
  bool is_regular(int index) const { return index >= 2 && index < size(); }
  std::uint64_t confusable_seed() const { return confusable_seed_; }

  // One token per code point. Tokens missing from the vocabulary map to
  // kUnknown and are appended to `unknown` when given.
  TokenSeq tokenize(std::string_view text,
                    std::vector<std::string>* unknown = nullptr) const;
  std::string detokenize(const TokenSeq& tokens) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  std::vector<int> confusable_;
  std::uint64_t confusable_seed_;
};

struct BiasingPhrase {
  TokenSeq tokens;
  int length() const { return static_cast<int>(tokens.size()); }
};

inline constexpr int kMinPhraseLength = 2;
inline constexpr int kMaxPhraseLength = 19;

// Ordered, duplicate-free phrase list. Entry 0 is always the no-bias phrase,
// whose single token is Vocabulary::kNoBias.
class BiasingList {
 public:
  static constexpr int kNoBiasIndex = 0;

  // Builds a list from real phrases; the no-bias entry is prepended.
  static BiasingList from_phrases(const std::vector<TokenSeq>& phrases);

  int size() const { return static_cast<int>(phrases_.size()); }
  int num_real() const { return size() - 1; }
  const BiasingPhrase& phrase(int m) const { return phrases_.at(m); }
  const std::vector<BiasingPhrase>& phrases() const { return phrases_; }

  // The first `m` entries (no-bias included) as a new list.
  BiasingList prefix(int m) const;
  // Entries at `indices` (which must include kNoBiasIndex first) in order.
  BiasingList subset(const std::vector<int>& indices) const;

 private:
  std::vector<BiasingPhrase> phrases_;
};

// Half-open token range [start, end) carrying phrase `phrase` of a list.
struct GoldSpan {
  int start = 0;
  int end = 0;
  int phrase = 0;
  int length() const { return end - start; }
  bool operator==(const GoldSpan&) const = default;
};

struct Utterance {
  std::string id;
  TokenSeq tokens;
  double duration_seconds = 0.0;
  std::vector<GoldSpan> spans;
  int length() const { return static_cast<int>(tokens.size()); }
};

// M x V containment mask: entry (m, v) is 1 iff token v occurs in phrase m.
struct PhiMask {
  MatrixXd matrix;
  int num_phrases() const { return static_cast<int>(matrix.rows()); }
  int vocab_size() const { return static_cast<int>(matrix.cols()); }
  bool contains(int m, int v) const { return matrix(m, v) != 0.0; }
};

Vocabulary load_vocabulary(const std::string& path, std::uint64_t confusable_seed = 0);
void save_vocabulary(const Vocabulary& vocab, const std::string& path);

// One phrase per line. Blank lines are skipped; duplicate lines and empty
// files are errors. Unknown characters map to kUnknown and are reported in
// `warnings`.
BiasingList load_biasing_list(const std::string& path, const Vocabulary& vocab,
                              std::vector<std::string>* warnings = nullptr);
void save_biasing_list(const BiasingList& list, const Vocabulary& vocab,
                       const std::string& path);

// Manifest TSV: id, text, duration_seconds, spans ("start:end:phrase" joined
// by ';', may be empty). Span phrase indices refer to `list`.
std::vector<Utterance> load_utterances(const std::string& path, const Vocabulary& vocab,
                                       const BiasingList& list);
void save_utterances(const std::vector<Utterance>& utts, const Vocabulary& vocab,
                     const std::string& path);

// Throws Error("span", ...) naming the utterance id on any violation.
void validate_utterance(const Utterance& utt, const BiasingList& list);

PhiMask build_phi(const BiasingList& list, const Vocabulary& vocab);

}  // namespace ctxbias

#endif  // CTXBIAS_CORPUS_HPP_
