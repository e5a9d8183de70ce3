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

#ifndef CTXBIAS_SIMBANK_HPP_
#define CTXBIAS_SIMBANK_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ctxbias/corpus.hpp"
#include "ctxbias/tensor.hpp"

namespace ctxbias {

struct NoiseSpec {
  std::uint64_t seed = 0;
  double label_flip_rate = 0.0;
  double score_jitter_sigma = 0.0;
  // Probability that a gold-span token is emitted as its confusable partner
  // by the synthetic backbone.
  double confusion_rate = 0.0;
  double distractor_boost = 0.0;

  void validate() const;
  // No flips, jitter or distractor pull: correlations equal the labels.
  bool clean_correlations() const {
    return label_flip_rate == 0.0 && score_jitter_sigma == 0.0 && distractor_boost == 0.0;
  }
};

struct EmbeddingBank {
  MatrixXd acoustic;  // U x d
  MatrixXd phrase;    // M x d
  int dim() const { return static_cast<int>(acoustic.cols()); }
};

struct ReferenceLabels {
  VectorXd y_list;  // U, 0/1
  VectorXd y_phr;   // M, 0/1
  TokenSeq y_tok;   // U
};

struct CorrelationBundle {
  VectorXd q_list;  // U, in [0, 1]
  MatrixXd q_phr;   // U x M, rows over phrases
  MatrixXd q_tok;   // U x V, row-stochastic
  MatrixXd p_bb;    // U x V, row-stochastic

  int num_steps() const { return static_cast<int>(q_list.size()); }
  // Throws Error("shape", ...) on wrong shapes, non-finite or negative
  // entries, or rows of q_tok / p_bb that do not sum to one within 1e-9.
  void validate(int num_phrases, int vocab_size) const;
};

// Constants of the synthetic scorers. Exposed so tests and the CLI can
// report them; changing them changes every generated bundle.
struct SimulatorConstants {
  // Backbone: probability of the emitted token and of its confusable partner;
  // the remainder is spread evenly over all other tokens.
  static constexpr double kBackboneTop = 0.6;
  static constexpr double kBackbonePartner = 0.25;
  // Phrase scorer: floor added before taking logs of the clean one-hot row,
  // logit pull of similar phrases, logit jitter per unit sigma.
  static constexpr double kPhraseFloor = 1e-3;
  static constexpr double kDistractorGain = 10.0;
  static constexpr double kPhraseJitter = 10.0;
  // List scorer: clean labels are clamped to [kListClamp, 1 - kListClamp]
  // before logit jitter; diluted attention on the gold phrase lowers the
  // logit by kListDilution * (1 - gold weight).
  static constexpr double kListClamp = 0.02;
  static constexpr double kListJitter = 10.0;
  static constexpr double kListDilution = 6.0;
  // Token scorer: backbone log-probabilities plus attention-weighted votes for
  // the token each attended phrase predicts at the current span offset.
  static constexpr double kTokenVoteGain = 3.0;
  static constexpr double kTokenJitter = 10.0;
  // Embeddings: every row has squared norm kEmbeddingSharpness * sqrt(d), so
  // the scaled dot product of two rows equals kEmbeddingSharpness * cos and
  // identity-projection attention concentrates on the anchored phrase.
  static constexpr double kEmbeddingSharpness = 16.0;
};

ReferenceLabels make_labels(const Utterance& utt, const BiasingList& list);

// Phrase rows keyed by phrase content; acoustic rows at span steps lie
// within cos >= 0.9 of their gold phrase (no jitter), other rows follow
// the no-bias phrase.
EmbeddingBank synth_embeddings(const Utterance& utt, const BiasingList& list,
                               const NoiseSpec& spec, int dim);

MatrixXd synth_backbone(const Utterance& utt, const NoiseSpec& spec, const Vocabulary& vocab);

CorrelationBundle synth_bundle(const Utterance& utt, const BiasingList& list,
                               const ReferenceLabels& labels, const NoiseSpec& spec,
                               const Vocabulary& vocab);

// Synthetic scorers for one utterance whose spans index `list`. Scores may
// be requested for any sub-list; draws are keyed by phrase content so a
// phrase's score never depends on which other phrases are scored with it.
class ScorerBank {
 public:
  ScorerBank(const Utterance& utt, const BiasingList& list, const Vocabulary& vocab,
             const NoiseSpec& spec);

  // Scores the entries `ids` of the list; ids[0] must be the no-bias entry.
  // q_phr column i refers to ids[i]. When `with_tokens` is false, q_tok and
  // p_bb are left empty.
  CorrelationBundle score(std::span<const int> ids, bool with_tokens = true) const;
  CorrelationBundle score_all(bool with_tokens = true) const;

  const MatrixXd& backbone() const { return backbone_; }
  const Utterance& utterance() const { return utt_; }
  const BiasingList& list() const { return list_; }

 private:
  struct StepInfo {
    int gold = -1;    // list index of the span phrase, -1 outside spans
    int offset = 0;   // position inside the span
    int span = -1;
  };

  double similarity(int m, int gold) const;

  const Utterance& utt_;
  const BiasingList& list_;
  const Vocabulary& vocab_;
  NoiseSpec spec_;
  std::uint64_t utt_key_;
  std::vector<StepInfo> steps_;
  MatrixXd backbone_;
};

// Shape-checked JSON tensor exchange, so bundles produced elsewhere can be
// decoded with the same pipeline.
void save_bundle_json(const CorrelationBundle& bundle, const std::string& path);
CorrelationBundle load_bundle_json(const std::string& path, int num_phrases, int vocab_size);

}  // namespace ctxbias

#endif  // CTXBIAS_SIMBANK_HPP_
