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

#include "ctxbias/simbank.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "ctxbias/rng.hpp"

namespace ctxbias {

namespace {

// Stream identifiers keep the draws of different scorers independent.
enum Channel : std::uint64_t {
  kChanConfusion = 1,
  kChanFlip,
  kChanListJitter,
  kChanPhraseJitter,
  kChanTokenJitter,
  kChanPhraseEmbedding,
  kChanAcousticEmbedding,
  kChanEmbeddingNoise,
};

std::uint64_t phrase_key(const TokenSeq& tokens) {
  std::uint64_t h = 0x243F6A8885A308D3ULL;
  for (int t : tokens) h = splitmix64(h ^ static_cast<std::uint64_t>(t));
  return h;
}

// For each step: list index of the covering gold span and offset into it.
struct SpanCover {
  std::vector<int> gold;
  std::vector<int> offset;
  std::vector<int> span;
};

SpanCover cover_steps(const Utterance& utt) {
  SpanCover c;
  c.gold.assign(utt.length(), -1);
  c.offset.assign(utt.length(), 0);
  c.span.assign(utt.length(), -1);
  for (size_t s = 0; s < utt.spans.size(); ++s) {
    const auto& sp = utt.spans[s];
    for (int u = sp.start; u < sp.end; ++u) {
      c.gold[u] = sp.phrase;
      c.offset[u] = u - sp.start;
      c.span[u] = static_cast<int>(s);
    }
  }
  return c;
}

void check_rate(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) throw Error("config", std::string(name) + " must be in [0, 1]");
}

double logit(double p) { return std::log(p / (1.0 - p)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void softmax_inplace(Eigen::Ref<RowVectorXd> row) {
  double peak = row.maxCoeff();
  row = (row.array() - peak).exp().matrix();
  row /= row.sum();
}

}  // namespace

void NoiseSpec::validate() const {
  check_rate(label_flip_rate, "label_flip_rate");
  check_rate(confusion_rate, "confusion_rate");
  check_rate(distractor_boost, "distractor_boost");
  if (!(score_jitter_sigma >= 0.0 && std::isfinite(score_jitter_sigma))) {
    throw Error("config", "score_jitter_sigma must be >= 0");
  }
}

void CorrelationBundle::validate(int num_phrases, int vocab_size) const {
  const Eigen::Index steps = q_list.size();
  require_shape(q_phr.rows() == steps && q_phr.cols() == num_phrases, "bundle: q_phr shape");
  require_shape(q_tok.rows() == steps && q_tok.cols() == vocab_size, "bundle: q_tok shape");
  require_shape(p_bb.rows() == steps && p_bb.cols() == vocab_size, "bundle: p_bb shape");
  auto finite_nonneg = [](const auto& m) {
    return m.allFinite() && (m.size() == 0 || m.minCoeff() >= 0.0);
  };
  require_shape(finite_nonneg(q_list) && (steps == 0 || q_list.maxCoeff() <= 1.0),
                "bundle: q_list outside [0, 1]");
  require_shape(finite_nonneg(q_phr), "bundle: q_phr has negative or non-finite entries");
  require_shape(finite_nonneg(q_tok) && finite_nonneg(p_bb),
                "bundle: token distributions have negative or non-finite entries");
  for (Eigen::Index u = 0; u < steps; ++u) {
    require_shape(std::abs(q_tok.row(u).sum() - 1.0) <= 1e-9, "bundle: q_tok row not stochastic");
    require_shape(std::abs(p_bb.row(u).sum() - 1.0) <= 1e-9, "bundle: p_bb row not stochastic");
  }
}

ReferenceLabels make_labels(const Utterance& utt, const BiasingList& list) {
  ReferenceLabels labels;
  labels.y_list = VectorXd::Zero(utt.length());
  labels.y_phr = VectorXd::Zero(list.size());
  labels.y_tok = utt.tokens;
  for (const auto& sp : utt.spans) {
    if (sp.phrase <= BiasingList::kNoBiasIndex || sp.phrase >= list.size()) {
      throw Error("span", "utterance " + utt.id + ": span phrase " + std::to_string(sp.phrase) +
                              " not in list");
    }
    labels.y_list.segment(sp.start, sp.length()).setOnes();
    labels.y_phr(sp.phrase) = 1.0;
  }
  if (utt.spans.empty()) labels.y_phr(BiasingList::kNoBiasIndex) = 1.0;
  return labels;
}

EmbeddingBank synth_embeddings(const Utterance& utt, const BiasingList& list,
                               const NoiseSpec& spec, int dim) {
  if (dim < 8) throw Error("config", "embedding dimension must be >= 8");
  spec.validate();
  const std::uint64_t ukey = hash_string(utt.id);
  auto unit = [dim](std::uint64_t key) {
    VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = normal_from_key(hash_key({key, static_cast<std::uint64_t>(i)}));
    return VectorXd(v.normalized());
  };

  const double norm = std::sqrt(SimulatorConstants::kEmbeddingSharpness * std::sqrt(dim));
  EmbeddingBank bank;
  bank.phrase.resize(list.size(), dim);
  for (int m = 0; m < list.size(); ++m) {
    bank.phrase.row(m) =
        unit(hash_key({spec.seed, kChanPhraseEmbedding, phrase_key(list.phrase(m).tokens)}));
  }

  const SpanCover cover = cover_steps(utt);
  bank.acoustic.resize(utt.length(), dim);
  for (int u = 0; u < utt.length(); ++u) {
    int anchor_row = (cover.gold[u] > 0 && cover.gold[u] < list.size()) ? cover.gold[u] : 0;
    VectorXd anchor = bank.phrase.row(anchor_row).transpose();
    VectorXd side = unit(hash_key({spec.seed, kChanAcousticEmbedding, ukey, static_cast<std::uint64_t>(u)}));
    side -= side.dot(anchor) * anchor;
    if (side.norm() > 1e-12) side.normalize();
    // cos(row, anchor) = 1 / sqrt(1 + 0.3^2) ~= 0.958 before jitter.
    VectorXd row = anchor + 0.3 * side;
    if (spec.score_jitter_sigma > 0.0) {
      for (int i = 0; i < dim; ++i) {
        row(i) += spec.score_jitter_sigma *
                  normal_from_key(hash_key({spec.seed, kChanEmbeddingNoise, ukey,
                                            static_cast<std::uint64_t>(u),
                                            static_cast<std::uint64_t>(i)}));
      }
    }
    bank.acoustic.row(u) = row.normalized().transpose();
  }
  bank.phrase *= norm;
  bank.acoustic *= norm;
  return bank;
}

namespace {

MatrixXd backbone_for(const Utterance& utt, const SpanCover& cover, const NoiseSpec& spec,
                      const Vocabulary& vocab, std::uint64_t ukey) {
  using K = SimulatorConstants;
  const int vsize = vocab.size();
  MatrixXd p(utt.length(), vsize);
  for (int u = 0; u < utt.length(); ++u) {
    int ref = utt.tokens[u];
    int partner = vocab.confusable(ref);
    int top = ref;
    int second = partner;
    if (cover.gold[u] >= 0 && spec.confusion_rate > 0.0 &&
        uniform_from_key(hash_key({spec.seed, kChanConfusion, ukey, static_cast<std::uint64_t>(u)})) <
            spec.confusion_rate) {
      std::swap(top, second);
    }
    if (top == second) {
      p.row(u).setConstant((1.0 - K::kBackboneTop) / (vsize - 1));
      p(u, top) = K::kBackboneTop;
    } else {
      p.row(u).setConstant((1.0 - K::kBackboneTop - K::kBackbonePartner) / (vsize - 2));
      p(u, top) = K::kBackboneTop;
      p(u, second) = K::kBackbonePartner;
    }
  }
  return p;
}

}  // namespace

MatrixXd synth_backbone(const Utterance& utt, const NoiseSpec& spec, const Vocabulary& vocab) {
  spec.validate();
  if (vocab.size() < 3) throw Error("vocab", "backbone needs at least one regular token");
  return backbone_for(utt, cover_steps(utt), spec, vocab, hash_string(utt.id));
}

ScorerBank::ScorerBank(const Utterance& utt, const BiasingList& list, const Vocabulary& vocab,
                       const NoiseSpec& spec)
    : utt_(utt), list_(list), vocab_(vocab), spec_(spec), utt_key_(hash_string(utt.id)) {
  spec_.validate();
  validate_utterance(utt, list);
  for (int t : utt.tokens) {
    if (t < 0 || t >= vocab.size()) throw Error("index", "utterance " + utt.id + ": bad token");
  }
  const SpanCover cover = cover_steps(utt);
  steps_.resize(utt.length());
  for (int u = 0; u < utt.length(); ++u) {
    steps_[u] = {cover.gold[u], cover.offset[u], cover.span[u]};
  }
  backbone_ = backbone_for(utt, cover, spec_, vocab, utt_key_);
}

// Fraction of gold positions whose token, or its confusable partner, occurs
// in phrase m.
double ScorerBank::similarity(int m, int gold) const {
  if (m == BiasingList::kNoBiasIndex || m == gold) return 0.0;
  const auto& g = list_.phrase(gold).tokens;
  const auto& p = list_.phrase(m).tokens;
  int hits = 0;
  for (int t : g) {
    int partner = vocab_.confusable(t);
    if (std::find(p.begin(), p.end(), t) != p.end() ||
        std::find(p.begin(), p.end(), partner) != p.end()) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(g.size());
}

CorrelationBundle ScorerBank::score(std::span<const int> ids, bool with_tokens) const {
  using K = SimulatorConstants;
  if (ids.empty() || ids[0] != BiasingList::kNoBiasIndex) {
    throw Error("index", "score: ids must start with the no-bias entry");
  }
  const int steps = utt_.length();
  const int width = static_cast<int>(ids.size());
  std::unordered_map<int, int> local;
  local.reserve(ids.size());
  std::vector<std::uint64_t> keys(width);
  for (int i = 0; i < width; ++i) {
    if (ids[i] < 0 || ids[i] >= list_.size()) throw Error("index", "score: phrase id out of range");
    local.emplace(ids[i], i);
    keys[i] = phrase_key(list_.phrase(ids[i]).tokens);
  }

  const double sigma = spec_.score_jitter_sigma;
  const double boost = spec_.distractor_boost;
  const bool clean = spec_.clean_correlations();

  // Similarity of every scored phrase to each span's gold phrase.
  std::vector<VectorXd> sims(utt_.spans.size());
  if (boost > 0.0) {
    for (size_t s = 0; s < utt_.spans.size(); ++s) {
      sims[s].resize(width);
      for (int i = 0; i < width; ++i) sims[s](i) = similarity(ids[i], utt_.spans[s].phrase);
    }
  }

  CorrelationBundle b;
  b.q_list = VectorXd::Zero(steps);
  b.q_phr = MatrixXd::Zero(steps, width);
  RowVectorXd logits(width);
  for (int u = 0; u < steps; ++u) {
    const StepInfo& st = steps_[u];
    const auto step = static_cast<std::uint64_t>(u);
    int target = 0;
    bool present = false;
    if (st.gold >= 0) {
      auto it = local.find(st.gold);
      if (it != local.end()) {
        target = it->second;
        present = true;
      }
    }

    if (clean) {
      b.q_phr(u, target) = 1.0;
    } else {
      for (int i = 0; i < width; ++i) {
        double x = std::log((i == target ? 1.0 : 0.0) + K::kPhraseFloor);
        if (st.gold >= 0 && boost > 0.0) x += boost * K::kDistractorGain * sims[st.span](i);
        if (sigma > 0.0) {
          x += sigma * K::kPhraseJitter *
               normal_from_key(hash_key({spec_.seed, kChanPhraseJitter, utt_key_, step, keys[i]}));
        }
        logits(i) = x;
      }
      b.q_phr.row(u) = logits;
      softmax_inplace(b.q_phr.row(u));
    }

    double base = 0.0;
    if (st.gold >= 0) {
      if (present) {
        base = 1.0;
      } else if (boost > 0.0 && width > 1) {
        base = boost * sims[st.span].tail(width - 1).maxCoeff();
      }
    }
    if (spec_.label_flip_rate > 0.0 &&
        uniform_from_key(hash_key({spec_.seed, kChanFlip, utt_key_, step})) < spec_.label_flip_rate) {
      base = 1.0 - base;
    }
    if (sigma > 0.0 || boost > 0.0) {
      double x = logit(std::clamp(base, K::kListClamp, 1.0 - K::kListClamp));
      if (present) x -= K::kListDilution * (1.0 - b.q_phr(u, target));
      if (sigma > 0.0) {
        x += sigma * K::kListJitter *
             normal_from_key(hash_key({spec_.seed, kChanListJitter, utt_key_, step}));
      }
      base = sigmoid(x);
    }
    b.q_list(u) = base;
  }

  if (!with_tokens) return b;

  b.p_bb = backbone_;
  const int vsize = vocab_.size();
  b.q_tok = MatrixXd::Zero(steps, vsize);
  for (int u = 0; u < steps; ++u) {
    if (clean) {
      b.q_tok(u, utt_.tokens[u]) = 1.0;
      continue;
    }
    const StepInfo& st = steps_[u];
    const auto step = static_cast<std::uint64_t>(u);
    RowVectorXd row = backbone_.row(u).array().log().matrix();
    if (st.gold >= 0) {
      for (int i = 1; i < width; ++i) {
        const auto& toks = list_.phrase(ids[i]).tokens;
        if (st.offset < static_cast<int>(toks.size())) {
          row(toks[st.offset]) += K::kTokenVoteGain * b.q_phr(u, i);
        }
      }
    }
    if (sigma > 0.0) {
      for (int v = 0; v < vsize; ++v) {
        row(v) += sigma * K::kTokenJitter *
                  normal_from_key(hash_key({spec_.seed, kChanTokenJitter, utt_key_, step,
                                            static_cast<std::uint64_t>(v)}));
      }
    }
    softmax_inplace(row);
    b.q_tok.row(u) = row;
  }
  return b;
}

CorrelationBundle ScorerBank::score_all(bool with_tokens) const {
  std::vector<int> ids(list_.size());
  for (int m = 0; m < list_.size(); ++m) ids[m] = m;
  return score(ids, with_tokens);
}

CorrelationBundle synth_bundle(const Utterance& utt, const BiasingList& list,
                               const ReferenceLabels& labels, const NoiseSpec& spec,
                               const Vocabulary& vocab) {
  ReferenceLabels expected = make_labels(utt, list);
  if (labels.y_list != expected.y_list || labels.y_phr != expected.y_phr ||
      labels.y_tok != expected.y_tok) {
    throw Error("labels", "utterance " + utt.id + ": labels inconsistent with utterance");
  }
  return ScorerBank(utt, list, vocab, spec).score_all();
}

namespace {

nlohmann::json matrix_json(const MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    rows.push_back(std::vector<double>(m.row(r).data(), m.row(r).data() + m.cols()));
  }
  return rows;
}

MatrixXd json_matrix(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols,
                     const std::string& name) {
  require_shape(j.is_array() && static_cast<Eigen::Index>(j.size()) == rows,
                "bundle file: " + name + " has wrong row count");
  MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[r];
    require_shape(row.is_array() && static_cast<Eigen::Index>(row.size()) == cols,
                  "bundle file: " + name + " row " + std::to_string(r) + " has wrong length");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[c].get<double>();
  }
  return m;
}

}  // namespace

void save_bundle_json(const CorrelationBundle& bundle, const std::string& path) {
  nlohmann::json j;
  j["q_list"] = std::vector<double>(bundle.q_list.data(), bundle.q_list.data() + bundle.q_list.size());
  j["q_phr"] = matrix_json(bundle.q_phr);
  j["q_tok"] = matrix_json(bundle.q_tok);
  j["p_bb"] = matrix_json(bundle.p_bb);
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path);
  out << j.dump() << '\n';
}

CorrelationBundle load_bundle_json(const std::string& path, int num_phrases, int vocab_size) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("format", path + ": " + e.what());
  }
  for (const char* key : {"q_list", "q_phr", "q_tok", "p_bb"}) {
    if (!j.contains(key)) throw Error("format", path + ": missing " + key);
  }
  CorrelationBundle b;
  auto q_list = j["q_list"].get<std::vector<double>>();
  const auto steps = static_cast<Eigen::Index>(q_list.size());
  b.q_list = Eigen::Map<VectorXd>(q_list.data(), steps);
  b.q_phr = json_matrix(j["q_phr"], steps, num_phrases, "q_phr");
  b.q_tok = json_matrix(j["q_tok"], steps, vocab_size, "q_tok");
  b.p_bb = json_matrix(j["p_bb"], steps, vocab_size, "p_bb");
  b.validate(num_phrases, vocab_size);
  return b;
}

}  // namespace ctxbias
