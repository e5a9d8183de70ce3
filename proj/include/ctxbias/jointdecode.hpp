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

#ifndef CTXBIAS_JOINTDECODE_HPP_
#define CTXBIAS_JOINTDECODE_HPP_

#include <cmath>
#include <optional>
#include <unordered_map>
#include <vector>

#include "ctxbias/attention.hpp"
#include "ctxbias/corpus.hpp"
#include "ctxbias/simbank.hpp"
#include "ctxbias/smoothing.hpp"
#include "ctxbias/tensor.hpp"

namespace ctxbias {

// How the per-token intersection scores are turned into a distribution.
// kSum divides by the row total; kSoftmax exponentiates the raw scores.
// Both give a uniform row when every score is zero.
enum class Normalization { kSum, kSoftmax };

// Intersection of list-, phrase- and token-level correlations:
//   score(u, v) = max_m q_slist(u) * q_sphr(u, m) * phi(m, v) * q_tok(u, v)
// followed by row normalization.
template <typename DerivedL, typename DerivedP, typename DerivedT, typename DerivedPhi>
Matrix<typename DerivedT::Scalar> joint_intersection(const Eigen::MatrixBase<DerivedL>& q_slist,
                                                     const Eigen::MatrixBase<DerivedP>& q_sphr,
                                                     const Eigen::MatrixBase<DerivedT>& q_tok,
                                                     const Eigen::MatrixBase<DerivedPhi>& phi,
                                                     Normalization norm = Normalization::kSum) {
  using Scalar = typename DerivedT::Scalar;
  const Eigen::Index steps = q_tok.rows();
  const Eigen::Index vsize = q_tok.cols();
  require_shape(q_slist.size() == steps && q_sphr.rows() == steps,
                "joint_intersection: step counts differ");
  require_shape(q_sphr.cols() == phi.rows(), "joint_intersection: phrase counts differ");
  require_shape(phi.cols() == vsize, "joint_intersection: vocabulary sizes differ");

  Matrix<Scalar> out(steps, vsize);
  RowVector<Scalar> best(vsize);
  for (Eigen::Index u = 0; u < steps; ++u) {
    best.setZero();
    const Scalar lead = q_slist(u);
    for (Eigen::Index m = 0; m < phi.rows(); ++m) {
      const Scalar w = lead * q_sphr(u, m);
      if (w > 0) best = best.cwiseMax(w * phi.row(m));
    }
    auto row = out.row(u);
    row = best.cwiseProduct(q_tok.row(u));
    if (norm == Normalization::kSoftmax) {
      const Scalar peak = row.maxCoeff();
      row = (row.array() - peak).exp().matrix();
      row /= row.sum();
    } else {
      const Scalar total = row.sum();
      if (total > 0) {
        row /= total;
      } else {
        row.setConstant(Scalar(1) / static_cast<Scalar>(vsize));
      }
    }
  }
  return out;
}

template <typename DerivedL, typename DerivedP, typename DerivedT>
Matrix<typename DerivedT::Scalar> joint_intersection(const Eigen::MatrixBase<DerivedL>& q_slist,
                                                     const Eigen::MatrixBase<DerivedP>& q_sphr,
                                                     const Eigen::MatrixBase<DerivedT>& q_tok,
                                                     const PhiMask& phi,
                                                     Normalization norm = Normalization::kSum) {
  return joint_intersection(q_slist, q_sphr, q_tok, phi.matrix, norm);
}

// (1 - w_u) * p_bb_u + w_u * q_bias_u.
template <typename DerivedB, typename DerivedQ, typename DerivedW>
Matrix<typename DerivedB::Scalar> interpolate(const Eigen::MatrixBase<DerivedB>& p_bb,
                                              const Eigen::MatrixBase<DerivedQ>& q_bias,
                                              const Eigen::MatrixBase<DerivedW>& weight) {
  require_shape(p_bb.rows() == q_bias.rows() && p_bb.cols() == q_bias.cols(),
                "interpolate: distribution shapes differ");
  require_shape(weight.size() == p_bb.rows(), "interpolate: weight length differs");
  Matrix<typename DerivedB::Scalar> out(p_bb.rows(), p_bb.cols());
  for (Eigen::Index u = 0; u < p_bb.rows(); ++u) {
    out.row(u) = (1 - weight(u)) * p_bb.row(u) + weight(u) * q_bias.row(u);
  }
  return out;
}

// Per-row argmax, ties to the smallest index.
template <typename Derived>
TokenSeq greedy_decode(const Eigen::MatrixBase<Derived>& probs) {
  TokenSeq out(probs.rows());
  for (Eigen::Index u = 0; u < probs.rows(); ++u) {
    Eigen::Index best = 0;
    for (Eigen::Index v = 1; v < probs.cols(); ++v) {
      if (probs(u, v) > probs(u, best)) best = v;
    }
    out[u] = static_cast<int>(best);
  }
  return out;
}

// Left-to-right, longest-match-first, non-overlapping search for the real
// phrases of a list.
class PhraseMatcher {
 public:
  struct Match {
    int start = 0;
    int phrase = 0;
  };

  // Keeps a reference to `list`, which must outlive the matcher.
  explicit PhraseMatcher(const BiasingList& list);
  explicit PhraseMatcher(BiasingList&&) = delete;

  std::vector<Match> scan(const TokenSeq& hyp) const;
  int count(const TokenSeq& hyp) const { return static_cast<int>(scan(hyp).size()); }

 private:
  const BiasingList& list_;
  // First token -> phrase indices, longest first (ties by index).
  std::unordered_map<int, std::vector<int>> by_first_;
};

int count_phrases(const TokenSeq& hyp, const BiasingList& list);

// hyp_casr when it holds strictly more list phrases than hyp_bb.
TokenSeq post_process(const TokenSeq& hyp_casr, const TokenSeq& hyp_bb, const BiasingList& list);
TokenSeq post_process(const TokenSeq& hyp_casr, const TokenSeq& hyp_bb, const PhraseMatcher& matcher);

struct DecodeParams {
  SmoothingParams smoothing;
  Normalization normalization = Normalization::kSum;
  bool post_process = true;
};

// Intermediate arrays of one decode, for inspection.
struct DecodeTrace {
  VectorXd q_slist;
  MatrixXd q_sphr;
  MatrixXd q_casr;
};

struct DecodeResult {
  TokenSeq hyp_bb;
  TokenSeq hyp_casr;
  TokenSeq hyp_final;
  MatrixXd q_bias;
  double seconds = 0.0;
};

// smoothing -> intersection -> interpolation -> greedy (backbone and
// contextual) -> optional post-processing. A list without real phrases
// short-circuits to the backbone hypothesis.
DecodeResult decode_utterance(const CorrelationBundle& bundle, const BiasingList& list,
                              const PhiMask& phi, const DecodeParams& params,
                              DecodeTrace* trace = nullptr);

// Comparison stub with a single bias probability: the token scorer output is
// interpolated with the backbone by the raw list correlation, with no
// phrase-level intersection or smoothing.
TokenSeq decode_plain_attention(const CorrelationBundle& bundle);

}  // namespace ctxbias

#endif  // CTXBIAS_JOINTDECODE_HPP_
