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

#ifndef CTXBIAS_ATTENTION_HPP_
#define CTXBIAS_ATTENTION_HPP_

#include <cmath>
#include <optional>
#include <vector>

#include "ctxbias/tensor.hpp"

namespace ctxbias {

// Row-wise softmax with max subtraction.
template <typename Derived>
Matrix<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& scores) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> out(scores.rows(), scores.cols());
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    Scalar peak = scores.row(r).maxCoeff();
    out.row(r) = (scores.row(r).array() - peak).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

// corr(u, m) = <acou_u, phr_m> / sqrt(d).
template <typename DerivedA, typename DerivedP>
Matrix<typename DerivedA::Scalar> corr_scores(const Eigen::MatrixBase<DerivedA>& acou,
                                              const Eigen::MatrixBase<DerivedP>& phr) {
  using Scalar = typename DerivedA::Scalar;
  require_shape(acou.cols() == phr.cols(), "corr_scores: embedding dimensions differ");
  const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(acou.cols()));
  return (acou * phr.transpose()) * scale;
}

// Optional d x d projections; an absent matrix acts as the identity.
template <typename Scalar>
struct AttentionProjections {
  std::optional<Matrix<Scalar>> query;
  std::optional<Matrix<Scalar>> key;
  std::optional<Matrix<Scalar>> value;
  std::optional<Matrix<Scalar>> output;
};

template <typename Scalar>
struct AttentionOutput {
  // One U x M matrix per head; each row sums to one.
  std::vector<Matrix<Scalar>> weights;
  Matrix<Scalar> biased;    // U x d
  Matrix<Scalar> compound;  // biased + acoustic

  int num_heads() const { return static_cast<int>(weights.size()); }
};

namespace detail {

template <typename Scalar, typename Derived>
Matrix<Scalar> project(const Eigen::MatrixBase<Derived>& x,
                       const std::optional<Matrix<Scalar>>& w) {
  if (!w) return x;
  require_shape(w->rows() == x.cols() && w->cols() == x.cols(),
                "cross_attention: projection must be d x d");
  return x * *w;
}

}  // namespace detail

// Multi-head scaled dot-product attention with the acoustic embeddings as
// queries and the phrase embeddings as keys and values.
template <typename DerivedA, typename DerivedP>
AttentionOutput<typename DerivedA::Scalar> cross_attention(
    const Eigen::MatrixBase<DerivedA>& acou, const Eigen::MatrixBase<DerivedP>& phr, int n_heads,
    const AttentionProjections<typename DerivedA::Scalar>& proj = {}) {
  using Scalar = typename DerivedA::Scalar;
  const Eigen::Index d = acou.cols();
  require_shape(phr.cols() == d, "cross_attention: embedding dimensions differ");
  require_shape(n_heads > 0 && d % n_heads == 0,
                "cross_attention: dimension not divisible by head count");
  const Eigen::Index dh = d / n_heads;

  Matrix<Scalar> q = detail::project<Scalar>(acou, proj.query);
  Matrix<Scalar> k = detail::project<Scalar>(phr, proj.key);
  Matrix<Scalar> v = detail::project<Scalar>(phr, proj.value);

  AttentionOutput<Scalar> out;
  Matrix<Scalar> concat(acou.rows(), d);
  for (int h = 0; h < n_heads; ++h) {
    auto qh = q.middleCols(h * dh, dh);
    auto kh = k.middleCols(h * dh, dh);
    out.weights.push_back(softmax_rows(corr_scores(qh, kh)));
    concat.middleCols(h * dh, dh) = out.weights.back() * v.middleCols(h * dh, dh);
  }
  out.biased = detail::project<Scalar>(concat, proj.output);
  out.compound = out.biased + acou;
  return out;
}

// Phrase-level correlation: elementwise max over the per-head weights.
template <typename Scalar>
Matrix<Scalar> phrase_corr_from_heads(const std::vector<Matrix<Scalar>>& heads) {
  require_shape(!heads.empty(), "phrase_corr_from_heads: no heads");
  Matrix<Scalar> out = heads.front();
  for (size_t n = 1; n < heads.size(); ++n) {
    require_shape(heads[n].rows() == out.rows() && heads[n].cols() == out.cols(),
                  "phrase_corr_from_heads: head shapes differ");
    out = out.cwiseMax(heads[n]);
  }
  return out;
}

}  // namespace ctxbias

#endif  // CTXBIAS_ATTENTION_HPP_
