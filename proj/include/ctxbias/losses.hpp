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

#ifndef CTXBIAS_LOSSES_HPP_
#define CTXBIAS_LOSSES_HPP_

#include <algorithm>
#include <cmath>

#include "ctxbias/tensor.hpp"

namespace ctxbias {

// Probabilities entering a log are clamped to [kLogClamp, 1 - kLogClamp].
inline constexpr double kLogClamp = 1e-7;

struct FocalParams {
  double alpha = 0.75;
  double gamma = 2.0;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("config", "focal alpha must be in (0, 1)");
    if (!(gamma >= 0.0)) throw Error("config", "focal gamma must be >= 0");
  }
};

// Summed binary focal loss of list-level scores `q` against 0/1 labels `y`.
template <typename DerivedQ, typename DerivedY>
typename DerivedQ::Scalar focal_loss(const Eigen::MatrixBase<DerivedQ>& q,
                                     const Eigen::MatrixBase<DerivedY>& y, const FocalParams& p) {
  using Scalar = typename DerivedQ::Scalar;
  require_shape(q.size() == y.size(), "focal_loss: length mismatch");
  Scalar total = 0;
  for (Eigen::Index u = 0; u < q.size(); ++u) {
    Scalar qu = std::clamp<Scalar>(q(u), kLogClamp, 1 - kLogClamp);
    Scalar yu = y(u);
    Scalar tau = qu * yu + (1 - qu) * (1 - yu);
    Scalar theta = p.alpha * yu + (1 - p.alpha) * (1 - yu);
    total += -theta * std::pow(1 - tau, p.gamma) * std::log(tau);
  }
  return total;
}

// d focal_loss / d q. Zero where q sits on the clamp.
template <typename DerivedQ, typename DerivedY>
Vector<typename DerivedQ::Scalar> focal_loss_grad(const Eigen::MatrixBase<DerivedQ>& q,
                                                  const Eigen::MatrixBase<DerivedY>& y,
                                                  const FocalParams& p) {
  using Scalar = typename DerivedQ::Scalar;
  require_shape(q.size() == y.size(), "focal_loss_grad: length mismatch");
  Vector<Scalar> g = Vector<Scalar>::Zero(q.size());
  for (Eigen::Index u = 0; u < q.size(); ++u) {
    if (q(u) <= kLogClamp || q(u) >= 1 - kLogClamp) continue;
    Scalar yu = y(u);
    Scalar tau = q(u) * yu + (1 - q(u)) * (1 - yu);
    Scalar theta = p.alpha * yu + (1 - p.alpha) * (1 - yu);
    Scalar dtau = -theta * std::pow(1 - tau, p.gamma) / tau;
    if (p.gamma != 0.0) {
      dtau += theta * p.gamma * std::pow(1 - tau, p.gamma - 1) * std::log(tau);
    }
    g(u) = dtau * (2 * yu - 1);
  }
  return g;
}

// e' = sum_u y_u * biased_u.
template <typename DerivedB, typename DerivedY>
Vector<typename DerivedB::Scalar> phrase_pool(const Eigen::MatrixBase<DerivedB>& biased,
                                              const Eigen::MatrixBase<DerivedY>& y_list) {
  require_shape(biased.rows() == y_list.size(), "phrase_pool: length mismatch");
  return biased.transpose() * y_list;
}

template <typename DerivedE, typename DerivedP>
Vector<typename DerivedE::Scalar> cosine_sims(const Eigen::MatrixBase<DerivedE>& e,
                                              const Eigen::MatrixBase<DerivedP>& phr) {
  using Scalar = typename DerivedE::Scalar;
  require_shape(e.size() == phr.cols(), "cosine_sims: dimension mismatch");
  Scalar en = e.norm();
  if (!(en > 0)) throw Error("domain", "cosine_sims: zero-norm query");
  Vector<Scalar> row_norms = phr.rowwise().norm();
  if (!(row_norms.minCoeff() > 0)) throw Error("domain", "cosine_sims: zero-norm phrase row");
  Vector<Scalar> dots = phr * e.derived().reshaped();
  return dots.cwiseQuotient(row_norms) / en;
}

// sum_m (-s_m y_m + s_m (1 - y_m)); linear in s.
template <typename DerivedS, typename DerivedY>
typename DerivedS::Scalar contrastive_loss(const Eigen::MatrixBase<DerivedS>& s,
                                           const Eigen::MatrixBase<DerivedY>& y) {
  require_shape(s.size() == y.size(), "contrastive_loss: length mismatch");
  return (s.array() * (1 - 2 * y.array())).sum();
}

template <typename DerivedS, typename DerivedY>
Vector<typename DerivedS::Scalar> contrastive_loss_grad(const Eigen::MatrixBase<DerivedS>& s,
                                                        const Eigen::MatrixBase<DerivedY>& y) {
  require_shape(s.size() == y.size(), "contrastive_loss_grad: length mismatch");
  return (1 - 2 * y.array()).matrix();
}

// sum_u -log q_tok(u, y_u).
template <typename Derived>
typename Derived::Scalar token_ce(const Eigen::MatrixBase<Derived>& q_tok, const TokenSeq& y) {
  using Scalar = typename Derived::Scalar;
  require_shape(q_tok.rows() == static_cast<Eigen::Index>(y.size()), "token_ce: length mismatch");
  Scalar total = 0;
  for (size_t u = 0; u < y.size(); ++u) {
    if (y[u] < 0 || y[u] >= q_tok.cols()) {
      throw Error("index", "token_ce: label " + std::to_string(y[u]) + " out of range");
    }
    total -= std::log(std::max<Scalar>(q_tok(u, y[u]), kLogClamp));
  }
  return total;
}

template <typename Derived>
Matrix<typename Derived::Scalar> token_ce_grad(const Eigen::MatrixBase<Derived>& q_tok,
                                               const TokenSeq& y) {
  using Scalar = typename Derived::Scalar;
  require_shape(q_tok.rows() == static_cast<Eigen::Index>(y.size()), "token_ce_grad: length mismatch");
  Matrix<Scalar> g = Matrix<Scalar>::Zero(q_tok.rows(), q_tok.cols());
  for (size_t u = 0; u < y.size(); ++u) {
    if (y[u] < 0 || y[u] >= q_tok.cols()) throw Error("index", "token_ce_grad: label out of range");
    Scalar p = q_tok(u, y[u]);
    if (p > kLogClamp) g(u, y[u]) = -1 / p;
  }
  return g;
}

template <typename Scalar>
Scalar total_loss(Scalar l_list, Scalar l_phr, Scalar l_tok) {
  return l_list + l_phr + l_tok;
}

}  // namespace ctxbias

#endif  // CTXBIAS_LOSSES_HPP_
