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

#ifndef CTXBIAS_SMOOTHING_HPP_
#define CTXBIAS_SMOOTHING_HPP_

#include <algorithm>
#include <cmath>

#include "ctxbias/tensor.hpp"

namespace ctxbias {

struct SmoothingParams {
  double omega = 0.6;

  void validate() const {
    if (!(omega >= 0.0 && omega <= 1.0)) throw Error("config", "omega must be in [0, 1]");
  }
};

// Conv1d with kernel [(1-w)/2, w, (1-w)/2] and edge-replicate padding.
template <typename Derived>
Vector<typename Derived::Scalar> triangular_smooth(const Eigen::MatrixBase<Derived>& q,
                                                   const SmoothingParams& p) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = q.size();
  const Scalar side = (1 - p.omega) / 2;
  Vector<Scalar> out(n);
  for (Eigen::Index u = 0; u < n; ++u) {
    Scalar left = q(std::max<Eigen::Index>(u - 1, 0));
    Scalar right = q(std::min<Eigen::Index>(u + 1, n - 1));
    out(u) = side * left + Scalar(p.omega) * q(u) + side * right;
  }
  return out;
}

// round-half-up of the summed smoothed list correlation, clamped to [1, U].
template <typename Derived>
int estimate_phrase_length(const Eigen::MatrixBase<Derived>& q_slist) {
  const int cap = std::max<int>(1, static_cast<int>(q_slist.size()));
  const double rounded = std::floor(static_cast<double>(q_slist.sum()) + 0.5);
  if (!(rounded >= 1.0)) return 1;
  return static_cast<int>(std::min<double>(rounded, cap));
}

// Sums of every length-`len` window; entry j covers [j, j + len).
template <typename Derived>
Vector<typename Derived::Scalar> box_sums(const Eigen::MatrixBase<Derived>& q, int len) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index starts = q.size() - len + 1;
  require_shape(len >= 1 && starts >= 1, "box_sums: window longer than sequence");
  Vector<Scalar> out(starts);
  Scalar acc = q.head(len).sum();
  out(0) = acc;
  for (Eigen::Index j = 1; j < starts; ++j) {
    acc += q(j + len - 1) - q(j - 1);
    out(j) = acc;
  }
  return out;
}

namespace detail {

// Best window start for step u given precomputed box sums; candidates are
// [u - len + 1, u + len - 1] clipped to valid starts, ties to the smallest.
template <typename Derived>
int best_window(const Eigen::MatrixBase<Derived>& boxes, int len, int u) {
  const int last = static_cast<int>(boxes.size()) - 1;
  int lo = std::max(0, u - len + 1);
  int hi = std::min(last, u + len - 1);
  if (lo > hi) lo = hi = std::clamp(u, 0, last);
  int best = lo;
  for (int j = lo + 1; j <= hi; ++j) {
    if (boxes(j) > boxes(best)) best = j;
  }
  return best;
}

}  // namespace detail

template <typename Derived>
int locate_window(const Eigen::MatrixBase<Derived>& q_list, int len, int u) {
  require_shape(len >= 1 && len <= q_list.size(), "locate_window: need 1 <= L' <= U");
  require_shape(u >= 0 && u < q_list.size(), "locate_window: step out of range");
  return detail::best_window(box_sums(q_list, len), len, u);
}

// List-correlation-guided smoothing of the U x M phrase correlation: the
// window length comes from the smoothed list correlation, each step picks
// the window start with the largest raw list-correlation mass, and the
// selected window sum of phrase scores is squashed by tanh.
template <typename DerivedP, typename DerivedL, typename DerivedS>
Matrix<typename DerivedP::Scalar> guided_phrase_smooth(const Eigen::MatrixBase<DerivedP>& q_phr,
                                                       const Eigen::MatrixBase<DerivedL>& q_list,
                                                       const Eigen::MatrixBase<DerivedS>& q_slist) {
  using Scalar = typename DerivedP::Scalar;
  const Eigen::Index steps = q_phr.rows();
  require_shape(q_list.size() == steps && q_slist.size() == steps,
                "guided_phrase_smooth: step counts differ");
  Matrix<Scalar> out(steps, q_phr.cols());
  if (steps == 0) return out;
  const int len = estimate_phrase_length(q_slist);
  Vector<Scalar> boxes = box_sums(q_list, len);

  for (Eigen::Index u = 0; u < steps; ++u) {
    int j = detail::best_window(boxes, len, static_cast<int>(u));
    out.row(u) = q_phr.middleRows(j, len).colwise().sum().array().tanh().matrix();
  }
  return out;
}

}  // namespace ctxbias

#endif  // CTXBIAS_SMOOTHING_HPP_
