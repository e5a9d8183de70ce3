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

#include "ctxbias/jointdecode.hpp"

#include <algorithm>
#include <chrono>

namespace ctxbias {

PhraseMatcher::PhraseMatcher(const BiasingList& list) : list_(list) {
  for (int m = 1; m < list.size(); ++m) {
    by_first_[list.phrase(m).tokens.front()].push_back(m);
  }
  for (auto& [first, ids] : by_first_) {
    std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
      return list.phrase(a).length() > list.phrase(b).length();
    });
  }
}

std::vector<PhraseMatcher::Match> PhraseMatcher::scan(const TokenSeq& hyp) const {
  std::vector<Match> out;
  const size_t n = hyp.size();
  size_t pos = 0;
  while (pos < n) {
    int hit = -1;
    auto it = by_first_.find(hyp[pos]);
    if (it != by_first_.end()) {
      for (int m : it->second) {
        const auto& p = list_.phrase(m).tokens;
        if (pos + p.size() <= n && std::equal(p.begin(), p.end(), hyp.begin() + pos)) {
          hit = m;
          break;
        }
      }
    }
    if (hit >= 0) {
      out.push_back({static_cast<int>(pos), hit});
      pos += list_.phrase(hit).tokens.size();
    } else {
      ++pos;
    }
  }
  return out;
}

int count_phrases(const TokenSeq& hyp, const BiasingList& list) {
  return PhraseMatcher(list).count(hyp);
}

TokenSeq post_process(const TokenSeq& hyp_casr, const TokenSeq& hyp_bb,
                      const PhraseMatcher& matcher) {
  return matcher.count(hyp_casr) > matcher.count(hyp_bb) ? hyp_casr : hyp_bb;
}

TokenSeq post_process(const TokenSeq& hyp_casr, const TokenSeq& hyp_bb, const BiasingList& list) {
  return post_process(hyp_casr, hyp_bb, PhraseMatcher(list));
}

DecodeResult decode_utterance(const CorrelationBundle& bundle, const BiasingList& list,
                              const PhiMask& phi, const DecodeParams& params,
                              DecodeTrace* trace) {
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index steps = bundle.q_list.size();
  require_shape(bundle.q_phr.rows() == steps && bundle.q_phr.cols() == list.size(),
                "decode_utterance: q_phr does not match the list");
  require_shape(phi.num_phrases() == list.size() && phi.vocab_size() == bundle.q_tok.cols(),
                "decode_utterance: phi does not match list and vocabulary");
  require_shape(bundle.p_bb.rows() == steps && bundle.p_bb.cols() == bundle.q_tok.cols() &&
                    bundle.q_tok.rows() == steps,
                "decode_utterance: token distributions do not match");

  DecodeResult r;
  r.hyp_bb = greedy_decode(bundle.p_bb);
  if (list.num_real() == 0 || steps == 0) {
    r.q_bias = MatrixXd::Constant(steps, bundle.q_tok.cols(), 1.0 / bundle.q_tok.cols());
    r.hyp_casr = r.hyp_bb;
    r.hyp_final = r.hyp_bb;
    if (trace) {
      trace->q_slist = VectorXd::Zero(steps);
      trace->q_sphr = MatrixXd::Zero(steps, list.size());
      trace->q_casr = bundle.p_bb;
    }
  } else {
    VectorXd q_slist = triangular_smooth(bundle.q_list, params.smoothing);
    MatrixXd q_sphr = guided_phrase_smooth(bundle.q_phr, bundle.q_list, q_slist);
    r.q_bias = joint_intersection(q_slist, q_sphr, bundle.q_tok, phi, params.normalization);
    MatrixXd q_casr = interpolate(bundle.p_bb, r.q_bias, q_slist);
    r.hyp_casr = greedy_decode(q_casr);
    r.hyp_final = params.post_process ? post_process(r.hyp_casr, r.hyp_bb, list) : r.hyp_casr;
    if (trace) {
      trace->q_slist = std::move(q_slist);
      trace->q_sphr = std::move(q_sphr);
      trace->q_casr = std::move(q_casr);
    }
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

TokenSeq decode_plain_attention(const CorrelationBundle& bundle) {
  return greedy_decode(interpolate(bundle.p_bb, bundle.q_tok, bundle.q_list));
}

}  // namespace ctxbias
