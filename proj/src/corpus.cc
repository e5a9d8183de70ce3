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

#include "ctxbias/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "ctxbias/utf8.hpp"

namespace ctxbias {

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path);
  return out;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    size_t next = s.find(sep, pos);
    out.emplace_back(s.substr(pos, next == std::string_view::npos ? s.npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

int parse_int(std::string_view s, const std::string& context) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error("format", context + ": bad integer '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

Vocabulary::Vocabulary(const std::vector<std::string>& tokens, std::uint64_t confusable_seed)
    : confusable_seed_(confusable_seed) {
  tokens_.reserve(tokens.size() + 2);
  tokens_.emplace_back(kUnknownSymbol);
  tokens_.emplace_back(kNoBiasSymbol);
  index_.emplace(tokens_[0], 0);
  index_.emplace(tokens_[1], 1);
  for (const auto& t : tokens) {
    if (t.empty()) throw Error("vocab", "empty token");
    if (!index_.emplace(t, static_cast<int>(tokens_.size())).second) {
      throw Error("vocab", "duplicate or reserved token '" + t + "'");
    }
    tokens_.push_back(t);
  }

  // Pair up regular tokens after a seeded shuffle; an odd one out borrows a
  // partner without reciprocity.
  confusable_.resize(tokens_.size());
  std::iota(confusable_.begin(), confusable_.end(), 0);
  std::vector<int> order(tokens.size());
  std::iota(order.begin(), order.end(), 2);
  std::mt19937_64 rng(confusable_seed);
  std::shuffle(order.begin(), order.end(), rng);
  for (size_t i = 0; i + 1 < order.size(); i += 2) {
    confusable_[order[i]] = order[i + 1];
    confusable_[order[i + 1]] = order[i];
  }
  if (order.size() % 2 == 1 && order.size() > 1) {
    confusable_[order.back()] = order.front();
  }
}

int Vocabulary::index(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnknown : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

TokenSeq Vocabulary::tokenize(std::string_view text, std::vector<std::string>* unknown) const {
  TokenSeq out;
  for (const auto& ch : split_utf8(text)) {
    int idx = index(ch);
    if (idx == kUnknown && ch != kUnknownSymbol && unknown) unknown->push_back(ch);
    out.push_back(idx);
  }
  return out;
}

std::string Vocabulary::detokenize(const TokenSeq& tokens) const {
  std::string out;
  for (int t : tokens) out += token(t);
  return out;
}

BiasingList BiasingList::from_phrases(const std::vector<TokenSeq>& phrases) {
  BiasingList list;
  list.phrases_.reserve(phrases.size() + 1);
  list.phrases_.push_back({TokenSeq{Vocabulary::kNoBias}});
  std::set<TokenSeq> seen;
  for (const auto& p : phrases) {
    int len = static_cast<int>(p.size());
    if (len < kMinPhraseLength || len > kMaxPhraseLength) {
      throw Error("list", "phrase length " + std::to_string(len) + " outside [" +
                              std::to_string(kMinPhraseLength) + ", " +
                              std::to_string(kMaxPhraseLength) + "]");
    }
    if (std::find(p.begin(), p.end(), Vocabulary::kNoBias) != p.end()) {
      throw Error("list", "phrase contains the no-bias symbol");
    }
    if (!seen.insert(p).second) throw Error("list", "duplicate phrase");
    list.phrases_.push_back({p});
  }
  return list;
}

BiasingList BiasingList::prefix(int m) const {
  if (m < 1 || m > size()) throw Error("list", "prefix length out of range");
  BiasingList out;
  out.phrases_.assign(phrases_.begin(), phrases_.begin() + m);
  return out;
}

BiasingList BiasingList::subset(const std::vector<int>& indices) const {
  if (indices.empty() || indices.front() != kNoBiasIndex) {
    throw Error("list", "subset must start with the no-bias entry");
  }
  BiasingList out;
  std::set<int> seen;
  for (int m : indices) {
    if (m < 0 || m >= size() || !seen.insert(m).second) {
      throw Error("list", "bad subset index " + std::to_string(m));
    }
    out.phrases_.push_back(phrases_[m]);
  }
  return out;
}

Vocabulary load_vocabulary(const std::string& path, std::uint64_t confusable_seed) {
  auto in = open_input(path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty() || line == Vocabulary::kUnknownSymbol || line == Vocabulary::kNoBiasSymbol) {
      continue;
    }
    tokens.push_back(line);
  }
  return Vocabulary(tokens, confusable_seed);
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
  auto out = open_output(path);
  for (int i = 0; i < vocab.size(); ++i) out << vocab.token(i) << '\n';
}

BiasingList load_biasing_list(const std::string& path, const Vocabulary& vocab,
                              std::vector<std::string>* warnings) {
  auto in = open_input(path);
  std::vector<TokenSeq> phrases;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string text(trim(line));
    if (text.empty()) continue;
    if (!seen.insert(text).second) {
      throw Error("list", path + ":" + std::to_string(lineno) + ": duplicate phrase '" + text + "'");
    }
    std::vector<std::string> unknown;
    phrases.push_back(vocab.tokenize(text, &unknown));
    if (warnings) {
      for (const auto& u : unknown) {
        warnings->push_back(path + ":" + std::to_string(lineno) + ": unknown token '" + u + "'");
      }
    }
  }
  if (phrases.empty()) throw Error("list", "empty biasing list");
  return BiasingList::from_phrases(phrases);
}

void save_biasing_list(const BiasingList& list, const Vocabulary& vocab, const std::string& path) {
  auto out = open_output(path);
  for (int m = 1; m < list.size(); ++m) out << vocab.detokenize(list.phrase(m).tokens) << '\n';
}

void validate_utterance(const Utterance& utt, const BiasingList& list) {
  auto fail = [&](const std::string& why) {
    throw Error("span", "utterance " + utt.id + ": " + why);
  };
  std::vector<GoldSpan> spans = utt.spans;
  std::sort(spans.begin(), spans.end(),
            [](const GoldSpan& a, const GoldSpan& b) { return a.start < b.start; });
  int prev_end = 0;
  for (const auto& s : spans) {
    if (s.start < 0 || s.end > utt.length() || s.start >= s.end) fail("span out of range");
    if (s.start < prev_end) fail("overlapping spans");
    if (s.phrase <= BiasingList::kNoBiasIndex || s.phrase >= list.size()) {
      fail("span phrase index " + std::to_string(s.phrase) + " not in list");
    }
    const auto& p = list.phrase(s.phrase).tokens;
    if (!std::equal(p.begin(), p.end(), utt.tokens.begin() + s.start, utt.tokens.begin() + s.end) ||
        static_cast<int>(p.size()) != s.length()) {
      fail("span tokens do not match phrase " + std::to_string(s.phrase));
    }
    prev_end = s.end;
  }
  if (utt.duration_seconds < 0.0) fail("negative duration");
}

std::vector<Utterance> load_utterances(const std::string& path, const Vocabulary& vocab,
                                       const BiasingList& list) {
  auto in = open_input(path);
  std::vector<Utterance> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (trim(line).empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    auto fields = split(line, '\t');
    if (fields.size() < 3 || fields.size() > 4) {
      throw Error("format", where + ": expected 3 or 4 tab-separated fields");
    }
    Utterance utt;
    utt.id = fields[0];
    if (utt.id.empty()) throw Error("format", where + ": empty id");
    utt.tokens = vocab.tokenize(fields[1]);
    try {
      size_t used = 0;
      utt.duration_seconds = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error("format", where + ": bad duration '" + fields[2] + "'");
    }
    if (fields.size() == 4 && !trim(fields[3]).empty()) {
      for (const auto& item : split(trim(fields[3]), ';')) {
        auto parts = split(item, ':');
        if (parts.size() != 3) throw Error("format", where + ": bad span '" + item + "'");
        utt.spans.push_back({parse_int(parts[0], where), parse_int(parts[1], where),
                             parse_int(parts[2], where)});
      }
    }
    validate_utterance(utt, list);
    out.push_back(std::move(utt));
  }
  return out;
}

void save_utterances(const std::vector<Utterance>& utts, const Vocabulary& vocab,
                     const std::string& path) {
  auto out = open_output(path);
  for (const auto& utt : utts) {
    std::ostringstream dur;
    dur << std::setprecision(17) << utt.duration_seconds;
    out << utt.id << '\t' << vocab.detokenize(utt.tokens) << '\t' << dur.str() << '\t';
    for (size_t i = 0; i < utt.spans.size(); ++i) {
      if (i) out << ';';
      out << utt.spans[i].start << ':' << utt.spans[i].end << ':' << utt.spans[i].phrase;
    }
    out << '\n';
  }
}

PhiMask build_phi(const BiasingList& list, const Vocabulary& vocab) {
  PhiMask phi;
  phi.matrix = MatrixXd::Zero(list.size(), vocab.size());
  for (int m = 0; m < list.size(); ++m) {
    for (int v : list.phrase(m).tokens) {
      if (v < 0 || v >= vocab.size()) {
        throw Error("index", "phrase " + std::to_string(m) + " has invalid token " + std::to_string(v));
      }
      phi.matrix(m, v) = 1.0;
    }
  }
  return phi;
}

}  // namespace ctxbias
