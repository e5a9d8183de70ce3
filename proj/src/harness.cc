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

#include "ctxbias/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ctxbias/jointdecode.hpp"
#include "ctxbias/purify.hpp"
#include "ctxbias/rng.hpp"
#include "ctxbias/simbank.hpp"
#include "ctxbias/utf8.hpp"

namespace ctxbias {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

constexpr int kMaxGold = 50;
constexpr int kFillerAttempts = 200;
constexpr std::uint64_t kCjkBase = 0x4E00;

std::string encode_utf8(std::uint32_t cp) {
  std::string s;
  if (cp < 0x80) {
    s += static_cast<char>(cp);
  } else if (cp < 0x800) {
    s += static_cast<char>(0xC0 | (cp >> 6));
    s += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    s += static_cast<char>(0xE0 | (cp >> 12));
    s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    s += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return s;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

class CorpusBuilder {
 public:
  CorpusBuilder(const CorpusSpec& spec, std::uint64_t seed, int vocab_total)
      : spec_(spec), rng_(seed), first_regular_(2), vocab_total_(vocab_total) {}

  int token() {
    return std::uniform_int_distribution<int>(first_regular_, vocab_total_ - 1)(rng_);
  }
  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p; }

  TokenSeq random_phrase() {
    TokenSeq p(uniform(spec_.min_phrase_len, spec_.max_phrase_len));
    for (int& t : p) t = token();
    return p;
  }

  // One-token variant (a single position redrawn) or a shared-prefix variant
  // (leading half kept, the rest redrawn).
  TokenSeq variant(const TokenSeq& gold) {
    TokenSeq p = gold;
    if (coin(0.5)) {
      int pos = uniform(0, static_cast<int>(p.size()) - 1);
      p[pos] = token();
    } else {
      int keep = std::max<int>(1, static_cast<int>(p.size()) / 2);
      for (size_t i = keep; i < p.size(); ++i) p[i] = token();
    }
    return p;
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  const CorpusSpec& spec_;
  std::mt19937_64 rng_;
  int first_regular_;
  int vocab_total_;
};

bool scan_matches_spans(const PhraseMatcher& matcher, const Utterance& utt) {
  auto found = matcher.scan(utt.tokens);
  if (found.size() != utt.spans.size()) return false;
  for (size_t i = 0; i < found.size(); ++i) {
    if (found[i].start != utt.spans[i].start || found[i].phrase != utt.spans[i].phrase) return false;
  }
  return true;
}

// Per-utterance outcome of one method.
struct Outcome {
  EditCounts edits;
  PhraseCounts phrases;
  std::optional<double> retention;
  double seconds = 0.0;
  int kept = 0;
  bool count_violation = false;
  bool cer_violation = false;
};

struct CellContext {
  const ExperimentConfig& config;
  const Corpus& corpus;
  const BiasingList& list;
  const PhiMask& phi;
  const PhraseMatcher& matcher;
  NoiseSpec noise;
};

bool needs_full_bundle(const std::vector<Method>& methods) {
  return std::any_of(methods.begin(), methods.end(), [](Method m) {
    return m == Method::kPlainAttention || m == Method::kScJoint || m == Method::kScJointP;
  });
}

void score_hypothesis(Outcome& out, const TokenSeq& hyp, const Utterance& utt,
                      const PhraseMatcher& matcher) {
  out.edits = cer(hyp, utt.tokens);
  out.phrases = phrase_counts(hyp, utt, matcher);
}

void fill_post_processing(Outcome& plain, Outcome& post, const DecodeResult& r,
                          const BiasingList& decode_list) {
  PhraseMatcher local(decode_list);
  post.count_violation = local.count(r.hyp_final) < local.count(r.hyp_bb);
  post.cer_violation = post.edits.errors() > plain.edits.errors();
}

std::vector<Outcome> decode_one(const CellContext& ctx, const Utterance& utt) {
  const auto& methods = ctx.config.methods;
  std::vector<Outcome> outs(methods.size());
  DecodeParams params;
  params.smoothing = ctx.config.smoothing;

  auto t_bank = Clock::now();
  ScorerBank bank(utt, ctx.list, ctx.corpus.vocab, ctx.noise);
  const double bank_seconds = seconds_since(t_bank);

  CorrelationBundle full;
  double full_seconds = 0.0;
  if (needs_full_bundle(methods)) {
    auto t0 = Clock::now();
    full = bank.score_all(true);
    full_seconds = seconds_since(t0);
  }

  std::optional<DecodeResult> sc;
  double sc_seconds = 0.0;
  std::optional<DecodeResult> purified[2];  // ocp, gcp
  std::optional<PurifyResult> purify_runs[2];
  std::optional<BiasingList> purified_lists[2];
  double purified_seconds[2] = {0.0, 0.0};

  auto run_purified = [&](int which) {
    if (purified[which]) return;
    auto t0 = Clock::now();
    PurifyParams pp = ctx.config.purify;
    pp.shuffle_seed = shuffle_seed_for(ctx.noise, utt);
    GroupScorer scorer = [&bank](std::span<const int> group) {
      std::vector<int> ids;
      ids.reserve(group.size() + 1);
      ids.push_back(BiasingList::kNoBiasIndex);
      ids.insert(ids.end(), group.begin(), group.end());
      CorrelationBundle b = bank.score(ids, false);
      return GroupScores{std::move(b.q_list), std::move(b.q_phr)};
    };
    PurifyResult pr = which == 0 ? ocp(ctx.list.size(), scorer, pp) : gcp(ctx.list.size(), scorer, pp);
    CorrelationBundle bundle = bank.score(pr.kept, true);
    BiasingList sub = ctx.list.subset(pr.kept);
    RestrictedPhi rphi = restrict_phi(ctx.phi, pr.kept);
    DecodeResult r = decode_utterance(bundle, sub, rphi.phi, params);
    purified_seconds[which] = seconds_since(t0);
    purified[which] = std::move(r);
    purify_runs[which] = std::move(pr);
    purified_lists[which] = std::move(sub);
  };

  for (size_t k = 0; k < methods.size(); ++k) {
    Outcome& out = outs[k];
    const Method m = methods[k];
    switch (m) {
      case Method::kBaseline: {
        auto t0 = Clock::now();
        TokenSeq hyp = greedy_decode(bank.backbone());
        out.seconds = bank_seconds + seconds_since(t0);
        score_hypothesis(out, hyp, utt, ctx.matcher);
        break;
      }
      case Method::kPlainAttention: {
        auto t0 = Clock::now();
        TokenSeq hyp = decode_plain_attention(full);
        out.seconds = bank_seconds + full_seconds + seconds_since(t0);
        score_hypothesis(out, hyp, utt, ctx.matcher);
        break;
      }
      case Method::kScJoint:
      case Method::kScJointP: {
        if (!sc) {
          auto t0 = Clock::now();
          sc = decode_utterance(full, ctx.list, ctx.phi, params);
          sc_seconds = seconds_since(t0);
        }
        out.seconds = bank_seconds + full_seconds + sc_seconds;
        if (m == Method::kScJoint) {
          score_hypothesis(out, sc->hyp_casr, utt, ctx.matcher);
        } else {
          score_hypothesis(out, sc->hyp_final, utt, ctx.matcher);
          Outcome plain;
          score_hypothesis(plain, sc->hyp_casr, utt, ctx.matcher);
          fill_post_processing(plain, out, *sc, ctx.list);
        }
        break;
      }
      case Method::kPscOcp:
      case Method::kPscOcpP:
      case Method::kPscGcp:
      case Method::kPscGcpP: {
        const int which = (m == Method::kPscGcp || m == Method::kPscGcpP) ? 1 : 0;
        run_purified(which);
        const DecodeResult& r = *purified[which];
        out.seconds = bank_seconds + purified_seconds[which];
        out.kept = purify_runs[which]->m_pur();
        out.retention = utterance_retention(*purify_runs[which], utt);
        if (uses_post_processing(m)) {
          score_hypothesis(out, r.hyp_final, utt, ctx.matcher);
          Outcome plain;
          score_hypothesis(plain, r.hyp_casr, utt, ctx.matcher);
          fill_post_processing(plain, out, r, *purified_lists[which]);
        } else {
          score_hypothesis(out, r.hyp_casr, utt, ctx.matcher);
        }
        break;
      }
    }
  }
  return outs;
}

template <typename Fn>
void parallel_for(int n, int workers, Fn&& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next++; i < n; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
        next = n;
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string cell_filename(const CellKey& key) {
  return method_name(key.method) + "_M" + std::to_string(key.list_length) + "_s" +
         std::to_string(key.seed) + ".json";
}

std::string percent(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * x);
  return buf;
}

std::map<std::pair<Method, int>, MetricsReport> pool_over_seeds(const std::vector<CellReport>& cells) {
  std::map<std::pair<Method, int>, MetricsReport> pooled;
  for (const auto& c : cells) pooled[{c.key.method, c.key.list_length}] += c.metrics;
  return pooled;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write " + path.string());
  out << text;
  if (!out) throw Error("io", "write failed for " + path.string());
}

}  // namespace

std::uint64_t corpus_seed(const ExperimentConfig& config, std::uint64_t seed) {
  return hash_key({config.global_seed, seed, hash_string("corpus")});
}

NoiseSpec noise_for_seed(const ExperimentConfig& config, std::uint64_t seed) {
  NoiseSpec n = config.noise;
  n.seed = hash_key({config.global_seed, seed, hash_string("noise")});
  return n;
}

std::uint64_t shuffle_seed_for(const NoiseSpec& noise, const Utterance& utt) {
  return hash_key({noise.seed, hash_string("purify"), hash_string(utt.id)});
}

Corpus generate_corpus(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  const CorpusSpec& spec = config.corpus;
  const int max_m = *std::max_element(config.list_lengths.begin(), config.list_lengths.end());
  const int min_m = *std::min_element(config.list_lengths.begin(), config.list_lengths.end());
  const int n_real = max_m - 1;
  const int n_gold = std::min(min_m - 1, kMaxGold);

  std::vector<std::string> symbols;
  symbols.reserve(spec.vocab_size);
  for (int i = 0; i < spec.vocab_size; ++i) symbols.push_back(encode_utf8(kCjkBase + i));
  const std::uint64_t cs = corpus_seed(config, seed);
  Vocabulary vocab(symbols, hash_key({cs, hash_string("vocab")}));

  CorpusBuilder b(spec, cs, vocab.size());
  std::set<TokenSeq> seen;
  std::vector<TokenSeq> phrases;
  phrases.reserve(n_real);
  auto add_unique = [&](auto&& make) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
      TokenSeq p = make();
      if (seen.insert(p).second) {
        phrases.push_back(std::move(p));
        return;
      }
    }
    throw Error("config", "vocabulary too small for the requested number of distinct phrases");
  };
  for (int i = 0; i < n_gold; ++i) add_unique([&] { return b.random_phrase(); });
  while (static_cast<int>(phrases.size()) < n_real) {
    if (n_gold > 0 && b.coin(spec.distractor_rate)) {
      add_unique([&] { return b.variant(phrases[b.uniform(0, n_gold - 1)]); });
    } else {
      add_unique([&] { return b.random_phrase(); });
    }
  }
  BiasingList full = BiasingList::from_phrases(phrases);

  std::vector<BiasingList> lists;
  for (int m : config.list_lengths) lists.push_back(full.prefix(m));
  std::vector<PhraseMatcher> matchers;
  matchers.reserve(lists.size() + 1);
  for (const auto& l : lists) matchers.emplace_back(l);
  matchers.emplace_back(full);

  std::vector<Utterance> utts;
  utts.reserve(spec.n_utterances);
  const int width = static_cast<int>(std::to_string(spec.n_utterances).size());
  for (int i = 0; i < spec.n_utterances; ++i) {
    Utterance utt;
    std::ostringstream id;
    id << "utt" << std::setw(width) << std::setfill('0') << i;
    utt.id = id.str();
    const int len = b.uniform(spec.min_len, spec.max_len);
    utt.duration_seconds = len * spec.seconds_per_token;

    std::vector<int> chosen;
    if (n_gold > 0 && b.coin(spec.span_rate)) {
      int n_spans = (n_gold > 1 && b.coin(spec.multi_span_rate)) ? 2 : 1;
      while (static_cast<int>(chosen.size()) < n_spans) {
        int g = b.uniform(1, n_gold);
        if (std::find(chosen.begin(), chosen.end(), g) == chosen.end()) chosen.push_back(g);
      }
      int total = 0;
      for (int g : chosen) total += full.phrase(g).length();
      if (total > len) chosen.resize(1);
    }
    int phrase_tokens = 0;
    for (int g : chosen) phrase_tokens += full.phrase(g).length();
    const int fillers = len - phrase_tokens;

    bool ok = false;
    for (int attempt = 0; attempt < kFillerAttempts && !ok; ++attempt) {
      // Random composition of the fillers into chosen.size() + 1 gaps.
      std::vector<int> cuts(chosen.size());
      for (int& c : cuts) c = b.uniform(0, fillers);
      std::sort(cuts.begin(), cuts.end());
      utt.tokens.clear();
      utt.spans.clear();
      int prev = 0;
      for (size_t s = 0; s < chosen.size(); ++s) {
        for (int f = prev; f < cuts[s]; ++f) utt.tokens.push_back(b.token());
        prev = cuts[s];
        const auto& pt = full.phrase(chosen[s]).tokens;
        GoldSpan span{static_cast<int>(utt.tokens.size()),
                      static_cast<int>(utt.tokens.size() + pt.size()), chosen[s]};
        utt.tokens.insert(utt.tokens.end(), pt.begin(), pt.end());
        utt.spans.push_back(span);
      }
      for (int f = prev; f < fillers; ++f) utt.tokens.push_back(b.token());
      ok = std::all_of(matchers.begin(), matchers.end(),
                       [&](const PhraseMatcher& m) { return scan_matches_spans(m, utt); });
    }
    if (!ok) throw Error("config", "cannot place phrases in " + utt.id + " without spurious matches");
    validate_utterance(utt, full);
    utts.push_back(std::move(utt));
  }
  return Corpus{std::move(vocab), std::move(full), std::move(utts), n_gold};
}

std::vector<CellReport> run_cells(const ExperimentConfig& config, const Corpus& corpus,
                                  std::uint64_t seed) {
  config.validate();
  const NoiseSpec noise = noise_for_seed(config, seed);
  const auto& utts = corpus.utterances;
  std::vector<CellReport> cells;
  for (int m : config.list_lengths) {
    if (m > corpus.full_list.size()) throw Error("config", "list length exceeds the corpus list");
    const BiasingList list = corpus.list(m);
    const PhiMask phi = build_phi(list, corpus.vocab);
    const PhraseMatcher matcher(list);
    CellContext ctx{config, corpus, list, phi, matcher, noise};

    std::vector<std::vector<Outcome>> per_utt(utts.size());
    parallel_for(static_cast<int>(utts.size()), config.workers,
                 [&](int i) { per_utt[i] = decode_one(ctx, utts[i]); });

    // Reduce in utterance-id order so floating sums do not depend on the
    // worker schedule.
    std::vector<size_t> order(utts.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t c) { return utts[a].id < utts[c].id; });

    for (size_t k = 0; k < config.methods.size(); ++k) {
      CellReport cell;
      cell.key = {config.methods[k], m, seed};
      cell.metrics.has_retention = is_purified(config.methods[k]);
      for (size_t i : order) {
        const Outcome& o = per_utt[i][k];
        MetricsReport r;
        r.edits = o.edits;
        r.phrases = o.phrases;
        if (o.retention) {
          r.retention_sum = *o.retention;
          r.retention_count = 1;
        }
        r.decode_seconds = o.seconds;
        r.audio_seconds = utts[i].duration_seconds;
        r.utterances = 1;
        cell.metrics += r;
        cell.kept_sum += o.kept;
        cell.count_violations += o.count_violation;
        cell.cer_violations += o.cer_violation;
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

SweepResult run_sweep(const ExperimentConfig& config) {
  config.validate();
  SweepResult result;
  for (std::uint64_t seed : config.seeds) {
    Corpus corpus = generate_corpus(config, seed);
    for (auto& cell : run_cells(config, corpus, seed)) result.emplace(cell.key, std::move(cell));
  }
  return result;
}

std::string cell_json(const CellReport& cell) {
  const auto& r = cell.metrics;
  json j;
  j["method"] = method_name(cell.key.method);
  j["list_length"] = cell.key.list_length;
  j["seed"] = cell.key.seed;
  j["utterances"] = r.utterances;
  j["substitutions"] = r.edits.substitutions;
  j["insertions"] = r.edits.insertions;
  j["deletions"] = r.edits.deletions;
  j["ref_length"] = r.edits.ref_length;
  j["cer"] = r.cer();
  j["tp"] = r.phrases.tp;
  j["fp"] = r.phrases.fp;
  j["fn"] = r.phrases.fn;
  j["precision"] = r.precision();
  j["recall"] = r.recall();
  j["f1"] = r.f1();
  j["has_retention"] = r.has_retention;
  j["retention_sum"] = r.retention_sum;
  j["retention_count"] = r.retention_count;
  if (auto ret = r.retention()) {
    j["retention"] = *ret;
  } else {
    j["retention"] = nullptr;
  }
  j["kept_sum"] = cell.kept_sum;
  j["count_violations"] = cell.count_violations;
  j["cer_violations"] = cell.cer_violations;
  j["audio_seconds"] = r.audio_seconds;
  j["timing"] = {{"decode_seconds", r.decode_seconds}, {"rtf", r.rtf()}};
  return j.dump(2) + "\n";
}

CellReport parse_cell_json(const std::string& text) {
  CellReport cell;
  try {
    json j = json::parse(text);
    cell.key.method = parse_method(j.at("method").get<std::string>());
    cell.key.list_length = j.at("list_length").get<int>();
    cell.key.seed = j.at("seed").get<std::uint64_t>();
    auto& r = cell.metrics;
    r.utterances = j.at("utterances").get<long>();
    r.edits.substitutions = j.at("substitutions").get<long>();
    r.edits.insertions = j.at("insertions").get<long>();
    r.edits.deletions = j.at("deletions").get<long>();
    r.edits.ref_length = j.at("ref_length").get<long>();
    r.phrases.tp = j.at("tp").get<long>();
    r.phrases.fp = j.at("fp").get<long>();
    r.phrases.fn = j.at("fn").get<long>();
    r.has_retention = j.at("has_retention").get<bool>();
    r.retention_sum = j.at("retention_sum").get<double>();
    r.retention_count = j.at("retention_count").get<long>();
    r.audio_seconds = j.at("audio_seconds").get<double>();
    r.decode_seconds = j.at("timing").at("decode_seconds").get<double>();
    cell.kept_sum = j.at("kept_sum").get<long>();
    cell.count_violations = j.at("count_violations").get<long>();
    cell.cer_violations = j.at("cer_violations").get<long>();
  } catch (const json::exception& e) {
    throw Error("format", std::string("bad cell JSON: ") + e.what());
  }
  return cell;
}

std::string format_table(const std::vector<CellReport>& cells) {
  if (cells.empty()) throw Error("report", "no cells to report");
  auto pooled = pool_over_seeds(cells);
  std::set<int> lengths;
  std::set<Method> present;
  for (const auto& [key, report] : pooled) {
    present.insert(key.first);
    lengths.insert(key.second);
  }
  constexpr int kMethodWidth = 16;
  constexpr int kCellWidth = 28;
  std::ostringstream os;
  os << std::left << std::setw(kMethodWidth) << "method";
  for (int m : lengths) os << " | " << std::setw(kCellWidth) << ("NE-" + std::to_string(m));
  os << "\n";
  for (Method method : all_methods()) {
    if (!present.count(method)) continue;
    os << std::left << std::setw(kMethodWidth) << method_name(method);
    for (int m : lengths) {
      auto it = pooled.find({method, m});
      std::string entry = "-";
      if (it != pooled.end()) {
        const auto& r = it->second;
        entry = percent(r.cer()) + " // " + percent(r.recall()) + "|" + percent(r.precision()) +
                "|" + percent(r.f1());
      }
      os << " | " << std::setw(kCellWidth) << entry;
    }
    os << "\n";
  }
  return os.str();
}

std::string format_rtf_csv(const std::vector<CellReport>& cells) {
  std::ostringstream os;
  os << std::setprecision(9) << "method,list_length,decode_seconds,audio_seconds,rtf\n";
  for (const auto& [key, r] : pool_over_seeds(cells)) {
    os << method_name(key.first) << "," << key.second << "," << r.decode_seconds << ","
       << r.audio_seconds << "," << r.rtf() << "\n";
  }
  return os.str();
}

std::vector<std::string> emit_report(const std::vector<CellReport>& cells, const std::string& dir) {
  if (cells.empty()) throw Error("report", "no cells to report");
  namespace fs = std::filesystem;
  std::vector<std::string> written;
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "cells", ec);
  if (ec) throw Error("io", "cannot create " + dir + ": " + ec.message());
  for (const auto& c : cells) {
    fs::path p = fs::path(dir) / "cells" / cell_filename(c.key);
    write_file(p, cell_json(c));
    written.push_back(p.string());
  }
  fs::path table = fs::path(dir) / "table.txt";
  write_file(table, format_table(cells));
  written.push_back(table.string());
  fs::path csv = fs::path(dir) / "rtf.csv";
  write_file(csv, format_rtf_csv(cells));
  written.push_back(csv.string());
  return written;
}

std::vector<CellReport> load_cells(const std::string& dir) {
  namespace fs = std::filesystem;
  fs::path cells_dir = fs::path(dir) / "cells";
  if (!fs::is_directory(cells_dir)) throw Error("io", "no cells directory under " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(cells_dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<CellReport> cells;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw Error("io", "cannot read " + f.string());
    std::stringstream ss;
    ss << in.rdbuf();
    cells.push_back(parse_cell_json(ss.str()));
  }
  std::sort(cells.begin(), cells.end(),
            [](const CellReport& a, const CellReport& b) { return a.key < b.key; });
  return cells;
}

}  // namespace ctxbias
