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

// Command-line front end: gen, decode, sweep and report.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctxbias/config.hpp"
#include "ctxbias/harness.hpp"
#include "ctxbias/jointdecode.hpp"
#include "ctxbias/purify.hpp"
#include "ctxbias/simbank.hpp"

namespace {

using nlohmann::json;
using namespace ctxbias;

struct Overrides {
  std::string config_path;
  std::optional<int> n_utterances;
  std::optional<int> workers;
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  std::vector<int> list_lengths;
  std::vector<std::string> methods;
  std::vector<std::uint64_t> seeds;
};

void add_config_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_path, "INI experiment config");
  cmd->add_option("--n_utterances", o.n_utterances, "corpus.n_utterances");
  cmd->add_option("--workers", o.workers, "sweep.workers");
  cmd->add_option("-o,--output_dir", o.output_dir, "output.dir");
  cmd->add_option("--seed", o.seed, "run.seed");
  cmd->add_option("--list_lengths", o.list_lengths, "sweep.list_lengths")->delimiter(',');
  cmd->add_option("--methods", o.methods, "sweep.methods")->delimiter(',');
  cmd->add_option("--seeds", o.seeds, "sweep.seeds")->delimiter(',');
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
  apply_env_overrides(cfg);
  if (o.n_utterances) cfg.corpus.n_utterances = *o.n_utterances;
  if (o.workers) cfg.workers = *o.workers;
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (o.seed) cfg.global_seed = *o.seed;
  if (!o.list_lengths.empty()) cfg.list_lengths = o.list_lengths;
  if (!o.methods.empty()) {
    cfg.methods.clear();
    for (const auto& m : o.methods) cfg.methods.push_back(parse_method(m));
  }
  if (!o.seeds.empty()) cfg.seeds = o.seeds;
  cfg.validate();
  return cfg;
}

json vec_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec_json(m.row(r).transpose()));
  return rows;
}

// The k largest entries of each row as [token, probability] pairs.
json topk_json(const MatrixXd& m, const Vocabulary& vocab, int k) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<int> idx(m.cols());
    for (int v = 0; v < m.cols(); ++v) idx[v] = v;
    const int n = std::min<int>(k, static_cast<int>(idx.size()));
    std::partial_sort(idx.begin(), idx.begin() + n, idx.end(), [&](int a, int b) {
      return m(r, a) > m(r, b) || (m(r, a) == m(r, b) && a < b);
    });
    json row = json::array();
    for (int i = 0; i < n; ++i) row.push_back({vocab.token(idx[i]), m(r, idx[i])});
    rows.push_back(row);
  }
  return rows;
}

int cmd_gen(const ExperimentConfig& cfg, std::uint64_t seed) {
  namespace fs = std::filesystem;
  Corpus corpus = generate_corpus(cfg, seed);
  fs::create_directories(cfg.output_dir);
  const fs::path dir(cfg.output_dir);
  save_vocabulary(corpus.vocab, (dir / "vocab.txt").string());
  save_biasing_list(corpus.full_list, corpus.vocab, (dir / "list.txt").string());
  save_utterances(corpus.utterances, corpus.vocab, (dir / "utterances.tsv").string());
  save_config(cfg, (dir / "config.ini").string());
  long with_spans = 0;
  for (const auto& u : corpus.utterances) with_spans += !u.spans.empty();
  json meta = {{"seed", seed},
               {"utterances", corpus.utterances.size()},
               {"utterances_with_spans", with_spans},
               {"list_size", corpus.full_list.size()},
               {"num_gold", corpus.num_gold},
               {"vocab_size", corpus.vocab.size()}};
  std::ofstream(dir / "corpus.json") << meta.dump(2) << "\n";
  std::cout << meta.dump() << "\n";
  return 0;
}

int cmd_decode(const ExperimentConfig& cfg, std::uint64_t seed, const std::string& utt_id,
               int list_length, const std::string& method_str) {
  const Method method = parse_method(method_str);
  Corpus corpus = generate_corpus(cfg, seed);
  const Utterance* utt = nullptr;
  for (const auto& u : corpus.utterances) {
    if (u.id == utt_id) utt = &u;
  }
  if (!utt) throw Error("argument", "no utterance with id " + utt_id);
  if (list_length < 2 || list_length > corpus.full_list.size()) {
    throw Error("argument", "list length out of range");
  }
  const NoiseSpec noise = noise_for_seed(cfg, seed);
  const BiasingList list = corpus.list(list_length);
  const PhiMask phi = build_phi(list, corpus.vocab);
  ScorerBank bank(*utt, list, corpus.vocab, noise);
  DecodeParams params;
  params.smoothing = cfg.smoothing;

  json out;
  out["utterance"] = utt->id;
  out["method"] = method_name(method);
  out["list_length"] = list_length;
  out["reference"] = corpus.vocab.detokenize(utt->tokens);
  json spans = json::array();
  for (const auto& s : utt->spans) {
    spans.push_back({{"start", s.start}, {"end", s.end}, {"phrase", s.phrase},
                     {"text", corpus.vocab.detokenize(list.phrase(s.phrase).tokens)}});
  }
  out["spans"] = spans;

  std::vector<int> kept;
  for (int m = 0; m < list.size(); ++m) kept.push_back(m);
  if (is_purified(method)) {
    PurifyParams pp = cfg.purify;
    pp.shuffle_seed = shuffle_seed_for(noise, *utt);
    GroupScorer scorer = [&bank](std::span<const int> group) {
      std::vector<int> ids{BiasingList::kNoBiasIndex};
      ids.insert(ids.end(), group.begin(), group.end());
      CorrelationBundle b = bank.score(ids, false);
      return GroupScores{std::move(b.q_list), std::move(b.q_phr)};
    };
    const bool group = method == Method::kPscGcp || method == Method::kPscGcpP;
    PurifyResult pr = group ? gcp(list.size(), scorer, pp) : ocp(list.size(), scorer, pp);
    json rounds = json::array();
    for (const auto& r : pr.audit) rounds.push_back({{"round", r.round}, {"groups", r.groups},
                                                     {"winners", r.winners}});
    out["purification"] = {{"kept", pr.kept}, {"rounds", rounds}};
    kept = pr.kept;
  }
  const BiasingList sub = list.subset(kept);
  const PhiMask sub_phi = restrict_phi(phi, kept).phi;
  CorrelationBundle bundle = bank.score(kept, true);
  out["q_list"] = vec_json(bundle.q_list);
  out["q_phr"] = mat_json(bundle.q_phr);
  out["q_tok_top5"] = topk_json(bundle.q_tok, corpus.vocab, 5);
  out["p_bb_top5"] = topk_json(bundle.p_bb, corpus.vocab, 5);

  if (method == Method::kBaseline) {
    out["hypothesis"] = corpus.vocab.detokenize(greedy_decode(bundle.p_bb));
  } else if (method == Method::kPlainAttention) {
    out["hypothesis"] = corpus.vocab.detokenize(decode_plain_attention(bundle));
  } else {
    DecodeTrace trace;
    DecodeResult r = decode_utterance(bundle, sub, sub_phi, params, &trace);
    out["q_slist"] = vec_json(trace.q_slist);
    out["q_sphr"] = mat_json(trace.q_sphr);
    out["q_bias_top5"] = topk_json(r.q_bias, corpus.vocab, 5);
    out["q_casr_top5"] = topk_json(trace.q_casr, corpus.vocab, 5);
    out["hyp_bb"] = corpus.vocab.detokenize(r.hyp_bb);
    out["hyp_casr"] = corpus.vocab.detokenize(r.hyp_casr);
    out["hyp_final"] = corpus.vocab.detokenize(r.hyp_final);
    out["hypothesis"] = corpus.vocab.detokenize(uses_post_processing(method) ? r.hyp_final
                                                                             : r.hyp_casr);
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg) {
  SweepResult result = run_sweep(cfg);
  std::vector<CellReport> cells;
  for (auto& [key, cell] : result) cells.push_back(cell);
  emit_report(cells, cfg.output_dir);
  save_config(cfg, (std::filesystem::path(cfg.output_dir) / "config.ini").string());
  std::cout << format_table(cells);
  return 0;
}

int cmd_report(const std::string& dir) {
  std::vector<CellReport> cells = load_cells(dir);
  if (cells.empty()) throw Error("report", "no cells under " + dir);
  namespace fs = std::filesystem;
  std::ofstream(fs::path(dir) / "table.txt") << format_table(cells);
  std::ofstream(fs::path(dir) / "rtf.csv") << format_rtf_csv(cells);
  std::cout << format_table(cells);
  return 0;
}

void print_error(const std::string& kind, const std::string& message) {
  json err = {{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << err.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual biasing decoder: corpus generation, decoding and sweeps"};
  app.require_subcommand(1);

  Overrides gen_o, dec_o, sweep_o;
  std::uint64_t gen_seed = 1, dec_seed = 1;
  std::string utt_id;
  int list_length = 51;
  std::string method = "psc-joint-gcp-p";
  std::string report_dir;

  auto* gen = app.add_subcommand("gen", "generate a synthetic corpus");
  add_config_flags(gen, gen_o);
  gen->add_option("--sweep_seed", gen_seed, "sweep seed of the corpus");

  auto* dec = app.add_subcommand("decode", "decode one utterance and dump intermediate arrays");
  add_config_flags(dec, dec_o);
  dec->add_option("--sweep_seed", dec_seed, "sweep seed of the corpus");
  dec->add_option("--utterance", utt_id, "utterance id")->required();
  dec->add_option("--list_length", list_length, "biasing list length M");
  dec->add_option("--method", method, "method name");

  auto* sweep = app.add_subcommand("sweep", "run the method x length x seed matrix");
  add_config_flags(sweep, sweep_o);

  auto* report = app.add_subcommand("report", "rebuild table and CSV from cell JSON");
  report->add_option("-d,--dir", report_dir, "sweep output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (*gen) return cmd_gen(resolve(gen_o), gen_seed);
    if (*dec) return cmd_decode(resolve(dec_o), dec_seed, utt_id, list_length, method);
    if (*sweep) return cmd_sweep(resolve(sweep_o));
    if (*report) return cmd_report(report_dir);
  } catch (const Error& e) {
    print_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
