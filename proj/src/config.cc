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

#include "ctxbias/config.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace ctxbias {

namespace {

const std::vector<std::pair<Method, std::string>>& method_table() {
  static const std::vector<std::pair<Method, std::string>> table = {
      {Method::kBaseline, "baseline"},
      {Method::kPlainAttention, "plain-attention"},
      {Method::kScJoint, "sc-joint"},
      {Method::kScJointP, "sc-joint-p"},
      {Method::kPscOcp, "psc-joint-ocp"},
      {Method::kPscOcpP, "psc-joint-ocp-p"},
      {Method::kPscGcp, "psc-joint-gcp"},
      {Method::kPscGcpP, "psc-joint-gcp-p"},
  };
  return table;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& items, const std::function<std::string(const T&)>& fmt) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += fmt(items[i]);
  }
  return out;
}

std::string fmt_double(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

template <typename T>
void read(const boost::property_tree::ptree& tree, const char* key, T& value) {
  auto node = tree.get_child_optional(key);
  if (!node) return;
  auto v = node->get_value_optional<T>();
  if (!v) throw Error("config", std::string("bad value for ") + key + ": '" + node->data() + "'");
  value = *v;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  try {
    size_t used = 0;
    unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error("config", "bad " + what + " '" + s + "'");
  }
}

}  // namespace

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = [] {
    std::vector<Method> out;
    for (const auto& [m, name] : method_table()) out.push_back(m);
    return out;
  }();
  return methods;
}

std::string method_name(Method m) {
  for (const auto& [method, name] : method_table()) {
    if (method == m) return name;
  }
  throw Error("config", "unknown method");
}

Method parse_method(const std::string& name) {
  for (const auto& [method, n] : method_table()) {
    if (n == name) return method;
  }
  throw Error("config", "unknown method '" + name + "'");
}

bool is_purified(Method m) {
  return m == Method::kPscOcp || m == Method::kPscOcpP || m == Method::kPscGcp ||
         m == Method::kPscGcpP;
}

bool uses_post_processing(Method m) {
  return m == Method::kScJointP || m == Method::kPscOcpP || m == Method::kPscGcpP;
}

void ExperimentConfig::validate() const {
  const auto& c = corpus;
  if (c.n_utterances < 1) throw Error("config", "n_utterances must be positive");
  if (c.min_len < 1 || c.max_len < c.min_len) throw Error("config", "need 1 <= min_len <= max_len");
  if (c.vocab_size < 2) throw Error("config", "vocab_size must be at least 2");
  if (!(c.span_rate >= 0.0 && c.span_rate <= 1.0)) throw Error("config", "span_rate must be in [0, 1]");
  if (!(c.multi_span_rate >= 0.0 && c.multi_span_rate <= 1.0)) {
    throw Error("config", "multi_span_rate must be in [0, 1]");
  }
  if (!(c.distractor_rate >= 0.0 && c.distractor_rate <= 1.0)) {
    throw Error("config", "distractor_rate must be in [0, 1]");
  }
  if (c.min_phrase_len < kMinPhraseLength || c.max_phrase_len > kMaxPhraseLength ||
      c.max_phrase_len < c.min_phrase_len) {
    throw Error("config", "phrase lengths must satisfy 2 <= min_phrase_len <= max_phrase_len <= 19");
  }
  if (c.max_phrase_len > c.min_len) {
    throw Error("config", "max_phrase_len exceeds the shortest utterance (min_len)");
  }
  if (!(c.seconds_per_token > 0.0)) throw Error("config", "seconds_per_token must be positive");
  noise.validate();
  smoothing.validate();
  purify.validate();
  focal.validate();
  if (list_lengths.empty()) throw Error("config", "list_lengths is empty");
  for (int m : list_lengths) {
    if (m < 2) throw Error("config", "list lengths must be at least 2");
  }
  if (methods.empty()) throw Error("config", "methods is empty");
  if (seeds.empty()) throw Error("config", "seeds is empty");
  if (workers < 1) throw Error("config", "workers must be positive");
}

ExperimentConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error("config", e.what());
  }
  ExperimentConfig cfg;
  auto& c = cfg.corpus;
  read(tree, "corpus.n_utterances", c.n_utterances);
  read(tree, "corpus.min_len", c.min_len);
  read(tree, "corpus.max_len", c.max_len);
  read(tree, "corpus.vocab_size", c.vocab_size);
  read(tree, "corpus.span_rate", c.span_rate);
  read(tree, "corpus.multi_span_rate", c.multi_span_rate);
  read(tree, "corpus.min_phrase_len", c.min_phrase_len);
  read(tree, "corpus.max_phrase_len", c.max_phrase_len);
  read(tree, "corpus.distractor_rate", c.distractor_rate);
  read(tree, "corpus.seconds_per_token", c.seconds_per_token);
  read(tree, "noise.label_flip_rate", cfg.noise.label_flip_rate);
  read(tree, "noise.score_jitter_sigma", cfg.noise.score_jitter_sigma);
  read(tree, "noise.confusion_rate", cfg.noise.confusion_rate);
  read(tree, "noise.distractor_boost", cfg.noise.distractor_boost);
  read(tree, "smoothing.omega", cfg.smoothing.omega);
  read(tree, "purify.group_size", cfg.purify.group_size);
  read(tree, "purify.n_r", cfg.purify.n_r);
  read(tree, "purify.thres_list", cfg.purify.thres_list);
  read(tree, "purify.n_top", cfg.purify.n_top);
  read(tree, "focal.alpha", cfg.focal.alpha);
  read(tree, "focal.gamma", cfg.focal.gamma);
  if (auto v = tree.get_optional<std::string>("sweep.list_lengths")) {
    cfg.list_lengths.clear();
    for (const auto& s : split_list(*v)) {
      cfg.list_lengths.push_back(static_cast<int>(parse_u64(s, "list length")));
    }
  }
  if (auto v = tree.get_optional<std::string>("sweep.methods")) {
    cfg.methods.clear();
    for (const auto& s : split_list(*v)) cfg.methods.push_back(parse_method(s));
  }
  if (auto v = tree.get_optional<std::string>("sweep.seeds")) {
    cfg.seeds.clear();
    for (const auto& s : split_list(*v)) cfg.seeds.push_back(parse_u64(s, "seed"));
  }
  read(tree, "sweep.workers", cfg.workers);
  read(tree, "output.dir", cfg.output_dir);
  if (auto v = tree.get_optional<std::string>("run.seed")) cfg.global_seed = parse_u64(*v, "seed");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_ini(const ExperimentConfig& cfg) {
  const auto& c = cfg.corpus;
  std::ostringstream os;
  os << "[corpus]\n"
     << "n_utterances = " << c.n_utterances << "\n"
     << "min_len = " << c.min_len << "\n"
     << "max_len = " << c.max_len << "\n"
     << "vocab_size = " << c.vocab_size << "\n"
     << "span_rate = " << fmt_double(c.span_rate) << "\n"
     << "multi_span_rate = " << fmt_double(c.multi_span_rate) << "\n"
     << "min_phrase_len = " << c.min_phrase_len << "\n"
     << "max_phrase_len = " << c.max_phrase_len << "\n"
     << "distractor_rate = " << fmt_double(c.distractor_rate) << "\n"
     << "seconds_per_token = " << fmt_double(c.seconds_per_token) << "\n\n"
     << "[noise]\n"
     << "label_flip_rate = " << fmt_double(cfg.noise.label_flip_rate) << "\n"
     << "score_jitter_sigma = " << fmt_double(cfg.noise.score_jitter_sigma) << "\n"
     << "confusion_rate = " << fmt_double(cfg.noise.confusion_rate) << "\n"
     << "distractor_boost = " << fmt_double(cfg.noise.distractor_boost) << "\n\n"
     << "[smoothing]\n"
     << "omega = " << fmt_double(cfg.smoothing.omega) << "\n\n"
     << "[purify]\n"
     << "group_size = " << cfg.purify.group_size << "\n"
     << "n_r = " << cfg.purify.n_r << "\n"
     << "thres_list = " << fmt_double(cfg.purify.thres_list) << "\n"
     << "n_top = " << cfg.purify.n_top << "\n\n"
     << "[focal]\n"
     << "alpha = " << fmt_double(cfg.focal.alpha) << "\n"
     << "gamma = " << fmt_double(cfg.focal.gamma) << "\n\n"
     << "[sweep]\n"
     << "list_lengths = "
     << join<int>(cfg.list_lengths, [](const int& m) { return std::to_string(m); }) << "\n"
     << "methods = " << join<Method>(cfg.methods, [](const Method& m) { return method_name(m); })
     << "\n"
     << "seeds = "
     << join<std::uint64_t>(cfg.seeds, [](const std::uint64_t& s) { return std::to_string(s); })
     << "\n"
     << "workers = " << cfg.workers << "\n\n"
     << "[output]\n"
     << "dir = " << cfg.output_dir << "\n\n"
     << "[run]\n"
     << "seed = " << cfg.global_seed << "\n";
  return os.str();
}

void save_config(const ExperimentConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path);
  out << to_ini(config);
}

void apply_env_overrides(ExperimentConfig& config) {
  if (const char* seed = std::getenv("CTXBIAS_SEED"); seed && *seed) {
    config.global_seed = parse_u64(seed, "CTXBIAS_SEED");
  }
  if (const char* dir = std::getenv("CTXBIAS_OUTPUT_DIR"); dir && *dir) config.output_dir = dir;
}

}  // namespace ctxbias
