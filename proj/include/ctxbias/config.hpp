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

#ifndef CTXBIAS_CONFIG_HPP_
#define CTXBIAS_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "ctxbias/jointdecode.hpp"
#include "ctxbias/losses.hpp"
#include "ctxbias/purify.hpp"
#include "ctxbias/simbank.hpp"
#include "ctxbias/smoothing.hpp"

namespace ctxbias {

enum class Method {
  kBaseline,
  kPlainAttention,
  kScJoint,
  kScJointP,
  kPscOcp,
  kPscOcpP,
  kPscGcp,
  kPscGcpP,
};

const std::vector<Method>& all_methods();
std::string method_name(Method m);
Method parse_method(const std::string& name);
bool is_purified(Method m);
bool uses_post_processing(Method m);

struct CorpusSpec {
  int n_utterances = 200;
  int min_len = 8;
  int max_len = 20;
  // Regular tokens; the two reserved symbols come on top.
  int vocab_size = 500;
  double span_rate = 0.9;
  // Chance that an utterance with a span carries a second one. The length
  // estimate of the phrase smoother assumes one phrase per utterance.
  double multi_span_rate = 0.0;
  int min_phrase_len = 2;
  int max_phrase_len = 6;
  // Share of non-gold list phrases built as variants of gold phrases.
  double distractor_rate = 0.25;
  double seconds_per_token = 0.2;
};

struct ExperimentConfig {
  CorpusSpec corpus;
  NoiseSpec noise;  // seed is derived per sweep seed
  SmoothingParams smoothing;
  PurifyParams purify;  // shuffle_seed is derived per utterance
  FocalParams focal;
  std::vector<int> list_lengths = {51, 201, 601, 1196};
  std::vector<Method> methods = all_methods();
  std::vector<std::uint64_t> seeds = {1};
  int workers = 1;
  std::string output_dir = "out";
  std::uint64_t global_seed = 0;

  void validate() const;
};

// INI text with sections [corpus], [noise], [smoothing], [purify], [focal],
// [sweep], [output], [run]. Missing keys keep their defaults.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string to_ini(const ExperimentConfig& config);
void save_config(const ExperimentConfig& config, const std::string& path);

// CTXBIAS_SEED overrides global_seed, CTXBIAS_OUTPUT_DIR overrides output_dir.
void apply_env_overrides(ExperimentConfig& config);

}  // namespace ctxbias

#endif  // CTXBIAS_CONFIG_HPP_
