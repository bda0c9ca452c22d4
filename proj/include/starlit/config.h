// Copyright 2026 The Starlit Authors
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

#ifndef STARLIT_CONFIG_H_
#define STARLIT_CONFIG_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "starlit/datamodel.h"
#include "starlit/pipeline.h"

namespace starlit::config {

// Everything a CLI command can be driven by.
struct ExperimentConfig {
  data::SynthConfig synth;
  std::optional<std::filesystem::path> data_dir;  // load instead of generating
  pipeline::SweepConfig sweep;                     // sweep.base holds the run settings
  std::optional<std::vector<double>> game_prior;   // mechanism command only
  std::filesystem::path out_dir = "out";

  pipeline::PipelineConfig& run() { return sweep.base; }
  const pipeline::PipelineConfig& run() const { return sweep.base; }
};

// Flat `key = value` lines, `#` comments. Unknown keys and malformed values
// throw ConfigError naming the key and line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Master seed override: run, synth and boost seeds all derive from it.
void apply_seed(ExperimentConfig& cfg, std::uint64_t seed);

// Keys accepted by parse_config, in documentation order.
const std::vector<std::string>& known_keys();

}  // namespace starlit::config

#endif  // STARLIT_CONFIG_H_
