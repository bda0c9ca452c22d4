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

#include "starlit/config.h"

#include <charconv>
#include <fstream>
#include <algorithm>
#include <functional>
#include <limits>
#include <sstream>

namespace starlit::config {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  if (v == "inf") return std::numeric_limits<double>::infinity();
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  std::uint64_t u = to_u64(key, v);
  if (u > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
    throw ConfigError(key + ": value too large");
  }
  return static_cast<int>(u);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(to_double(key, item));
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& v)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  using C = ExperimentConfig;
  using S = const std::string&;
  static const std::vector<std::pair<std::string, Setter>> kSetters = {
      {"synth.n_transactions", [](C& c, S k, S v) { c.synth.n_transactions = to_u64(k, v); }},
      {"synth.n_banks", [](C& c, S k, S v) { c.synth.n_banks = to_u64(k, v); }},
      {"synth.accounts_per_bank", [](C& c, S k, S v) { c.synth.accounts_per_bank = to_u64(k, v); }},
      {"synth.anomaly_rate", [](C& c, S k, S v) { c.synth.anomaly_rate = to_double(k, v); }},
      {"synth.flag_given_anomaly", [](C& c, S k, S v) { c.synth.flag_given_anomaly = to_double(k, v); }},
      {"synth.flag_given_normal", [](C& c, S k, S v) { c.synth.flag_given_normal = to_double(k, v); }},
      {"synth.discrepancy_given_anomaly",
       [](C& c, S k, S v) { c.synth.discrepancy_given_anomaly = to_double(k, v); }},
      {"synth.discrepancy_given_normal",
       [](C& c, S k, S v) { c.synth.discrepancy_given_normal = to_double(k, v); }},
      {"synth.seed", [](C& c, S k, S v) { c.synth.seed = to_u64(k, v); }},
      {"data.dir", [](C& c, S, S v) { c.data_dir = v; }},
      {"run.seed", [](C& c, S k, S v) { c.run().seed = to_u64(k, v); }},
      {"run.test_fraction", [](C& c, S k, S v) { c.run().test_fraction = to_double(k, v); }},
      {"run.key_bits", [](C& c, S k, S v) { c.run().key_bits = to_int(k, v); }},
      {"run.training",
       [](C& c, S k, S v) {
         if (v == "secure") {
           c.run().training = pipeline::TrainingMode::kSecure;
         } else if (v == "plaintext") {
           c.run().training = pipeline::TrainingMode::kPlaintextEquivalent;
         } else {
           throw ConfigError(k + ": expected secure or plaintext, got '" + v + "'");
         }
       }},
      {"run.silent_clients",
       [](C& c, S, S v) {
         auto list = split_list(v);
         c.run().silent_clients = {list.begin(), list.end()};
       }},
      {"run.fault",
       [](C& c, S k, S v) {
         using F = pipeline::FaultInjection;
         static const std::map<std::string, F> kFaults = {{"none", F::kNone},
                                                          {"flag_to_srv", F::kFlagToSrv},
                                                          {"identity_to_fc", F::kIdentityToFc},
                                                          {"plaintext_to_client", F::kPlaintextToClient}};
         auto it = kFaults.find(v);
         if (it == kFaults.end()) throw ConfigError(k + ": unknown fault '" + v + "'");
         c.run().fault = it->second;
       }},
      {"ldp.mechanism", [](C& c, S, S v) { c.run().mechanism = v; }},
      {"ldp.epsilon", [](C& c, S k, S v) { c.run().epsilon = to_double(k, v); }},
      {"ldp.obfuscate_b", [](C& c, S k, S v) { c.run().obfuscate_b = to_bool(k, v); }},
      {"fc.equality_bit", [](C& c, S k, S v) { c.run().equality_bit = to_bool(k, v); }},
      {"boost.n_trees", [](C& c, S k, S v) { c.run().boost.n_trees = to_int(k, v); }},
      {"boost.max_depth", [](C& c, S k, S v) { c.run().boost.max_depth = to_int(k, v); }},
      {"boost.lambda_l2", [](C& c, S k, S v) { c.run().boost.lambda_l2 = to_double(k, v); }},
      {"boost.gamma", [](C& c, S k, S v) { c.run().boost.gamma = to_double(k, v); }},
      {"boost.learning_rate", [](C& c, S k, S v) { c.run().boost.learning_rate = to_double(k, v); }},
      {"boost.direct_sampling_rate",
       [](C& c, S k, S v) { c.run().boost.direct_sampling_rate = to_double(k, v); }},
      {"boost.goss",
       [](C& c, S k, S v) {
         if (to_bool(k, v)) {
           if (!c.run().boost.goss) c.run().boost.goss = boost::GossParams{};
         } else {
           c.run().boost.goss.reset();
         }
       }},
      {"boost.goss_top_rate",
       [](C& c, S k, S v) {
         if (!c.run().boost.goss) c.run().boost.goss = boost::GossParams{};
         c.run().boost.goss->top_rate = to_double(k, v);
       }},
      {"boost.goss_other_rate",
       [](C& c, S k, S v) {
         if (!c.run().boost.goss) c.run().boost.goss = boost::GossParams{};
         c.run().boost.goss->other_rate = to_double(k, v);
       }},
      {"boost.n_bins", [](C& c, S k, S v) { c.run().boost.n_bins = to_int(k, v); }},
      {"boost.min_child_weight",
       [](C& c, S k, S v) { c.run().boost.min_child_weight = to_double(k, v); }},
      {"boost.seed", [](C& c, S k, S v) { c.run().boost.seed = to_u64(k, v); }},
      {"game.prior", [](C& c, S k, S v) { c.game_prior = to_doubles(k, v); }},
      {"sweep.mechanisms", [](C& c, S, S v) { c.sweep.mechanisms = split_list(v); }},
      {"sweep.epsilons", [](C& c, S k, S v) { c.sweep.epsilons = to_doubles(k, v); }},
      {"sweep.repetitions", [](C& c, S k, S v) { c.sweep.repetitions = to_int(k, v); }},
      {"sweep.include_identity", [](C& c, S k, S v) { c.sweep.include_identity = to_bool(k, v); }},
      {"out.dir", [](C& c, S, S v) { c.out_dir = v; }},
  };
  return kSetters;
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> kKeys = [] {
    std::vector<std::string> keys;
    for (const auto& [k, _] : setters()) keys.push_back(k);
    return keys;
  }();
  return kKeys;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    std::size_t eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    auto it = std::find_if(setters().begin(), setters().end(),
                           [&key](const auto& s) { return s.first == key; });
    if (it == setters().end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    try {
      it->second(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_seed(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.run().seed = seed;
  cfg.synth.seed = derive_seed(seed, "synth");
  cfg.run().boost.seed = derive_seed(seed, "boost");
}

}  // namespace starlit::config
