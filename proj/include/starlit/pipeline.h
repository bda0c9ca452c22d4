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

#ifndef STARLIT_PIPELINE_H_
#define STARLIT_PIPELINE_H_

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "starlit/boost.h"
#include "starlit/datamodel.h"
#include "starlit/fednet.h"
#include "starlit/ldp.h"
#include "starlit/metrics.h"

namespace starlit::pipeline {

enum class TrainingMode { kSecure, kPlaintextEquivalent };

enum class FaultInjection { kNone, kFlagToSrv, kIdentityToFc, kPlaintextToClient };

struct PipelineConfig {
  double test_fraction = 0.2;
  std::string mechanism = "identity";  // identity | rr | laplace | game | game_less01 | game_less10
  double epsilon = 10.0;
  bool obfuscate_b = false;
  bool equality_bit = true;
  boost::BoostParams boost;
  int key_bits = 2048;
  TrainingMode training = TrainingMode::kSecure;
  std::set<data::BankId> silent_clients;
  FaultInjection fault = FaultInjection::kNone;
  std::uint64_t seed = 1;

  void validate() const;
};

// Binary mechanism by name. Game variants solve the mechanism LP with a
// Hamming metric on the prior (P(w=0), P(w=1)).
ldp::TransformationMatrix make_mechanism(const std::string& kind, double epsilon,
                                         double flag_rate);

const std::vector<std::string>& mechanism_names();

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

Split split_rows(std::size_t n, double test_fraction, std::uint64_t seed);

// Fraction of accounts, over all banks, whose binarized flag is 1.
double flag_rate(const data::BankDatasets& banks);

struct PipelineResult {
  boost::Model model;
  double train_auprc = 0;
  double test_auprc = 0;
  double srv_only_test_auprc = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::size_t excluded_rows = 0;  // rows dropped for missing FC columns
  fednet::AuditReport audit;
  std::vector<fednet::LogEntry> log;
  std::vector<metrics::TrafficRow> traffic;
  std::vector<metrics::MetricRow> metrics;
  std::map<data::BankId, std::vector<int>> match_bits;
  std::vector<std::string> request_errors;
};

PipelineResult run_pipeline(const PipelineConfig& cfg, const data::SyntheticData& data);

// A centralized model over the concatenated [srv | fc] columns, relabelled
// so features past `n_srv` are FC-owned.
boost::Model split_model(boost::Model m, int n_srv);

struct SweepConfig {
  PipelineConfig base;
  std::vector<std::string> mechanisms = {"rr", "laplace"};
  std::vector<double> epsilons = {10, 4, 2, 1, 0.5};
  int repetitions = 5;
  bool include_identity = true;
};

struct SweepRow {
  std::string mechanism;
  double epsilon = 0;
  std::string split;  // train | test
  double mean_auprc = 0;
  int repetitions = 0;
};

// Repetitions vary the LDP noise, the sample ids and the boosting seed; data,
// split and the discrepancy phase are shared. Training uses the plaintext
// equivalent of the vertical trainer.
std::vector<SweepRow> run_sweep(const SweepConfig& cfg, const data::SyntheticData& data);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace starlit::pipeline

#endif  // STARLIT_PIPELINE_H_
