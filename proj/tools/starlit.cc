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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "starlit/boost.h"
#include "starlit/config.h"
#include "starlit/datamodel.h"
#include "starlit/game.h"
#include "starlit/ldp.h"
#include "starlit/metrics.h"
#include "starlit/pipeline.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitProtocol = 3;
constexpr int kExitAudit = 4;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

starlit::config::ExperimentConfig load(const Options& opt) {
  auto cfg = starlit::config::load_config(opt.config_path);
  if (opt.seed) starlit::config::apply_seed(cfg, *opt.seed);
  if (opt.out) cfg.out_dir = *opt.out;
  fs::create_directories(cfg.out_dir);
  return cfg;
}

starlit::data::SyntheticData dataset(const starlit::config::ExperimentConfig& cfg) {
  if (cfg.data_dir) return starlit::data::read_dataset(*cfg.data_dir);
  cfg.synth.validate();
  return starlit::data::generate_synthetic(cfg.synth);
}

std::ofstream open_out(const fs::path& p, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(p, mode);
  if (!out) throw starlit::ConfigError("cannot write " + p.string());
  return out;
}

int cmd_gen_data(const Options& opt) {
  auto cfg = load(opt);
  cfg.synth.validate();
  auto data = starlit::data::generate_synthetic(cfg.synth);
  fs::path dir = cfg.out_dir / "data";
  starlit::data::write_dataset(dir, data);
  std::cout << "wrote " << data.transactions.size() << " transactions and " << data.banks.size()
            << " bank files to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_mechanism(const Options& opt) {
  auto cfg = load(opt);
  const auto& run = cfg.run();
  Eigen::VectorXd prior(2);
  if (cfg.game_prior) {
    if (cfg.game_prior->size() != 2) throw starlit::ConfigError("game.prior must have 2 entries");
    prior << (*cfg.game_prior)[0], (*cfg.game_prior)[1];
  } else {
    double rate = starlit::pipeline::flag_rate(dataset(cfg).banks);
    prior << 1.0 - rate, rate;
  }
  auto mech = starlit::pipeline::make_mechanism(run.mechanism, run.epsilon, prior[1]);
  open_out(cfg.out_dir / "mechanism.csv") << starlit::ldp::to_csv(mech);
  double privacy = starlit::game::expected_privacy(mech, prior, starlit::game::hamming_metric(2));
  auto report = open_out(cfg.out_dir / "mechanism_report.txt");
  report << "mechanism " << run.mechanism << "\n"
         << "epsilon " << run.epsilon << "\n"
         << "prior " << prior[0] << " " << prior[1] << "\n"
         << "ldp_epsilon " << starlit::ldp::ldp_epsilon(mech) << "\n"
         << "expected_privacy " << privacy << "\n";
  std::cout << "mechanism " << run.mechanism << " at epsilon " << run.epsilon
            << ": expected privacy " << privacy << "\n";
  return kExitOk;
}

int cmd_run(const Options& opt) {
  auto cfg = load(opt);
  auto data = dataset(cfg);
  auto result = starlit::pipeline::run_pipeline(cfg.run(), data);
  {
    auto out = open_out(cfg.out_dir / "model.txt");
    starlit::boost::save_model(result.model, out);
  }
  {
    auto out = open_out(cfg.out_dir / "metrics.csv");
    starlit::metrics::write_metrics_csv(out, result.metrics);
  }
  {
    auto out = open_out(cfg.out_dir / "messages.csv");
    starlit::metrics::write_message_log_csv(out, result.traffic);
  }
  open_out(cfg.out_dir / "audit.txt") << result.audit.to_text();
  std::cout << "test AUPRC " << result.test_auprc << " (srv only " << result.srv_only_test_auprc
            << "), " << result.traffic.size() << " messages\n"
            << result.audit.to_text();
  return result.audit.passed() ? kExitOk : kExitAudit;
}

int cmd_sweep(const Options& opt) {
  auto cfg = load(opt);
  auto data = dataset(cfg);
  auto rows = starlit::pipeline::run_sweep(cfg.sweep, data);
  fs::path path = cfg.out_dir / "sweep.csv";
  bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ostringstream buf;
  starlit::pipeline::write_sweep_csv(buf, rows);
  std::string text = buf.str();
  if (!fresh) text = text.substr(text.find('\n') + 1);  // header already present
  open_out(path, std::ios::app) << text;
  std::cout << rows.size() << " rows appended to " << path.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"starlit: privacy-preserving vertical federated anomaly detection"};
  app.require_subcommand(1);
  Options opt;
  auto add = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config_path, "key = value config file")->required();
    sub->add_option("--seed", opt.seed, "master seed override");
    sub->add_option("--out", opt.out, "output directory override");
    return sub;
  };
  auto* gen = add("gen-data", "generate the synthetic datasets");
  auto* mech = add("mechanism", "build an LDP mechanism and report its privacy");
  auto* run = add("run", "run the full pipeline once");
  auto* sweep = add("sweep", "AUPRC over mechanisms, epsilons and repetitions");
  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_data(opt);
    if (mech->parsed()) return cmd_mechanism(opt);
    if (run->parsed()) return cmd_run(opt);
    if (sweep->parsed()) return cmd_sweep(opt);
  } catch (const starlit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const starlit::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const starlit::InfeasibleError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const starlit::ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return kExitProtocol;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
