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

#include "starlit/pipeline.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>

#include "starlit/features.h"
#include "starlit/game.h"
#include "starlit/paillier.h"

namespace starlit::pipeline {
namespace {

using fednet::ClientParty;
using fednet::FcParty;
using fednet::PartyId;
using fednet::Router;
using fednet::SrvParty;

struct SrvFrames {
  Eigen::MatrixXd train, test;
  std::vector<int> y_train, y_test;
};

SrvFrames srv_frames(const data::SyntheticData& data, const Split& split) {
  std::vector<data::TransactionRecord> train, test;
  for (std::size_t r : split.train) train.push_back(data.transactions[r]);
  for (std::size_t r : split.test) test.push_back(data.transactions[r]);
  features::ServerFeatureEncoder enc;
  enc.fit(train);
  auto tr = enc.transform(train);
  auto te = enc.transform(test);
  SrvFrames f;
  f.train = features::to_matrix(tr);
  f.test = features::to_matrix(te);
  for (const auto& r : tr) f.y_train.push_back(r.label);
  for (const auto& r : te) f.y_test.push_back(r.label);
  return f;
}

std::vector<std::size_t> all_rows(const Split& s) {
  std::vector<std::size_t> rows = s.train;
  rows.insert(rows.end(), s.test.begin(), s.test.end());
  std::sort(rows.begin(), rows.end());
  return rows;
}

// Positions within `rows` of the ordered subsequence `kept`.
std::vector<Eigen::Index> positions(const std::vector<std::size_t>& rows,
                                    const std::vector<std::size_t>& kept) {
  std::vector<Eigen::Index> out;
  std::size_t j = 0;
  for (std::size_t i = 0; i < rows.size() && j < kept.size(); ++i) {
    if (rows[i] == kept[j]) {
      out.push_back(static_cast<Eigen::Index>(i));
      ++j;
    }
  }
  if (j != kept.size()) throw Error("kept rows are not a subsequence");
  return out;
}

template <typename T>
std::vector<T> pick(const std::vector<T>& v, const std::vector<Eigen::Index>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (Eigen::Index i : idx) out.push_back(v[static_cast<std::size_t>(i)]);
  return out;
}

// FC columns for `rows` straight from FC's dataset (simulation shortcut for
// the plaintext-equivalent trainer). Returns the transaction indices kept.
Eigen::MatrixXd fc_columns(const FcParty& fc, const SrvParty& srv,
                           const std::vector<std::size_t>& rows,
                           std::vector<std::size_t>* kept) {
  std::vector<std::string> ids;
  for (std::size_t r : rows) ids.push_back(srv.sample_ids().at(r));
  std::vector<std::string> kept_ids;
  Eigen::MatrixXd x = fc.features(ids, &kept_ids, nullptr);
  std::size_t j = 0;
  for (std::size_t i = 0; i < rows.size() && j < kept_ids.size(); ++i) {
    if (ids[i] == kept_ids[j]) {
      kept->push_back(rows[i]);
      ++j;
    }
  }
  return x;
}

Eigen::MatrixXd hconcat(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd x(a.rows(), a.cols() + b.cols());
  x << a, b;
  return x;
}

struct PlainFit {
  boost::Model model;
  std::vector<std::size_t> train_kept, test_kept;
  double train_auprc = 0, test_auprc = 0;
  Eigen::VectorXd test_scores;
};

PlainFit plaintext_fit(const FcParty& fc, const SrvParty& srv, const Split& split,
                       const SrvFrames& frames, const boost::BoostParams& params) {
  PlainFit out;
  Eigen::MatrixXd f_train = fc_columns(fc, srv, split.train, &out.train_kept);
  Eigen::MatrixXd f_test = fc_columns(fc, srv, split.test, &out.test_kept);
  auto tr_idx = positions(split.train, out.train_kept);
  auto te_idx = positions(split.test, out.test_kept);
  Eigen::MatrixXd s_train = frames.train(tr_idx, Eigen::all);
  Eigen::MatrixXd s_test = frames.test(te_idx, Eigen::all);
  std::vector<int> y_train = pick(frames.y_train, tr_idx);
  std::vector<int> y_test = pick(frames.y_test, te_idx);

  boost::Model m = boost::train_centralized(hconcat(s_train, f_train), y_train, params);
  out.model = split_model(std::move(m), static_cast<int>(s_train.cols()));
  Eigen::VectorXd p_train = boost::predict(out.model, s_train, f_train);
  out.test_scores = boost::predict(out.model, s_test, f_test);
  out.train_auprc = metrics::auprc(y_train, std::span(p_train.data(), p_train.size()));
  out.test_auprc =
      metrics::auprc(y_test, std::span(out.test_scores.data(), out.test_scores.size()));
  return out;
}

std::vector<ClientParty> make_clients(const data::SyntheticData& data, std::uint64_t seed,
                                      const std::set<data::BankId>& silent) {
  std::vector<ClientParty> clients;
  clients.reserve(data.banks.size());
  for (const auto& [bank, accounts] : data.banks) {
    clients.emplace_back(bank, accounts, derive_seed(seed, "client:" + bank));
    clients.back().set_silent(silent.count(bank) > 0);
  }
  return clients;
}

fednet::AuditInputs audit_inputs(const data::SyntheticData& data, const SrvParty& srv,
                                 const std::vector<ClientParty>& clients) {
  fednet::AuditInputs in;
  std::set<std::string> identity;
  for (const auto& c : clients) {
    psi::ElementSet mine = c.psi_set();
    psi::ElementSet theirs = srv.psi_set(c.bank());
    in.client_set_sizes[c.bank()] = mine.size();
    in.intersections[c.bank()] = psi::plaintext_intersection(theirs, mine);
    in.srv_sets[c.bank()] = std::move(theirs);
  }
  for (const auto& [bank, accounts] : data.banks) {
    auto& acc = in.client_accounts[bank];
    for (const auto& a : accounts) {
      acc.insert(a.account);
      identity.insert({a.account, a.name, a.street, a.country_city_zip, data::identity_string(a)});
    }
  }
  for (const auto& t : data.transactions) {
    identity.insert({t.ordering_account, t.ordering_name, t.ordering_street,
                     t.ordering_country_city_zip, data::ordering_identity(t)});
    identity.insert({t.beneficiary_account, t.beneficiary_name, t.beneficiary_street,
                     t.beneficiary_country_city_zip, data::beneficiary_identity(t)});
  }
  in.identity_strings.assign(identity.begin(), identity.end());
  return in;
}

Router::Tap fault_tap(FaultInjection fault, const data::SyntheticData& data, const SrvParty& srv,
                      const std::vector<ClientParty>& clients) {
  auto done = std::make_shared<bool>(false);
  switch (fault) {
    case FaultInjection::kNone:
      return nullptr;
    case FaultInjection::kFlagToSrv:
      return [done](fednet::Message& m, Router& r) {
        if (*done || m.kind != fednet::MessageKind::kFlagTriples) return;
        *done = true;
        r.inject(m.sender, PartyId::srv(), m.kind, m.phase, m.payload);
      };
    case FaultInjection::kIdentityToFc: {
      std::map<data::BankId, std::string> leak;
      for (const auto& [bank, accounts] : data.banks) {
        if (!accounts.empty()) leak[bank] = data::identity_string(accounts.front());
      }
      return [done, leak](fednet::Message& m, Router&) {
        if (*done || m.kind != fednet::MessageKind::kFlagTriples) return;
        auto triples = fednet::decode_triples(m.payload);
        auto it = leak.find(m.sender.bank);
        if (triples.empty() || it == leak.end()) return;
        *done = true;
        triples.front().sample_id = it->second;
        m.payload = fednet::encode_triples(triples);
      };
    }
    case FaultInjection::kPlaintextToClient: {
      std::map<data::BankId, std::string> foreign;
      for (const auto& c : clients) {
        psi::ElementSet mine = c.psi_set();
        for (const auto& e : srv.psi_set(c.bank())) {
          if (!mine.count(e)) {
            foreign[c.bank()] = e;
            break;
          }
        }
      }
      return [done, foreign](fednet::Message& m, Router& r) {
        if (*done || m.kind != fednet::MessageKind::kPsiResponse) return;
        auto it = foreign.find(m.receiver.bank);
        if (it == foreign.end()) return;
        *done = true;
        r.inject(m.sender, m.receiver, m.kind, m.phase, Bytes(it->second.begin(), it->second.end()));
      };
    }
  }
  return nullptr;
}

std::string format_double(double v) {
  if (std::isinf(v)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(test_fraction > 0 && test_fraction < 1)) {
    throw ConfigError("run.test_fraction must lie in (0, 1)");
  }
  const auto& names = mechanism_names();
  if (std::find(names.begin(), names.end(), mechanism) == names.end()) {
    throw ConfigError("ldp.mechanism: unknown mechanism '" + mechanism + "'");
  }
  if (!(epsilon >= 0)) throw ConfigError("ldp.epsilon must be non-negative");
  if (key_bits != 512 && key_bits != 1024 && key_bits != 2048) {
    throw ConfigError("run.key_bits must be 512, 1024 or 2048");
  }
  boost.validate();
}

const std::vector<std::string>& mechanism_names() {
  static const std::vector<std::string> kNames = {"identity", "rr",          "laplace",
                                                  "game",     "game_less01", "game_less10"};
  return kNames;
}

ldp::TransformationMatrix make_mechanism(const std::string& kind, double epsilon,
                                         double flag_rate) {
  if (kind == "identity") return ldp::identity_mechanism(2);
  if (kind == "rr") return ldp::rr_matrix(epsilon, 2);
  if (kind == "laplace") return ldp::laplace_matrix(epsilon);
  if (kind == "game" || kind == "game_less01" || kind == "game_less10") {
    if (!(flag_rate > 0 && flag_rate < 1)) {
      throw ConfigError("game mechanism needs a flag rate strictly between 0 and 1");
    }
    Eigen::Vector2d prior(1.0 - flag_rate, flag_rate);
    game::GameSpec spec = game::GameSpec::with_hamming(prior, epsilon);
    if (kind == "game") {
      spec.caps = game::rr_caps(epsilon, 2);
    } else if (kind == "game_less01") {
      spec.caps = game::reduced_flip_caps(epsilon, 0, 1, 0.9);
    } else {
      spec.caps = game::reduced_flip_caps(epsilon, 1, 0, 0.9);
    }
    return game::solve_optimal_mechanism(spec).mechanism;
  }
  throw ConfigError("unknown mechanism '" + kind + "'");
}

Split split_rows(std::size_t n, double test_fraction, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, "split"));
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(idx[i - 1], idx[j]);
  }
  std::size_t n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  Split s;
  s.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

double flag_rate(const data::BankDatasets& banks) {
  double flagged = 0, total = 0;
  for (const auto& [_, accounts] : banks) {
    for (const auto& a : accounts) {
      flagged += features::binarize_flag(a.flag);
      total += 1;
    }
  }
  return total > 0 ? flagged / total : 0.0;
}

boost::Model split_model(boost::Model m, int n_srv) {
  for (auto& t : m.trees) {
    for (auto& n : t.nodes) {
      if (!n.is_leaf && n.feature >= n_srv) {
        n.party = boost::Party::kFc;
        n.feature -= n_srv;
      }
    }
  }
  const auto& all = m.cuts[0].cuts();
  if (static_cast<int>(all.size()) > n_srv) {
    m.cuts[1] = boost::FeatureCuts({all.begin() + n_srv, all.end()});
    m.cuts[0] = boost::FeatureCuts({all.begin(), all.begin() + n_srv});
  }
  return m;
}

PipelineResult run_pipeline(const PipelineConfig& cfg, const data::SyntheticData& data) {
  cfg.validate();
  if (data.transactions.empty()) throw ConfigError("no transactions to train on");
  metrics::Stopwatch total;
  metrics::RunTimings timings;

  Split split = split_rows(data.transactions.size(), cfg.test_fraction, cfg.seed);
  SrvFrames frames = srv_frames(data, split);
  std::vector<std::size_t> rows = all_rows(split);

  SrvParty srv(data.transactions, derive_seed(cfg.seed, "srv"));
  std::vector<ClientParty> clients = make_clients(data, cfg.seed, cfg.silent_clients);
  Router router;
  router.set_tap(fault_tap(cfg.fault, data, srv, clients));

  PipelineResult out;
  metrics::Stopwatch sw;
  out.match_bits = fednet::run_discrepancy_phase(router, srv, clients);
  timings.phase_seconds["discrepancy"] = sw.seconds();

  sw = {};
  ldp::TransformationMatrix mech = make_mechanism(cfg.mechanism, cfg.epsilon, flag_rate(data.banks));
  FcParty fc(cfg.equality_bit);
  fednet::run_flag_collection(router, srv, clients, fc, mech, cfg.obfuscate_b, rows);
  for (const auto& c : clients) {
    out.request_errors.insert(out.request_errors.end(), c.request_errors().begin(),
                              c.request_errors().end());
  }
  timings.phase_seconds["flag_collection"] = sw.seconds();

  std::vector<std::size_t> train_kept, test_kept;
  Eigen::VectorXd test_scores;
  sw = {};
  if (cfg.training == TrainingMode::kSecure) {
    he::PaillierKeypair keys = he::keygen(cfg.key_bits, derive_seed(cfg.seed, "paillier"));
    auto trained = fednet::run_training_phase(router, srv, fc, split.train, frames.train,
                                              frames.y_train, cfg.boost, keys);
    timings.phase_seconds["training"] = sw.seconds();
    sw = {};
    out.model = std::move(trained.model);
    train_kept = std::move(trained.kept_rows);
    auto train_inf =
        fednet::run_inference_phase(router, srv, fc, out.model, split.train, frames.train);
    auto test_inf = fednet::run_inference_phase(router, srv, fc, out.model, split.test, frames.test);
    timings.phase_seconds["inference"] = sw.seconds();
    test_kept = test_inf.kept_rows;
    test_scores = test_inf.scores;
    auto y_tr = pick(frames.y_train, positions(split.train, train_inf.kept_rows));
    out.train_auprc = metrics::auprc(y_tr, std::span(train_inf.scores.data(), train_inf.scores.size()));
  } else {
    PlainFit fit = plaintext_fit(fc, srv, split, frames, cfg.boost);
    timings.phase_seconds["training"] = sw.seconds();
    out.model = std::move(fit.model);
    train_kept = std::move(fit.train_kept);
    test_kept = std::move(fit.test_kept);
    test_scores = std::move(fit.test_scores);
    out.train_auprc = fit.train_auprc;
  }
  auto te_idx = positions(split.test, test_kept);
  std::vector<int> y_test = pick(frames.y_test, te_idx);
  out.test_auprc = metrics::auprc(y_test, std::span(test_scores.data(), test_scores.size()));

  // Srv-only reference on the same rows.
  auto tr_idx = positions(split.train, train_kept);
  boost::Model srv_only = boost::train_centralized(frames.train(tr_idx, Eigen::all),
                                                   pick(frames.y_train, tr_idx), cfg.boost);
  Eigen::MatrixXd s_test = frames.test(te_idx, Eigen::all);
  Eigen::VectorXd srv_scores = boost::predict(srv_only, s_test, Eigen::MatrixXd(s_test.rows(), 0));
  out.srv_only_test_auprc = metrics::auprc(y_test, std::span(srv_scores.data(), srv_scores.size()));

  out.train_rows = train_kept.size();
  out.test_rows = test_kept.size();
  out.excluded_rows = rows.size() - train_kept.size() - test_kept.size();
  out.audit = fednet::audit_leakage(router.ledger(), audit_inputs(data, srv, clients));
  out.log = router.log();
  out.traffic = router.traffic();
  timings.total_seconds = total.seconds();
  out.metrics = metrics::run_metrics(out.traffic, timings, metrics::peak_resident_mb(), &out.test_auprc);
  out.metrics.push_back({"train_auprc", "-", out.train_auprc});
  out.metrics.push_back({"srv_only_test_auprc", "-", out.srv_only_test_auprc});
  out.metrics.push_back({"train_rows", "count", static_cast<double>(out.train_rows)});
  out.metrics.push_back({"test_rows", "count", static_cast<double>(out.test_rows)});
  out.metrics.push_back({"excluded_rows", "count", static_cast<double>(out.excluded_rows)});
  return out;
}

std::vector<SweepRow> run_sweep(const SweepConfig& cfg, const data::SyntheticData& data) {
  cfg.base.validate();
  if (cfg.repetitions < 1) throw ConfigError("sweep.repetitions must be at least 1");
  if (cfg.epsilons.empty() && !cfg.mechanisms.empty()) {
    throw ConfigError("sweep.epsilons must not be empty");
  }
  const PipelineConfig& base = cfg.base;
  Split split = split_rows(data.transactions.size(), base.test_fraction, base.seed);
  SrvFrames frames = srv_frames(data, split);
  std::vector<std::size_t> rows = all_rows(split);
  SrvParty srv(data.transactions, derive_seed(base.seed, "srv"));
  std::vector<ClientParty> clients = make_clients(data, base.seed, base.silent_clients);
  {
    Router router;
    fednet::run_discrepancy_phase(router, srv, clients);
  }
  const double rate = flag_rate(data.banks);

  std::vector<std::pair<std::string, double>> grid;
  if (cfg.include_identity) grid.emplace_back("identity", ldp::kInfinity);
  for (const auto& m : cfg.mechanisms) {
    for (double e : cfg.epsilons) grid.emplace_back(m, e);
  }

  std::vector<SweepRow> out;
  for (const auto& [name, eps] : grid) {
    ldp::TransformationMatrix mech = make_mechanism(name, eps, rate);
    double train_sum = 0, test_sum = 0;
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      std::uint64_t rep_seed = derive_seed(base.seed, "rep", static_cast<std::uint64_t>(rep));
      srv.reseed(derive_seed(rep_seed, "srv"));
      for (auto& c : clients) c.reseed(derive_seed(rep_seed, "client:" + c.bank()));
      Router router;
      FcParty fc(base.equality_bit);
      fednet::run_flag_collection(router, srv, clients, fc, mech, base.obfuscate_b, rows);
      boost::BoostParams params = base.boost;
      params.seed = derive_seed(base.boost.seed, "rep", static_cast<std::uint64_t>(rep));
      PlainFit fit = plaintext_fit(fc, srv, split, frames, params);
      train_sum += fit.train_auprc;
      test_sum += fit.test_auprc;
    }
    out.push_back({name, eps, "train", train_sum / cfg.repetitions, cfg.repetitions});
    out.push_back({name, eps, "test", test_sum / cfg.repetitions, cfg.repetitions});
  }
  return out;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "mechanism,epsilon,split,mean_auprc,repetitions\n";
  for (const auto& r : rows) {
    out << r.mechanism << ',' << format_double(r.epsilon) << ',' << r.split << ','
        << format_double(r.mean_auprc) << ',' << r.repetitions << '\n';
  }
}

}  // namespace starlit::pipeline
