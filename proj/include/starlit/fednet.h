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

#ifndef STARLIT_FEDNET_H_
#define STARLIT_FEDNET_H_

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "starlit/boost.h"
#include "starlit/common.h"
#include "starlit/datamodel.h"
#include "starlit/ldp.h"
#include "starlit/metrics.h"
#include "starlit/psi.h"

namespace starlit::fednet {

enum class Role : std::uint8_t { kSrv, kFc, kClient };

struct PartyId {
  Role role = Role::kSrv;
  data::BankId bank;  // clients only

  static PartyId srv() { return {Role::kSrv, {}}; }
  static PartyId fc() { return {Role::kFc, {}}; }
  static PartyId client(data::BankId bank) { return {Role::kClient, std::move(bank)}; }

  std::string name() const;
  auto operator<=>(const PartyId&) const = default;
};

enum class MessageKind : std::uint8_t {
  kPsiRequest,
  kPsiResponse,
  kFlagRequest,
  kFlagTriples,
  kTrainingIds,
  kMissingIds,
  kTrainSetup,
  kTrainSetupAck,
  kEncryptedGradients,
  kGradientAck,
  kHistogramRequest,
  kHistogramResponse,
  kSplitDecision,
  kPartition,
  kInferenceRequest,
  kInferenceResponse,
};

std::string_view kind_name(MessageKind k);

struct Message {
  std::uint64_t id = 0;
  PartyId sender;
  PartyId receiver;
  MessageKind kind = MessageKind::kPsiRequest;
  std::string phase;
  Bytes payload;
};

struct LogEntry {
  std::uint64_t id = 0;
  PartyId sender;
  PartyId receiver;
  MessageKind kind = MessageKind::kPsiRequest;
  std::string phase;
  std::size_t bytes = 0;
};

// Per receiving party, every message it was handed (including ones it
// never consumed).
class LeakageLedger {
 public:
  void record(const Message& m) { views_[m.receiver].push_back(m); }
  const std::vector<Message>& view(const PartyId& p) const;
  std::vector<PartyId> parties() const;

 private:
  std::map<PartyId, std::vector<Message>> views_;
};

// Deterministic in-process message router, FIFO per (sender, receiver)
// pair. The only channel between parties.
class Router {
 public:
  // Called on every send before delivery; may rewrite the message or emit
  // extra messages through `inject`. Used for fault injection only.
  using Tap = std::function<void(Message& m, Router& router)>;

  std::uint64_t send(const PartyId& from, const PartyId& to, MessageKind kind,
                     std::string_view phase, Bytes payload);
  // Like send but bypasses the tap. Called from inside a tap, the message
  // is delivered right after the one being sent.
  void inject(const PartyId& from, const PartyId& to, MessageKind kind,
                       std::string_view phase, Bytes payload);
  std::optional<Message> poll(const PartyId& to, const PartyId& from);
  // Pops the next message on the pair; ProtocolError if absent or of
  // another kind.
  Message expect(const PartyId& to, const PartyId& from, MessageKind kind);
  std::size_t pending(const PartyId& to, const PartyId& from) const;

  void set_tap(Tap tap) { tap_ = std::move(tap); }
  const std::vector<LogEntry>& log() const { return log_; }
  const LeakageLedger& ledger() const { return ledger_; }
  std::vector<metrics::TrafficRow> traffic() const;

 private:
  std::uint64_t deliver(Message m);

  std::map<std::pair<PartyId, PartyId>, std::deque<Message>> queues_;
  std::vector<LogEntry> log_;
  LeakageLedger ledger_;
  Tap tap_;
  bool in_tap_ = false;
  std::vector<Message> deferred_;
  std::uint64_t next_id_ = 1;
};

enum class Side : std::uint8_t { kOrdering = 0, kBeneficiary = 1 };

struct FlagRequest {
  std::string sample_id;
  std::string account;
  Side side = Side::kOrdering;
};

struct FlagTriple {
  std::string sample_id;
  Side side = Side::kOrdering;
  std::uint8_t b = 0;  // 1 when the bank record matches Srv's copy
  std::uint8_t w = 0;  // binarized account flag, possibly obfuscated
};

Bytes encode_flag_requests(const std::vector<FlagRequest>& requests);
std::vector<FlagRequest> decode_flag_requests(std::span<const std::uint8_t> bytes);
Bytes encode_triples(const std::vector<FlagTriple>& triples);
std::vector<FlagTriple> decode_triples(std::span<const std::uint8_t> bytes);

// 36-character UUID-format identifier.
std::string random_sample_id(std::mt19937_64& rng);

class ClientParty {
 public:
  ClientParty(data::BankId bank, std::vector<data::AccountRecord> accounts,
              std::uint64_t seed);

  const data::BankId& bank() const { return bank_; }
  PartyId id() const { return PartyId::client(bank_); }
  void set_silent(bool silent) { silent_ = silent; }
  // New randomness for the next flag collection; PSI results are kept.
  void reseed(std::uint64_t seed) { seed_ = seed; }
  bool silent() const { return silent_; }

  // The bank's PSI input: one identity string per account.
  psi::ElementSet psi_set() const;
  void start_psi(Router& router);
  void finish_psi(Router& router);

  // Answers the pending flag request with triples sent to FC. `obfuscate_b`
  // also passes the discrepancy bit through the mechanism.
  void answer_flag_requests(Router& router, const ldp::TransformationMatrix& mechanism,
                            bool obfuscate_b);

  const psi::ElementSet& intersection() const { return intersection_; }
  std::size_t srv_set_size() const { return srv_set_size_; }
  // b per account, in account order.
  const std::vector<int>& match_bits() const { return match_; }
  const std::vector<std::string>& request_errors() const { return errors_; }

 private:
  data::BankId bank_;
  std::vector<data::AccountRecord> accounts_;
  std::map<std::string, std::size_t> by_account_;
  std::uint64_t seed_;
  bool silent_ = false;
  std::unique_ptr<psi::PsiClient> psi_;
  psi::ElementSet intersection_;
  std::size_t srv_set_size_ = 0;
  std::vector<int> match_;
  std::vector<std::string> errors_;
};

class SrvParty {
 public:
  SrvParty(std::vector<data::TransactionRecord> transactions, std::uint64_t seed);

  const std::vector<data::TransactionRecord>& transactions() const { return txs_; }
  // Identities Srv holds for accounts of `bank`, as they appear in transactions.
  psi::ElementSet psi_set(const data::BankId& bank) const;
  void serve_psi(Router& router, const data::BankId& bank);
  // v_i as observed from the client's request.
  std::size_t observed_client_size(const data::BankId& bank) const;

  // Draws one fresh sample id per transaction and sends each involved bank
  // its (id, account, side) requests. Rows outside `rows` are not requested.
  void send_flag_requests(Router& router, const std::vector<std::size_t>& rows);
  void reseed(std::uint64_t seed) { seed_ = seed; }
  const std::vector<std::string>& sample_ids() const { return sample_ids_; }

 private:
  std::vector<data::TransactionRecord> txs_;
  std::uint64_t seed_;
  std::map<data::BankId, std::size_t> observed_sizes_;
  std::vector<std::string> sample_ids_;
};

// FC's dataset, keyed by sample id: (b_order, w_order, b_benef, w_benef).
struct FcRow {
  std::array<std::uint8_t, 4> values{};
  std::uint8_t present = 0;  // bit 0: ordering side, bit 1: beneficiary side
  bool complete() const { return present == 3; }
};

class FcParty {
 public:
  explicit FcParty(bool equality_bit) : equality_bit_(equality_bit) {}

  // Drains whatever triples the given clients sent.
  void collect_triples(Router& router, const std::vector<data::BankId>& banks);
  const std::map<std::string, FcRow>& dataset() const { return rows_; }
  // s_i: triples received per client.
  const std::map<data::BankId, std::size_t>& triple_counts() const { return counts_; }

  static std::vector<std::string> column_names(bool equality_bit);
  int n_columns() const { return equality_bit_ ? 5 : 4; }
  // Feature rows for ids with complete columns; the others go to `missing`.
  Eigen::MatrixXd features(const std::vector<std::string>& ids,
                           std::vector<std::string>* kept,
                           std::vector<std::string>* missing) const;

  // Handles one pending Srv message of the training or inference phase.
  void serve(Router& router);
  const boost::PassiveParty* passive() const { return passive_ ? &*passive_ : nullptr; }

 private:
  bool equality_bit_;
  std::map<std::string, FcRow> rows_;
  std::map<data::BankId, std::size_t> counts_;
  std::optional<boost::PassiveParty> passive_;
};

// Srv-side PassiveChannel over the router.
class RouterChannel : public boost::PassiveChannel {
 public:
  RouterChannel(Router& router, FcParty& fc) : router_(router), fc_(fc) {}
  Bytes exchange(boost::TrainingMessage kind, Bytes request) override;

 private:
  Router& router_;
  FcParty& fc_;
};

// PSI between Srv and every non-silent client. Returns b per account.
std::map<data::BankId, std::vector<int>> run_discrepancy_phase(Router& router, SrvParty& srv,
                                                               std::vector<ClientParty>& clients);

void run_flag_collection(Router& router, SrvParty& srv, std::vector<ClientParty>& clients,
                         FcParty& fc, const ldp::TransformationMatrix& mechanism,
                         bool obfuscate_b, const std::vector<std::size_t>& rows);

struct TrainingOutcome {
  boost::Model model;
  std::vector<std::size_t> kept_rows;  // transaction indices actually trained on
};

// Srv announces its training rows, drops the ones FC lacks, and runs the
// vertical trainer over the router.
TrainingOutcome run_training_phase(Router& router, SrvParty& srv, FcParty& fc,
                                   const std::vector<std::size_t>& rows,
                                   const Eigen::MatrixXd& srv_features,
                                   const std::vector<int>& labels,
                                   const boost::BoostParams& params,
                                   const he::PaillierKeypair& keys);

struct InferenceOutcome {
  Eigen::VectorXd scores;
  std::vector<std::size_t> kept_rows;
};

InferenceOutcome run_inference_phase(Router& router, SrvParty& srv, FcParty& fc,
                                     const boost::Model& model,
                                     const std::vector<std::size_t>& rows,
                                     const Eigen::MatrixXd& srv_features);

// What each party may legitimately learn, from the run's ground truth.
struct AuditInputs {
  std::map<data::BankId, std::size_t> client_set_sizes;  // v_i
  std::map<data::BankId, psi::ElementSet> srv_sets;      // DS_Srv per client
  std::map<data::BankId, psi::ElementSet> intersections;
  std::map<data::BankId, std::set<std::string>> client_accounts;
  std::vector<std::string> identity_strings;  // every identity field value
};

struct AuditFinding {
  std::uint64_t message_id = 0;
  std::string party;
  std::string reason;
};

struct AuditReport {
  std::vector<AuditFinding> findings;
  std::size_t messages_checked = 0;
  bool passed() const { return findings.empty(); }
  std::string to_text() const;
};

AuditReport audit_leakage(const LeakageLedger& ledger, const AuditInputs& inputs);

}  // namespace starlit::fednet

#endif  // STARLIT_FEDNET_H_
