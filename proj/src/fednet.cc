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

#include "starlit/fednet.h"

#include <algorithm>
#include <cstring>
#include <sstream>
#include <unordered_map>

#include "starlit/features.h"

namespace starlit::fednet {
namespace {

constexpr std::string_view kPhaseDiscrepancy = "discrepancy";
constexpr std::string_view kPhaseFlags = "flag_collection";
constexpr std::string_view kPhaseTraining = "training";
constexpr std::string_view kPhaseInference = "inference";
constexpr std::size_t kSampleIdLength = 36;

Bytes encode_strings(const std::vector<std::string>& v, std::uint32_t prefix) {
  ByteWriter w;
  w.put_u32(prefix);
  w.put_u32(static_cast<std::uint32_t>(v.size()));
  for (const auto& s : v) w.put_string(s);
  return w.take();
}

std::vector<std::string> decode_strings(ByteReader& r) {
  std::vector<std::string> out(r.get_u32());
  for (auto& s : out) s = r.get_string();
  return out;
}

Bytes pack_bits(const std::vector<std::uint8_t>& bits) {
  Bytes packed((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }
  return packed;
}

struct KindPair {
  boost::TrainingMessage training;
  MessageKind request;
  MessageKind response;
};

constexpr std::array<KindPair, 4> kTrainingKinds = {{
    {boost::TrainingMessage::kSetup, MessageKind::kTrainSetup, MessageKind::kTrainSetupAck},
    {boost::TrainingMessage::kEncryptedGradients, MessageKind::kEncryptedGradients,
     MessageKind::kGradientAck},
    {boost::TrainingMessage::kHistogramRequest, MessageKind::kHistogramRequest,
     MessageKind::kHistogramResponse},
    {boost::TrainingMessage::kSplitDecision, MessageKind::kSplitDecision,
     MessageKind::kPartition},
}};

// Substring search of many patterns over large byte buffers. Patterns of at
// least 8 bytes are indexed by their first 8 bytes.
class Scanner {
 public:
  explicit Scanner(const std::vector<std::string>& patterns) : filter_(1u << 20, 0) {
    for (const auto& p : patterns) {
      if (p.empty()) continue;
      if (p.size() < 8) {
        short_.push_back(p);
        continue;
      }
      std::uint64_t key;
      std::memcpy(&key, p.data(), 8);
      by_prefix_[key].push_back(p);
      filter_[slot(key)] = 1;
    }
  }

  std::optional<std::string> find(std::span<const std::uint8_t> bytes) const {
    const auto* data = bytes.data();
    if (bytes.size() >= 8 && !by_prefix_.empty()) {
      for (std::size_t i = 0; i + 8 <= bytes.size(); ++i) {
        std::uint64_t key;
        std::memcpy(&key, data + i, 8);
        if (!filter_[slot(key)]) continue;
        auto it = by_prefix_.find(key);
        if (it == by_prefix_.end()) continue;
        for (const auto& p : it->second) {
          if (i + p.size() <= bytes.size() && std::memcmp(data + i, p.data(), p.size()) == 0) {
            return p;
          }
        }
      }
    }
    for (const auto& p : short_) {
      auto it = std::search(bytes.begin(), bytes.end(), p.begin(), p.end());
      if (it != bytes.end()) return p;
    }
    return std::nullopt;
  }

 private:
  static std::size_t slot(std::uint64_t key) { return (key * 0x9e3779b97f4a7c15ULL) >> 44; }

  std::unordered_map<std::uint64_t, std::vector<std::string>> by_prefix_;
  std::vector<std::string> short_;
  std::vector<std::uint8_t> filter_;
};

}  // namespace

std::string PartyId::name() const {
  switch (role) {
    case Role::kSrv: return "srv";
    case Role::kFc: return "fc";
    case Role::kClient: return "client:" + bank;
  }
  return "?";
}

std::string_view kind_name(MessageKind k) {
  switch (k) {
    case MessageKind::kPsiRequest: return "psi_request";
    case MessageKind::kPsiResponse: return "psi_response";
    case MessageKind::kFlagRequest: return "flag_request";
    case MessageKind::kFlagTriples: return "flag_triples";
    case MessageKind::kTrainingIds: return "training_ids";
    case MessageKind::kMissingIds: return "missing_ids";
    case MessageKind::kTrainSetup: return "train_setup";
    case MessageKind::kTrainSetupAck: return "train_setup_ack";
    case MessageKind::kEncryptedGradients: return "encrypted_gradients";
    case MessageKind::kGradientAck: return "gradient_ack";
    case MessageKind::kHistogramRequest: return "histogram_request";
    case MessageKind::kHistogramResponse: return "histogram_response";
    case MessageKind::kSplitDecision: return "split_decision";
    case MessageKind::kPartition: return "partition";
    case MessageKind::kInferenceRequest: return "inference_request";
    case MessageKind::kInferenceResponse: return "inference_response";
  }
  return "unknown";
}

const std::vector<Message>& LeakageLedger::view(const PartyId& p) const {
  static const std::vector<Message> kEmpty;
  auto it = views_.find(p);
  return it == views_.end() ? kEmpty : it->second;
}

std::vector<PartyId> LeakageLedger::parties() const {
  std::vector<PartyId> out;
  for (const auto& [p, _] : views_) out.push_back(p);
  return out;
}

std::uint64_t Router::deliver(Message m) {
  m.id = next_id_++;
  log_.push_back({m.id, m.sender, m.receiver, m.kind, m.phase, m.payload.size()});
  ledger_.record(m);
  std::uint64_t id = m.id;
  queues_[{m.receiver, m.sender}].push_back(std::move(m));
  return id;
}

std::uint64_t Router::send(const PartyId& from, const PartyId& to, MessageKind kind,
                           std::string_view phase, Bytes payload) {
  Message m{0, from, to, kind, std::string(phase), std::move(payload)};
  if (!tap_) return deliver(std::move(m));
  in_tap_ = true;
  tap_(m, *this);
  in_tap_ = false;
  std::uint64_t id = deliver(std::move(m));
  std::vector<Message> extra = std::move(deferred_);
  deferred_.clear();
  for (auto& e : extra) deliver(std::move(e));
  return id;
}

void Router::inject(const PartyId& from, const PartyId& to, MessageKind kind,
                    std::string_view phase, Bytes payload) {
  Message m{0, from, to, kind, std::string(phase), std::move(payload)};
  if (in_tap_) {
    deferred_.push_back(std::move(m));
  } else {
    deliver(std::move(m));
  }
}

std::optional<Message> Router::poll(const PartyId& to, const PartyId& from) {
  auto it = queues_.find({to, from});
  if (it == queues_.end() || it->second.empty()) return std::nullopt;
  Message m = std::move(it->second.front());
  it->second.pop_front();
  return m;
}

Message Router::expect(const PartyId& to, const PartyId& from, MessageKind kind) {
  std::optional<Message> m = poll(to, from);
  if (!m) {
    throw ProtocolError(to.name() + " expected " + std::string(kind_name(kind)) + " from " +
                        from.name() + " but nothing was sent");
  }
  if (m->kind != kind) {
    throw ProtocolError(to.name() + " expected " + std::string(kind_name(kind)) + " from " +
                        from.name() + ", got " + std::string(kind_name(m->kind)));
  }
  return std::move(*m);
}

std::size_t Router::pending(const PartyId& to, const PartyId& from) const {
  auto it = queues_.find({to, from});
  return it == queues_.end() ? 0 : it->second.size();
}

std::vector<metrics::TrafficRow> Router::traffic() const {
  std::vector<metrics::TrafficRow> rows;
  rows.reserve(log_.size());
  for (const auto& e : log_) rows.push_back({e.sender.name(), e.receiver.name(), e.bytes, e.phase});
  return rows;
}

Bytes encode_flag_requests(const std::vector<FlagRequest>& requests) {
  ByteWriter w;
  w.put_u32(static_cast<std::uint32_t>(requests.size()));
  for (const auto& q : requests) {
    w.put_string(q.sample_id);
    w.put_string(q.account);
    w.put_u8(static_cast<std::uint8_t>(q.side));
  }
  return w.take();
}

std::vector<FlagRequest> decode_flag_requests(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  std::vector<FlagRequest> out(r.get_u32());
  for (auto& q : out) {
    q.sample_id = r.get_string();
    q.account = r.get_string();
    std::uint8_t side = r.get_u8();
    if (side > 1) throw ProtocolError("bad side tag in flag request");
    q.side = static_cast<Side>(side);
  }
  if (!r.done()) throw ProtocolError("trailing bytes in flag request");
  return out;
}

Bytes encode_triples(const std::vector<FlagTriple>& triples) {
  ByteWriter w;
  w.put_u32(static_cast<std::uint32_t>(triples.size()));
  for (const auto& t : triples) {
    w.put_string(t.sample_id);
    w.put_u8(static_cast<std::uint8_t>(t.side));
    w.put_u8(t.b);
    w.put_u8(t.w);
  }
  return w.take();
}

std::vector<FlagTriple> decode_triples(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  std::vector<FlagTriple> out(r.get_u32());
  for (auto& t : out) {
    t.sample_id = r.get_string();
    std::uint8_t side = r.get_u8();
    t.b = r.get_u8();
    t.w = r.get_u8();
    if (side > 1 || t.b > 1 || t.w > 1) throw ProtocolError("flag triple field out of range");
    t.side = static_cast<Side>(side);
  }
  if (!r.done()) throw ProtocolError("trailing bytes in flag triples");
  return out;
}

std::string random_sample_id(std::mt19937_64& rng) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::uint64_t hi = rng(), lo = rng();
  hi = (hi & ~0xf000ULL) | 0x4000ULL;                           // version 4
  lo = (lo & ~(0xc000ULL << 48)) | (0x8000ULL << 48);           // RFC 4122 variant
  std::string out;
  out.reserve(kSampleIdLength);
  for (int i = 0; i < 32; ++i) {
    std::uint64_t word = i < 16 ? hi : lo;
    int shift = 60 - 4 * (i % 16);
    if (i == 8 || i == 12 || i == 16 || i == 20) out.push_back('-');
    out.push_back(kHex[(word >> shift) & 0xf]);
  }
  return out;
}

ClientParty::ClientParty(data::BankId bank, std::vector<data::AccountRecord> accounts,
                         std::uint64_t seed)
    : bank_(std::move(bank)), accounts_(std::move(accounts)), seed_(seed),
      match_(accounts_.size(), 0) {
  for (std::size_t i = 0; i < accounts_.size(); ++i) by_account_[accounts_[i].account] = i;
}

psi::ElementSet ClientParty::psi_set() const {
  psi::ElementSet s;
  for (const auto& a : accounts_) s.insert(data::identity_string(a));
  return s;
}

void ClientParty::start_psi(Router& router) {
  psi_ = std::make_unique<psi::PsiClient>(psi_set(), derive_seed(seed_, "psi"));
  router.send(id(), PartyId::srv(), MessageKind::kPsiRequest, kPhaseDiscrepancy,
              psi_->request());
}

void ClientParty::finish_psi(Router& router) {
  if (!psi_) throw ProtocolError(id().name() + " has no PSI session");
  Message m = router.expect(id(), PartyId::srv(), MessageKind::kPsiResponse);
  try {
    intersection_ = psi_->finish(m.payload);
  } catch (const ProtocolError& e) {
    throw ProtocolError("PSI with " + id().name() + " failed: " + e.what());
  }
  srv_set_size_ = psi_->server_set_size();
  psi_.reset();
  for (std::size_t i = 0; i < accounts_.size(); ++i) {
    match_[i] = intersection_.count(data::identity_string(accounts_[i])) ? 1 : 0;
  }
}

void ClientParty::answer_flag_requests(Router& router, const ldp::TransformationMatrix& mechanism,
                                       bool obfuscate_b) {
  std::optional<Message> m = router.poll(id(), PartyId::srv());
  // Unsolicited leftovers are dropped; the ledger keeps them for the audit.
  while (m && m->kind != MessageKind::kFlagRequest) {
    errors_.push_back("discarded unexpected " + std::string(kind_name(m->kind)));
    m = router.poll(id(), PartyId::srv());
  }
  if (!m) return;
  if (silent_) return;
  std::vector<FlagRequest> requests = decode_flag_requests(m->payload);
  std::vector<FlagTriple> triples;
  std::vector<int> w, b;
  for (const auto& q : requests) {
    auto it = by_account_.find(q.account);
    if (it == by_account_.end()) {
      errors_.push_back("unknown account " + q.account + " for sample " + q.sample_id);
      continue;
    }
    triples.push_back({q.sample_id, q.side, 0, 0});
    w.push_back(features::binarize_flag(accounts_[it->second].flag));
    b.push_back(match_[it->second]);
  }
  std::vector<int> w_out = apply_mechanism(mechanism, w, derive_seed(seed_, "ldp-w"));
  std::vector<int> b_out = obfuscate_b ? apply_mechanism(mechanism, b, derive_seed(seed_, "ldp-b")) : b;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    triples[i].w = static_cast<std::uint8_t>(w_out[i]);
    triples[i].b = static_cast<std::uint8_t>(b_out[i]);
  }
  router.send(id(), PartyId::fc(), MessageKind::kFlagTriples, kPhaseFlags, encode_triples(triples));
}

SrvParty::SrvParty(std::vector<data::TransactionRecord> transactions, std::uint64_t seed)
    : txs_(std::move(transactions)), seed_(seed) {}

psi::ElementSet SrvParty::psi_set(const data::BankId& bank) const {
  psi::ElementSet s;
  for (const auto& t : txs_) {
    if (t.sender == bank) s.insert(data::ordering_identity(t));
    if (t.receiver == bank) s.insert(data::beneficiary_identity(t));
  }
  return s;
}

void SrvParty::serve_psi(Router& router, const data::BankId& bank) {
  PartyId client = PartyId::client(bank);
  Message m = router.expect(PartyId::srv(), client, MessageKind::kPsiRequest);
  psi::PsiServer server(psi_set(bank), derive_seed(seed_, "psi:" + bank));
  Bytes response;
  try {
    response = server.respond(m.payload);
  } catch (const ProtocolError& e) {
    throw ProtocolError("PSI with " + client.name() + " failed: " + e.what());
  }
  observed_sizes_[bank] = server.client_set_size();
  router.send(PartyId::srv(), client, MessageKind::kPsiResponse, kPhaseDiscrepancy,
              std::move(response));
}

std::size_t SrvParty::observed_client_size(const data::BankId& bank) const {
  auto it = observed_sizes_.find(bank);
  return it == observed_sizes_.end() ? 0 : it->second;
}

void SrvParty::send_flag_requests(Router& router, const std::vector<std::size_t>& rows) {
  std::mt19937_64 rng(derive_seed(seed_, "sample-ids"));
  sample_ids_.resize(txs_.size());
  for (auto& id : sample_ids_) id = random_sample_id(rng);
  std::map<data::BankId, std::vector<FlagRequest>> per_bank;
  for (std::size_t r : rows) {
    const auto& t = txs_.at(r);
    per_bank[t.sender].push_back({sample_ids_[r], t.ordering_account, Side::kOrdering});
    per_bank[t.receiver].push_back({sample_ids_[r], t.beneficiary_account, Side::kBeneficiary});
  }
  for (const auto& [bank, requests] : per_bank) {
    router.send(PartyId::srv(), PartyId::client(bank), MessageKind::kFlagRequest, kPhaseFlags,
                encode_flag_requests(requests));
  }
}

void FcParty::collect_triples(Router& router, const std::vector<data::BankId>& banks) {
  for (const auto& bank : banks) {
    while (std::optional<Message> m = router.poll(PartyId::fc(), PartyId::client(bank))) {
      if (m->kind != MessageKind::kFlagTriples) {
        throw ProtocolError("FC expected flag_triples from client:" + bank);
      }
      std::vector<FlagTriple> triples = decode_triples(m->payload);
      for (const auto& t : triples) {
        FcRow& row = rows_[t.sample_id];
        int side = static_cast<int>(t.side);
        row.values[2 * side] = t.b;
        row.values[2 * side + 1] = t.w;
        row.present |= static_cast<std::uint8_t>(1u << side);
      }
      counts_[bank] += triples.size();
    }
  }
}

std::vector<std::string> FcParty::column_names(bool equality_bit) {
  std::vector<std::string> names = {"b_order", "w_order", "b_benef", "w_benef"};
  if (equality_bit) names.push_back("w_equal");
  return names;
}

Eigen::MatrixXd FcParty::features(const std::vector<std::string>& ids,
                                  std::vector<std::string>* kept,
                                  std::vector<std::string>* missing) const {
  std::vector<const FcRow*> rows;
  for (const auto& id : ids) {
    auto it = rows_.find(id);
    if (it == rows_.end() || !it->second.complete()) {
      if (missing) missing->push_back(id);
      continue;
    }
    rows.push_back(&it->second);
    if (kept) kept->push_back(id);
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), n_columns());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int c = 0; c < 4; ++c) x(i, c) = rows[i]->values[c];
    if (equality_bit_) x(i, 4) = rows[i]->values[1] == rows[i]->values[3] ? 1.0 : 0.0;
  }
  return x;
}

void FcParty::serve(Router& router) {
  std::optional<Message> m = router.poll(PartyId::fc(), PartyId::srv());
  if (!m) throw ProtocolError("FC has no pending message from Srv");
  const PartyId fc = PartyId::fc(), srv = PartyId::srv();

  if (m->kind == MessageKind::kTrainingIds) {
    ByteReader r(m->payload);
    int n_bins = static_cast<int>(r.get_u32());
    std::vector<std::string> ids = decode_strings(r);
    if (!r.done()) throw ProtocolError("trailing bytes in training ids");
    std::vector<std::string> kept, missing;
    Eigen::MatrixXd x = features(ids, &kept, &missing);
    passive_.emplace(std::move(x), std::move(kept), n_bins);
    router.send(fc, srv, MessageKind::kMissingIds, kPhaseTraining, encode_strings(missing, 0));
    return;
  }
  if (m->kind == MessageKind::kInferenceRequest) {
    if (!passive_) throw ProtocolError("inference before training");
    ByteReader r(m->payload);
    r.get_u32();
    std::vector<std::string> ids = decode_strings(r);
    std::vector<boost::FcNodeRef> refs(r.get_u32());
    for (auto& ref : refs) {
      ref.tree = static_cast<int>(r.get_u32());
      ref.node = static_cast<int>(r.get_u32());
      ref.feature = static_cast<int>(r.get_u32());
      ref.bin = static_cast<int>(r.get_u32());
    }
    if (!r.done()) throw ProtocolError("trailing bytes in inference request");
    std::vector<std::string> kept, missing;
    Eigen::MatrixXd x = features(ids, &kept, &missing);
    auto bits = boost::evaluate_fc_nodes(passive_->cuts(), refs, x);
    ByteWriter w;
    w.put_raw(encode_strings(missing, 0));
    for (const auto& b : bits) w.put_raw(pack_bits(b));
    router.send(fc, srv, MessageKind::kInferenceResponse, kPhaseInference, w.take());
    return;
  }
  for (const auto& pair : kTrainingKinds) {
    if (pair.request == m->kind) {
      if (!passive_) throw ProtocolError("training message before training ids");
      Bytes resp = passive_->handle(pair.training, m->payload);
      router.send(fc, srv, pair.response, kPhaseTraining, std::move(resp));
      return;
    }
  }
  throw ProtocolError("FC cannot handle " + std::string(kind_name(m->kind)));
}

Bytes RouterChannel::exchange(boost::TrainingMessage kind, Bytes request) {
  for (const auto& pair : kTrainingKinds) {
    if (pair.training == kind) {
      router_.send(PartyId::srv(), PartyId::fc(), pair.request, kPhaseTraining, std::move(request));
      fc_.serve(router_);
      return router_.expect(PartyId::srv(), PartyId::fc(), pair.response).payload;
    }
  }
  throw ProtocolError("unknown training message");
}

std::map<data::BankId, std::vector<int>> run_discrepancy_phase(Router& router, SrvParty& srv,
                                                               std::vector<ClientParty>& clients) {
  std::map<data::BankId, std::vector<int>> out;
  for (auto& c : clients) {
    if (c.silent()) continue;
    c.start_psi(router);
    srv.serve_psi(router, c.bank());
    c.finish_psi(router);
    out[c.bank()] = c.match_bits();
  }
  return out;
}

void run_flag_collection(Router& router, SrvParty& srv, std::vector<ClientParty>& clients,
                         FcParty& fc, const ldp::TransformationMatrix& mechanism,
                         bool obfuscate_b, const std::vector<std::size_t>& rows) {
  srv.send_flag_requests(router, rows);
  std::vector<data::BankId> banks;
  for (auto& c : clients) {
    c.answer_flag_requests(router, mechanism, obfuscate_b);
    banks.push_back(c.bank());
  }
  fc.collect_triples(router, banks);
}

TrainingOutcome run_training_phase(Router& router, SrvParty& srv, FcParty& fc,
                                   const std::vector<std::size_t>& rows,
                                   const Eigen::MatrixXd& srv_features,
                                   const std::vector<int>& labels,
                                   const boost::BoostParams& params,
                                   const he::PaillierKeypair& keys) {
  if (fc.dataset().empty()) throw ProtocolError("FC dataset is empty");
  if (static_cast<std::size_t>(srv_features.rows()) != rows.size() || labels.size() != rows.size()) {
    throw ConfigError("training rows, features and labels differ in length");
  }
  std::vector<std::string> ids;
  for (std::size_t r : rows) ids.push_back(srv.sample_ids().at(r));
  router.send(PartyId::srv(), PartyId::fc(), MessageKind::kTrainingIds, kPhaseTraining,
              encode_strings(ids, static_cast<std::uint32_t>(params.n_bins)));
  fc.serve(router);
  Message resp = router.expect(PartyId::srv(), PartyId::fc(), MessageKind::kMissingIds);
  ByteReader r(resp.payload);
  r.get_u32();
  std::vector<std::string> missing = decode_strings(r);
  std::set<std::string> missing_set(missing.begin(), missing.end());

  TrainingOutcome out;
  boost::SrvView view;
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (missing_set.count(ids[i])) continue;
    keep.push_back(static_cast<Eigen::Index>(i));
    out.kept_rows.push_back(rows[i]);
    view.labels.push_back(labels[i]);
    view.sample_ids.push_back(ids[i]);
  }
  if (keep.empty()) throw ProtocolError("no training row has complete FC columns");
  view.x = srv_features(keep, Eigen::all);
  RouterChannel channel(router, fc);
  out.model = boost::train_vertical(view, channel, params, keys);
  return out;
}

InferenceOutcome run_inference_phase(Router& router, SrvParty& srv, FcParty& fc,
                                     const boost::Model& model,
                                     const std::vector<std::size_t>& rows,
                                     const Eigen::MatrixXd& srv_features) {
  std::vector<std::string> ids;
  for (std::size_t r : rows) ids.push_back(srv.sample_ids().at(r));
  std::vector<boost::FcNodeRef> refs = boost::fc_nodes(model);
  ByteWriter w;
  w.put_raw(encode_strings(ids, 0));
  w.put_u32(static_cast<std::uint32_t>(refs.size()));
  for (const auto& ref : refs) {
    w.put_u32(static_cast<std::uint32_t>(ref.tree));
    w.put_u32(static_cast<std::uint32_t>(ref.node));
    w.put_u32(static_cast<std::uint32_t>(ref.feature));
    w.put_u32(static_cast<std::uint32_t>(ref.bin));
  }
  router.send(PartyId::srv(), PartyId::fc(), MessageKind::kInferenceRequest, kPhaseInference,
              w.take());
  fc.serve(router);
  Message resp = router.expect(PartyId::srv(), PartyId::fc(), MessageKind::kInferenceResponse);
  ByteReader r(resp.payload);
  r.get_u32();
  std::vector<std::string> missing = decode_strings(r);
  std::set<std::string> missing_set(missing.begin(), missing.end());

  InferenceOutcome out;
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (missing_set.count(ids[i])) continue;
    keep.push_back(static_cast<Eigen::Index>(i));
    out.kept_rows.push_back(rows[i]);
  }
  std::vector<std::vector<std::uint8_t>> bits(refs.size());
  for (auto& b : bits) {
    auto packed = r.get_raw((keep.size() + 7) / 8);
    b.resize(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) b[i] = (packed[i / 8] >> (i % 8)) & 1;
  }
  if (!r.done()) throw ProtocolError("trailing bytes in inference response");
  Eigen::MatrixXd x = srv_features(keep, Eigen::all);
  out.scores = boost::predict_with_fc_bits(model, x, refs, bits);
  return out;
}

std::string AuditReport::to_text() const {
  std::ostringstream out;
  out << "leakage audit: " << (passed() ? "PASS" : "FAIL") << "\n";
  out << "messages checked: " << messages_checked << "\n";
  for (const auto& f : findings) {
    out << "violation: message " << f.message_id << " to " << f.party << ": " << f.reason << "\n";
  }
  return out.str();
}

AuditReport audit_leakage(const LeakageLedger& ledger, const AuditInputs& inputs) {
  AuditReport report;
  auto flag = [&report](const Message& m, std::string reason) {
    report.findings.push_back({m.id, m.receiver.name(), std::move(reason)});
  };
  auto not_permitted = [&](const Message& m) {
    flag(m, std::string(kind_name(m.kind)) + " from " + m.sender.name() + " is not permitted");
  };

  Scanner identity_scan(inputs.identity_strings);

  for (const PartyId& party : ledger.parties()) {
    const auto& view = ledger.view(party);
    report.messages_checked += view.size();

    if (party.role == Role::kSrv) {
      for (const auto& m : view) {
        bool from_fc = m.sender.role == Role::kFc;
        switch (m.kind) {
          case MessageKind::kPsiRequest: {
            if (m.sender.role != Role::kClient) {
              not_permitted(m);
              break;
            }
            ByteReader r(m.payload);
            std::size_t count = m.payload.size() >= 4 ? r.get_u32() : 0;
            auto it = inputs.client_set_sizes.find(m.sender.bank);
            if (it == inputs.client_set_sizes.end() || count != it->second ||
                m.payload.size() != 4 + count * psi::kPointBytes) {
              flag(m, "PSI request reveals more than the client's dataset size");
            }
            break;
          }
          case MessageKind::kMissingIds:
          case MessageKind::kTrainSetupAck:
          case MessageKind::kGradientAck:
          case MessageKind::kHistogramResponse:
          case MessageKind::kPartition:
          case MessageKind::kInferenceResponse:
            if (!from_fc) not_permitted(m);
            break;
          default:
            not_permitted(m);
        }
      }
    } else if (party.role == Role::kFc) {
      for (const auto& m : view) {
        switch (m.kind) {
          case MessageKind::kFlagTriples:
            if (m.sender.role != Role::kClient) not_permitted(m);
            break;
          case MessageKind::kTrainingIds:
          case MessageKind::kTrainSetup:
          case MessageKind::kEncryptedGradients:
          case MessageKind::kHistogramRequest:
          case MessageKind::kSplitDecision:
          case MessageKind::kInferenceRequest:
            if (m.sender.role != Role::kSrv) not_permitted(m);
            break;
          default:
            not_permitted(m);
        }
        if (auto hit = identity_scan.find(m.payload)) {
          flag(m, "FC-visible bytes contain identity string '" + *hit + "'");
        }
      }
    } else {
      const data::BankId& bank = party.bank;
      std::vector<std::string> foreign;
      if (auto it = inputs.srv_sets.find(bank); it != inputs.srv_sets.end()) {
        const psi::ElementSet* inter = nullptr;
        if (auto jt = inputs.intersections.find(bank); jt != inputs.intersections.end()) {
          inter = &jt->second;
        }
        for (const auto& e : it->second) {
          if (!inter || !inter->count(e)) foreign.push_back(e);
        }
      }
      Scanner foreign_scan(foreign);
      int psi_responses = 0, flag_requests = 0;
      for (const auto& m : view) {
        if (m.sender.role != Role::kSrv) {
          not_permitted(m);
          continue;
        }
        if (m.kind == MessageKind::kPsiResponse) {
          if (++psi_responses > 1) flag(m, "more than one PSI response");
          if (auto hit = foreign_scan.find(m.payload)) {
            flag(m, "client-visible bytes contain non-intersection element '" + *hit + "'");
          }
          try {
            ByteReader r(m.payload);
            std::uint32_t echoed = r.get_u32();
            r.get_raw(echoed * psi::kPointBytes);
            std::uint32_t n_srv = r.get_u32();
            r.get_raw(n_srv * psi::kPointBytes);
            auto sz = inputs.srv_sets.find(bank);
            if (!r.done() || sz == inputs.srv_sets.end() || n_srv != sz->second.size()) {
              flag(m, "PSI response does not match the permitted shape");
            }
          } catch (const ProtocolError&) {
            flag(m, "PSI response does not match the permitted shape");
          }
        } else if (m.kind == MessageKind::kFlagRequest) {
          if (++flag_requests > 1) flag(m, "more than one flag request");
          try {
            auto accounts = inputs.client_accounts.find(bank);
            for (const auto& q : decode_flag_requests(m.payload)) {
              if (q.sample_id.size() != kSampleIdLength || accounts == inputs.client_accounts.end() ||
                  !accounts->second.count(q.account)) {
                flag(m, "flag request names data the client does not hold");
                break;
              }
            }
          } catch (const ProtocolError&) {
            flag(m, "malformed flag request");
          }
        } else {
          not_permitted(m);
        }
      }
    }
  }
  return report;
}

}  // namespace starlit::fednet
