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

#include "starlit/features.h"

#include "starlit/common.h"

namespace starlit::features {

const std::vector<std::string>& server_feature_names() {
  static const std::vector<std::string> kNames = {
      "settlement_amount",    "instructed_amount",
      "hour",                 "sender_hour_freq",
      "sender_currency_freq", "sender_currency_amount_avg",
      "sender_receiver_freq"};
  return kNames;
}

int hour_of_day(const data::TransactionRecord& t) {
  using namespace std::chrono;
  auto since_midnight = t.timestamp - floor<days>(t.timestamp);
  return static_cast<int>(duration_cast<hours>(since_midnight).count());
}

void ServerFeatureEncoder::fit(std::span<const data::TransactionRecord> transactions) {
  sender_hour_.clear();
  sender_currency_.clear();
  sender_receiver_.clear();
  for (const auto& t : transactions) {
    ++sender_hour_[{t.sender, hour_of_day(t)}];
    auto& c = sender_currency_[{t.sender, t.settlement_currency}];
    ++c.count;
    c.amount_sum += t.settlement_amount.value();
    ++sender_receiver_[{t.sender, t.receiver}];
  }
}

std::vector<ServerFeatureRow> ServerFeatureEncoder::transform(
    std::span<const data::TransactionRecord> transactions) const {
  std::vector<ServerFeatureRow> rows;
  rows.reserve(transactions.size());
  for (const auto& t : transactions) {
    ServerFeatureRow r;
    r.settlement_amount = t.settlement_amount.value();
    r.instructed_amount = t.instructed_amount.value();
    r.hour = hour_of_day(t);
    if (auto it = sender_hour_.find({t.sender, r.hour}); it != sender_hour_.end()) {
      r.sender_hour_freq = it->second;
    }
    if (auto it = sender_currency_.find({t.sender, t.settlement_currency});
        it != sender_currency_.end()) {
      r.sender_currency_freq = it->second.count;
      r.sender_currency_amount_avg = it->second.amount_sum / it->second.count;
    }
    if (auto it = sender_receiver_.find({t.sender, t.receiver});
        it != sender_receiver_.end()) {
      r.sender_receiver_freq = it->second;
    }
    r.label = t.label;
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ServerFeatureRow> derive_server_features(
    std::span<const data::TransactionRecord> transactions) {
  if (transactions.empty()) throw ConfigError("no transactions to featurize");
  ServerFeatureEncoder encoder;
  encoder.fit(transactions);
  return encoder.transform(transactions);
}

Eigen::MatrixXd to_matrix(std::span<const ServerFeatureRow> rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), kServerFeatureCount);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    m.row(i) << r.settlement_amount, r.instructed_amount, r.hour, r.sender_hour_freq,
        r.sender_currency_freq, r.sender_currency_amount_avg, r.sender_receiver_freq;
  }
  return m;
}

}  // namespace starlit::features
