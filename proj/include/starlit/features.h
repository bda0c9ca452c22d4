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

#ifndef STARLIT_FEATURES_H_
#define STARLIT_FEATURES_H_

#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "starlit/datamodel.h"

namespace starlit::features {

struct ServerFeatureRow {
  double settlement_amount = 0;
  double instructed_amount = 0;
  int hour = 0;
  int sender_hour_freq = 0;
  int sender_currency_freq = 0;
  double sender_currency_amount_avg = 0;
  int sender_receiver_freq = 0;
  bool label = false;
  std::string sample_id;
};

inline constexpr int kServerFeatureCount = 7;
const std::vector<std::string>& server_feature_names();

// Frequency encodings fitted on one transaction list (the training split)
// and frozen for featurizing any other list. Keys never seen during fit
// encode as 0.
class ServerFeatureEncoder {
 public:
  void fit(std::span<const data::TransactionRecord> transactions);
  std::vector<ServerFeatureRow> transform(
      std::span<const data::TransactionRecord> transactions) const;

 private:
  struct CurrencyStats {
    int count = 0;
    double amount_sum = 0;
  };
  std::map<std::pair<std::string, int>, int> sender_hour_;
  std::map<std::pair<std::string, std::string>, CurrencyStats> sender_currency_;
  std::map<std::pair<std::string, std::string>, int> sender_receiver_;
};

// Fit and transform on the same list. Throws ConfigError on empty input.
std::vector<ServerFeatureRow> derive_server_features(
    std::span<const data::TransactionRecord> transactions);

int hour_of_day(const data::TransactionRecord& t);

// 1 iff the account carries any issue code.
constexpr int binarize_flag(int flag) { return flag != 0 ? 1 : 0; }

// Rows x kServerFeatureCount, columns in server_feature_names() order.
Eigen::MatrixXd to_matrix(std::span<const ServerFeatureRow> rows);

}  // namespace starlit::features

#endif  // STARLIT_FEATURES_H_
