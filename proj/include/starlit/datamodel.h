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

#ifndef STARLIT_DATAMODEL_H_
#define STARLIT_DATAMODEL_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace starlit::data {

using BankId = std::string;

// Monetary amount held as integer cents so CSV round trips are exact.
struct Amount {
  std::int64_t cents = 0;

  double value() const { return static_cast<double>(cents) / 100.0; }
  static Amount from_value(double v);
  auto operator<=>(const Amount&) const = default;
};

// One payment message as Srv sees it, fields in file order.
struct TransactionRecord {
  std::string message_id;
  std::string uetr;
  std::string transaction_reference;
  std::chrono::sys_seconds timestamp;
  BankId sender;
  BankId receiver;
  std::string ordering_account;
  std::string ordering_name;
  std::string ordering_street;
  std::string ordering_country_city_zip;
  std::string beneficiary_account;
  std::string beneficiary_name;
  std::string beneficiary_street;
  std::string beneficiary_country_city_zip;
  std::chrono::sys_days settlement_date;
  std::string settlement_currency;
  Amount settlement_amount;
  std::string instructed_currency;
  Amount instructed_amount;
  bool label = false;

  bool operator==(const TransactionRecord&) const = default;
};

// One bank account record. flag == 0 means no issue recorded for the account.
struct AccountRecord {
  BankId bank;
  std::string account;
  std::string name;
  std::string street;
  std::string country_city_zip;
  int flag = 0;

  bool operator==(const AccountRecord&) const = default;
};

inline constexpr int kMaxFlag = 10;

struct SynthConfig {
  std::size_t n_transactions = 50000;
  std::size_t n_banks = 10;
  std::size_t accounts_per_bank = 1000;
  double anomaly_rate = 0.05;
  double flag_given_anomaly = 0.6;
  double flag_given_normal = 0.05;
  double discrepancy_given_anomaly = 0.5;
  double discrepancy_given_normal = 0.03;
  std::uint64_t seed = 1;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

using BankDatasets = std::map<BankId, std::vector<AccountRecord>>;

struct SyntheticData {
  std::vector<TransactionRecord> transactions;
  BankDatasets banks;
};

// Seeded generator with planted anomalies: anomalous rows pick accounts
// that are flagged / carry a discrepant bank record with elevated
// probability, and skew amount and hour-of-day.
SyntheticData generate_synthetic(const SynthConfig& cfg);

std::string bank_id(std::size_t index);

// Identity string Srv and a bank would both hold for one account:
// account || name || street || country_city_zip, no separators.
std::string identity_string(std::string_view account, std::string_view name,
                            std::string_view street,
                            std::string_view country_city_zip);
std::string identity_string(const AccountRecord& a);
std::string ordering_identity(const TransactionRecord& t);
std::string beneficiary_identity(const TransactionRecord& t);

inline constexpr std::string_view kTransactionHeader =
    "MessageId,UETR,TransactionReference,Timestamp,Sender,Receiver,"
    "OrderingAccount,OrderingName,OrderingStreet,OrderingCountryCityZip,"
    "BeneficiaryAccount,BeneficiaryName,BeneficiaryStreet,"
    "BeneficiaryCountryCityZip,SettlementDate,SettlementCurrency,"
    "SettlementAmount,InstructedCurrency,InstructedAmount,Label";
inline constexpr std::string_view kAccountHeader =
    "Bank,Account,Name,Street,CountryCityZip,Flags";

void write_transactions(std::ostream& out, std::span<const TransactionRecord> rows);
std::vector<TransactionRecord> read_transactions(std::istream& in);
void write_transactions(const std::filesystem::path& path,
                        std::span<const TransactionRecord> rows);
std::vector<TransactionRecord> read_transactions(const std::filesystem::path& path);

void write_accounts(std::ostream& out, std::span<const AccountRecord> rows);
std::vector<AccountRecord> read_accounts(std::istream& in);
void write_accounts(const std::filesystem::path& path,
                    std::span<const AccountRecord> rows);
std::vector<AccountRecord> read_accounts(const std::filesystem::path& path);

// transactions.csv plus one bank_<ID>.csv per bank.
void write_dataset(const std::filesystem::path& dir, const SyntheticData& data);
SyntheticData read_dataset(const std::filesystem::path& dir);

std::string format_timestamp(std::chrono::sys_seconds t);
std::string format_date(std::chrono::sys_days d);

}  // namespace starlit::data

#endif  // STARLIT_DATAMODEL_H_
