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

#include "starlit/datamodel.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "starlit/common.h"

namespace starlit::data {
namespace {

using namespace std::chrono;

constexpr std::array<std::string_view, 8> kCurrencies = {
    "USD", "EUR", "GBP", "JPY", "CHF", "CAD", "AUD", "SGD"};
// Units of USD per unit of currency; only ratios matter.
constexpr std::array<double, 8> kUsdRate = {1.0,  1.08, 1.27,  0.0068,
                                            1.12, 0.74, 0.66, 0.75};

constexpr std::array<std::string_view, 24> kFirstNames = {
    "Ada",   "Ben",   "Chloe", "Dmitri", "Elena", "Farid", "Grace", "Hiro",
    "Ines",  "Jonas", "Kira",  "Luca",   "Maya",  "Nils",  "Olga",  "Pedro",
    "Quinn", "Rosa",  "Sami",  "Tariq",  "Uma",   "Viktor", "Wen",  "Yara"};
constexpr std::array<std::string_view, 24> kLastNames = {
    "Abbott", "Brandt", "Costa",  "Dubois", "Eriksen", "Fischer",
    "Garcia", "Haddad", "Ivanov", "Jansen", "Kowalski", "Larsen",
    "Moreau", "Novak",  "Okafor", "Petrov", "Quist",   "Rossi",
    "Sato",   "Tanaka", "Urban",  "Varga",  "Weber",   "Zhang"};
constexpr std::array<std::string_view, 16> kStreets = {
    "Oak",   "Maple",  "Harbor", "Mill",   "Station", "Church",
    "Park",  "River",  "King",   "Queen",  "Market",  "Bridge",
    "Cedar", "Garden", "Castle", "Victoria"};
constexpr std::array<std::string_view, 4> kStreetSuffix = {"St", "Ave", "Rd",
                                                           "Lane"};
constexpr std::array<std::pair<std::string_view, std::string_view>, 12>
    kCities = {{{"GB", "London"},
                {"DE", "Berlin"},
                {"FR", "Paris"},
                {"US", "Boston"},
                {"JP", "Osaka"},
                {"CH", "Zurich"},
                {"CA", "Toronto"},
                {"AU", "Perth"},
                {"SG", "Singapore"},
                {"NL", "Utrecht"},
                {"ES", "Valencia"},
                {"IT", "Turin"}}};

const sys_days kWindowStart = sys_days{year{2023} / January / 1};
constexpr int kWindowDays = 30;

template <typename T, std::size_t N>
const T& pick(const std::array<T, N>& arr, std::mt19937_64& rng) {
  return arr[std::uniform_int_distribution<std::size_t>(0, N - 1)(rng)];
}

std::string hex_string(std::mt19937_64& rng, int n) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s(n, '0');
  for (auto& c : s) c = kHex[rng() & 15];
  return s;
}

std::string uuid_string(std::mt19937_64& rng) {
  std::string s = hex_string(rng, 32);
  s[12] = '4';
  s[16] = "89ab"[rng() & 3];
  return s.substr(0, 8) + "-" + s.substr(8, 4) + "-" + s.substr(12, 4) + "-" +
         s.substr(16, 4) + "-" + s.substr(20, 12);
}

// Replaces one alphanumeric character with a different one of the same kind.
std::string mutate(std::string s, std::mt19937_64& rng) {
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (std::isalnum(static_cast<unsigned char>(s[i]))) positions.push_back(i);
  }
  if (positions.empty()) return s + "X";
  std::size_t pos =
      positions[std::uniform_int_distribution<std::size_t>(0, positions.size() - 1)(rng)];
  char old = s[pos];
  char repl = old;
  while (repl == old) {
    if (std::isdigit(static_cast<unsigned char>(old))) {
      repl = static_cast<char>('0' + rng() % 10);
    } else if (std::isupper(static_cast<unsigned char>(old))) {
      repl = static_cast<char>('A' + rng() % 26);
    } else {
      repl = static_cast<char>('a' + rng() % 26);
    }
  }
  s[pos] = repl;
  return s;
}

struct AccountRef {
  std::size_t bank;
  std::size_t index;
};

int sample_hour(bool anomalous, std::mt19937_64& rng) {
  double night_share = anomalous ? 0.5 : 0.12;
  if (uniform01(rng) < night_share) {
    return std::uniform_int_distribution<int>(0, 23)(rng);
  }
  std::normal_distribution<double> business(13.0, 2.5);
  return std::clamp(static_cast<int>(std::lround(business(rng))), 7, 19);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

void check_field(std::string_view value, std::string_view name) {
  if (value.find_first_of(",\"\r\n") != std::string_view::npos) {
    throw ConfigError("field " + std::string(name) +
                      " contains a CSV delimiter: " + std::string(value));
  }
}

std::string format_amount(Amount a) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld.%02lld",
                static_cast<long long>(a.cents / 100),
                static_cast<long long>(a.cents % 100));
  return buf;
}

class FieldParser {
 public:
  explicit FieldParser(std::size_t line) : line_(line) {}

  [[noreturn]] void fail(std::string_view field, std::string_view why) const {
    throw ParseError("line " + std::to_string(line_) + ", field " +
                     std::string(field) + ": " + std::string(why));
  }

  std::int64_t integer(std::string_view s, std::string_view field) const {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) fail(field, "not an integer");
    return v;
  }

  Amount amount(std::string_view s, std::string_view field) const {
    auto dot = s.find('.');
    std::string_view whole = s.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? "" : s.substr(dot + 1);
    if (whole.empty() || frac.size() > 2 || whole.front() == '-' ||
        whole.front() == '+') {
      fail(field, "expected non-negative amount with at most 2 decimals");
    }
    std::int64_t w = integer(whole, field);
    std::int64_t f = frac.empty() ? 0 : integer(frac, field);
    if (frac.size() == 1) f *= 10;
    return Amount{w * 100 + f};
  }

  sys_days date(std::string_view s, std::string_view field) const {
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    std::string copy(s);
    if (s.size() != 10 ||
        std::sscanf(copy.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
      fail(field, "expected YYYY-MM-DD");
    }
    year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok()) fail(field, "invalid calendar date");
    return sys_days{ymd};
  }

  sys_seconds timestamp(std::string_view s, std::string_view field) const {
    if (s.size() != 20 || s[10] != 'T' || s[19] != 'Z') {
      fail(field, "expected YYYY-MM-DDTHH:MM:SSZ");
    }
    sys_days d = date(s.substr(0, 10), field);
    int hh = 0, mm = 0, ss = 0;
    std::string copy(s.substr(11, 8));
    if (std::sscanf(copy.c_str(), "%2d:%2d:%2d", &hh, &mm, &ss) != 3 || hh > 23 ||
        mm > 59 || ss > 59 || hh < 0 || mm < 0 || ss < 0) {
      fail(field, "invalid time of day");
    }
    return sys_seconds{d} + hours{hh} + minutes{mm} + seconds{ss};
  }

  bool boolean(std::string_view s, std::string_view field) const {
    if (s == "1") return true;
    if (s == "0") return false;
    fail(field, "expected 0 or 1");
  }

 private:
  std::size_t line_;
};

template <typename Row, typename ParseFn>
std::vector<Row> read_csv(std::istream& in, std::string_view header,
                          std::size_t arity, ParseFn parse_row) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw ParseError("unknown header: " + line);
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != arity) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(arity) + " fields, got " +
                       std::to_string(fields.size()));
    }
    rows.push_back(parse_row(fields, FieldParser(line_no)));
  }
  return rows;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open for reading: " + path.string());
  return in;
}

}  // namespace

Amount Amount::from_value(double v) {
  return Amount{static_cast<std::int64_t>(std::llround(v * 100.0))};
}

void SynthConfig::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError(std::string(name) + " must lie in [0, 1]");
    }
  };
  prob(anomaly_rate, "anomaly_rate");
  prob(flag_given_anomaly, "flag_given_anomaly");
  prob(flag_given_normal, "flag_given_normal");
  prob(discrepancy_given_anomaly, "discrepancy_given_anomaly");
  prob(discrepancy_given_normal, "discrepancy_given_normal");
  if (n_banks == 0) throw ConfigError("n_banks must be positive");
  if (accounts_per_bank == 0) throw ConfigError("accounts_per_bank must be positive");
  if (!(flag_given_anomaly > flag_given_normal)) {
    throw ConfigError("flag_given_anomaly must exceed flag_given_normal");
  }
  if (!(discrepancy_given_anomaly > discrepancy_given_normal)) {
    throw ConfigError(
        "discrepancy_given_anomaly must exceed discrepancy_given_normal");
  }
}

std::string bank_id(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "BANK%02zu", index);
  return buf;
}

std::string identity_string(std::string_view account, std::string_view name,
                            std::string_view street,
                            std::string_view country_city_zip) {
  std::string s;
  s.reserve(account.size() + name.size() + street.size() + country_city_zip.size());
  s.append(account).append(name).append(street).append(country_city_zip);
  return s;
}

std::string identity_string(const AccountRecord& a) {
  return identity_string(a.account, a.name, a.street, a.country_city_zip);
}

std::string ordering_identity(const TransactionRecord& t) {
  return identity_string(t.ordering_account, t.ordering_name, t.ordering_street,
                         t.ordering_country_city_zip);
}

std::string beneficiary_identity(const TransactionRecord& t) {
  return identity_string(t.beneficiary_account, t.beneficiary_name,
                         t.beneficiary_street, t.beneficiary_country_city_zip);
}

SyntheticData generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(derive_seed(cfg.seed, "synth"));
  SyntheticData out;

  // Share of accounts flagged / discrepant, sized to the expected per-row
  // draw so the category pools are neither starved nor dominant.
  auto marginal = [&](double anomalous, double normal) {
    return std::clamp(cfg.anomaly_rate * anomalous + (1 - cfg.anomaly_rate) * normal,
                      0.02, 0.5);
  };
  const double flagged_share = marginal(cfg.flag_given_anomaly, cfg.flag_given_normal);
  const double discrepant_share =
      marginal(cfg.discrepancy_given_anomaly, cfg.discrepancy_given_normal);

  // Canonical identities (what Srv sees in transactions) and the bank copies.
  struct Canonical {
    std::string name, street, ccz;
  };
  std::vector<std::vector<Canonical>> canonical(cfg.n_banks);
  std::array<std::array<std::vector<AccountRef>, 2>, 2> pools;  // [flagged][discrepant]

  for (std::size_t b = 0; b < cfg.n_banks; ++b) {
    BankId id = bank_id(b);
    auto& accounts = out.banks[id];
    accounts.reserve(cfg.accounts_per_bank);
    for (std::size_t i = 0; i < cfg.accounts_per_bank; ++i) {
      char acct[32];
      std::snprintf(acct, sizeof(acct), "AC%02zu%07zu", b, i);
      Canonical c;
      c.name = std::string(pick(kFirstNames, rng)) + " " +
               std::string(pick(kLastNames, rng));
      c.street = std::to_string(1 + rng() % 999) + " " +
                 std::string(pick(kStreets, rng)) + " " +
                 std::string(pick(kStreetSuffix, rng));
      const auto& [country, city] = pick(kCities, rng);
      char zip[8];
      std::snprintf(zip, sizeof(zip), "%05u", static_cast<unsigned>(rng() % 100000));
      c.ccz = std::string(country) + " " + std::string(city) + " " + zip;

      bool flagged = uniform01(rng) < flagged_share;
      bool discrepant = uniform01(rng) < discrepant_share;
      AccountRecord rec{id, acct, c.name, c.street, c.ccz,
                        flagged ? std::uniform_int_distribution<int>(1, kMaxFlag)(rng) : 0};
      if (discrepant) {
        switch (rng() % 3) {
          case 0: rec.name = mutate(rec.name, rng); break;
          case 1: rec.street = mutate(rec.street, rng); break;
          default: rec.country_city_zip = mutate(rec.country_city_zip, rng); break;
        }
      }
      accounts.push_back(std::move(rec));
      canonical[b].push_back(std::move(c));
      pools[flagged][discrepant].push_back({b, i});
    }
  }

  auto draw_account = [&](bool flagged, bool discrepant) -> AccountRef {
    const std::vector<AccountRef>* pool = &pools[flagged][discrepant];
    if (pool->empty()) pool = &pools[flagged][!discrepant];
    if (pool->empty()) pool = &pools[!flagged][discrepant];
    if (pool->empty()) pool = &pools[!flagged][!discrepant];
    return (*pool)[std::uniform_int_distribution<std::size_t>(0, pool->size() - 1)(rng)];
  };

  std::vector<BankId> bank_ids;
  for (const auto& [id, _] : out.banks) bank_ids.push_back(id);

  out.transactions.reserve(cfg.n_transactions);
  for (std::size_t t = 0; t < cfg.n_transactions; ++t) {
    const bool anomalous = uniform01(rng) < cfg.anomaly_rate;
    const double pf = anomalous ? cfg.flag_given_anomaly : cfg.flag_given_normal;
    const double pd =
        anomalous ? cfg.discrepancy_given_anomaly : cfg.discrepancy_given_normal;

    bool f = uniform01(rng) < pf;
    bool d = uniform01(rng) < pd;
    AccountRef ord = draw_account(f, d);
    f = uniform01(rng) < pf;
    d = uniform01(rng) < pd;
    AccountRef ben = draw_account(f, d);
    for (int retry = 0; retry < 8 && ben.bank == ord.bank && ben.index == ord.index;
         ++retry) {
      ben = draw_account(f, d);
    }

    TransactionRecord r;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "MSG%09zu", t);
    r.message_id = buf;
    r.uetr = uuid_string(rng);
    r.transaction_reference = "TRF" + hex_string(rng, 12);

    int day_offset = std::uniform_int_distribution<int>(0, kWindowDays - 1)(rng);
    int hour = sample_hour(anomalous, rng);
    int minute = static_cast<int>(rng() % 60);
    int second = static_cast<int>(rng() % 60);
    r.timestamp = sys_seconds{kWindowStart + days{day_offset}} + hours{hour} +
                  minutes{minute} + seconds{second};
    r.settlement_date = kWindowStart + days{day_offset + (uniform01(rng) < 0.3 ? 1 : 0)};

    r.sender = bank_ids[ord.bank];
    r.receiver = bank_ids[ben.bank];
    const Canonical& oc = canonical[ord.bank][ord.index];
    const Canonical& bc = canonical[ben.bank][ben.index];
    r.ordering_account = out.banks[r.sender][ord.index].account;
    r.ordering_name = oc.name;
    r.ordering_street = oc.street;
    r.ordering_country_city_zip = oc.ccz;
    r.beneficiary_account = out.banks[r.receiver][ben.index].account;
    r.beneficiary_name = bc.name;
    r.beneficiary_street = bc.street;
    r.beneficiary_country_city_zip = bc.ccz;

    std::size_t settle_ccy = uniform01(rng) < 0.7
                                 ? ord.bank % kCurrencies.size()
                                 : static_cast<std::size_t>(rng() % kCurrencies.size());
    std::size_t instr_ccy = uniform01(rng) < 0.85
                                ? settle_ccy
                                : static_cast<std::size_t>(rng() % kCurrencies.size());
    std::lognormal_distribution<double> amount(anomalous ? 7.0 : 6.2, 1.1);
    double usd = amount(rng);
    double settled = usd / kUsdRate[settle_ccy];
    r.settlement_currency = kCurrencies[settle_ccy];
    r.settlement_amount = Amount::from_value(settled);
    r.instructed_currency = kCurrencies[instr_ccy];
    r.instructed_amount =
        Amount::from_value(settled * kUsdRate[settle_ccy] / kUsdRate[instr_ccy]);
    r.label = anomalous;
    out.transactions.push_back(std::move(r));
  }
  return out;
}

std::string format_timestamp(sys_seconds t) {
  sys_days d = floor<days>(t);
  hh_mm_ss<seconds> tod{t - d};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%sT%02d:%02d:%02dZ", format_date(d).c_str(),
                static_cast<int>(tod.hours().count()),
                static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()));
  return buf;
}

std::string format_date(sys_days d) {
  year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

void write_transactions(std::ostream& out, std::span<const TransactionRecord> rows) {
  out << kTransactionHeader << '\n';
  for (const auto& r : rows) {
    const std::array<std::pair<std::string_view, const std::string*>, 15> text = {{
        {"MessageId", &r.message_id},
        {"UETR", &r.uetr},
        {"TransactionReference", &r.transaction_reference},
        {"Sender", &r.sender},
        {"Receiver", &r.receiver},
        {"OrderingAccount", &r.ordering_account},
        {"OrderingName", &r.ordering_name},
        {"OrderingStreet", &r.ordering_street},
        {"OrderingCountryCityZip", &r.ordering_country_city_zip},
        {"BeneficiaryAccount", &r.beneficiary_account},
        {"BeneficiaryName", &r.beneficiary_name},
        {"BeneficiaryStreet", &r.beneficiary_street},
        {"BeneficiaryCountryCityZip", &r.beneficiary_country_city_zip},
        {"SettlementCurrency", &r.settlement_currency},
        {"InstructedCurrency", &r.instructed_currency},
    }};
    for (const auto& [name, value] : text) check_field(*value, name);
    if (r.settlement_amount.cents < 0 || r.instructed_amount.cents < 0) {
      throw ConfigError("negative amount in " + r.message_id);
    }
    out << r.message_id << ',' << r.uetr << ',' << r.transaction_reference << ','
        << format_timestamp(r.timestamp) << ',' << r.sender << ',' << r.receiver << ','
        << r.ordering_account << ',' << r.ordering_name << ',' << r.ordering_street
        << ',' << r.ordering_country_city_zip << ',' << r.beneficiary_account << ','
        << r.beneficiary_name << ',' << r.beneficiary_street << ','
        << r.beneficiary_country_city_zip << ',' << format_date(r.settlement_date)
        << ',' << r.settlement_currency << ',' << format_amount(r.settlement_amount)
        << ',' << r.instructed_currency << ',' << format_amount(r.instructed_amount)
        << ',' << (r.label ? '1' : '0') << '\n';
  }
}

std::vector<TransactionRecord> read_transactions(std::istream& in) {
  return read_csv<TransactionRecord>(
      in, kTransactionHeader, 20,
      [](const std::vector<std::string>& f, const FieldParser& p) {
        TransactionRecord r;
        r.message_id = f[0];
        r.uetr = f[1];
        if (r.uetr.size() != 36) p.fail("UETR", "expected 36 characters");
        r.transaction_reference = f[2];
        r.timestamp = p.timestamp(f[3], "Timestamp");
        r.sender = f[4];
        r.receiver = f[5];
        r.ordering_account = f[6];
        r.ordering_name = f[7];
        r.ordering_street = f[8];
        r.ordering_country_city_zip = f[9];
        r.beneficiary_account = f[10];
        r.beneficiary_name = f[11];
        r.beneficiary_street = f[12];
        r.beneficiary_country_city_zip = f[13];
        r.settlement_date = p.date(f[14], "SettlementDate");
        r.settlement_currency = f[15];
        if (r.settlement_currency.size() != 3) {
          p.fail("SettlementCurrency", "expected a 3-letter code");
        }
        r.settlement_amount = p.amount(f[16], "SettlementAmount");
        r.instructed_currency = f[17];
        if (r.instructed_currency.size() != 3) {
          p.fail("InstructedCurrency", "expected a 3-letter code");
        }
        r.instructed_amount = p.amount(f[18], "InstructedAmount");
        r.label = p.boolean(f[19], "Label");
        return r;
      });
}

void write_accounts(std::ostream& out, std::span<const AccountRecord> rows) {
  out << kAccountHeader << '\n';
  for (const auto& r : rows) {
    check_field(r.bank, "Bank");
    check_field(r.account, "Account");
    check_field(r.name, "Name");
    check_field(r.street, "Street");
    check_field(r.country_city_zip, "CountryCityZip");
    out << r.bank << ',' << r.account << ',' << r.name << ',' << r.street << ','
        << r.country_city_zip << ',' << r.flag << '\n';
  }
}

std::vector<AccountRecord> read_accounts(std::istream& in) {
  return read_csv<AccountRecord>(
      in, kAccountHeader, 6, [](const std::vector<std::string>& f, const FieldParser& p) {
        AccountRecord r{f[0], f[1], f[2], f[3], f[4], 0};
        std::int64_t flag = p.integer(f[5], "Flags");
        if (flag < 0 || flag > kMaxFlag) p.fail("Flags", "outside the flag alphabet");
        r.flag = static_cast<int>(flag);
        return r;
      });
}

void write_transactions(const std::filesystem::path& path,
                        std::span<const TransactionRecord> rows) {
  auto out = open_out(path);
  write_transactions(out, rows);
}

std::vector<TransactionRecord> read_transactions(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_transactions(in);
}

void write_accounts(const std::filesystem::path& path,
                    std::span<const AccountRecord> rows) {
  auto out = open_out(path);
  write_accounts(out, rows);
}

std::vector<AccountRecord> read_accounts(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_accounts(in);
}

void write_dataset(const std::filesystem::path& dir, const SyntheticData& data) {
  std::filesystem::create_directories(dir);
  write_transactions(dir / "transactions.csv", data.transactions);
  for (const auto& [id, rows] : data.banks) {
    write_accounts(dir / ("bank_" + id + ".csv"), rows);
  }
}

SyntheticData read_dataset(const std::filesystem::path& dir) {
  SyntheticData data;
  data.transactions = read_transactions(dir / "transactions.csv");
  std::vector<std::filesystem::path> bank_files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    auto name = entry.path().filename().string();
    if (name.starts_with("bank_") && name.ends_with(".csv")) {
      bank_files.push_back(entry.path());
    }
  }
  std::sort(bank_files.begin(), bank_files.end());
  for (const auto& path : bank_files) {
    auto name = path.filename().string();
    BankId id = name.substr(5, name.size() - 9);
    auto rows = read_accounts(path);
    for (const auto& r : rows) {
      if (r.bank != id) {
        throw ParseError(path.string() + ": row for bank " + r.bank +
                         " in file of bank " + id);
      }
    }
    data.banks[id] = std::move(rows);
  }
  return data;
}

}  // namespace starlit::data
