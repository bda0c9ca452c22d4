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

#include "starlit/ldp.h"

#include <algorithm>
#include <charconv>
#include <random>
#include <sstream>

#include "starlit/common.h"

namespace starlit::ldp {
namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be non-negative");
}

}  // namespace

TransformationMatrix::TransformationMatrix(Eigen::MatrixXd probabilities)
    : p_(std::move(probabilities)) {
  if (p_.rows() != p_.cols() || p_.rows() < 2) {
    throw ConfigError("transformation matrix must be square with k >= 2");
  }
  for (Eigen::Index i = 0; i < p_.rows(); ++i) {
    for (Eigen::Index j = 0; j < p_.cols(); ++j) {
      if (!(p_(i, j) >= 0.0 && p_(i, j) <= 1.0)) {
        throw ConfigError("transformation matrix entry outside [0, 1]");
      }
    }
    if (std::abs(p_.row(i).sum() - 1.0) > 1e-12) {
      throw ConfigError("transformation matrix row " + std::to_string(i) +
                        " does not sum to 1");
    }
  }
}

TransformationMatrix rr_matrix(double epsilon, int k) {
  check_epsilon(epsilon);
  if (k < 2) throw ConfigError("alphabet size must be at least 2");
  return TransformationMatrix(rr_probabilities(epsilon, k));
}

TransformationMatrix laplace_matrix(double epsilon, int k) {
  check_epsilon(epsilon);
  if (k != 2) {
    throw ConfigError("laplace mechanism supports only a binary alphabet, got k=" +
                      std::to_string(k));
  }
  return TransformationMatrix(Eigen::MatrixXd(laplace_probabilities(epsilon)));
}

TransformationMatrix identity_mechanism(int k) {
  return TransformationMatrix(Eigen::MatrixXd::Identity(k, k));
}

double ldp_epsilon(const TransformationMatrix& m) {
  const auto& p = m.probabilities();
  double eps = 0.0;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    double hi = p.col(j).maxCoeff();
    double lo = p.col(j).minCoeff();
    if (hi == 0.0) continue;
    if (lo == 0.0) return kInfinity;
    eps = std::max(eps, std::log(hi / lo));
  }
  return eps;
}

std::vector<int> apply_mechanism(const TransformationMatrix& m,
                                 std::span<const int> values, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto& p = m.probabilities();
  const int k = m.k();
  std::vector<int> out;
  out.reserve(values.size());
  for (int v : values) {
    if (v < 0 || v >= k) {
      throw ConfigError("value " + std::to_string(v) + " outside alphabet of size " +
                        std::to_string(k));
    }
    double u = uniform01(rng);
    int chosen = k - 1;
    double acc = 0.0;
    for (int j = 0; j < k; ++j) {
      acc += p(v, j);
      if (u < acc) {
        chosen = j;
        break;
      }
    }
    // Never report a zero-probability symbol through rounding in the tail.
    while (p(v, chosen) == 0.0 && chosen > 0) --chosen;
    out.push_back(chosen);
  }
  return out;
}

std::string to_csv(const TransformationMatrix& m) {
  std::string out;
  char buf[64];
  for (int i = 0; i < m.k(); ++i) {
    for (int j = 0; j < m.k(); ++j) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), m(i, j));
      if (j) out.push_back(',');
      out.append(buf, end);
    }
    out.push_back('\n');
  }
  return out;
}

TransformationMatrix from_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (start <= line.size()) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) comma = line.size();
      double v = 0;
      auto [p, ec] = std::from_chars(line.data() + start, line.data() + comma, v);
      if (ec != std::errc{} || p != line.data() + comma) {
        throw ParseError("mechanism CSV: bad number on row " +
                         std::to_string(rows.size() + 1));
      }
      row.push_back(v);
      start = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  const auto k = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd p(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != k) {
      throw ParseError("mechanism CSV: row " + std::to_string(i + 1) + " has " +
                       std::to_string(rows[i].size()) + " entries, expected " +
                       std::to_string(k));
    }
    for (Eigen::Index j = 0; j < k; ++j) p(i, j) = rows[i][j];
  }
  return TransformationMatrix(std::move(p));
}

}  // namespace starlit::ldp
