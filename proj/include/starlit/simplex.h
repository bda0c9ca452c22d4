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

#ifndef STARLIT_SIMPLEX_H_
#define STARLIT_SIMPLEX_H_

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace starlit::lp {

// maximize  objective' x
// s.t.      a_ub x <= b_ub,  a_eq x == b_eq,  x >= 0
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd a_ub;
  Eigen::VectorXd b_ub;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  // One label per inequality / equality row, used for diagnostics and for
  // counting constraint families.
  std::vector<std::string> ub_labels;
  std::vector<std::string> eq_labels;

  Eigen::Index num_variables() const { return objective.size(); }
  // Appends a row; the coefficient vector must have num_variables() entries.
  void add_ub(const Eigen::RowVectorXd& row, double rhs, std::string label);
  void add_eq(const Eigen::RowVectorXd& row, double rhs, std::string label);
  std::size_t count_ub(std::string_view family) const;
  std::size_t count_eq(std::string_view family) const;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  int pivots = 0;
};

// Dense two-phase primal simplex with Bland's rule; pivots below `tolerance`
// are treated as zero.
LpResult solve(const LinearProgram& lp, double tolerance = 1e-9);

}  // namespace starlit::lp

#endif  // STARLIT_SIMPLEX_H_
