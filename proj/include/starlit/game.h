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

#ifndef STARLIT_GAME_H_
#define STARLIT_GAME_H_

#include <Eigen/Dense>

#include "starlit/ldp.h"
#include "starlit/simplex.h"

namespace starlit::game {

// Inputs of the single-flag Stackelberg game: flag profile, the privacy
// metric delta(v_hat, v) (rows: estimate, cols: truth), per-entry caps on
// f(v'|v) (rows: truth v, cols: report v'), and the LDP budget.
struct GameSpec {
  Eigen::VectorXd prior;
  Eigen::MatrixXd privacy_metric;
  Eigen::MatrixXd caps;
  double epsilon = ldp::kInfinity;
  bool hamming = false;

  int k() const { return static_cast<int>(prior.size()); }
  // Throws ConfigError on shape mismatch, a prior not summing to 1 within
  // 1e-12, negative metric entries, caps outside [0, 1], or a nonzero
  // diagonal on a Hamming-tagged metric.
  void validate() const;

  // Hamming metric, caps of 1 everywhere.
  static GameSpec with_hamming(Eigen::VectorXd prior, double epsilon);
};

Eigen::MatrixXd hamming_metric(int k);

struct GameSolution {
  ldp::TransformationMatrix mechanism;
  Eigen::VectorXd x;
  double expected_privacy = 0.0;
};

// Estimate minimizing posterior expected delta after observing `observed`.
// Ties go to the smallest index. Throws ConfigError if the observation has
// zero probability under the prior.
int adversary_best_response(const ldp::TransformationMatrix& m,
                            const Eigen::VectorXd& prior,
                            const Eigen::MatrixXd& privacy_metric, int observed);

// Sum over reports v' of min over estimates of sum_v prior(v) f(v'|v) delta.
double expected_privacy(const ldp::TransformationMatrix& m, const Eigen::VectorXd& prior,
                        const Eigen::MatrixXd& privacy_metric);

// Variable layout of the mechanism LP.
inline Eigen::Index f_index(int k, int truth, int report) { return truth * k + report; }
inline Eigen::Index x_index(int k, int report) { return k * k + report; }

// Constraint families (label prefixes): "privacy", "cap", "stochastic", "dp".
lp::LinearProgram build_lp(const GameSpec& spec);

// Same program with the per-entry caps replaced by one expected accuracy
// loss bound ("accuracy"). `accuracy_loss(v', v)` is the cost of reporting
// v' for truth v. Throws ConfigError if al_max < 0 or any loss is negative.
lp::LinearProgram build_lp_accuracy_variant(const GameSpec& spec,
                                            const Eigen::MatrixXd& accuracy_loss,
                                            double al_max);

// Throws InfeasibleError naming the row when some row of caps sums below 1,
// and InfeasibleError when the LP has no feasible point otherwise.
GameSolution solve_optimal_mechanism(const GameSpec& spec);
GameSolution solve_accuracy_variant(const GameSpec& spec,
                                    const Eigen::MatrixXd& accuracy_loss,
                                    double al_max);

// Caps admitting the RR(epsilon) flips (off-diagonal = RR flip, diagonal 1).
Eigen::MatrixXd rr_caps(double epsilon, int k = 2);
// Binary caps limiting one flip direction to `factor` times the RR flip
// probability; every other entry is uncapped.
Eigen::MatrixXd reduced_flip_caps(double epsilon, int from, int to, double factor);

}  // namespace starlit::game

#endif  // STARLIT_GAME_H_
