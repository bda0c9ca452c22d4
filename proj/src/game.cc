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

#include "starlit/game.h"

#include <cmath>
#include <string>

#include "starlit/common.h"

namespace starlit::game {
namespace {

std::string label(std::string_view family, std::initializer_list<std::pair<const char*, int>> idx) {
  std::string s(family);
  s.push_back('[');
  bool first = true;
  for (const auto& [name, value] : idx) {
    if (!first) s.push_back(',');
    first = false;
    s.append(name).push_back('=');
    s.append(std::to_string(value));
  }
  s.push_back(']');
  return s;
}

// Families shared by both program variants: privacy, stochastic, dp.
lp::LinearProgram base_program(const GameSpec& spec) {
  const int k = spec.k();
  lp::LinearProgram lp;
  lp.objective = Eigen::VectorXd::Zero(k * k + k);
  lp.objective.tail(k).setOnes();
  lp.a_ub.resize(0, lp.num_variables());
  lp.a_eq.resize(0, lp.num_variables());

  for (int report = 0; report < k; ++report) {
    for (int estimate = 0; estimate < k; ++estimate) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(lp.num_variables());
      row(x_index(k, report)) = 1.0;
      for (int truth = 0; truth < k; ++truth) {
        row(f_index(k, truth, report)) =
            -spec.prior(truth) * spec.privacy_metric(estimate, truth);
      }
      lp.add_ub(row, 0.0, label("privacy", {{"report", report}, {"estimate", estimate}}));
    }
  }
  for (int truth = 0; truth < k; ++truth) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(lp.num_variables());
    for (int report = 0; report < k; ++report) row(f_index(k, truth, report)) = 1.0;
    lp.add_eq(row, 1.0, label("stochastic", {{"truth", truth}}));
  }
  const double ratio = std::exp(spec.epsilon);
  if (!std::isinf(ratio)) {
    for (int report = 0; report < k; ++report) {
      for (int v1 = 0; v1 < k; ++v1) {
        for (int v2 = 0; v2 < k; ++v2) {
          if (v1 == v2) continue;
          Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(lp.num_variables());
          row(f_index(k, v1, report)) = 1.0;
          row(f_index(k, v2, report)) = -ratio;
          lp.add_ub(row, 0.0, label("dp", {{"report", report}, {"v1", v1}, {"v2", v2}}));
        }
      }
    }
  }
  return lp;
}

GameSolution extract(const GameSpec& spec, const lp::LinearProgram& lp) {
  const int k = spec.k();
  lp::LpResult r = lp::solve(lp);
  if (r.status == lp::LpStatus::kInfeasible) {
    throw InfeasibleError("mechanism LP is infeasible under the given caps and epsilon");
  }
  if (r.status != lp::LpStatus::kOptimal) throw Error("mechanism LP did not converge");

  Eigen::MatrixXd f(k, k);
  for (int truth = 0; truth < k; ++truth) {
    for (int report = 0; report < k; ++report) {
      f(truth, report) = std::clamp(r.x(f_index(k, truth, report)), 0.0, 1.0);
    }
    f.row(truth) /= f.row(truth).sum();
  }
  ldp::TransformationMatrix mech(std::move(f));
  Eigen::VectorXd x(k);
  for (int report = 0; report < k; ++report) {
    double best = ldp::kInfinity;
    for (int estimate = 0; estimate < k; ++estimate) {
      double v = 0.0;
      for (int truth = 0; truth < k; ++truth) {
        v += spec.prior(truth) * mech(truth, report) * spec.privacy_metric(estimate, truth);
      }
      best = std::min(best, v);
    }
    x(report) = best;
  }
  double total = x.sum();
  return GameSolution{std::move(mech), std::move(x), total};
}

}  // namespace

Eigen::MatrixXd hamming_metric(int k) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Ones(k, k);
  d.diagonal().setZero();
  return d;
}

void GameSpec::validate() const {
  const int n = k();
  if (n < 2) throw ConfigError("game alphabet must have at least 2 values");
  if (privacy_metric.rows() != n || privacy_metric.cols() != n) {
    throw ConfigError("privacy metric must be k x k");
  }
  if (caps.rows() != n || caps.cols() != n) throw ConfigError("caps must be k x k");
  if ((prior.array() < 0).any() || std::abs(prior.sum() - 1.0) > 1e-12) {
    throw ConfigError("prior must be a probability vector");
  }
  if ((privacy_metric.array() < 0).any()) {
    throw ConfigError("privacy metric entries must be non-negative");
  }
  if ((caps.array() < 0).any() || (caps.array() > 1).any()) {
    throw ConfigError("caps must lie in [0, 1]");
  }
  if (hamming && privacy_metric.diagonal().cwiseAbs().maxCoeff() != 0.0) {
    throw ConfigError("hamming metric must have a zero diagonal");
  }
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be non-negative");
}

GameSpec GameSpec::with_hamming(Eigen::VectorXd prior, double epsilon) {
  const int k = static_cast<int>(prior.size());
  return GameSpec{std::move(prior), hamming_metric(k), Eigen::MatrixXd::Ones(k, k), epsilon,
                  true};
}

int adversary_best_response(const ldp::TransformationMatrix& m,
                            const Eigen::VectorXd& prior,
                            const Eigen::MatrixXd& privacy_metric, int observed) {
  const int k = m.k();
  if (observed < 0 || observed >= k) throw ConfigError("observation outside alphabet");
  double mass = 0.0;
  for (int v = 0; v < k; ++v) mass += prior(v) * m(v, observed);
  if (mass <= 0.0) {
    throw ConfigError("observation " + std::to_string(observed) +
                      " has zero probability under the prior");
  }
  auto cost = [&](int estimate) {
    double value = 0.0;
    for (int v = 0; v < k; ++v) value += prior(v) * m(v, observed) * privacy_metric(estimate, v);
    return value;
  };
  int best = 0;
  double best_value = cost(0);
  for (int estimate = 1; estimate < k; ++estimate) {
    double value = cost(estimate);
    // Relative slack keeps the smallest-index tie-break stable under rescaling.
    if (value < best_value - 1e-12 * std::max(1.0, std::abs(best_value))) {
      best_value = value;
      best = estimate;
    }
  }
  return best;
}

double expected_privacy(const ldp::TransformationMatrix& m, const Eigen::VectorXd& prior,
                        const Eigen::MatrixXd& privacy_metric) {
  const int k = m.k();
  double total = 0.0;
  for (int report = 0; report < k; ++report) {
    double best = ldp::kInfinity;
    for (int estimate = 0; estimate < k; ++estimate) {
      double v = 0.0;
      for (int truth = 0; truth < k; ++truth) {
        v += prior(truth) * m(truth, report) * privacy_metric(estimate, truth);
      }
      best = std::min(best, v);
    }
    total += best;
  }
  return total;
}

lp::LinearProgram build_lp(const GameSpec& spec) {
  spec.validate();
  const int k = spec.k();
  lp::LinearProgram lp = base_program(spec);
  for (int truth = 0; truth < k; ++truth) {
    for (int report = 0; report < k; ++report) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(lp.num_variables());
      row(f_index(k, truth, report)) = 1.0;
      lp.add_ub(row, spec.caps(truth, report),
                label("cap", {{"truth", truth}, {"report", report}}));
    }
  }
  return lp;
}

lp::LinearProgram build_lp_accuracy_variant(const GameSpec& spec,
                                            const Eigen::MatrixXd& accuracy_loss,
                                            double al_max) {
  spec.validate();
  const int k = spec.k();
  if (!(al_max >= 0.0)) throw ConfigError("accuracy loss bound must be non-negative");
  if (accuracy_loss.rows() != k || accuracy_loss.cols() != k) {
    throw ConfigError("accuracy loss matrix must be k x k");
  }
  if ((accuracy_loss.array() < 0).any()) {
    throw ConfigError("accuracy loss entries must be non-negative");
  }
  lp::LinearProgram lp = base_program(spec);
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(lp.num_variables());
  for (int truth = 0; truth < k; ++truth) {
    for (int report = 0; report < k; ++report) {
      row(f_index(k, truth, report)) = spec.prior(truth) * accuracy_loss(report, truth);
    }
  }
  lp.add_ub(row, al_max, "accuracy[total]");
  return lp;
}

GameSolution solve_optimal_mechanism(const GameSpec& spec) {
  spec.validate();
  for (int truth = 0; truth < spec.k(); ++truth) {
    double s = spec.caps.row(truth).sum();
    if (s < 1.0) {
      throw InfeasibleError("caps row " + std::to_string(truth) + " sums to " +
                            std::to_string(s) + " < 1");
    }
  }
  return extract(spec, build_lp(spec));
}

GameSolution solve_accuracy_variant(const GameSpec& spec,
                                    const Eigen::MatrixXd& accuracy_loss, double al_max) {
  return extract(spec, build_lp_accuracy_variant(spec, accuracy_loss, al_max));
}

Eigen::MatrixXd rr_caps(double epsilon, int k) {
  Eigen::MatrixXd caps = ldp::rr_probabilities(epsilon, k);
  caps.diagonal().setOnes();
  return caps;
}

Eigen::MatrixXd reduced_flip_caps(double epsilon, int from, int to, double factor) {
  if (from == to || from < 0 || from > 1 || to < 0 || to > 1) {
    throw ConfigError("reduced flip caps need a binary flip direction");
  }
  Eigen::MatrixXd caps = Eigen::MatrixXd::Ones(2, 2);
  caps(from, to) = factor * ldp::rr_probabilities(epsilon, 2)(from, to);
  return caps;
}

}  // namespace starlit::game
