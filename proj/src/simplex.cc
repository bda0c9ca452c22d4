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

#include "starlit/simplex.h"

#include <limits>

#include "starlit/common.h"

namespace starlit::lp {
namespace {

bool has_family(const std::string& label, std::string_view family) {
  return label.size() > family.size() && label.compare(0, family.size(), family) == 0 &&
         label[family.size()] == '[';
}

// Tableau holding B^-1 [A | b] for the current basis.
class Tableau {
 public:
  Tableau(Eigen::MatrixXd t, std::vector<Eigen::Index> basis, double tol)
      : t_(std::move(t)), basis_(std::move(basis)), tol_(tol) {}

  Eigen::Index rows() const { return t_.rows(); }
  Eigen::Index rhs_col() const { return t_.cols() - 1; }

  // Maximizes cost' x over columns flagged in `allowed`. Returns false when
  // the objective is unbounded.
  bool optimize(const Eigen::VectorXd& cost, const std::vector<bool>& allowed,
                int& pivots) {
    constexpr int kMaxPivots = 200000;
    while (pivots < kMaxPivots) {
      // Bland: lowest-index column with positive reduced cost.
      Eigen::Index entering = -1;
      for (Eigen::Index j = 0; j < rhs_col(); ++j) {
        if (!allowed[static_cast<std::size_t>(j)]) continue;
        double reduced = cost(j);
        for (Eigen::Index i = 0; i < rows(); ++i) {
          reduced -= cost(basis_[static_cast<std::size_t>(i)]) * t_(i, j);
        }
        if (reduced > tol_) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return true;

      Eigen::Index leaving = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < rows(); ++i) {
        double a = t_(i, entering);
        if (a <= tol_) continue;
        double ratio = t_(i, rhs_col()) / a;
        if (leaving < 0 || ratio < best_ratio - tol_) {
          best_ratio = ratio;
          leaving = i;
        } else if (ratio <= best_ratio + tol_ &&
                   basis_[static_cast<std::size_t>(i)] <
                       basis_[static_cast<std::size_t>(leaving)]) {
          leaving = i;
        }
      }
      if (leaving < 0) return false;
      pivot(leaving, entering);
      ++pivots;
    }
    throw Error("simplex exceeded pivot limit");
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    t_.row(row) /= t_(row, col);
    for (Eigen::Index i = 0; i < rows(); ++i) {
      if (i == row) continue;
      double factor = t_(i, col);
      if (factor != 0.0) t_.row(i) -= factor * t_.row(row);
    }
    basis_[static_cast<std::size_t>(row)] = col;
  }

  double objective(const Eigen::VectorXd& cost) const {
    double z = 0.0;
    for (Eigen::Index i = 0; i < rows(); ++i) {
      z += cost(basis_[static_cast<std::size_t>(i)]) * t_(i, rhs_col());
    }
    return z;
  }

  Eigen::VectorXd solution(Eigen::Index n) const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < rows(); ++i) {
      Eigen::Index b = basis_[static_cast<std::size_t>(i)];
      if (b < n) x(b) = t_(i, rhs_col());
    }
    return x;
  }

  const Eigen::MatrixXd& data() const { return t_; }
  Eigen::Index basic(Eigen::Index row) const { return basis_[static_cast<std::size_t>(row)]; }

 private:
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
  double tol_;
};

}  // namespace

void LinearProgram::add_ub(const Eigen::RowVectorXd& row, double rhs, std::string label) {
  a_ub.conservativeResize(a_ub.rows() + 1, num_variables());
  a_ub.row(a_ub.rows() - 1) = row;
  b_ub.conservativeResize(b_ub.size() + 1);
  b_ub(b_ub.size() - 1) = rhs;
  ub_labels.push_back(std::move(label));
}

void LinearProgram::add_eq(const Eigen::RowVectorXd& row, double rhs, std::string label) {
  a_eq.conservativeResize(a_eq.rows() + 1, num_variables());
  a_eq.row(a_eq.rows() - 1) = row;
  b_eq.conservativeResize(b_eq.size() + 1);
  b_eq(b_eq.size() - 1) = rhs;
  eq_labels.push_back(std::move(label));
}

std::size_t LinearProgram::count_ub(std::string_view family) const {
  std::size_t n = 0;
  for (const auto& l : ub_labels) n += has_family(l, family);
  return n;
}

std::size_t LinearProgram::count_eq(std::string_view family) const {
  std::size_t n = 0;
  for (const auto& l : eq_labels) n += has_family(l, family);
  return n;
}

LpResult solve(const LinearProgram& lp, double tolerance) {
  const Eigen::Index n = lp.num_variables();
  const Eigen::Index m_ub = lp.a_ub.rows();
  const Eigen::Index m_eq = lp.a_eq.rows();
  const Eigen::Index m = m_ub + m_eq;

  // One slack/surplus column per inequality; one artificial per equality and
  // per inequality whose right-hand side is negative.
  Eigen::Index n_art = m_eq;
  for (Eigen::Index i = 0; i < m_ub; ++i) n_art += lp.b_ub(i) < 0;
  const Eigen::Index slack0 = n;
  const Eigen::Index art0 = n + m_ub;
  const Eigen::Index cols = art0 + n_art;

  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, cols + 1);
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  Eigen::Index next_art = art0;
  for (Eigen::Index i = 0; i < m_ub; ++i) {
    double sign = lp.b_ub(i) < 0 ? -1.0 : 1.0;
    t.row(i).head(n) = sign * lp.a_ub.row(i);
    t(i, slack0 + i) = sign;
    t(i, cols) = sign * lp.b_ub(i);
    if (sign > 0) {
      basis[static_cast<std::size_t>(i)] = slack0 + i;
    } else {
      t(i, next_art) = 1.0;
      basis[static_cast<std::size_t>(i)] = next_art++;
    }
  }
  for (Eigen::Index e = 0; e < m_eq; ++e) {
    Eigen::Index i = m_ub + e;
    double sign = lp.b_eq(e) < 0 ? -1.0 : 1.0;
    t.row(i).head(n) = sign * lp.a_eq.row(e);
    t(i, cols) = sign * lp.b_eq(e);
    t(i, next_art) = 1.0;
    basis[static_cast<std::size_t>(i)] = next_art++;
  }

  Tableau tab(std::move(t), std::move(basis), tolerance);
  LpResult result;
  std::vector<bool> allowed(static_cast<std::size_t>(cols), true);

  if (n_art > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(cols);
    phase1.tail(n_art).setConstant(-1.0);
    tab.optimize(phase1, allowed, result.pivots);
    if (tab.objective(phase1) < -1e-7) {
      result.status = LpStatus::kInfeasible;
      return result;
    }
    // Drive artificials out of the basis where a real column can replace them.
    for (Eigen::Index i = 0; i < tab.rows(); ++i) {
      if (tab.basic(i) < art0) continue;
      for (Eigen::Index j = 0; j < art0; ++j) {
        if (std::abs(tab.data()(i, j)) > tolerance) {
          tab.pivot(i, j);
          ++result.pivots;
          break;
        }
      }
    }
    for (Eigen::Index j = art0; j < cols; ++j) allowed[static_cast<std::size_t>(j)] = false;
  }

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols);
  cost.head(n) = lp.objective;
  if (!tab.optimize(cost, allowed, result.pivots)) {
    result.status = LpStatus::kUnbounded;
    return result;
  }
  result.status = LpStatus::kOptimal;
  result.x = tab.solution(n);
  result.objective = lp.objective.dot(result.x);
  return result;
}

}  // namespace starlit::lp
