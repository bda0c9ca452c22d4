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

#ifndef STARLIT_LDP_H_
#define STARLIT_LDP_H_

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace starlit::ldp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Row-stochastic k x k channel: entry (i, j) is the probability of reporting
// j when the true value is i.
class TransformationMatrix {
 public:
  // Validates: square, k >= 2, entries in [0, 1], rows sum to 1 within 1e-12.
  explicit TransformationMatrix(Eigen::MatrixXd probabilities);

  int k() const { return static_cast<int>(p_.rows()); }
  double operator()(int truth, int reported) const { return p_(truth, reported); }
  const Eigen::MatrixXd& probabilities() const { return p_; }

  bool operator==(const TransformationMatrix& other) const { return p_ == other.p_; }

 private:
  Eigen::MatrixXd p_;
};

// Closed-form randomized-response channel for alphabet size k. Stable for
// large epsilon; epsilon = +inf yields the identity.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> rr_probabilities(Scalar epsilon,
                                                                       int k) {
  using std::exp;
  using std::isinf;
  Scalar off = isinf(epsilon) ? Scalar(0)
                              : exp(-epsilon) / (Scalar(1) + Scalar(k - 1) * exp(-epsilon));
  Scalar diag = isinf(epsilon) ? Scalar(1) : Scalar(1) / (Scalar(1) + Scalar(k - 1) * exp(-epsilon));
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> p =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Constant(k, k, off);
  p.diagonal().setConstant(diag);
  return p;
}

// Binary Laplace-then-threshold(0.5) channel.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> laplace_probabilities(Scalar epsilon) {
  using std::exp;
  Scalar flip = Scalar(0.5) * exp(-epsilon / Scalar(2));
  Eigen::Matrix<Scalar, 2, 2> p;
  p << Scalar(1) - flip, flip, flip, Scalar(1) - flip;
  return p;
}

// Throws ConfigError for epsilon < 0 (or NaN) or k < 2.
TransformationMatrix rr_matrix(double epsilon, int k = 2);
// Throws ConfigError for epsilon < 0 or k != 2.
TransformationMatrix laplace_matrix(double epsilon, int k = 2);
TransformationMatrix identity_mechanism(int k = 2);

// Tightest epsilon the channel satisfies: max over columns of
// ln(max_i p(i,j) / min_i p(i,j)). All-zero columns contribute 0; a zero
// next to a nonzero gives +inf.
double ldp_epsilon(const TransformationMatrix& m);

// Draws each output independently from the row of its input.
// Throws ConfigError on a value outside [0, k).
std::vector<int> apply_mechanism(const TransformationMatrix& m,
                                 std::span<const int> values, std::uint64_t seed);

// k lines of k comma-separated probabilities, full round-trip precision.
std::string to_csv(const TransformationMatrix& m);
TransformationMatrix from_csv(const std::string& text);

}  // namespace starlit::ldp

#endif  // STARLIT_LDP_H_
