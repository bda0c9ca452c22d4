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

#ifndef STARLIT_TESTS_GAME_ORACLE_H_
#define STARLIT_TESTS_GAME_ORACLE_H_

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "starlit/game.h"

namespace starlit::testing {

// Expected adversary error for the binary channel with flip probabilities
// p = f(1|0) and q = f(0|1) under a Hamming metric, evaluated from scratch.
inline double binary_privacy(double p, double q, double pi0, double pi1) {
  // Report 0: guessing 0 errs on truth 1, guessing 1 errs on truth 0.
  double r0 = std::min(pi1 * q, pi0 * (1 - p));
  double r1 = std::min(pi1 * (1 - q), pi0 * p);
  return r0 + r1;
}

struct GridOptimum {
  double privacy = -1;  // -1 when no grid point is feasible
  double p = 0, q = 0;
};

// Exhaustive search over (p, q) on a square grid with the given step.
inline GridOptimum grid_optimum(const game::GameSpec& spec, double step) {
  const double pi0 = spec.prior(0), pi1 = spec.prior(1);
  const double ratio = std::exp(spec.epsilon);
  const int n = static_cast<int>(std::lround(1.0 / step));
  const double slack = 1e-12;
  auto dp_ok = [&](double a, double b) {
    return std::isinf(ratio) || (a <= ratio * b + slack && b <= ratio * a + slack);
  };
  GridOptimum best;
  for (int i = 0; i <= n; ++i) {
    double p = i * step;
    if (p > spec.caps(0, 1) + slack || 1 - p > spec.caps(0, 0) + slack) continue;
    for (int j = 0; j <= n; ++j) {
      double q = j * step;
      if (q > spec.caps(1, 0) + slack || 1 - q > spec.caps(1, 1) + slack) continue;
      if (!dp_ok(1 - p, q) || !dp_ok(p, 1 - q)) continue;
      double v = binary_privacy(p, q, pi0, pi1);
      if (v > best.privacy) best = {v, p, q};
    }
  }
  return best;
}

}  // namespace starlit::testing

#endif  // STARLIT_TESTS_GAME_ORACLE_H_
