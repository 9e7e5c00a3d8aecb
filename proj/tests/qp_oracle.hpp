// Copyright 2026 The avac Authors
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

#pragma once

// Exact solver for tiny SVM duals by active-set enumeration. Test-only; it
// shares nothing with the SMO code path beyond the kernel formula.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

namespace avac::testing {

struct QpSolution {
  std::vector<double> alpha;
  double objective = -std::numeric_limits<double>::infinity();
  double bias = 0.0;
};

inline double rbf(const std::vector<double>& a, const std::vector<double>& b, double gamma) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-gamma * d);
}

// max sum(a) - 1/2 a'Qa  s.t. 0 <= a <= C, y'a = 0; Q_ij = y_i y_j K_ij.
// Every assignment of each variable to {0, C, free} is tried; the free
// block is solved from its stationarity system and kept if feasible.
inline QpSolution brute_force_svm_dual(const std::vector<std::vector<double>>& x, const std::vector<int>& y, double C,
                                       double gamma) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd K(n, n), Q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      K(i, j) = rbf(x[i], x[j], gamma);
      Q(i, j) = y[i] * y[j] * K(i, j);
    }
  QpSolution best;
  int combos = 1;
  for (int i = 0; i < n; ++i) combos *= 3;
  for (int code = 0; code < combos; ++code) {
    std::vector<int> state(n);
    int c = code;
    for (int i = 0; i < n; ++i) {
      state[i] = c % 3;  // 0: at zero, 1: at C, 2: free
      c /= 3;
    }
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    std::vector<int> free_idx;
    for (int i = 0; i < n; ++i) {
      if (state[i] == 1) alpha(i) = C;
      if (state[i] == 2) free_idx.push_back(i);
    }
    const int m = static_cast<int>(free_idx.size());
    if (m == 0) {
      double eq = 0.0;
      for (int i = 0; i < n; ++i) eq += y[i] * alpha(i);
      if (std::abs(eq) > 1e-12) continue;
    } else {
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m + 1, m + 1);
      Eigen::VectorXd rhs(m + 1);
      Eigen::VectorXd qa = Q * alpha;  // contribution of bound variables
      double ya = 0.0;
      for (int i = 0; i < n; ++i) ya += y[i] * alpha(i);
      for (int r = 0; r < m; ++r) {
        for (int s = 0; s < m; ++s) A(r, s) = Q(free_idx[r], free_idx[s]);
        A(r, m) = y[free_idx[r]];
        A(m, r) = y[free_idx[r]];
        rhs(r) = 1.0 - qa(free_idx[r]);
      }
      rhs(m) = -ya;
      Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
      if (!lu.isInvertible()) continue;
      Eigen::VectorXd sol = lu.solve(rhs);
      bool feasible = true;
      for (int r = 0; r < m; ++r) {
        double v = sol(r);
        if (v < -1e-10 || v > C + 1e-10) feasible = false;
        alpha(free_idx[r]) = std::clamp(v, 0.0, C);
      }
      if (!feasible) continue;
    }
    const double obj = alpha.sum() - 0.5 * alpha.dot(Q * alpha);
    if (obj > best.objective) {
      best.objective = obj;
      best.alpha.assign(alpha.data(), alpha.data() + n);
    }
  }
  // Bias from free variables (midpoint of the feasible interval otherwise).
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  int free_count = 0;
  for (int i = 0; i < n; ++i) {
    double f = 0.0;
    for (int j = 0; j < n; ++j) f += best.alpha[j] * y[j] * K(j, i);
    double b = y[i] - f;
    const double a = best.alpha[i];
    if (a > 1e-9 && a < C - 1e-9) {
      free_sum += b;
      ++free_count;
    } else if ((a <= 1e-9) == (y[i] > 0)) {
      lo = std::max(lo, b);
    } else {
      hi = std::min(hi, b);
    }
  }
  if (free_count)
    best.bias = free_sum / free_count;
  else if (std::isfinite(lo) && std::isfinite(hi))
    best.bias = 0.5 * (lo + hi);
  else
    best.bias = std::isfinite(lo) ? lo : hi;
  return best;
}

}  // namespace avac::testing
