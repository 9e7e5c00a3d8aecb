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

// Linear prediction: Levinson-Durbin, LPC cepstrum and line spectral pairs.
//
// Coefficients follow the predictor convention x[n] ~ sum_k a_k x[n-k], so the
// inverse filter is A(z) = 1 - sum_k a_k z^-k.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "avac/error.hpp"

namespace avac {

struct LpcResult {
  std::vector<double> coeffs;  // a_1..a_p
  double gain = 0.0;           // RMS of the prediction residual
};

// Biased autocorrelation r[k] = (1/N) sum x[n] x[n+k], k = 0..max_lag.
inline std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag) {
  std::vector<double> r(max_lag + 1, 0.0);
  const std::size_t n = x.size();
  for (std::size_t k = 0; k <= max_lag && k < n; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) acc += x[i] * x[i + k];
    r[k] = acc / static_cast<double>(n);
  }
  return r;
}

// Solves the normal equations for `order` predictor coefficients. The
// recursion stops early (higher coefficients stay zero) if the residual
// collapses or a reflection coefficient reaches the unit circle.
inline LpcResult levinson_durbin(std::span<const double> r, std::size_t order) {
  LpcResult out;
  out.coeffs.assign(order, 0.0);
  if (r.empty() || !(r[0] > 0.0)) return out;
  std::vector<double> a(order + 1, 0.0), prev(order + 1, 0.0);
  double err = r[0];
  for (std::size_t i = 1; i <= order && i < r.size(); ++i) {
    double acc = r[i];
    for (std::size_t j = 1; j < i; ++j) acc -= a[j] * r[i - j];
    const double k = acc / err;
    if (!(std::abs(k) < 1.0 - 1e-12)) break;
    prev = a;
    a[i] = k;
    for (std::size_t j = 1; j < i; ++j) a[j] = prev[j] - k * prev[i - j];
    err *= (1.0 - k * k);
    if (!(err > r[0] * 1e-15)) break;
  }
  std::copy(a.begin() + 1, a.end(), out.coeffs.begin());
  out.gain = std::sqrt(std::max(err, 0.0));
  return out;
}

inline LpcResult lpc(std::span<const double> frame, std::size_t order = 12) {
  if (order < 1) throw Error(ErrorCode::kInvalidArgument, "LPC order must be at least 1");
  auto r = autocorrelation(frame, order);
  if (!(r[0] > 0.0)) return LpcResult{std::vector<double>(order, 0.0), 0.0};
  // Tiny white-noise floor keeps the Toeplitz system positive definite for
  // pure tones.
  r[0] *= 1.0 + 1e-9;
  return levinson_durbin(r, order);
}

// c_n = a_n + sum_{k=1}^{n-1} (k/n) c_k a_{n-k}, n = 1..num_ceps.
inline std::vector<double> lpcc(std::span<const double> coeffs, double /*gain*/, std::size_t num_ceps = 12) {
  std::vector<double> c(num_ceps + 1, 0.0);
  const std::size_t p = coeffs.size();
  auto a = [&](std::size_t n) { return (n >= 1 && n <= p) ? coeffs[n - 1] : 0.0; };
  for (std::size_t n = 1; n <= num_ceps; ++n) {
    double acc = a(n);
    for (std::size_t k = 1; k < n; ++k)
      acc += (static_cast<double>(k) / static_cast<double>(n)) * c[k] * a(n - k);
    c[n] = acc;
  }
  return {c.begin() + 1, c.end()};
}

namespace lsp_detail {

// Evaluates sum_{k=0}^{m} t[k] T_k(x) by Clenshaw's recurrence.
inline double chebyshev_sum(std::span<const double> t, double x) {
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t k = t.size(); k-- > 1;) {
    double b0 = 2.0 * x * b1 - b2 + t[k];
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + t[0];
}

// Chebyshev coefficients of the symmetric half of a palindromic polynomial
// with coefficients g_0..g_{2m}: e^{jm w} G(e^{jw}) = g_m + 2 sum g_{m-k} cos(k w).
inline std::vector<double> symmetric_to_chebyshev(std::span<const double> g) {
  const std::size_t m = (g.size() - 1) / 2;
  std::vector<double> t(m + 1);
  t[0] = g[m];
  for (std::size_t k = 1; k <= m; ++k) t[k] = 2.0 * g[m - k];
  return t;
}

}  // namespace lsp_detail

// Line spectral frequencies in (0, pi), strictly increasing, alternating
// between the roots of P(z) = A(z) + z^-(p+1) A(1/z) and
// Q(z) = A(z) - z^-(p+1) A(1/z). Requires even order and minimum-phase A(z).
inline std::vector<double> lsp(std::span<const double> coeffs, std::size_t grid_points = 2048,
                               double tolerance_rad = 1e-8) {
  const std::size_t p = coeffs.size();
  if (p == 0 || p % 2 != 0) throw Error(ErrorCode::kInvalidArgument, "LSP order must be even and positive");
  std::vector<double> alpha(p + 1);
  alpha[0] = 1.0;
  for (std::size_t k = 1; k <= p; ++k) alpha[k] = -coeffs[k - 1];

  // P and Q have degree p+1; deflate their trivial roots at z=-1 and z=+1.
  std::vector<double> pz(p + 2), qz(p + 2);
  for (std::size_t k = 0; k <= p + 1; ++k) {
    double fwd = k <= p ? alpha[k] : 0.0;
    double rev = k >= 1 ? alpha[p + 1 - k] : 0.0;
    pz[k] = fwd + rev;
    qz[k] = fwd - rev;
  }
  std::vector<double> pd(p + 1), qd(p + 1);
  pd[0] = pz[0];
  qd[0] = qz[0];
  for (std::size_t k = 1; k <= p; ++k) {
    pd[k] = pz[k] - pd[k - 1];  // divide by (1 + z^-1)
    qd[k] = qz[k] + qd[k - 1];  // divide by (1 - z^-1)
  }
  const auto tp = lsp_detail::symmetric_to_chebyshev(pd);
  const auto tq = lsp_detail::symmetric_to_chebyshev(qd);
  auto fp = [&](double w) { return lsp_detail::chebyshev_sum(tp, std::cos(w)); };
  auto fq = [&](double w) { return lsp_detail::chebyshev_sum(tq, std::cos(w)); };

  std::vector<double> roots;
  roots.reserve(p);
  // Roots alternate P, Q, P, Q, ... with increasing frequency.
  bool use_p = true;
  const double step = std::numbers::pi / static_cast<double>(grid_points);
  double w_lo = 0.0;
  double f_lo = fp(0.0);
  for (std::size_t i = 1; i <= grid_points && roots.size() < p; ++i) {
    const double w_hi = (i == grid_points) ? std::numbers::pi : step * static_cast<double>(i);
    auto f = [&](double w) { return use_p ? fp(w) : fq(w); };
    const double f_hi = f(w_hi);
    if (f_lo == 0.0 || (f_lo < 0.0) != (f_hi < 0.0)) {
      double lo = w_lo, hi = w_hi, flo = f_lo;
      if (flo == 0.0) {
        hi = lo;
      } else {
        while (hi - lo > tolerance_rad) {
          double mid = 0.5 * (lo + hi);
          double fm = f(mid);
          if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
      }
      const double root = 0.5 * (lo + hi);
      roots.push_back(root);
      use_p = !use_p;
      // Resume the scan from the root using the other polynomial.
      w_lo = root;
      f_lo = use_p ? fp(w_lo) : fq(w_lo);
      if (f_lo == 0.0) f_lo = use_p ? fp(w_lo + tolerance_rad) : fq(w_lo + tolerance_rad);
      --i;  // re-examine the same grid cell with the other polynomial
      continue;
    }
    w_lo = w_hi;
    f_lo = f_hi;
  }
  if (roots.size() < p)
    throw Error(ErrorCode::kRootFindingFailed,
                "located " + std::to_string(roots.size()) + " of " + std::to_string(p) + " line spectral frequencies");
  for (std::size_t i = 1; i < roots.size(); ++i)
    if (!(roots[i] > roots[i - 1]))
      throw Error(ErrorCode::kRootFindingFailed, "line spectral frequencies not strictly increasing");
  return roots;
}

// Inverse of lsp(): rebuilds the predictor coefficients from the
// interleaved P/Q root frequencies.
inline std::vector<double> lsp_to_lpc(std::span<const double> lsf) {
  const std::size_t p = lsf.size();
  if (p == 0 || p % 2 != 0) throw Error(ErrorCode::kInvalidArgument, "LSP order must be even and positive");
  auto expand = [](std::vector<double> poly, double w) {
    // multiply by (1 - 2 cos w z^-1 + z^-2)
    std::vector<double> out(poly.size() + 2, 0.0);
    const double c = -2.0 * std::cos(w);
    for (std::size_t k = 0; k < poly.size(); ++k) {
      out[k] += poly[k];
      out[k + 1] += c * poly[k];
      out[k + 2] += poly[k];
    }
    return out;
  };
  std::vector<double> pd{1.0}, qd{1.0};
  for (std::size_t i = 0; i < p; ++i) {
    if (i % 2 == 0)
      pd = expand(std::move(pd), lsf[i]);
    else
      qd = expand(std::move(qd), lsf[i]);
  }
  std::vector<double> pz(p + 2, 0.0), qz(p + 2, 0.0);
  for (std::size_t k = 0; k <= p; ++k) {
    pz[k] += pd[k];
    pz[k + 1] += pd[k];
    qz[k] += qd[k];
    qz[k + 1] -= qd[k];
  }
  std::vector<double> coeffs(p);
  for (std::size_t k = 1; k <= p; ++k) coeffs[k - 1] = -0.5 * (pz[k] + qz[k]);
  return coeffs;
}

}  // namespace avac
