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

// Binary soft-margin SVM: standardization, SMO training, RBF/linear
// kernels, Platt calibration, cross-validation and a text model format.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "avac/error.hpp"
#include "avac/random.hpp"
#include "avac/text.hpp"

namespace avac {

using Vector = std::vector<double>;

// ---------------------------------------------------------------------------
// Standardization.

struct StandardScaler {
  std::vector<double> means;
  std::vector<double> stds;  // population std, floored at kStdFloor

  static constexpr double kStdFloor = 1e-12;

  std::size_t dimension() const { return means.size(); }

  Vector apply(std::span<const double> v) const {
    if (v.size() != means.size())
      throw Error(ErrorCode::kDimensionMismatch,
                  "vector has " + std::to_string(v.size()) + " entries, scaler expects " + std::to_string(means.size()));
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - means[i]) / stds[i];
    return out;
  }

  friend bool operator==(const StandardScaler&, const StandardScaler&) = default;
};

inline StandardScaler fit_scaler(std::span<const Vector> vectors) {
  if (vectors.size() < 2) throw Error(ErrorCode::kTooFewSamples, "scaler needs at least two vectors");
  const std::size_t d = vectors.front().size();
  StandardScaler s;
  s.means.assign(d, 0.0);
  s.stds.assign(d, 0.0);
  for (const auto& v : vectors) {
    if (v.size() != d) throw Error(ErrorCode::kDimensionMismatch, "scaler inputs differ in dimension");
    for (std::size_t i = 0; i < d; ++i) s.means[i] += v[i];
  }
  const double n = static_cast<double>(vectors.size());
  for (auto& m : s.means) m /= n;
  for (const auto& v : vectors)
    for (std::size_t i = 0; i < d; ++i) s.stds[i] += (v[i] - s.means[i]) * (v[i] - s.means[i]);
  for (auto& sd : s.stds) sd = std::max(std::sqrt(sd / n), StandardScaler::kStdFloor);
  return s;
}

inline Vector apply_scaler(const StandardScaler& scaler, std::span<const double> v) { return scaler.apply(v); }

inline std::vector<Vector> apply_scaler(const StandardScaler& scaler, std::span<const Vector> vs) {
  std::vector<Vector> out;
  out.reserve(vs.size());
  for (const auto& v : vs) out.push_back(scaler.apply(v));
  return out;
}

// ---------------------------------------------------------------------------
// Kernels.

enum class KernelType { kRbf, kLinear };

inline std::string_view kernel_name(KernelType k) { return k == KernelType::kRbf ? "rbf" : "linear"; }

inline KernelType parse_kernel(std::string_view s) {
  if (s == "rbf") return KernelType::kRbf;
  if (s == "linear") return KernelType::kLinear;
  throw Error(ErrorCode::kInvalidConfig, "unknown kernel '" + std::string(s) + "'");
}

// Evaluates K(a, b) over the active dimensions (all when `active` is empty).
inline double kernel_value(KernelType type, double gamma, std::span<const double> a, std::span<const double> b,
                           std::span<const std::size_t> active = {}) {
  double acc = 0.0;
  if (type == KernelType::kLinear) {
    if (active.empty())
      for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    else
      for (auto i : active) acc += a[i] * b[i];
    return acc;
  }
  if (active.empty()) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      double d = a[i] - b[i];
      acc += d * d;
    }
  } else {
    for (auto i : active) {
      double d = a[i] - b[i];
      acc += d * d;
    }
  }
  return std::exp(-gamma * acc);
}

// ---------------------------------------------------------------------------
// Models.

struct TrainConfig {
  double C = 1.0;
  std::optional<double> gamma;  // nullopt = 1 / (active dimensions)
  KernelType kernel = KernelType::kRbf;
  double smo_tolerance = 1e-3;
  int max_passes = 10;  // consecutive stagnant sweeps tolerated
  long max_iterations = 100000;
  std::uint64_t seed = 0;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct TrainedSVM {
  std::vector<Vector> support_vectors;
  std::vector<double> alphas_signed;  // alpha_i * y_i
  double bias = 0.0;
  KernelType kernel = KernelType::kRbf;
  double gamma = 0.01;
  double C = 1.0;
  double platt_a = -1.0;
  double platt_b = 0.0;
  std::string label_positive = "positive";
  std::string label_negative = "negative";
  std::vector<std::size_t> feature_indices;  // dimensions the kernel sees; empty = all
  std::optional<StandardScaler> scaler;      // recorded for auditability
  std::size_t dimension = 0;
  int layout_version = 1;
  TrainConfig config;

  // Training diagnostics.
  bool converged = true;
  bool calibration_degenerate = false;
  long iterations = 0;

  friend bool operator==(const TrainedSVM&, const TrainedSVM&) = default;
};

inline double decision_value(const TrainedSVM& model, std::span<const double> v) {
  if (v.size() != model.dimension)
    throw Error(ErrorCode::kDimensionMismatch, "query has " + std::to_string(v.size()) + " entries, model expects " +
                                                   std::to_string(model.dimension));
  double acc = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
    acc += model.alphas_signed[i] *
           kernel_value(model.kernel, model.gamma, model.support_vectors[i], v, model.feature_indices);
  return acc;
}

inline double platt_probability(double a, double b, double decision) {
  const double t = a * decision + b;
  // 1 / (1 + exp(t)) without overflow.
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

// Posterior probability of label_positive.
inline double predict_probability(const TrainedSVM& model, std::span<const double> v) {
  return platt_probability(model.platt_a, model.platt_b, decision_value(model, v));
}

// ---------------------------------------------------------------------------
// SMO.

struct SmoProblem {
  std::vector<Vector> x;
  std::vector<int> y;  // +1 / -1
};

struct SmoSolution {
  std::vector<double> alpha;
  double bias = 0.0;  // decision = sum alpha_i y_i K(x_i, .) + bias
  long iterations = 0;
  bool converged = true;
};

namespace smo_detail {

// Sequential minimal optimization with Platt's pair-selection heuristics.
// The second-choice fallback loops start at a seeded random position.
class Solver {
 public:
  Solver(const SmoProblem& p, KernelType kernel, double gamma, std::span<const std::size_t> active,
         const TrainConfig& cfg)
      : y_(p.y), n_(p.x.size()), C_(cfg.C), tol_(cfg.smo_tolerance), cfg_(cfg), rng_(cfg.seed) {
    K_.assign(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i; j < n_; ++j) K_[i * n_ + j] = K_[j * n_ + i] = kernel_value(kernel, gamma, p.x[i], p.x[j], active);
    alpha_.assign(n_, 0.0);
    E_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) E_[i] = -y_[i];
  }

  SmoSolution solve() {
    bool examine_all = true;
    int stagnant = 0;
    bool converged = true;
    while (true) {
      long changed = 0;
      moved_ = 0.0;
      if (examine_all) {
        for (std::size_t i = 0; i < n_; ++i) changed += examine(i);
      } else {
        for (std::size_t i = 0; i < n_; ++i)
          if (non_bound(i)) changed += examine(i);
      }
      if (iterations_ >= cfg_.max_iterations) {
        converged = false;
        break;
      }
      if (changed > 0 && moved_ < 1e-12) {
        if (++stagnant > cfg_.max_passes) {
          converged = false;
          break;
        }
      } else {
        stagnant = 0;
      }
      if (examine_all) {
        if (changed == 0) break;
        examine_all = false;
      } else if (changed == 0) {
        examine_all = true;
      }
    }
    SmoSolution out;
    out.alpha = alpha_;
    out.bias = -b_;
    out.iterations = iterations_;
    out.converged = converged;
    return out;
  }

 private:
  bool non_bound(std::size_t i) const { return alpha_[i] > 0.0 && alpha_[i] < C_; }
  double k(std::size_t i, std::size_t j) const { return K_[i * n_ + j]; }

  int examine(std::size_t i2) {
    if (iterations_ >= cfg_.max_iterations) return 0;
    const double y2 = y_[i2];
    const double alph2 = alpha_[i2];
    const double r2 = E_[i2] * y2;
    if (!((r2 < -tol_ && alph2 < C_) || (r2 > tol_ && alph2 > 0.0))) return 0;

    std::size_t nb_count = 0;
    for (std::size_t i = 0; i < n_; ++i) nb_count += non_bound(i);
    if (nb_count > 1) {
      std::size_t best = n_;
      double best_gap = -1.0;
      for (std::size_t i = 0; i < n_; ++i) {
        if (!non_bound(i)) continue;
        double gap = std::abs(E_[i] - E_[i2]);
        if (gap > best_gap) {
          best_gap = gap;
          best = i;
        }
      }
      if (best < n_ && take_step(best, i2)) return 1;
    }
    std::size_t start = uniform_index(rng_, n_);
    for (std::size_t off = 0; off < n_; ++off) {
      std::size_t i1 = (start + off) % n_;
      if (non_bound(i1) && take_step(i1, i2)) return 1;
    }
    start = uniform_index(rng_, n_);
    for (std::size_t off = 0; off < n_; ++off) {
      std::size_t i1 = (start + off) % n_;
      if (take_step(i1, i2)) return 1;
    }
    return 0;
  }

  bool take_step(std::size_t i1, std::size_t i2) {
    if (i1 == i2) return false;
    const double alph1 = alpha_[i1], alph2 = alpha_[i2];
    const double y1 = y_[i1], y2 = y_[i2];
    const double E1 = E_[i1], E2 = E_[i2];
    const double s = y1 * y2;
    double L, H;
    if (y1 != y2) {
      L = std::max(0.0, alph2 - alph1);
      H = std::min(C_, C_ + alph2 - alph1);
    } else {
      L = std::max(0.0, alph1 + alph2 - C_);
      H = std::min(C_, alph1 + alph2);
    }
    if (L >= H) return false;
    const double k11 = k(i1, i1), k12 = k(i1, i2), k22 = k(i2, i2);
    const double eta = k11 + k22 - 2.0 * k12;
    double a2;
    if (eta > 1e-12) {
      a2 = alph2 + y2 * (E1 - E2) / eta;
      a2 = std::clamp(a2, L, H);
    } else {
      // Objective is linear along the constraint line; pick the better end.
      const double f1 = y1 * (E1 + b_) - alph1 * k11 - s * alph2 * k12;
      const double f2 = y2 * (E2 + b_) - s * alph1 * k12 - alph2 * k22;
      const double L1 = alph1 + s * (alph2 - L);
      const double H1 = alph1 + s * (alph2 - H);
      const double Lobj = L1 * f1 + L * f2 + 0.5 * L1 * L1 * k11 + 0.5 * L * L * k22 + s * L * L1 * k12;
      const double Hobj = H1 * f1 + H * f2 + 0.5 * H1 * H1 * k11 + 0.5 * H * H * k22 + s * H * H1 * k12;
      if (Lobj < Hobj - 1e-12)
        a2 = L;
      else if (Lobj > Hobj + 1e-12)
        a2 = H;
      else
        a2 = alph2;
    }
    if (std::abs(a2 - alph2) < 1e-12 * (a2 + alph2 + 1e-12)) return false;
    double a1 = alph1 + s * (alph2 - a2);
    if (a1 < 0.0) {
      a2 += s * a1;
      a1 = 0.0;
    } else if (a1 > C_) {
      a2 += s * (a1 - C_);
      a1 = C_;
    }
    a2 = std::clamp(a2, 0.0, C_);

    const double d1 = y1 * (a1 - alph1);
    const double d2 = y2 * (a2 - alph2);
    const double b1 = E1 + d1 * k11 + d2 * k12 + b_;
    const double b2 = E2 + d1 * k12 + d2 * k22 + b_;
    double b_new;
    if (a1 > 0.0 && a1 < C_)
      b_new = b1;
    else if (a2 > 0.0 && a2 < C_)
      b_new = b2;
    else
      b_new = 0.5 * (b1 + b2);
    const double db = b_new - b_;
    for (std::size_t i = 0; i < n_; ++i) E_[i] += d1 * k(i1, i) + d2 * k(i2, i) - db;
    b_ = b_new;
    alpha_[i1] = a1;
    alpha_[i2] = a2;
    moved_ += std::abs(a1 - alph1) + std::abs(a2 - alph2);
    ++iterations_;
    return true;
  }

  std::vector<int> y_;
  std::size_t n_;
  double C_;
  double tol_;
  TrainConfig cfg_;
  Rng rng_;
  std::vector<double> K_;
  std::vector<double> alpha_;
  std::vector<double> E_;  // f(x_i) - y_i with f = sum alpha y K - b
  double b_ = 0.0;
  double moved_ = 0.0;
  long iterations_ = 0;
};

}  // namespace smo_detail

inline double resolve_gamma(const TrainConfig& cfg, std::size_t active_dims) {
  if (cfg.gamma) return *cfg.gamma;
  return 1.0 / static_cast<double>(std::max<std::size_t>(active_dims, 1));
}

inline void validate_train_config(const TrainConfig& cfg) {
  if (!(cfg.C > 0.0)) throw Error(ErrorCode::kInvalidConfig, "C must be positive");
  if (cfg.gamma && !(*cfg.gamma > 0.0)) throw Error(ErrorCode::kInvalidConfig, "gamma must be positive");
  if (!(cfg.smo_tolerance > 0.0)) throw Error(ErrorCode::kInvalidConfig, "smo_tolerance must be positive");
  if (cfg.max_passes < 1 || cfg.max_iterations < 1)
    throw Error(ErrorCode::kInvalidConfig, "max_passes and max_iterations must be positive");
}

// Solves the C-SVM dual on labelled vectors (y = +1 for `pos`). Vectors
// are used as given; standardize them first.
inline TrainedSVM train_smo(std::span<const Vector> pos, std::span<const Vector> neg, const TrainConfig& cfg,
                            std::span<const std::size_t> active = {}) {
  validate_train_config(cfg);
  if (pos.empty() || neg.empty()) throw Error(ErrorCode::kSingleClass, "training needs vectors of both labels");
  SmoProblem p;
  for (const auto& v : pos) {
    p.x.push_back(v);
    p.y.push_back(1);
  }
  for (const auto& v : neg) {
    p.x.push_back(v);
    p.y.push_back(-1);
  }
  const std::size_t dim = p.x.front().size();
  for (const auto& v : p.x)
    if (v.size() != dim) throw Error(ErrorCode::kDimensionMismatch, "training vectors differ in dimension");
  for (auto i : active)
    if (i >= dim) throw Error(ErrorCode::kDimensionMismatch, "active index out of range");

  TrainedSVM m;
  m.kernel = cfg.kernel;
  m.gamma = resolve_gamma(cfg, active.empty() ? dim : active.size());
  m.C = cfg.C;
  m.dimension = dim;
  m.feature_indices.assign(active.begin(), active.end());
  m.config = cfg;

  smo_detail::Solver solver(p, m.kernel, m.gamma, active, cfg);
  auto sol = solver.solve();
  m.bias = sol.bias;
  m.iterations = sol.iterations;
  m.converged = sol.converged;
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    if (sol.alpha[i] > 0.0) {
      m.support_vectors.push_back(p.x[i]);
      m.alphas_signed.push_back(sol.alpha[i] * p.y[i]);
    }
  }
  return m;
}

// Dual objective sum(alpha) - 1/2 sum_ij a_i a_j y_i y_j K_ij of a trained
// model, evaluated over its support vectors.
inline double dual_objective(const TrainedSVM& m) {
  double linear = 0.0, quad = 0.0;
  const std::size_t n = m.support_vectors.size();
  for (std::size_t i = 0; i < n; ++i) {
    linear += std::abs(m.alphas_signed[i]);
    for (std::size_t j = 0; j < n; ++j)
      quad += m.alphas_signed[i] * m.alphas_signed[j] *
              kernel_value(m.kernel, m.gamma, m.support_vectors[i], m.support_vectors[j], m.feature_indices);
  }
  return linear - 0.5 * quad;
}

// ---------------------------------------------------------------------------
// Platt calibration.

struct PlattFit {
  double a = -1.0;
  double b = 0.0;
  bool degenerate = false;
};

// Fits P(positive | d) = 1 / (1 + exp(a d + b)) by Newton's method with
// backtracking on the regularized targets of Platt (Lin, Lin & Weng form).
// Labels are +1 / -1.
inline PlattFit platt_fit(std::span<const double> decisions, std::span<const int> labels) {
  PlattFit out;
  const std::size_t n = decisions.size();
  std::size_t n_pos = 0;
  for (int y : labels) n_pos += y > 0;
  const std::size_t n_neg = n - n_pos;
  if (n == 0 || n_pos == 0 || n_neg == 0 || labels.size() != n) {
    out.degenerate = true;
    return out;
  }
  const double hi = (static_cast<double>(n_pos) + 1.0) / (static_cast<double>(n_pos) + 2.0);
  const double lo = 1.0 / (static_cast<double>(n_neg) + 2.0);
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = labels[i] > 0 ? hi : lo;

  auto objective = [&](double a, double b) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = decisions[i] * a + b;
      if (z >= 0)
        f += t[i] * z + std::log1p(std::exp(-z));
      else
        f += (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return f;
  };

  double a = 0.0;
  double b = std::log((static_cast<double>(n_neg) + 1.0) / (static_cast<double>(n_pos) + 1.0));
  double f = objective(a, b);
  const double sigma = 1e-12, min_step = 1e-10, eps = 1e-5;
  bool ok = false;
  for (int it = 0; it < 100; ++it) {
    double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = decisions[i] * a + b;
      double p, q;
      if (z >= 0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += decisions[i] * decisions[i] * d2;
      h22 += d2;
      h21 += decisions[i] * d2;
      const double d1 = t[i] - p;
      g1 += decisions[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < eps && std::abs(g2) < eps) {
      ok = true;
      break;
    }
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    bool advanced = false;
    while (step >= min_step) {
      const double na = a + step * da, nb = b + step * db;
      const double nf = objective(na, nb);
      if (nf < f + 1e-4 * step * gd) {
        a = na;
        b = nb;
        f = nf;
        advanced = true;
        break;
      }
      step /= 2.0;
    }
    if (!advanced) break;
  }
  if (!ok || !(a < 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    out.a = -1.0;
    out.b = 0.0;
    out.degenerate = true;
    return out;
  }
  out.a = a;
  out.b = b;
  return out;
}

// ---------------------------------------------------------------------------
// Fold assignment and cross-validation.

// Stratified assignment: each label's indices are shuffled and dealt round-robin.
inline std::vector<std::size_t> stratified_folds(std::size_t n_pos, std::size_t n_neg, std::size_t k, Rng& rng) {
  std::vector<std::size_t> fold(n_pos + n_neg);
  auto deal = [&](std::size_t offset, std::size_t count) {
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), offset);
    shuffle(std::span(idx), rng);
    for (std::size_t i = 0; i < count; ++i) fold[idx[i]] = i % k;
  };
  deal(0, n_pos);
  deal(n_pos, n_neg);
  return fold;
}

// Trains on `pos`/`neg` and calibrates with out-of-fold decision values
// from `calibration_folds` sub-models. Inputs must already be standardized.
inline TrainedSVM train_calibrated(std::span<const Vector> pos, std::span<const Vector> neg, const TrainConfig& cfg,
                                   std::span<const std::size_t> active = {}, std::size_t calibration_folds = 3) {
  TrainedSVM model = train_smo(pos, neg, cfg, active);
  std::vector<double> decisions;
  std::vector<int> labels;
  if (pos.size() >= calibration_folds && neg.size() >= calibration_folds) {
    Rng rng(derive_seed(cfg.seed, 0xCA1));
    auto fold = stratified_folds(pos.size(), neg.size(), calibration_folds, rng);
    decisions.assign(pos.size() + neg.size(), 0.0);
    for (std::size_t f = 0; f < calibration_folds; ++f) {
      std::vector<Vector> tp, tn;
      for (std::size_t i = 0; i < pos.size(); ++i)
        if (fold[i] != f) tp.push_back(pos[i]);
      for (std::size_t i = 0; i < neg.size(); ++i)
        if (fold[pos.size() + i] != f) tn.push_back(neg[i]);
      auto sub = train_smo(tp, tn, cfg, active);
      for (std::size_t i = 0; i < pos.size(); ++i)
        if (fold[i] == f) decisions[i] = decision_value(sub, pos[i]);
      for (std::size_t i = 0; i < neg.size(); ++i)
        if (fold[pos.size() + i] == f) decisions[pos.size() + i] = decision_value(sub, neg[i]);
    }
  } else {
    for (const auto& v : pos) decisions.push_back(decision_value(model, v));
    for (const auto& v : neg) decisions.push_back(decision_value(model, v));
  }
  labels.assign(pos.size(), 1);
  labels.insert(labels.end(), neg.size(), -1);
  auto fit = platt_fit(decisions, labels);
  model.platt_a = fit.a;
  model.platt_b = fit.b;
  model.calibration_degenerate = fit.degenerate;
  return model;
}

// Stratified k-fold accuracy; the scaler is refit on each training split.
// Raw (unstandardized) vectors in.
inline double cross_validate(std::span<const Vector> pos, std::span<const Vector> neg, const TrainConfig& cfg,
                             std::size_t k = 5, std::span<const std::size_t> active = {}) {
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "cross-validation needs k >= 2");
  if (pos.size() < k || neg.size() < k)
    throw Error(ErrorCode::kTooFewSamples, "cross-validation needs at least " + std::to_string(k) +
                                               " samples per class (got " + std::to_string(pos.size()) + " and " +
                                               std::to_string(neg.size()) + ")");
  Rng rng(derive_seed(cfg.seed, 0xCF));
  auto fold = stratified_folds(pos.size(), neg.size(), k, rng);
  double acc_sum = 0.0;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<Vector> train_all, tp, tn;
    for (std::size_t i = 0; i < pos.size(); ++i)
      if (fold[i] != f) train_all.push_back(pos[i]);
    for (std::size_t i = 0; i < neg.size(); ++i)
      if (fold[pos.size() + i] != f) train_all.push_back(neg[i]);
    auto scaler = fit_scaler(train_all);
    for (std::size_t i = 0; i < pos.size(); ++i)
      if (fold[i] != f) tp.push_back(scaler.apply(pos[i]));
    for (std::size_t i = 0; i < neg.size(); ++i)
      if (fold[pos.size() + i] != f) tn.push_back(scaler.apply(neg[i]));
    auto model = train_smo(tp, tn, cfg, active);
    std::size_t correct = 0, total = 0;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      if (fold[i] != f) continue;
      correct += decision_value(model, scaler.apply(pos[i])) > 0.0;
      ++total;
    }
    for (std::size_t i = 0; i < neg.size(); ++i) {
      if (fold[pos.size() + i] != f) continue;
      correct += decision_value(model, scaler.apply(neg[i])) <= 0.0;
      ++total;
    }
    acc_sum += static_cast<double>(correct) / static_cast<double>(total);
  }
  return acc_sum / static_cast<double>(k);
}

// Coarse (C, gamma) search by cross-validation; returns cfg with the best pair.
inline TrainConfig grid_search(std::span<const Vector> pos, std::span<const Vector> neg, TrainConfig cfg,
                               std::size_t k = 5, std::span<const std::size_t> active = {}) {
  double best = -1.0;
  TrainConfig best_cfg = cfg;
  for (double c : {0.1, 1.0, 10.0}) {
    for (double g : {0.001, 0.01, 0.1}) {
      TrainConfig trial = cfg;
      trial.C = c;
      trial.gamma = g;
      double acc = cross_validate(pos, neg, trial, k, active);
      if (acc > best) {
        best = acc;
        best_cfg = trial;
      }
    }
  }
  return best_cfg;
}

// ---------------------------------------------------------------------------
// Text model format.

inline constexpr int kSvmFormatVersion = 1;

inline std::string serialize_svm(const TrainedSVM& m) {
  using text::format_real;
  std::ostringstream os;
  os << "avac-svm " << kSvmFormatVersion << '\n';
  os << "layout_version " << m.layout_version << '\n';
  os << "labels " << m.label_positive << ' ' << m.label_negative << '\n';
  os << "kernel " << kernel_name(m.kernel) << '\n';
  os << "gamma " << format_real(m.gamma) << '\n';
  os << "C " << format_real(m.C) << '\n';
  os << "bias " << format_real(m.bias) << '\n';
  os << "platt_a " << format_real(m.platt_a) << '\n';
  os << "platt_b " << format_real(m.platt_b) << '\n';
  os << "gamma_auto " << (m.config.gamma ? 0 : 1) << '\n';
  os << "smo_tolerance " << format_real(m.config.smo_tolerance) << '\n';
  os << "max_passes " << m.config.max_passes << '\n';
  os << "max_iterations " << m.config.max_iterations << '\n';
  os << "seed " << m.config.seed << '\n';
  os << "converged " << (m.converged ? 1 : 0) << '\n';
  os << "calibration_degenerate " << (m.calibration_degenerate ? 1 : 0) << '\n';
  os << "iterations " << m.iterations << '\n';
  os << "dimension " << m.dimension << '\n';
  os << "feature_indices " << m.feature_indices.size();
  for (auto i : m.feature_indices) os << ' ' << i;
  os << '\n';
  if (m.scaler) {
    os << "scaler_means " << text::join_reals(m.scaler->means) << '\n';
    os << "scaler_stds " << text::join_reals(m.scaler->stds) << '\n';
  }
  os << "sv_count " << m.support_vectors.size() << '\n';
  for (const auto& sv : m.support_vectors) os << "sv " << text::join_reals(sv) << '\n';
  os << "alphas_signed " << text::join_reals(m.alphas_signed) << '\n';
  os << "end_svm\n";
  return os.str();
}

namespace svm_detail {

inline std::vector<double> parse_reals(std::span<const std::string_view> toks, std::size_t from = 1) {
  std::vector<double> out;
  for (std::size_t i = from; i < toks.size(); ++i) out.push_back(text::parse_real(toks[i]));
  return out;
}

}  // namespace svm_detail

// Reads one model document; consumes lines through "end_svm".
inline TrainedSVM parse_svm(std::istream& is) {
  TrainedSVM m;
  std::string line;
  bool header = false, ended = false, gamma_auto = false;
  std::size_t sv_count = 0;
  std::vector<double> scaler_means, scaler_stds;
  while (std::getline(is, line)) {
    auto toks = text::tokens(line);
    if (toks.empty()) continue;
    const auto key = toks[0];
    auto need = [&](std::size_t n) {
      if (toks.size() < n) throw Error(ErrorCode::kInvalidModel, "malformed line: '" + line + "'");
    };
    if (!header) {
      if (key != "avac-svm") throw Error(ErrorCode::kInvalidModel, "expected 'avac-svm' header, got '" + line + "'");
      need(2);
      if (text::parse_int(toks[1]) != kSvmFormatVersion)
        throw Error(ErrorCode::kInvalidModel, "unsupported model format version " + std::string(toks[1]));
      header = true;
      continue;
    }
    if (key == "end_svm") {
      ended = true;
      break;
    }
    if (key == "layout_version") {
      need(2);
      m.layout_version = static_cast<int>(text::parse_int(toks[1]));
    } else if (key == "labels") {
      need(3);
      m.label_positive = std::string(toks[1]);
      m.label_negative = std::string(toks[2]);
    } else if (key == "kernel") {
      need(2);
      m.kernel = parse_kernel(toks[1]);
    } else if (key == "gamma") {
      need(2);
      m.gamma = text::parse_real(toks[1]);
    } else if (key == "C") {
      need(2);
      m.C = text::parse_real(toks[1]);
    } else if (key == "bias") {
      need(2);
      m.bias = text::parse_real(toks[1]);
    } else if (key == "platt_a") {
      need(2);
      m.platt_a = text::parse_real(toks[1]);
    } else if (key == "platt_b") {
      need(2);
      m.platt_b = text::parse_real(toks[1]);
    } else if (key == "gamma_auto") {
      need(2);
      gamma_auto = text::parse_int(toks[1]) != 0;
    } else if (key == "smo_tolerance") {
      need(2);
      m.config.smo_tolerance = text::parse_real(toks[1]);
    } else if (key == "max_passes") {
      need(2);
      m.config.max_passes = static_cast<int>(text::parse_int(toks[1]));
    } else if (key == "max_iterations") {
      need(2);
      m.config.max_iterations = text::parse_int(toks[1]);
    } else if (key == "seed") {
      need(2);
      std::uint64_t seed = 0;
      auto s = toks[1];
      if (std::from_chars(s.data(), s.data() + s.size(), seed).ec != std::errc())
        throw Error(ErrorCode::kInvalidModel, "bad seed");
      m.config.seed = seed;
    } else if (key == "converged") {
      need(2);
      m.converged = text::parse_int(toks[1]) != 0;
    } else if (key == "calibration_degenerate") {
      need(2);
      m.calibration_degenerate = text::parse_int(toks[1]) != 0;
    } else if (key == "iterations") {
      need(2);
      m.iterations = text::parse_int(toks[1]);
    } else if (key == "dimension") {
      need(2);
      m.dimension = static_cast<std::size_t>(text::parse_int(toks[1]));
    } else if (key == "feature_indices") {
      need(2);
      auto count = static_cast<std::size_t>(text::parse_int(toks[1]));
      if (toks.size() != count + 2) throw Error(ErrorCode::kInvalidModel, "feature_indices count mismatch");
      m.feature_indices.clear();
      for (std::size_t i = 0; i < count; ++i) m.feature_indices.push_back(static_cast<std::size_t>(text::parse_int(toks[i + 2])));
    } else if (key == "scaler_means") {
      scaler_means = svm_detail::parse_reals(toks);
    } else if (key == "scaler_stds") {
      scaler_stds = svm_detail::parse_reals(toks);
    } else if (key == "sv_count") {
      need(2);
      sv_count = static_cast<std::size_t>(text::parse_int(toks[1]));
    } else if (key == "sv") {
      m.support_vectors.push_back(svm_detail::parse_reals(toks));
    } else if (key == "alphas_signed") {
      m.alphas_signed = svm_detail::parse_reals(toks);
    } else {
      throw Error(ErrorCode::kInvalidModel, "unknown model field '" + std::string(key) + "'");
    }
  }
  if (!header || !ended) throw Error(ErrorCode::kInvalidModel, "truncated model document");
  m.config.C = m.C;
  m.config.kernel = m.kernel;
  m.config.gamma = gamma_auto ? std::nullopt : std::optional<double>(m.gamma);
  if (!scaler_means.empty() || !scaler_stds.empty()) {
    if (scaler_means.size() != scaler_stds.size())
      throw Error(ErrorCode::kInvalidModel, "scaler means/stds differ in length");
    m.scaler = StandardScaler{scaler_means, scaler_stds};
  }
  if (m.support_vectors.size() != sv_count || m.alphas_signed.size() != sv_count)
    throw Error(ErrorCode::kInvalidModel, "support vector count mismatch");
  for (const auto& sv : m.support_vectors)
    if (sv.size() != m.dimension) throw Error(ErrorCode::kInvalidModel, "support vector has wrong dimension");
  for (auto i : m.feature_indices)
    if (i >= m.dimension) throw Error(ErrorCode::kInvalidModel, "feature index out of range");
  return m;
}

inline TrainedSVM parse_svm(const std::string& doc) {
  std::istringstream is(doc);
  return parse_svm(is);
}

}  // namespace avac
