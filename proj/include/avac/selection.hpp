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

// Wrapper feature selection over the feature groups: sequential forward
// search scored by stratified cross-validation accuracy.

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "avac/error.hpp"
#include "avac/features.hpp"
#include "avac/svm.hpp"

namespace avac {

struct FeatureMask {
  std::vector<FeatureGroup> included_groups;  // in group order
  std::vector<std::size_t> resolved_indices;  // ascending positions in the layout
  int layout_version = kLayoutVersion;

  friend bool operator==(const FeatureMask&, const FeatureMask&) = default;
};

inline FeatureMask make_feature_mask(std::span<const FeatureGroup> groups) {
  if (groups.empty()) throw Error(ErrorCode::kInvalidArgument, "feature mask needs at least one group");
  FeatureMask mask;
  for (FeatureGroup g : kAllFeatureGroups) {
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) continue;
    mask.included_groups.push_back(g);
    auto idx = feature_group_indices(g);
    mask.resolved_indices.insert(mask.resolved_indices.end(), idx.begin(), idx.end());
  }
  std::sort(mask.resolved_indices.begin(), mask.resolved_indices.end());
  return mask;
}

inline FeatureMask full_feature_mask() { return make_feature_mask(kAllFeatureGroups); }

// Throws InvalidModel when the mask is empty or disagrees with the layout.
inline void validate_feature_mask(const FeatureMask& mask) {
  if (mask.layout_version != kLayoutVersion)
    throw Error(ErrorCode::kLayoutMismatch, "feature mask layout version " + std::to_string(mask.layout_version));
  if (mask.included_groups.empty()) throw Error(ErrorCode::kInvalidModel, "feature mask is empty");
  if (make_feature_mask(mask.included_groups) != mask)
    throw Error(ErrorCode::kInvalidModel, "feature mask indices do not match its groups");
}

struct SelectionConfig {
  TrainConfig train;
  std::size_t folds = 5;
  double min_improvement = 0.005;
};

struct SelectionStep {
  FeatureGroup added;
  double cv_accuracy;
};

struct SelectionResult {
  FeatureMask mask;
  std::vector<SelectionStep> trace;  // one entry per accepted group
};

// Sequential forward selection. The first group is always accepted; later
// groups only when they raise accuracy by at least `min_improvement`.
inline SelectionResult wrapper_select(std::span<const Vector> pos, std::span<const Vector> neg,
                                      const SelectionConfig& cfg = {}) {
  if (pos.size() < cfg.folds || neg.size() < cfg.folds)
    throw Error(ErrorCode::kTooFewSamples, "feature selection needs at least " + std::to_string(cfg.folds) +
                                               " samples per class (got " + std::to_string(pos.size()) + " and " +
                                               std::to_string(neg.size()) + ")");
  std::vector<FeatureGroup> chosen;
  std::vector<FeatureGroup> remaining(kAllFeatureGroups.begin(), kAllFeatureGroups.end());
  SelectionResult result;
  double current = 0.0;
  while (!remaining.empty()) {
    double best = -1.0;
    std::size_t best_at = 0;
    for (std::size_t r = 0; r < remaining.size(); ++r) {
      auto trial = chosen;
      trial.push_back(remaining[r]);
      auto mask = make_feature_mask(trial);
      double acc = cross_validate(pos, neg, cfg.train, cfg.folds, mask.resolved_indices);
      if (acc > best) {
        best = acc;
        best_at = r;
      }
    }
    if (!chosen.empty() && best - current < cfg.min_improvement) break;
    chosen.push_back(remaining[best_at]);
    result.trace.push_back({remaining[best_at], best});
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_at));
    current = best;
  }
  result.mask = make_feature_mask(chosen);
  return result;
}

inline std::string mask_to_string(const FeatureMask& mask) {
  std::string out;
  for (FeatureGroup g : mask.included_groups) {
    if (!out.empty()) out += ',';
    out += feature_group_name(g);
  }
  return out;
}

inline FeatureMask parse_mask(std::string_view s) {
  std::vector<FeatureGroup> groups;
  for (auto part : text::split(s, ',')) groups.push_back(parse_feature_group(text::trim(part)));
  return make_feature_mask(groups);
}

}  // namespace avac
