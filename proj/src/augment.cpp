// Copyright 2026 The pidgin-asr Authors.
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

#include "asr/augment.h"

#include <algorithm>
#include <cmath>

namespace asr {

std::string to_string(MaskFill f) {
  return f == MaskFill::kZero ? "zero" : "mean";
}

MaskFill parse_mask_fill(const std::string& s) {
  if (s == "zero") return MaskFill::kZero;
  if (s == "mean") return MaskFill::kMean;
  throw UsageError("invalid mask fill '" + s + "' (expected zero or mean)");
}

FeatureMatrix spec_augment(const FeatureMatrix& features,
                           const AugmentPolicy& policy, Rng& rng,
                           std::vector<AppliedMask>* applied) {
  FeatureMatrix out = features;
  const size_t n_mels = features.n_mels();
  const size_t n_frames = features.n_frames();
  if (n_mels == 0 || n_frames == 0) {
    return out;
  }

  double fill = 0.0;
  if (policy.fill == MaskFill::kMean) {
    for (double v : features.values.data()) fill += v;
    fill /= static_cast<double>(features.values.size());
  }

  const auto freq_cap = static_cast<int64_t>(
      std::min<size_t>(std::max(policy.max_freq_width, 0), n_mels));
  int64_t time_cap = std::min<int64_t>(std::max(policy.max_time_width, 0),
                                       static_cast<int64_t>(n_frames));
  if (policy.max_time_fraction < 1.0) {
    time_cap = std::min<int64_t>(
        time_cap, static_cast<int64_t>(std::floor(
                      std::max(policy.max_time_fraction, 0.0) * n_frames)));
  }

  for (int i = 0; i < policy.n_freq_masks; ++i) {
    const auto w = static_cast<size_t>(rng.uniform_int(0, freq_cap));
    const auto start = static_cast<size_t>(
        rng.uniform_int(0, static_cast<int64_t>(n_mels - w)));
    for (size_t r = start; r < start + w; ++r) {
      std::fill(out.values.row(r).begin(), out.values.row(r).end(), fill);
    }
    if (applied) {
      applied->push_back({AppliedMask::Axis::kFrequency, start, w});
    }
  }
  for (int i = 0; i < policy.n_time_masks; ++i) {
    const auto w = static_cast<size_t>(rng.uniform_int(0, time_cap));
    const auto start = static_cast<size_t>(
        rng.uniform_int(0, static_cast<int64_t>(n_frames - w)));
    for (size_t r = 0; r < n_mels; ++r) {
      for (size_t t = start; t < start + w; ++t) {
        out.values(r, t) = fill;
      }
    }
    if (applied) {
      applied->push_back({AppliedMask::Axis::kTime, start, w});
    }
  }
  return out;
}

}  // namespace asr
