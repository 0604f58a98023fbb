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

#pragma once

#include <vector>

#include "asr/common.h"
#include "asr/features.h"

namespace asr {

enum class MaskFill { kZero, kMean };

std::string to_string(MaskFill f);
MaskFill parse_mask_fill(const std::string& s);

/// SpecAugment masking policy (no time warping).
struct AugmentPolicy {
  int n_freq_masks = 1;
  int max_freq_width = 8;
  int n_time_masks = 1;
  int max_time_width = 20;
  /// Caps time-mask width at floor(fraction * n_frames). 1.0 disables the cap.
  double max_time_fraction = 0.1;
  MaskFill fill = MaskFill::kZero;
};

/// One applied mask; `width` may be zero.
struct AppliedMask {
  enum class Axis { kFrequency, kTime } axis;
  size_t start = 0;
  size_t width = 0;
};

/// Draws freq masks first, then time masks; for each mask the width
/// w ~ U{0..max} is drawn before the start ~ U{0..extent-w}. Entries outside
/// every mask are copied unchanged. `applied` (optional) receives the masks.
FeatureMatrix spec_augment(const FeatureMatrix& features,
                           const AugmentPolicy& policy, Rng& rng,
                           std::vector<AppliedMask>* applied = nullptr);

}  // namespace asr
