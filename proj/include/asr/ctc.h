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

#include <limits>
#include <span>
#include <vector>

#include "asr/common.h"
#include "asr/tensor.h"

namespace asr {

/// log(0).
inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) with kLogZero handled exactly.
double log_sum_exp(double a, double b);

/// Row-wise log-softmax of a (frames x classes) logit matrix.
Matrix log_softmax(const Matrix& logits);

/// Minimum number of frames that can emit `labels`: one per label plus a
/// separating blank between each pair of equal neighbours.
size_t min_frames(std::span<const int> labels);

struct CtcResult {
  double loss = 0.0;
  /// d loss / d logits, assuming log_probs = log_softmax(logits).
  Matrix grad;
};

/// Negative log-likelihood of `labels` under the CTC alignment model,
/// computed by forward-backward in log space. The blank is the last column
/// of `log_probs`. Throws DataError when labels are out of range or the
/// sequence is too long for the number of frames.
CtcResult ctc_loss(const Matrix& log_probs, std::span<const int> labels);

struct DecodeResult {
  std::vector<int> ids;
  double score = 0.0;  // log-probability
};

/// Per-frame argmax (ties to the lowest index), merge repeats, drop blanks.
/// The score is the log-probability of the argmax path.
DecodeResult greedy_decode(const Matrix& log_probs);

/// CTC prefix beam search without a language model. Keeps the `beam_width`
/// prefixes with the highest total (blank-ending + non-blank-ending)
/// probability each frame; ties keep the lexicographically smaller prefix.
/// The score is the best prefix's marginal log-probability.
DecodeResult beam_decode(const Matrix& log_probs, size_t beam_width);

}  // namespace asr
