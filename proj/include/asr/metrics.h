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

#include <string>
#include <utility>
#include <vector>

namespace asr {

/// Word-level alignment counts. N = S + D + C always holds.
struct WerBreakdown {
  size_t substitutions = 0;
  size_t deletions = 0;
  size_t insertions = 0;
  size_t correct = 0;
  size_t reference_length = 0;

  size_t errors() const { return substitutions + deletions + insertions; }
  WerBreakdown& operator+=(const WerBreakdown& other);
  bool operator==(const WerBreakdown&) const = default;
};

/// Lowercases, splits on whitespace and strips leading/trailing punctuation
/// from each word; words that become empty are dropped.
std::vector<std::string> tokenize_words(const std::string& text);

/// Minimum-edit alignment with unit costs. When several alignments are
/// optimal the backtrace prefers substitution (or match), then insertion,
/// then deletion.
WerBreakdown edit_ops(const std::vector<std::string>& reference,
                      const std::vector<std::string>& hypothesis);

/// Tokenizes both strings with tokenize_words first.
WerBreakdown edit_ops(const std::string& reference,
                      const std::string& hypothesis);

/// (S + D + I) / N. Throws std::domain_error when N = 0.
double wer(const WerBreakdown& breakdown);

/// Pooled corpus WER: total errors over total reference words.
double corpus_wer(
    const std::vector<std::pair<std::string, std::string>>& pairs);

}  // namespace asr
