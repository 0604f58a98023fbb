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

#include "asr/metrics.h"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

namespace asr {

WerBreakdown& WerBreakdown::operator+=(const WerBreakdown& other) {
  substitutions += other.substitutions;
  deletions += other.deletions;
  insertions += other.insertions;
  correct += other.correct;
  reference_length += other.reference_length;
  return *this;
}

std::vector<std::string> tokenize_words(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream in(text);
  std::string word;
  while (in >> word) {
    std::transform(word.begin(), word.end(), word.begin(), [](unsigned char c) {
      return static_cast<char>(std::tolower(c));
    });
    auto is_punct = [](unsigned char c) { return std::ispunct(c) != 0; };
    size_t b = 0;
    size_t e = word.size();
    while (b < e && is_punct(word[b])) ++b;
    while (e > b && is_punct(word[e - 1])) --e;
    if (e > b) words.push_back(word.substr(b, e - b));
  }
  return words;
}

WerBreakdown edit_ops(const std::vector<std::string>& reference,
                      const std::vector<std::string>& hypothesis) {
  const size_t n = reference.size();
  const size_t m = hypothesis.size();
  // cost[i][j]: edits turning reference[0, i) into hypothesis[0, j).
  std::vector<std::vector<size_t>> cost(n + 1, std::vector<size_t>(m + 1));
  for (size_t i = 0; i <= n; ++i) cost[i][0] = i;
  for (size_t j = 0; j <= m; ++j) cost[0][j] = j;
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      const size_t diag =
          cost[i - 1][j - 1] + (reference[i - 1] == hypothesis[j - 1] ? 0 : 1);
      cost[i][j] = std::min({diag, cost[i][j - 1] + 1, cost[i - 1][j] + 1});
    }
  }

  WerBreakdown out;
  out.reference_length = n;
  size_t i = n;
  size_t j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool match = reference[i - 1] == hypothesis[j - 1];
      if (cost[i][j] == cost[i - 1][j - 1] + (match ? 0 : 1)) {
        ++(match ? out.correct : out.substitutions);
        --i;
        --j;
        continue;
      }
    }
    if (j > 0 && cost[i][j] == cost[i][j - 1] + 1) {
      ++out.insertions;
      --j;
    } else {
      ++out.deletions;
      --i;
    }
  }
  return out;
}

WerBreakdown edit_ops(const std::string& reference,
                      const std::string& hypothesis) {
  return edit_ops(tokenize_words(reference), tokenize_words(hypothesis));
}

double wer(const WerBreakdown& breakdown) {
  if (breakdown.reference_length == 0) {
    throw std::domain_error("WER is undefined for an empty reference");
  }
  return static_cast<double>(breakdown.errors()) /
         static_cast<double>(breakdown.reference_length);
}

double corpus_wer(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  WerBreakdown total;
  for (const auto& [ref, hyp] : pairs) {
    total += edit_ops(ref, hyp);
  }
  if (total.reference_length == 0) {
    throw std::domain_error("corpus WER needs at least one non-empty reference");
  }
  return wer(total);
}

}  // namespace asr
