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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.h"

namespace asr {
namespace {

const char* kPidginReference =
    "mosquito wey no dey hear word na im dey follow dead body enter grave";
const char* kPidginPrediction =
    "muskito wey no dey hear word nam im dey follow dead body enter grae";

WerBreakdown make(size_t s, size_t d, size_t i, size_t c) {
  WerBreakdown b;
  b.substitutions = s;
  b.deletions = d;
  b.insertions = i;
  b.correct = c;
  b.reference_length = s + d + c;
  return b;
}

TEST(EditOps, DocumentedExamples) {
  EXPECT_EQ(edit_ops("a b c", "a b c"), make(0, 0, 0, 3));
  EXPECT_EQ(edit_ops("a b c d e", ""), make(0, 5, 0, 0));
  EXPECT_EQ(edit_ops("", "x y"), make(0, 0, 2, 0));
  EXPECT_EQ(edit_ops("", ""), make(0, 0, 0, 0));
}

TEST(EditOps, PidginExamplePair) {
  const WerBreakdown b = edit_ops(kPidginReference, kPidginPrediction);
  EXPECT_EQ(b, make(3, 0, 0, 11));
  EXPECT_EQ(b.reference_length, 14u);
  EXPECT_DOUBLE_EQ(wer(b), 3.0 / 14.0);
}

TEST(EditOps, TiePreferenceIsSubstitution) {
  // "a b" -> "c": one substitution plus one deletion either way round.
  EXPECT_EQ(edit_ops("a b", "c"), make(1, 1, 0, 0));
  EXPECT_EQ(edit_ops("a", "b c"), make(1, 0, 1, 0));
}

TEST(EditOps, TokenizationLowercasesAndStripsEdgePunctuation) {
  EXPECT_EQ(tokenize_words("  Hello, WORLD!  don't "),
            (std::vector<std::string>{"hello", "world", "don't"}));
  EXPECT_EQ(edit_ops("Na im.", "na IM"), make(0, 0, 0, 2));
}

TEST(EditOps, MatchesFullMatrixLevenshtein) {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> len(0, 12);
  std::uniform_int_distribution<int> tok(0, 4);
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<std::string> a(len(gen)), b(len(gen));
    for (auto& w : a) w = std::string(1, static_cast<char>('a' + tok(gen)));
    for (auto& w : b) w = std::string(1, static_cast<char>('a' + tok(gen)));
    const WerBreakdown r = edit_ops(a, b);
    ASSERT_EQ(r.errors(), oracle::levenshtein(a, b)) << trial;
    ASSERT_EQ(r.reference_length, a.size());
    ASSERT_EQ(r.substitutions + r.deletions + r.correct, a.size());
    ASSERT_EQ(r.substitutions + r.insertions + r.correct, b.size());
    const WerBreakdown swapped = edit_ops(b, a);
    ASSERT_EQ(swapped.errors(), r.errors());
  }
}

TEST(Wer, Values) {
  EXPECT_EQ(wer(edit_ops("a b c", "a b c")), 0.0);
  EXPECT_DOUBLE_EQ(wer(edit_ops("a b c", "a x b c y")), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(wer(edit_ops("a", "b c d e")), 4.0);
  EXPECT_THROW(wer(edit_ops("", "a")), std::domain_error);
}

TEST(CorpusWer, PoolsCounts) {
  const std::vector<std::pair<std::string, std::string>> pairs = {
      {"a b c d", "a b x d"}, {"a b c d e f", "a b c d e"}};
  EXPECT_DOUBLE_EQ(corpus_wer(pairs), 0.2);
  EXPECT_DOUBLE_EQ(corpus_wer({{kPidginReference, kPidginPrediction}}),
                   3.0 / 14.0);
  EXPECT_DOUBLE_EQ(corpus_wer({{"", "a"}, {"a b", "a b"}}), 0.5);
  EXPECT_THROW(corpus_wer({{"", "a"}}), std::domain_error);
  EXPECT_THROW(corpus_wer({}), std::domain_error);
}

TEST(CorpusWer, MatchesIndependentSumAndIgnoresOrder) {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> len(1, 8);
  std::uniform_int_distribution<int> tok(0, 3);
  auto sentence = [&] {
    std::string s;
    for (int i = len(gen); i > 0; --i) {
      s += std::string(1, static_cast<char>('a' + tok(gen))) + " ";
    }
    return s;
  };
  std::vector<std::pair<std::string, std::string>> pairs(50);
  size_t errors = 0, words = 0;
  for (auto& p : pairs) {
    p = {sentence(), sentence()};
    const auto ref = tokenize_words(p.first);
    errors += oracle::levenshtein(ref, tokenize_words(p.second));
    words += ref.size();
  }
  const double pooled = corpus_wer(pairs);
  EXPECT_DOUBLE_EQ(pooled, static_cast<double>(errors) / words);
  std::shuffle(pairs.begin(), pairs.end(), gen);
  EXPECT_DOUBLE_EQ(corpus_wer(pairs), pooled);
}

}  // namespace
}  // namespace asr
