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

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "asr/common.h"

namespace asr {

enum class Gender { kMale, kFemale, kUnknown };

std::string to_string(Gender g);
Gender parse_gender(const std::string& s);

/// One utterance of a JSON-Lines manifest.
struct ManifestEntry {
  std::string audio_filepath;
  double duration = 0.0;  // seconds
  std::string text;
  std::string speaker;
  Gender gender = Gender::kUnknown;

  bool operator==(const ManifestEntry&) const = default;
};

using Manifest = std::vector<ManifestEntry>;

/// Reads a manifest. Validation errors (DataError) name the 1-based line.
/// Relative audio paths are resolved against the manifest's directory.
Manifest load_manifest(const std::filesystem::path& path);
/// Writes audio paths relative to the manifest's directory.
void save_manifest(const Manifest& entries, const std::filesystem::path& path);

/// Lowercases, keeps only [a-z], space and apostrophe, collapses
/// whitespace. Throws DataError when nothing is left.
std::string normalize_text(const std::string& text);

enum class VocabUnit { kChar, kWord };

std::string to_string(VocabUnit unit);
VocabUnit parse_vocab_unit(const std::string& s);

/// Sorted unique output units. The CTC blank is not a token; it takes the
/// index one past the last token.
struct Vocabulary {
  VocabUnit unit = VocabUnit::kChar;
  std::vector<std::string> tokens;

  size_t size() const { return tokens.size(); }
  int blank() const { return static_cast<int>(tokens.size()); }
  /// Number of model outputs, blank included.
  size_t num_classes() const { return tokens.size() + 1; }

  bool operator==(const Vocabulary&) const = default;
};

Vocabulary build_vocab(const Manifest& entries, VocabUnit unit);

/// Splits normalized text into vocabulary units (characters or words).
std::vector<std::string> split_units(const std::string& text, VocabUnit unit);

std::vector<int> encode_transcript(const std::string& text,
                                   const Vocabulary& vocab);
std::string decode_ids(const std::vector<int>& ids, const Vocabulary& vocab);

struct SplitFractions {
  double train = 0.6;
  double dev = 0.2;
  double test = 0.2;
};

struct SpeakerSplit {
  Manifest train;
  Manifest dev;
  Manifest test;
  /// Non-fatal findings, e.g. a split that contains a single gender.
  std::vector<std::string> warnings;
};

/// Partitions speakers (not utterances) across train/dev/test. Speakers are
/// shuffled by `seed` and each is handed to the split with the largest
/// remaining speaker deficit; every split receives at least one speaker.
SpeakerSplit split_by_speaker(const Manifest& entries,
                              const SplitFractions& fractions, uint64_t seed);

}  // namespace asr
