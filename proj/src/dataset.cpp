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

#include "asr/dataset.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "json.hpp"

namespace asr {

std::string to_string(Gender g) {
  switch (g) {
    case Gender::kMale:
      return "m";
    case Gender::kFemale:
      return "f";
    case Gender::kUnknown:
      break;
  }
  return "unknown";
}

Gender parse_gender(const std::string& s) {
  if (s == "m") return Gender::kMale;
  if (s == "f") return Gender::kFemale;
  if (s == "unknown") return Gender::kUnknown;
  throw DataError("invalid gender '" + s + "' (expected m, f or unknown)");
}

std::string to_string(VocabUnit unit) {
  return unit == VocabUnit::kChar ? "char" : "word";
}

VocabUnit parse_vocab_unit(const std::string& s) {
  if (s == "char") return VocabUnit::kChar;
  if (s == "word") return VocabUnit::kWord;
  throw UsageError("invalid vocabulary unit '" + s + "' (expected char or word)");
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open manifest '" + path.string() + "'");
  }
  Manifest entries;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const std::string where =
        path.string() + ":" + std::to_string(line_no) + ": ";
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(where + "malformed JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) {
      throw DataError(where + "expected a JSON object");
    }
    for (const char* key :
         {"audio_filepath", "duration", "text", "speaker", "gender"}) {
      if (!obj.contains(key)) {
        throw DataError(where + "missing key '" + key + "'");
      }
    }
    ManifestEntry entry;
    try {
      entry.audio_filepath = obj.at("audio_filepath").get<std::string>();
      entry.duration = obj.at("duration").get<double>();
      entry.text = obj.at("text").get<std::string>();
      entry.speaker = obj.at("speaker").get<std::string>();
      entry.gender = parse_gender(obj.at("gender").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + "wrong value type (" + e.what() + ")");
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
    if (!(entry.duration > 0.0)) {
      throw DataError(where + "duration must be positive");
    }
    const std::filesystem::path audio(entry.audio_filepath);
    if (audio.is_relative()) {
      entry.audio_filepath =
          (path.parent_path() / audio).lexically_normal().string();
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

void save_manifest(const Manifest& entries, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError("cannot write manifest '" + path.string() + "'");
  }
  const auto base = std::filesystem::absolute(path).parent_path();
  for (const auto& e : entries) {
    const auto audio =
        std::filesystem::absolute(e.audio_filepath).lexically_normal();
    const auto relative = audio.lexically_relative(base);
    nlohmann::ordered_json obj;
    obj["audio_filepath"] = relative.empty() ? audio.string() : relative.string();
    obj["duration"] = e.duration;
    obj["text"] = e.text;
    obj["speaker"] = e.speaker;
    obj["gender"] = to_string(e.gender);
    out << obj.dump() << '\n';
  }
}

std::string normalize_text(const std::string& text) {
  std::string out;
  bool pending_space = false;
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
        c == '\v') {
      pending_space = true;
      continue;
    }
    char lower = static_cast<char>(c);
    if (c >= 'A' && c <= 'Z') {
      lower = static_cast<char>(c - 'A' + 'a');
    }
    if ((lower >= 'a' && lower <= 'z') || lower == '\'') {
      if (pending_space && !out.empty()) {
        out.push_back(' ');
      }
      pending_space = false;
      out.push_back(lower);
    }
  }
  if (out.empty()) {
    throw DataError("empty after normalization: '" + text + "'");
  }
  return out;
}

std::vector<std::string> split_units(const std::string& text, VocabUnit unit) {
  std::vector<std::string> units;
  if (unit == VocabUnit::kChar) {
    for (char c : text) {
      units.emplace_back(1, c);
    }
    return units;
  }
  std::string word;
  for (char c : text) {
    if (c == ' ') {
      if (!word.empty()) units.push_back(std::move(word));
      word.clear();
    } else {
      word.push_back(c);
    }
  }
  if (!word.empty()) units.push_back(std::move(word));
  return units;
}

Vocabulary build_vocab(const Manifest& entries, VocabUnit unit) {
  if (entries.empty()) {
    throw DataError("cannot build a vocabulary from an empty corpus");
  }
  std::set<std::string> units;
  for (const auto& e : entries) {
    for (auto& u : split_units(normalize_text(e.text), unit)) {
      units.insert(std::move(u));
    }
  }
  return Vocabulary{unit, {units.begin(), units.end()}};
}

std::vector<int> encode_transcript(const std::string& text,
                                   const Vocabulary& vocab) {
  std::vector<int> ids;
  for (const auto& u : split_units(text, vocab.unit)) {
    const auto it =
        std::lower_bound(vocab.tokens.begin(), vocab.tokens.end(), u);
    if (it == vocab.tokens.end() || *it != u) {
      throw DataError("out-of-vocabulary unit '" + u + "'");
    }
    ids.push_back(static_cast<int>(it - vocab.tokens.begin()));
  }
  return ids;
}

std::string decode_ids(const std::vector<int>& ids, const Vocabulary& vocab) {
  std::string out;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= static_cast<int>(vocab.size())) {
      throw std::out_of_range("decode_ids: id " + std::to_string(ids[i]) +
                              " outside the vocabulary");
    }
    if (vocab.unit == VocabUnit::kWord && i > 0) {
      out.push_back(' ');
    }
    out += vocab.tokens[ids[i]];
  }
  return out;
}

SpeakerSplit split_by_speaker(const Manifest& entries,
                              const SplitFractions& fractions, uint64_t seed) {
  const std::array<double, 3> frac = {fractions.train, fractions.dev,
                                      fractions.test};
  for (double f : frac) {
    if (!(f > 0.0)) {
      throw UsageError("split fractions must be positive");
    }
  }
  if (std::abs(frac[0] + frac[1] + frac[2] - 1.0) > 1e-9) {
    throw UsageError("split fractions must sum to 1");
  }

  std::set<std::string> speaker_set;
  for (const auto& e : entries) {
    speaker_set.insert(e.speaker);
  }
  std::vector<std::string> speakers(speaker_set.begin(), speaker_set.end());
  if (speakers.size() < frac.size()) {
    throw DataError("fewer speakers (" + std::to_string(speakers.size()) +
                    ") than splits (3)");
  }

  Rng rng(seed);
  for (size_t i = speakers.size() - 1; i > 0; --i) {
    const auto j = static_cast<size_t>(
        rng.uniform_int(0, static_cast<int64_t>(i)));
    std::swap(speakers[i], speakers[j]);
  }

  const auto n = static_cast<double>(speakers.size());
  std::array<size_t, 3> assigned = {0, 0, 0};
  std::map<std::string, int> speaker_split;
  for (size_t s = 0; s < speakers.size(); ++s) {
    const size_t remaining = speakers.size() - s;
    const auto empty_splits = static_cast<size_t>(
        std::count(assigned.begin(), assigned.end(), size_t{0}));
    int best = -1;
    double best_deficit = 0.0;
    for (int k = 0; k < 3; ++k) {
      // Once the remaining speakers are only enough to fill the empty
      // splits, only empty splits are eligible.
      if (remaining <= empty_splits && assigned[k] != 0) {
        continue;
      }
      const double deficit = frac[k] * n - static_cast<double>(assigned[k]);
      if (best < 0 || deficit > best_deficit) {
        best = k;
        best_deficit = deficit;
      }
    }
    ++assigned[best];
    speaker_split[speakers[s]] = best;
  }

  SpeakerSplit split;
  std::array<Manifest*, 3> outs = {&split.train, &split.dev, &split.test};
  for (const auto& e : entries) {
    outs[speaker_split.at(e.speaker)]->push_back(e);
  }
  const std::array<const char*, 3> names = {"train", "dev", "test"};
  for (int k = 0; k < 3; ++k) {
    std::set<Gender> genders;
    for (const auto& e : *outs[k]) {
      genders.insert(e.gender);
    }
    if (genders.size() < 2) {
      split.warnings.push_back(std::string(names[k]) +
                               " split contains a single gender");
    }
  }
  return split;
}

}  // namespace asr
