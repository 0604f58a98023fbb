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

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "asr/audio_io.h"
#include "asr/augment.h"
#include "asr/dataset.h"
#include "asr/features.h"
#include "asr/model.h"
#include "asr/optim.h"

namespace asr {

/// Typed, defaulted run configuration in flat `section.key = value` form,
/// with sections audio, features, augment, model, optim and data. Unknown
/// keys and ill-typed values are rejected with UsageError.
class RunConfig {
 public:
  enum class Type { kInt, kReal, kBool, kString };

  struct Entry {
    std::string key;
    Type type;
    std::string default_value;
    std::string help;
  };

  RunConfig();

  static const std::vector<Entry>& schema();

  void set(const std::string& key, const std::string& value);
  /// Applies a "key=value" override.
  void apply_override(const std::string& assignment);
  /// Reads a config file; blank lines and '#' comments are ignored.
  void load_file(const std::filesystem::path& path);

  const std::string& get(const std::string& key) const;
  int get_int(const std::string& key) const;
  double get_real(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  /// "key = value" lines for every key, sorted.
  std::string dump() const;
  /// One line per key with its type, default and description.
  static std::string help_text();

 private:
  std::map<std::string, std::string> values_;
};

FrameConfig frame_config(const RunConfig& rc);
AugmentPolicy augment_policy(const RunConfig& rc);
ModelConfig model_config(const RunConfig& rc, int n_classes);
OptHyper opt_hyper(const RunConfig& rc);
SynthSpec synth_spec(const RunConfig& rc, uint64_t seed);
SplitFractions split_fractions(const RunConfig& rc);

}  // namespace asr
