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

#include "asr/model.h"

namespace asr {

/// Checkpoint file layout (all integers u32 little-endian):
///
///   "CKPT1\n"
///   config_len, config text ("key = value" lines, sorted by key)
///   n_tensors, then per tensor: name_len, name, rank, dims[rank]
///   tensor data in manifest order as little-endian float64, row-major
struct Checkpoint {
  std::map<std::string, std::string> config;
  ParameterStore params;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Serialized bytes of a checkpoint (what save_checkpoint writes).
std::string encode_checkpoint(const Checkpoint& ckpt);

}  // namespace asr
