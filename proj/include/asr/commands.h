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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "asr/checkpoint.h"
#include "asr/config.h"
#include "asr/dataset.h"
#include "asr/model.h"

namespace asr {

/// Writes the synthetic corpus into out_dir and speaker-disjoint
/// train/dev/test manifests next to it.
void cmd_synth_data(const RunConfig& rc, uint64_t seed,
                    const std::filesystem::path& out_dir, std::ostream& log);

/// Featurizes one WAV file into an FMX1 file.
void cmd_featurize(const RunConfig& rc, const std::filesystem::path& wav,
                   const std::filesystem::path& out);

struct TrainArgs {
  std::filesystem::path train_manifest;
  std::filesystem::path dev_manifest;  // empty: no dev split
  std::filesystem::path out_dir;
};

/// Trains from scratch. Writes init.ckpt, then last.ckpt after every epoch,
/// best.ckpt on each dev-WER improvement (train WER without a dev split),
/// and train_log.csv.
void cmd_train(const RunConfig& rc, uint64_t seed, const TrainArgs& args,
               std::ostream& log);

struct EvalArgs {
  std::vector<std::filesystem::path> checkpoints;
  std::filesystem::path manifest;
  size_t beam = 0;
  std::filesystem::path csv;  // empty: no CSV
};

struct EvalRow {
  std::string arch;
  bool augment = false;
  std::string decoder;
  size_t utterances = 0;
  double wer = 0.0;
};

/// Scores each checkpoint on the manifest with greedy decoding (and beam
/// search when beam > 0), prints a model x augmentation WER table and
/// optionally appends the rows to a CSV file.
std::vector<EvalRow> cmd_eval(const RunConfig& rc, const EvalArgs& args,
                              std::ostream& out);

/// Prints one normalized transcript per input WAV.
void cmd_transcribe(const RunConfig& rc,
                    const std::filesystem::path& checkpoint,
                    const std::vector<std::filesystem::path>& wavs,
                    size_t beam, std::ostream& out);

/// Checkpoint config block for a trained model.
std::map<std::string, std::string> checkpoint_config(const RunConfig& rc,
                                                     const ModelConfig& model,
                                                     const Vocabulary& vocab);

struct LoadedModel {
  ModelConfig config;
  Vocabulary vocab;
  ParameterStore params;
  bool augment = false;
};

/// Loads a checkpoint and checks it against the run config. Throws
/// DataError listing the mismatched keys.
LoadedModel load_model(const RunConfig& rc,
                       const std::filesystem::path& checkpoint);

}  // namespace asr
