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

#include <functional>
#include <string>
#include <vector>

#include "asr/augment.h"
#include "asr/ctc.h"
#include "asr/dataset.h"
#include "asr/metrics.h"
#include "asr/model.h"
#include "asr/optim.h"

namespace asr {

/// A featurized, label-encoded utterance.
struct Utterance {
  Matrix features;         // normalized log-mel, n_mels x frames
  std::vector<int> labels;
  std::string text;        // normalized reference transcript
  size_t line = 0;         // 1-based manifest line, for error messages
};

/// Loads and featurizes every manifest entry. Audio at another rate is
/// resampled. Throws DataError naming the manifest line on any failure.
std::vector<Utterance> prepare_utterances(const Manifest& manifest,
                                          const Vocabulary& vocab,
                                          const FrameConfig& frames,
                                          int sample_rate);

/// Throws DataError (with manifest line) if an utterance has fewer output
/// frames than its labels need.
void check_feasible(const ModelConfig& config,
                    const std::vector<Utterance>& utterances);

struct TrainOptions {
  int epochs = 5;
  int batch_size = 8;
  bool augment = false;
  AugmentPolicy policy;
  OptHyper hp;
};

/// One row of the CSV training log (epoch,split,loss,wer).
struct LogRecord {
  int epoch = 0;
  std::string split;
  double loss = 0.0;
  double wer = 0.0;

  bool operator==(const LogRecord&) const = default;
};

std::string format_log_csv(const std::vector<LogRecord>& records);

/// Invoked after each epoch's records are logged; returning false stops
/// training.
using EpochCallback = std::function<bool(
    int epoch, const ParameterStore& params,
    const std::vector<LogRecord>& epoch_records)>;

/// Text of a decoded label sequence (characters concatenated, words joined
/// by spaces).
std::string hypothesis_text(const std::vector<int>& ids,
                            const Vocabulary& vocab);

struct EvalResult {
  double loss = 0.0;  // mean per-utterance CTC loss
  WerBreakdown totals;
  std::vector<std::string> hypotheses;
  std::vector<double> scores;  // decoder log-probabilities

  double wer() const;
};

/// Eval-mode pass with greedy decoding (beam_width 0) or prefix beam search.
EvalResult evaluate(const ModelConfig& config, const ParameterStore& params,
                    const std::vector<Utterance>& utterances,
                    const Vocabulary& vocab, size_t beam_width = 0,
                    size_t batch_size = 8);

/// Epoch loop: seeded shuffle, mini-batches, optional SpecAugment, forward,
/// mean CTC loss, backward, NovoGrad. After each epoch the clean train split
/// and, when non-empty, the dev split are scored in eval mode (mean loss,
/// pooled greedy WER) and logged as "train" and "dev" records.
/// A non-finite loss throws NumericError before any update is applied.
std::vector<LogRecord> train_loop(const ModelConfig& config,
                                  ParameterStore& params,
                                  const std::vector<Utterance>& train,
                                  const std::vector<Utterance>& dev,
                                  const Vocabulary& vocab,
                                  const TrainOptions& options, Rng& rng,
                                  const EpochCallback& on_epoch = {});

}  // namespace asr
