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

#include "asr/train.h"

#include <cmath>
#include <cstdio>
#include <numeric>

namespace asr {

std::vector<Utterance> prepare_utterances(const Manifest& manifest,
                                          const Vocabulary& vocab,
                                          const FrameConfig& frames,
                                          int sample_rate) {
  std::vector<Utterance> out;
  out.reserve(manifest.size());
  for (size_t i = 0; i < manifest.size(); ++i) {
    const ManifestEntry& e = manifest[i];
    const std::string where = "manifest line " + std::to_string(i + 1) + ": ";
    try {
      AudioClip clip = load_wav(e.audio_filepath);
      if (std::abs(clip.duration() - e.duration) > 0.01 * e.duration) {
        throw DataError("duration " + std::to_string(e.duration) +
                        " s disagrees with the audio (" +
                        std::to_string(clip.duration()) + " s)");
      }
      if (clip.sample_rate != sample_rate) {
        clip = resample_linear(clip, sample_rate);
      }
      Utterance u;
      u.text = normalize_text(e.text);
      u.labels = encode_transcript(u.text, vocab);
      u.features = featurize(clip, frames).values;
      u.line = i + 1;
      out.push_back(std::move(u));
    } catch (const DataError& err) {
      throw DataError(where + err.what());
    } catch (const UsageError& err) {
      throw DataError(where + err.what());
    }
  }
  return out;
}

void check_feasible(const ModelConfig& config,
                    const std::vector<Utterance>& utterances) {
  for (const auto& u : utterances) {
    const size_t frames = config.output_length(u.features.cols());
    const size_t needed = std::max<size_t>(min_frames(u.labels), 1);
    if (frames < needed) {
      throw DataError("manifest line " + std::to_string(u.line) +
                      ": CTC-infeasible utterance (" + std::to_string(frames) +
                      " output frames, " + std::to_string(needed) + " needed)");
    }
  }
}

std::string format_log_csv(const std::vector<LogRecord>& records) {
  std::string out = "epoch,split,loss,wer\n";
  char buf[128];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%.9g,%.6f\n", r.epoch,
                  r.split.c_str(), r.loss, r.wer);
    out += buf;
  }
  return out;
}

std::string hypothesis_text(const std::vector<int>& ids,
                            const Vocabulary& vocab) {
  return decode_ids(ids, vocab);
}

double EvalResult::wer() const {
  return totals.reference_length == 0 ? 0.0 : asr::wer(totals);
}

namespace {

struct BatchLoss {
  double loss_sum = 0.0;
  std::vector<Matrix> dlogits;
  std::vector<Matrix> log_probs;
};

// Per-utterance CTC terms; each item writes only its own slot so the result
// is independent of the thread count.
BatchLoss batch_ctc(const std::vector<Matrix>& logits,
                    const std::vector<const Utterance*>& items) {
  const auto n = static_cast<ptrdiff_t>(items.size());
  BatchLoss out;
  out.dlogits.resize(items.size());
  out.log_probs.resize(items.size());
  std::vector<double> losses(items.size());
  std::vector<std::string> errors(items.size());
#pragma omp parallel for schedule(static)
  for (ptrdiff_t b = 0; b < n; ++b) {
    try {
      out.log_probs[b] = log_softmax(logits[b]);
      CtcResult r = ctc_loss(out.log_probs[b], items[b]->labels);
      losses[b] = r.loss;
      out.dlogits[b] = std::move(r.grad);
    } catch (const std::exception& e) {
      errors[b] = "manifest line " + std::to_string(items[b]->line) + ": " +
                  e.what();
    }
  }
  for (size_t b = 0; b < items.size(); ++b) {
    if (!errors[b].empty()) throw NumericError(errors[b]);
    out.loss_sum += losses[b];
  }
  return out;
}

}  // namespace

EvalResult evaluate(const ModelConfig& config, const ParameterStore& params,
                    const std::vector<Utterance>& utterances,
                    const Vocabulary& vocab, size_t beam_width,
                    size_t batch_size) {
  EvalResult result;
  batch_size = std::max<size_t>(batch_size, 1);
  double loss_sum = 0.0;
  for (size_t start = 0; start < utterances.size(); start += batch_size) {
    const size_t end = std::min(utterances.size(), start + batch_size);
    std::vector<Matrix> feats;
    std::vector<const Utterance*> items;
    for (size_t i = start; i < end; ++i) {
      feats.push_back(utterances[i].features);
      items.push_back(&utterances[i]);
    }
    const auto logits = model_infer(config, params, feats);
    const BatchLoss bl = batch_ctc(logits, items);
    loss_sum += bl.loss_sum;
    for (size_t b = 0; b < items.size(); ++b) {
      const DecodeResult d = beam_width == 0
                                 ? greedy_decode(bl.log_probs[b])
                                 : beam_decode(bl.log_probs[b], beam_width);
      std::string hyp = hypothesis_text(d.ids, vocab);
      result.totals += edit_ops(items[b]->text, hyp);
      result.hypotheses.push_back(std::move(hyp));
      result.scores.push_back(d.score);
    }
  }
  if (!utterances.empty()) {
    result.loss = loss_sum / static_cast<double>(utterances.size());
  }
  return result;
}

std::vector<LogRecord> train_loop(const ModelConfig& config,
                                  ParameterStore& params,
                                  const std::vector<Utterance>& train,
                                  const std::vector<Utterance>& dev,
                                  const Vocabulary& vocab,
                                  const TrainOptions& options, Rng& rng,
                                  const EpochCallback& on_epoch) {
  validate(options.hp);
  if (options.batch_size < 1) {
    throw UsageError("batch size must be >= 1");
  }
  check_params(config, params);
  check_feasible(config, train);
  check_feasible(config, dev);
  std::vector<LogRecord> log;
  if (options.epochs <= 0) {
    return log;
  }
  if (train.empty()) {
    throw DataError("training set is empty");
  }

  OptState state;
  std::vector<size_t> order(train.size());
  const auto batch = static_cast<size_t>(options.batch_size);
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), size_t{0});
    for (size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[static_cast<size_t>(rng.uniform_int(
                              0, static_cast<int64_t>(i)))]);
    }

    for (size_t start = 0; start < order.size(); start += batch) {
      const size_t end = std::min(order.size(), start + batch);
      std::vector<Matrix> feats;
      std::vector<const Utterance*> items;
      for (size_t i = start; i < end; ++i) {
        const Utterance& u = train[order[i]];
        items.push_back(&u);
        if (options.augment) {
          FeatureMatrix fm{u.features, FrameConfig{}};
          feats.push_back(spec_augment(fm, options.policy, rng).values);
        } else {
          feats.push_back(u.features);
        }
      }

      ForwardCache cache;
      const auto logits =
          model_forward(config, params, feats, Mode::kTrain, &rng, &cache);
      BatchLoss bl = batch_ctc(logits, items);
      if (!std::isfinite(bl.loss_sum)) {
        throw NumericError("non-finite training loss in epoch " +
                           std::to_string(epoch));
      }
      const double scale = 1.0 / static_cast<double>(items.size());
      for (auto& d : bl.dlogits) {
        for (double& v : d.data()) v *= scale;
      }
      const GradientStore grads =
          model_backward(config, params, cache, bl.dlogits);
      novograd_step(params, grads, state, options.hp);
    }

    std::vector<LogRecord> records;
    const EvalResult tr = evaluate(config, params, train, vocab, 0, batch);
    records.push_back({epoch, "train", tr.loss, tr.wer()});
    if (!dev.empty()) {
      const EvalResult ev = evaluate(config, params, dev, vocab, 0, batch);
      records.push_back({epoch, "dev", ev.loss, ev.wer()});
    }
    log.insert(log.end(), records.begin(), records.end());
    if (on_epoch && !on_epoch(epoch, params, records)) {
      break;
    }
  }
  return log;
}

}  // namespace asr
