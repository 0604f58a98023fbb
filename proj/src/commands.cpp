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

#include "asr/commands.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>

#include "json.hpp"

#include "asr/ctc.h"
#include "asr/train.h"

namespace asr {
namespace fs = std::filesystem;

namespace {

std::string format_wer(double w) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", w);
  return buf;
}

std::vector<Utterance> load_split(const RunConfig& rc, const fs::path& path,
                                  const Vocabulary& vocab) {
  return prepare_utterances(load_manifest(path), vocab, frame_config(rc),
                            rc.get_int("audio.sample_rate"));
}

std::string collapse_spaces(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == ' ' && (out.empty() || out.back() == ' ')) continue;
    out += c;
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

}  // namespace

void cmd_synth_data(const RunConfig& rc, uint64_t seed, const fs::path& out_dir,
                    std::ostream& log) {
  const SynthSpec spec = synth_spec(rc, seed);
  const Manifest all = synth_dataset(spec, out_dir);
  if (all.empty()) {
    log << "no utterances requested; nothing written\n";
    return;
  }
  const SpeakerSplit split = split_by_speaker(all, split_fractions(rc), seed);
  save_manifest(split.train, out_dir / "train.jsonl");
  save_manifest(split.dev, out_dir / "dev.jsonl");
  save_manifest(split.test, out_dir / "test.jsonl");
  for (const auto& w : split.warnings) log << "warning: " << w << "\n";
  log << "wrote " << all.size() << " utterances (train " << split.train.size()
      << ", dev " << split.dev.size() << ", test " << split.test.size()
      << ") to " << out_dir.string() << "\n";
}

void cmd_featurize(const RunConfig& rc, const fs::path& wav,
                   const fs::path& out) {
  const int rate = rc.get_int("audio.sample_rate");
  AudioClip clip = load_wav(wav);
  if (clip.sample_rate != rate) clip = resample_linear(clip, rate);
  write_fmx(featurize(clip, frame_config(rc)), out);
}

std::map<std::string, std::string> checkpoint_config(const RunConfig& rc,
                                                     const ModelConfig& model,
                                                     const Vocabulary& vocab) {
  auto cfg = to_key_values(model);
  for (const auto& e : RunConfig::schema()) {
    if (e.key.rfind("features.", 0) == 0) cfg[e.key] = rc.get(e.key);
  }
  cfg["audio.sample_rate"] = rc.get("audio.sample_rate");
  cfg["augment.enabled"] = rc.get_bool("augment.enabled") ? "true" : "false";
  cfg["data.unit"] = to_string(vocab.unit);
  cfg["data.vocab"] = nlohmann::json(vocab.tokens).dump();
  return cfg;
}

LoadedModel load_model(const RunConfig& rc, const fs::path& checkpoint) {
  Checkpoint ckpt = load_checkpoint(checkpoint);
  const auto field = [&](const std::string& key) -> const std::string& {
    const auto it = ckpt.config.find(key);
    if (it == ckpt.config.end()) {
      throw DataError(checkpoint.string() + ": checkpoint lacks '" + key + "'");
    }
    return it->second;
  };
  LoadedModel m;
  m.vocab.unit = parse_vocab_unit(field("data.unit"));
  try {
    m.vocab.tokens =
        nlohmann::json::parse(field("data.vocab")).get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(checkpoint.string() + ": bad vocabulary: " + e.what());
  }
  m.augment = field("augment.enabled") == "true";
  m.config = model_config_from_key_values(ckpt.config);

  const ModelConfig expected =
      model_config(rc, static_cast<int>(m.vocab.num_classes()));
  auto want = checkpoint_config(rc, expected, m.vocab);
  std::vector<std::string> mismatched;
  for (const auto& [k, v] : want) {
    if (k == "augment.enabled") continue;  // training-only setting
    const auto it = ckpt.config.find(k);
    if (it == ckpt.config.end() || it->second != v) mismatched.push_back(k);
  }
  if (!mismatched.empty()) {
    std::string keys;
    for (const auto& k : mismatched) keys += (keys.empty() ? "" : ", ") + k;
    throw DataError(checkpoint.string() +
                    ": checkpoint/config mismatch on " + keys);
  }
  check_params(m.config, ckpt.params);
  m.params = std::move(ckpt.params);
  return m;
}

void cmd_train(const RunConfig& rc, uint64_t seed, const TrainArgs& args,
               std::ostream& log) {
  const Manifest train_manifest = load_manifest(args.train_manifest);
  if (train_manifest.empty()) {
    throw DataError(args.train_manifest.string() + ": empty manifest");
  }
  const Vocabulary vocab =
      build_vocab(train_manifest, parse_vocab_unit(rc.get("data.unit")));
  const ModelConfig config =
      model_config(rc, static_cast<int>(vocab.num_classes()));

  const int rate = rc.get_int("audio.sample_rate");
  const FrameConfig frames = frame_config(rc);
  const auto train = prepare_utterances(train_manifest, vocab, frames, rate);
  std::vector<Utterance> dev;
  if (!args.dev_manifest.empty()) {
    dev = load_split(rc, args.dev_manifest, vocab);
  }
  check_feasible(config, train);
  check_feasible(config, dev);

  TrainOptions opt;
  opt.epochs = rc.get_int("optim.epochs");
  opt.batch_size = rc.get_int("optim.batch_size");
  opt.augment = rc.get_bool("augment.enabled");
  opt.policy = augment_policy(rc);
  opt.hp = opt_hyper(rc);
  if (opt.epochs < 0 || opt.batch_size < 1) {
    throw UsageError("optim.epochs must be >= 0 and optim.batch_size >= 1");
  }

  Rng master(seed);
  Rng init_rng = master.fork();
  Rng train_rng = master.fork();
  ParameterStore params = init_params(config, init_rng);

  fs::create_directories(args.out_dir);
  const auto ckpt_config = checkpoint_config(rc, config, vocab);
  save_checkpoint({ckpt_config, params}, args.out_dir / "init.ckpt");

  const fs::path log_path = args.out_dir / "train_log.csv";
  std::vector<LogRecord> all_records;
  const auto write_log = [&] {
    std::ofstream out(log_path, std::ios::trunc);
    out << format_log_csv(all_records);
    if (!out) throw DataError("cannot write " + log_path.string());
  };
  write_log();

  log << "training " << to_string(config.arch) << " (" << param_count(config)
      << " parameters) on " << train.size() << " utterances";
  if (!dev.empty()) log << ", dev " << dev.size();
  log << "\n";

  const std::string select_split = dev.empty() ? "train" : "dev";
  double best_wer = INFINITY;
  train_loop(config, params, train, dev, vocab, opt, train_rng,
             [&](int epoch, const ParameterStore& p,
                 const std::vector<LogRecord>& records) {
               all_records.insert(all_records.end(), records.begin(),
                                  records.end());
               write_log();
               save_checkpoint({ckpt_config, p}, args.out_dir / "last.ckpt");
               for (const auto& r : records) {
                 log << "epoch " << epoch << " " << r.split << " loss "
                     << r.loss << " wer " << format_wer(r.wer) << "\n";
                 if (r.split == select_split && r.wer < best_wer) {
                   best_wer = r.wer;
                   save_checkpoint({ckpt_config, p},
                                   args.out_dir / "best.ckpt");
                 }
               }
               return true;
             });
}

std::vector<EvalRow> cmd_eval(const RunConfig& rc, const EvalArgs& args,
                              std::ostream& out) {
  if (args.checkpoints.empty()) throw UsageError("no checkpoint given");
  const Manifest manifest = load_manifest(args.manifest);
  if (manifest.empty()) {
    throw DataError(args.manifest.string() + ": empty manifest");
  }
  std::vector<EvalRow> rows;
  for (const auto& path : args.checkpoints) {
    const LoadedModel m = load_model(rc, path);
    const auto utts = prepare_utterances(manifest, m.vocab, frame_config(rc),
                                         rc.get_int("audio.sample_rate"));
    check_feasible(m.config, utts);
    std::vector<std::pair<std::string, size_t>> decoders = {{"greedy", 0}};
    if (args.beam > 0) {
      decoders.emplace_back("beam" + std::to_string(args.beam), args.beam);
    }
    for (const auto& [name, width] : decoders) {
      const EvalResult r = evaluate(m.config, m.params, utts, m.vocab, width);
      rows.push_back(
          {to_string(m.config.arch), m.augment, name, utts.size(), r.wer()});
    }
  }

  // Model x augmentation table, one block per decoder.
  std::set<std::string> decoder_names;
  std::vector<std::string> archs;
  for (const auto& r : rows) {
    decoder_names.insert(r.decoder);
    if (std::find(archs.begin(), archs.end(), r.arch) == archs.end()) {
      archs.push_back(r.arch);
    }
  }
  for (const auto& dec : decoder_names) {
    char line[128];
    std::snprintf(line, sizeof line, "%-12s %-14s %-14s  (%s, WER)\n", "Model",
                  "No augment", "With augment", dec.c_str());
    out << line;
    for (const auto& arch : archs) {
      std::string cell[2] = {"-", "-"};
      for (const auto& r : rows) {
        if (r.arch == arch && r.decoder == dec) {
          cell[r.augment ? 1 : 0] = format_wer(r.wer);
        }
      }
      std::snprintf(line, sizeof line, "%-12s %-14s %-14s\n", arch.c_str(),
                    cell[0].c_str(), cell[1].c_str());
      out << line;
    }
  }

  if (!args.csv.empty()) {
    const bool fresh = !fs::exists(args.csv) || fs::file_size(args.csv) == 0;
    std::ofstream csv(args.csv, std::ios::app);
    if (fresh) csv << "model,augmentation,decoder,utterances,wer\n";
    for (const auto& r : rows) {
      csv << r.arch << "," << (r.augment ? "yes" : "no") << "," << r.decoder
          << "," << r.utterances << "," << format_wer(r.wer) << "\n";
    }
    if (!csv) throw DataError("cannot write " + args.csv.string());
  }
  return rows;
}

void cmd_transcribe(const RunConfig& rc, const fs::path& checkpoint,
                    const std::vector<fs::path>& wavs, size_t beam,
                    std::ostream& out) {
  const LoadedModel m = load_model(rc, checkpoint);
  const int rate = rc.get_int("audio.sample_rate");
  const FrameConfig frames = frame_config(rc);
  for (const auto& wav : wavs) {
    AudioClip clip = load_wav(wav);
    if (clip.sample_rate != rate) clip = resample_linear(clip, rate);
    const FeatureMatrix feats = featurize(clip, frames);
    const std::vector<Matrix> x = {feats.values};
    const auto logits = model_infer(m.config, m.params, x);
    const Matrix lp = log_softmax(logits.front());
    const DecodeResult d = beam > 0 ? beam_decode(lp, beam) : greedy_decode(lp);
    out << collapse_spaces(hypothesis_text(d.ids, m.vocab)) << "\n";
  }
}

}  // namespace asr
