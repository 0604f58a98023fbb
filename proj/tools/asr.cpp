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

// asr: synthetic-tone CTC speech recognition.
//
//   asr [--config FILE] [--seed N] [--threads N] [--set key=value]...
//       synth-data | featurize | train | eval | transcribe ...
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "asr/commands.h"
#include "asr/kernels.h"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convolutional CTC speech recognition on synthetic tone audio"};
  app.footer(asr::RunConfig::help_text());
  app.require_subcommand(1);

  std::string config_path;
  uint64_t seed = 0;
  int threads = 1;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "config file (section.key = value)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "random seed")->capture_default_str();
  app.add_option("--threads", threads, "OpenMP threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--set", overrides, "override a config key (key=value)");

  auto* synth = app.add_subcommand("synth-data", "generate a synthetic corpus");
  std::string synth_out;
  synth->add_option("--out", synth_out, "output directory")->required();

  auto* feat = app.add_subcommand("featurize", "WAV to FMX1 log-mel features");
  std::string feat_in, feat_out;
  feat->add_option("input", feat_in, "input WAV")->required();
  feat->add_option("output", feat_out, "output FMX1 file")->required();

  auto* train = app.add_subcommand("train", "train a model from scratch");
  asr::TrainArgs train_args;
  std::string train_manifest, dev_manifest, train_out;
  int epochs = -1;
  train->add_option("--train", train_manifest, "train manifest")->required();
  train->add_option("--dev", dev_manifest, "dev manifest");
  train->add_option("--out", train_out, "output directory")->required();
  train->add_option("--epochs", epochs, "overrides optim.epochs")
      ->check(CLI::NonNegativeNumber);
  std::string arch;
  train->add_option("--arch", arch, "overrides model.arch")
      ->check(CLI::IsMember({"jasper", "quartznet"}));
  std::optional<bool> augment;
  train->add_flag("--augment,!--no-augment", augment,
                  "overrides augment.enabled");

  auto* eval = app.add_subcommand("eval", "WER of checkpoints on a manifest");
  std::vector<std::string> eval_ckpts;
  std::string eval_manifest, eval_csv;
  size_t eval_beam = 0;
  eval->add_option("--checkpoint", eval_ckpts, "checkpoint (repeatable)")
      ->required();
  eval->add_option("--manifest", eval_manifest, "manifest to score")
      ->required();
  eval->add_option("--beam", eval_beam, "also decode with this beam width");
  eval->add_option("--csv", eval_csv, "append result rows to this CSV");

  auto* tr = app.add_subcommand("transcribe", "print transcripts of WAV files");
  std::string tr_ckpt;
  std::vector<std::string> tr_wavs;
  size_t tr_beam = 0;
  tr->add_option("--checkpoint", tr_ckpt, "checkpoint")->required();
  tr->add_option("--beam", tr_beam, "beam width (0 = greedy)");
  tr->add_option("wavs", tr_wavs, "input WAV files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    asr::RunConfig rc;
    if (!config_path.empty()) rc.load_file(config_path);
    for (const auto& o : overrides) rc.apply_override(o);
    asr::kernels::set_num_threads(threads);

    if (synth->parsed()) {
      asr::cmd_synth_data(rc, seed, synth_out, std::cerr);
    } else if (feat->parsed()) {
      asr::cmd_featurize(rc, feat_in, feat_out);
    } else if (train->parsed()) {
      if (epochs >= 0) rc.set("optim.epochs", std::to_string(epochs));
      if (!arch.empty()) rc.set("model.arch", arch);
      if (augment) rc.set("augment.enabled", *augment ? "true" : "false");
      train_args.train_manifest = train_manifest;
      train_args.dev_manifest = dev_manifest;
      train_args.out_dir = train_out;
      asr::cmd_train(rc, seed, train_args, std::cerr);
    } else if (eval->parsed()) {
      asr::EvalArgs args;
      args.checkpoints.assign(eval_ckpts.begin(), eval_ckpts.end());
      args.manifest = eval_manifest;
      args.beam = eval_beam;
      args.csv = eval_csv;
      asr::cmd_eval(rc, args, std::cout);
    } else if (tr->parsed()) {
      std::vector<std::filesystem::path> wavs(tr_wavs.begin(), tr_wavs.end());
      asr::cmd_transcribe(rc, tr_ckpt, wavs, tr_beam, std::cout);
    }
  } catch (const asr::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const asr::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const asr::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
