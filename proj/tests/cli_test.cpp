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

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <set>

#include "asr/config.h"
#include "asr/dataset.h"
#include "test_util.h"

namespace asr {
namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome run(const std::string& args, const test::TempDir& dir) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string(ASR_BINARY) + " " + args + " >" +
                          out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Outcome r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = test::read_file(out);
  r.err = test::read_file(err);
  return r;
}

std::set<std::string> speakers(const Manifest& m) {
  std::set<std::string> s;
  for (const auto& e : m) s.insert(e.speaker);
  return s;
}

class CliTest : public ::testing::Test {
 protected:
  // Small shared corpus plus a briefly trained model.
  static void SetUpTestSuite() {
    dir_ = new test::TempDir;
    const std::string d = dir_->path().string();
    ASSERT_EQ(run("--seed 3 --set audio.n_utterances=30 synth-data --out " + d + "/data",
                  *dir_).code, 0);
    ASSERT_EQ(run("--seed 3 --set model.blocks=2 train --train " + d +
                      "/data/train.jsonl --dev " + d + "/data/dev.jsonl --epochs 2 --out " +
                      d + "/run",
                  *dir_).code, 0);
  }
  static void TearDownTestSuite() { delete dir_; }
  static std::string path(const std::string& rel) { return (*dir_ / rel).string(); }

  static test::TempDir* dir_;
};

test::TempDir* CliTest::dir_ = nullptr;

TEST_F(CliTest, HelpListsEveryKeyWithDefault) {
  const Outcome r = run("--help", *dir_);
  EXPECT_EQ(r.code, 0);
  for (const auto& e : RunConfig::schema()) {
    EXPECT_NE(r.out.find(e.key + " (") , std::string::npos) << e.key;
  }
  for (const char* cmd : {"synth-data", "featurize", "train", "eval", "transcribe"}) {
    EXPECT_NE(r.out.find(cmd), std::string::npos) << cmd;
  }
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run("", *dir_).code, 1);
  EXPECT_EQ(run("frobnicate", *dir_).code, 1);
  EXPECT_EQ(run("--config /nonexistent.cfg synth-data --out x", *dir_).code, 1);
  const Outcome r = run("--set model.colour=red synth-data --out " + path("x"), *dir_);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("model.colour"), std::string::npos);
  EXPECT_EQ(run("--threads 0 synth-data --out x", *dir_).code, 1);
  EXPECT_EQ(run("train --train a.jsonl", *dir_).code, 1);
}

TEST_F(CliTest, SynthDataSplitsSixTwoTwoAndIsDeterministic) {
  const Manifest train = load_manifest(path("data/train.jsonl"));
  const Manifest dev = load_manifest(path("data/dev.jsonl"));
  const Manifest test_split = load_manifest(path("data/test.jsonl"));
  EXPECT_EQ(speakers(train).size(), 6u);
  EXPECT_EQ(speakers(dev).size(), 2u);
  EXPECT_EQ(speakers(test_split).size(), 2u);
  EXPECT_EQ(train.size() + dev.size() + test_split.size(), 30u);
  std::set<std::string> all = speakers(train);
  for (const auto& s : speakers(dev)) EXPECT_TRUE(all.insert(s).second);
  for (const auto& s : speakers(test_split)) EXPECT_TRUE(all.insert(s).second);

  ASSERT_EQ(run("--seed 3 --set audio.n_utterances=30 synth-data --out " + path("again"),
                *dir_).code, 0);
  ASSERT_EQ(run("--seed 4 --set audio.n_utterances=30 synth-data --out " + path("other"),
                *dir_).code, 0);
  for (const char* f : {"train.jsonl", "dev.jsonl", "test.jsonl", "utt_00000.wav"}) {
    EXPECT_EQ(test::read_file(*dir_ / ("again/" + std::string(f))),
              test::read_file(*dir_ / ("data/" + std::string(f))))
        << f;
  }
  EXPECT_NE(test::read_file(*dir_ / "other/utt_00000.wav"),
            test::read_file(*dir_ / "data/utt_00000.wav"));
}

TEST_F(CliTest, TrainWritesLogAndCheckpoints) {
  const std::string log = test::read_file(*dir_ / "run/train_log.csv");
  EXPECT_EQ(log.rfind("epoch,split,loss,wer\n1,train,", 0), 0u);
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 5);
  EXPECT_NE(log.find("\n2,dev,"), std::string::npos);
  for (const char* f : {"init.ckpt", "last.ckpt", "best.ckpt"}) {
    EXPECT_TRUE(std::filesystem::exists(*dir_ / ("run/" + std::string(f)))) << f;
  }
}

TEST_F(CliTest, ZeroEpochsAndArchitectureSizes) {
  for (const char* arch : {"jasper", "quartznet"}) {
    const Outcome r = run("--set model.blocks=2 train --train " + path("data/train.jsonl") +
                          " --epochs 0 --arch " + arch + " --out " + path(std::string("zero_") + arch),
                      *dir_);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(test::read_file(*dir_ / (std::string("zero_") + arch + "/train_log.csv")),
              "epoch,split,loss,wer\n");
    EXPECT_FALSE(std::filesystem::exists(*dir_ / (std::string("zero_") + arch + "/last.ckpt")));
  }
  EXPECT_LT(std::filesystem::file_size(*dir_ / "zero_quartznet/init.ckpt"),
            std::filesystem::file_size(*dir_ / "zero_jasper/init.ckpt"));
}

TEST_F(CliTest, EvalPrintsTableAndAppendsCsv) {
  const std::string base = "--set model.blocks=2 eval --checkpoint " + path("run/best.ckpt") +
                           " --manifest " + path("data/test.jsonl") + " --csv " + path("wer.csv");
  Outcome r = run(base, *dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("quartznet"), std::string::npos) << r.out;
  r = run(base + " --beam 4", *dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = test::read_file(*dir_ / "wer.csv");
  EXPECT_EQ(csv.rfind("model,augmentation,decoder,utterances,wer\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_NE(csv.find("beam4"), std::string::npos) << csv;
}

TEST_F(CliTest, DataErrorsExitTwo) {
  test::write_file(*dir_ / "empty.jsonl", "");
  Outcome r = run("--set model.blocks=2 eval --checkpoint " + path("run/best.ckpt") +
                  " --manifest " + path("empty.jsonl"),
              *dir_);
  EXPECT_EQ(r.code, 2);
  r = run("--set model.blocks=3 eval --checkpoint " + path("run/best.ckpt") +
              " --manifest " + path("data/test.jsonl"),
          *dir_);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("mismatch"), std::string::npos) << r.err;
  test::write_file(*dir_ / "broken.jsonl",
                   test::read_file(*dir_ / "data/train.jsonl") + "{oops\n");
  r = run("train --train " + path("broken.jsonl") + " --out " + path("broken"), *dir_);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("broken.jsonl:"), std::string::npos) << r.err;
  r = run("--set model.blocks=2 transcribe --checkpoint " + path("run/best.ckpt") + " " +
              path("nothing.wav"),
          *dir_);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("nothing.wav"), std::string::npos) << r.err;
}

TEST_F(CliTest, TranscribeAndFeaturize) {
  const Outcome r = run("--set model.blocks=2 transcribe --checkpoint " + path("run/best.ckpt") +
                        " " + path("data/utt_00001.wav") + " " + path("data/utt_00000.wav"),
                    *dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 2);
  ASSERT_EQ(run("featurize " + path("data/utt_00000.wav") + " " + path("u0.fmx"), *dir_).code,
            0);
  EXPECT_EQ(test::read_file(*dir_ / "u0.fmx").substr(0, 4), "FMX1");
}

}  // namespace
}  // namespace asr
