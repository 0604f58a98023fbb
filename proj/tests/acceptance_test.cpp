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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances and budgets are fixed below.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "asr/augment.h"
#include "asr/config.h"
#include "asr/ctc.h"
#include "asr/dataset.h"
#include "asr/features.h"
#include "asr/kernels.h"
#include "asr/metrics.h"
#include "asr/model.h"
#include "asr/train.h"
#include "oracles.h"
#include "test_util.h"

namespace asr {
namespace {

constexpr double kCtcOracleTol = 1e-9;
constexpr double kCtcOracleBudgetS = 60.0;
constexpr double kCtcGradTol = 1e-6;
constexpr double kModelGradTol = 1e-4;
constexpr double kGradBudgetS = 120.0;
constexpr double kMelRoundTripTol = 1e-9;
constexpr double kSmokeTargetWer = 0.05;
constexpr int kSmokeMaxEpochs = 200;
constexpr double kSmokeBudgetS = 600.0;
constexpr int kSmokeSeeds = 10;
constexpr int kSmokeSeedsRequired = 9;
constexpr int kSmokeUtterances = 20;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Collects failures; keeps the first few messages for the report.
class Check {
 public:
  void expect(bool cond, const std::string& what) {
    ++checks_;
    if (cond) return;
    ++failures_;
    if (messages_.size() < 3) messages_.push_back(what);
  }
  bool ok() const { return failures_ == 0; }
  std::string summary() const {
    std::ostringstream out;
    out << checks_ << " checks";
    if (failures_ > 0) {
      out << ", " << failures_ << " failed:";
      for (const auto& m : messages_) out << " [" << m << "]";
    }
    return out.str();
  }

 private:
  size_t checks_ = 0;
  size_t failures_ = 0;
  std::vector<std::string> messages_;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double rel_err(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

Matrix random_log_probs(size_t T, size_t S, std::mt19937_64& gen) {
  return oracle::log_normalize(test::random_matrix(T, S, gen, -3.0, 3.0));
}

// Every label sequence of length <= max_len over V symbols.
std::vector<std::vector<int>> all_labelings(int V, size_t max_len) {
  std::vector<std::vector<int>> out = {{}};
  for (size_t i = 0; i < out.size(); ++i) {
    if (out[i].size() == max_len) continue;
    for (int v = 0; v < V; ++v) {
      auto next = out[i];
      next.push_back(v);
      out.push_back(next);
    }
  }
  return out;
}

// 1. ctc_loss against brute-force path enumeration.
Outcome ctc_oracle() {
  const auto start = Clock::now();
  Check check;
  std::mt19937_64 gen(101);
  double worst = 0.0;
  size_t instances = 0;
  auto compare = [&](const Matrix& lp, int V) {
    const auto mass = oracle::labeling_marginals(lp);
    for (const auto& labels : all_labelings(V, 3)) {
      if (min_frames(labels) > lp.rows()) {
        bool threw = false;
        try {
          ctc_loss(lp, labels);
        } catch (const DataError&) {
          threw = true;
        }
        check.expect(threw, "infeasible labeling accepted");
        continue;
      }
      const auto it = mass.find(labels);
      const double want = it == mass.end() ? INFINITY : -std::log(it->second);
      const double got = ctc_loss(lp, labels).loss;
      const double err = std::abs(got - want);
      worst = std::max(worst, err);
      check.expect(err <= kCtcOracleTol, "loss mismatch");
      ++instances;
    }
  };
  // Grid: every (T, V) with uniform and peaked distributions and every
  // labeling; then 1000 random distributions spread over the grid.
  for (size_t T = 1; T <= 6; ++T) {
    for (int V = 1; V <= 3; ++V) {
      compare(oracle::log_normalize(Matrix(T, V + 1)), V);
      Matrix peaked(T, V + 1);
      for (size_t t = 0; t < T; ++t) peaked(t, t % (V + 1)) = 4.0;
      compare(oracle::log_normalize(peaked), V);
    }
  }
  for (int i = 0; i < 1000; ++i) {
    const size_t T = 1 + i % 6;
    const int V = 1 + (i / 6) % 3;
    compare(random_log_probs(T, V + 1, gen), V);
  }
  const double elapsed = seconds_since(start);
  check.expect(elapsed < kCtcOracleBudgetS, "over time budget");
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%zu (distribution, labeling) pairs, max |err| %.2e, %.1f s; ",
                instances, worst, elapsed);
  return {check.ok(), buf + check.summary()};
}

// Central differences of f around x, compared entrywise with `analytic`.
void fd_compare(const std::function<double(const std::vector<double>&)>& f,
                std::vector<double> x, const std::vector<double>& analytic,
                double h, double tol, double floor, const std::string& what,
                Check& check, double& worst) {
  for (size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double fp = f(x);
    x[i] = keep - h;
    const double fm = f(x);
    x[i] = keep;
    const double err = rel_err(analytic[i], (fp - fm) / (2 * h), floor);
    worst = std::max(worst, err);
    check.expect(err <= tol, what + " entry " + std::to_string(i));
  }
}

std::vector<double> flat(const Matrix& m) { return m.data(); }

Matrix from_flat(const std::vector<double>& v, size_t rows, size_t cols) {
  Matrix m(rows, cols);
  m.data() = v;
  return m;
}

double dot(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

ModelConfig tiny_model(Arch arch, double dropout) {
  ModelConfig c;
  c.arch = arch;
  c.n_mels = 3;
  c.n_classes = 3;
  c.repeats = 1;
  c.prologue = {4, 3, 1, 1, dropout};
  c.blocks = {{4, 3, 1, 1, dropout}};
  c.epilogue = {{4, 3, 1, 2, dropout}, {4, 1, 1, 1, dropout}};
  return c;
}

// 2. Analytic gradients against central differences.
Outcome gradients() {
  const auto start = Clock::now();
  Check check;
  std::mt19937_64 gen(202);
  double worst_ctc = 0.0, worst_layer = 0.0;

  for (int trial = 0; trial < 30; ++trial) {
    const size_t T = 2 + trial % 6;
    const int V = 1 + trial % 3;
    std::vector<int> labels;
    for (size_t l = 0; l < 1 + trial % 3; ++l) labels.push_back(static_cast<int>(gen() % V));
    while (min_frames(labels) > T) labels.pop_back();
    const Matrix logits = test::random_matrix(T, V + 1, gen, -2, 2);
    const CtcResult r = ctc_loss(log_softmax(logits), labels);
    fd_compare([&](const std::vector<double>& x) {
                 return ctc_loss(log_softmax(from_flat(x, T, V + 1)), labels).loss;
               },
               flat(logits), flat(r.grad), 1e-5, kCtcGradTol, 1e-3, "ctc_loss",
               check, worst_ctc);
  }

  // Dense convolution (strided and dilated): input, weight, bias.
  for (const kernels::ConvGeometry g :
       {kernels::ConvGeometry{3, 2, 3, 1, 1}, kernels::ConvGeometry{2, 3, 5, 2, 1},
        kernels::ConvGeometry{3, 3, 3, 1, 2}}) {
    const size_t T = 7;
    const Matrix x = test::random_matrix(g.in_channels, T, gen);
    const Matrix w = test::random_matrix(g.out_channels, g.in_channels * g.kernel, gen);
    const Matrix b = test::random_matrix(1, g.out_channels, gen);
    const Matrix dy = test::random_matrix(g.out_channels, g.out_length(T), gen);
    auto loss = [&](const Matrix& xx, const std::vector<double>& ww,
                    const std::vector<double>& bb) {
      Matrix y;
      kernels::conv1d_forward(xx, ww, bb, g, y);
      return dot(y, dy);
    };
    Matrix dx;
    std::vector<double> dw(w.size()), db(b.size());
    kernels::conv1d_backward(x, w.data(), dy, g, &dx, dw, db);
    fd_compare([&](const std::vector<double>& v) { return loss(from_flat(v, x.rows(), T), w.data(), b.data()); },
               flat(x), flat(dx), 1e-4, kModelGradTol, 1e-7, "conv dx", check, worst_layer);
    fd_compare([&](const std::vector<double>& v) { return loss(x, v, b.data()); },
               w.data(), dw, 1e-4, kModelGradTol, 1e-7, "conv dw", check, worst_layer);
    fd_compare([&](const std::vector<double>& v) { return loss(x, w.data(), v); },
               b.data(), db, 1e-4, kModelGradTol, 1e-7, "conv db", check, worst_layer);
  }

  // Depthwise convolution: input and weight.
  {
    const kernels::ConvGeometry g{4, 4, 5, 1, 2};
    const size_t T = 8;
    const Matrix x = test::random_matrix(4, T, gen);
    const Matrix w = test::random_matrix(4, 5, gen);
    const Matrix dy = test::random_matrix(4, T, gen);
    auto loss = [&](const Matrix& xx, const std::vector<double>& ww) {
      Matrix y;
      kernels::depthwise_forward(xx, ww, g, y);
      return dot(y, dy);
    };
    Matrix dx;
    std::vector<double> dw(w.size());
    kernels::depthwise_backward(x, w.data(), dy, g, &dx, dw);
    fd_compare([&](const std::vector<double>& v) { return loss(from_flat(v, 4, T), w.data()); },
               flat(x), flat(dx), 1e-4, kModelGradTol, 1e-7, "depthwise dx", check, worst_layer);
    fd_compare([&](const std::vector<double>& v) { return loss(x, v); }, w.data(), dw,
               1e-4, kModelGradTol, 1e-7, "depthwise dw", check, worst_layer);
  }

  // Batch norm over a two-item batch: input, gain, shift.
  {
    const Batch x = {test::random_matrix(3, 5, gen), test::random_matrix(3, 4, gen)};
    const Batch w = {test::random_matrix(3, 5, gen), test::random_matrix(3, 4, gen)};
    const std::vector<double> gain = {1.3, 0.6, -0.8}, shift = {0.2, -0.1, 0.0};
    auto loss = [&](const Batch& in, const std::vector<double>& gn,
                    const std::vector<double>& sh) {
      std::vector<double> rm(3), rv(3, 1.0);
      double tracked = 0.0;
      const Batch y = batchnorm_forward(in, gn, sh, rm, rv, tracked, Mode::kTrain, nullptr);
      return dot(y[0], w[0]) + dot(y[1], w[1]);
    };
    std::vector<double> rm(3), rv(3, 1.0), dgain(3), dshift(3);
    double tracked = 0.0;
    BatchNormCache cache;
    batchnorm_forward(x, gain, shift, rm, rv, tracked, Mode::kTrain, &cache);
    const Batch dx = batchnorm_backward(w, gain, cache, dgain, dshift);
    for (size_t b = 0; b < 2; ++b) {
      fd_compare([&](const std::vector<double>& v) {
                   Batch xx = x;
                   xx[b] = from_flat(v, 3, x[b].cols());
                   return loss(xx, gain, shift);
                 },
                 flat(x[b]), flat(dx[b]), 1e-4, kModelGradTol, 1e-7, "bn dx", check, worst_layer);
    }
    fd_compare([&](const std::vector<double>& v) { return loss(x, v, shift); }, gain, dgain,
               1e-4, kModelGradTol, 1e-7, "bn dgain", check, worst_layer);
    fd_compare([&](const std::vector<double>& v) { return loss(x, gain, v); }, shift, dshift,
               1e-4, kModelGradTol, 1e-7, "bn dshift", check, worst_layer);
  }

  // Composed tiny model (B=1, R=1, 4 channels, T=6) under CTC, both
  // architectures, with and without dropout. ReLU, residual, separable and
  // output layers are exercised here.
  const Matrix features = test::random_matrix(3, 6, gen);
  const std::vector<int> labels = {0, 1};
  for (Arch arch : {Arch::kJasper, Arch::kQuartzNet}) {
    for (double dropout : {0.0, 0.2}) {
      const ModelConfig c = tiny_model(arch, dropout);
      Rng init(7);
      ParameterStore params = init_params(c, init);
      for (auto& [name, t] : params) {
        if (name.ends_with(".gain")) {
          for (double& v : t.data) v = 0.5 + static_cast<double>(gen() % 1000) / 1000.0;
        } else if (name.ends_with(".shift") || name.ends_with(".bias")) {
          for (double& v : t.data) v = -0.5 + static_cast<double>(gen() % 1000) / 1000.0;
        }
      }
      auto loss_of = [&](ParameterStore p, ForwardCache* cache, Matrix* dlogits) {
        Rng r(99);
        const auto logits = model_forward(c, p, std::span(&features, 1), Mode::kTrain, &r, cache);
        const CtcResult res = ctc_loss(log_softmax(logits[0]), labels);
        if (dlogits) *dlogits = res.grad;
        return res.loss;
      };
      ForwardCache cache;
      Matrix dlogits;
      ParameterStore scratch = params;
      loss_of(scratch, &cache, &dlogits);
      const GradientStore grads = model_backward(c, params, cache, std::span(&dlogits, 1));
      for (const auto& [name, t] : params) {
        if (!is_trainable(name)) continue;
        fd_compare([&](const std::vector<double>& v) {
                     ParameterStore p = params;
                     p[name].data = v;
                     return loss_of(p, nullptr, nullptr);
                   },
                   t.data, grads.at(name).data, 1e-4, kModelGradTol, 1e-7,
                   to_string(arch) + " " + name, check, worst_layer);
      }
    }
  }

  const double elapsed = seconds_since(start);
  check.expect(elapsed < kGradBudgetS, "over time budget");
  char buf[160];
  std::snprintf(buf, sizeof(buf), "max rel err ctc %.2e, layers/model %.2e, %.1f s; ",
                worst_ctc, worst_layer, elapsed);
  return {check.ok(), buf + check.summary()};
}

// 3. Decoders against oracles.
Outcome decoders() {
  Check check;
  std::mt19937_64 gen(303);
  for (int i = 0; i < 1000; ++i) {
    const Matrix lp = random_log_probs(1 + i % 8, 2 + i % 4, gen);
    check.expect(greedy_decode(lp).ids == oracle::argmax_collapse(lp), "greedy");
  }
  size_t exhaustive = 0;
  for (size_t T = 1; T <= 4; ++T) {
    for (int V = 1; V <= 2; ++V) {
      for (int trial = 0; trial < 50; ++trial) {
        const Matrix lp = random_log_probs(T, V + 1, gen);
        const auto mass = oracle::labeling_marginals(lp);
        auto best = mass.begin();
        for (auto it = mass.begin(); it != mass.end(); ++it) {
          if (it->second > best->second) best = it;
        }
        const DecodeResult d = beam_decode(lp, 4096);
        check.expect(d.ids == best->first, "beam labeling");
        check.expect(std::abs(d.score - std::log(best->second)) <= 1e-9, "beam score");
        ++exhaustive;
      }
    }
  }
  // Monotonicity over the sweep 1, 2, 4, 8, 16; the paired 4-vs-1 comparison
  // is tallied separately.
  size_t sweep_violations = 0, paired_violations = 0;
  for (int i = 0; i < 200; ++i) {
    const Matrix lp = random_log_probs(4 + i % 8, 3 + i % 4, gen);
    double prev = -INFINITY;
    bool violated = false;
    for (size_t w : {1, 2, 4, 8, 16}) {
      const double s = beam_decode(lp, w).score;
      violated |= s < prev - 1e-12;
      prev = s;
    }
    sweep_violations += violated;
    check.expect(!violated, "beam score fell as width grew on instance " + std::to_string(i));
    paired_violations += beam_decode(lp, 4).score < beam_decode(lp, 1).score - 1e-12;
  }
  return {check.ok(), "1000 greedy, " + std::to_string(exhaustive) +
                          " exhaustive beam; width sweep non-monotone on " +
                          std::to_string(sweep_violations) + "/200, width 4 below width 1 on " +
                          std::to_string(paired_violations) + "/200; " + check.summary()};
}

// 4. WER decomposition against an independent Levenshtein DP.
Outcome wer_oracle() {
  Check check;
  std::mt19937_64 gen(404);
  std::uniform_int_distribution<int> len(0, 12), tok(0, 4);
  for (int i = 0; i < 10000; ++i) {
    std::vector<std::string> a(len(gen)), b(len(gen));
    for (auto& w : a) w = std::string(1, static_cast<char>('a' + tok(gen)));
    for (auto& w : b) w = std::string(1, static_cast<char>('a' + tok(gen)));
    const WerBreakdown r = edit_ops(a, b);
    check.expect(r.errors() == oracle::levenshtein(a, b), "distance");
    check.expect(r.substitutions + r.deletions + r.correct == a.size(), "N = S + D + C");
  }
  const WerBreakdown pidgin = edit_ops(
      "mosquito wey no dey hear word na im dey follow dead body enter grave",
      "muskito wey no dey hear word nam im dey follow dead body enter grae");
  check.expect(pidgin.substitutions == 3 && pidgin.deletions == 0 && pidgin.insertions == 0 &&
                   pidgin.reference_length == 14,
               "pidgin pair breakdown");
  check.expect(wer(pidgin) == 3.0 / 14.0, "pidgin pair WER");
  char buf[96];
  std::snprintf(buf, sizeof(buf), "pidgin pair (S,D,I,N) = (%zu,%zu,%zu,%zu); ",
                pidgin.substitutions, pidgin.deletions, pidgin.insertions,
                pidgin.reference_length);
  return {check.ok(), buf + check.summary()};
}

// 5. QuartzNet has fewer parameters than Jasper.
Outcome param_counts() {
  Check check;
  const size_t q = param_count(desk_config(Arch::kQuartzNet, 64, 6));
  const size_t j = param_count(desk_config(Arch::kJasper, 64, 6));
  check.expect(q < j, "desk config");
  std::mt19937_64 gen(505);
  for (int i = 0; i < 50; ++i) {
    ModelConfig c = desk_config(Arch::kJasper, 8 + gen() % 57, 2 + gen() % 30, 1 + gen() % 5);
    c.repeats = 1 + gen() % 3;
    for (auto& b : c.blocks) {
      b.channels = 2 + gen() % 63;
      b.kernel = 3 + 2 * (gen() % 12);
    }
    ModelConfig qc = c;
    qc.arch = Arch::kQuartzNet;
    check.expect(param_count(qc) < param_count(c), "random config " + std::to_string(i));
  }
  return {check.ok(), "desk " + std::to_string(q) + " vs " + std::to_string(j) +
                          ", 50 random configs; " + check.summary()};
}

// 6. Overfit smoke experiment.
Outcome smoke(const std::filesystem::path& scratch) {
  RunConfig rc;
  rc.set("audio.n_utterances", std::to_string(kSmokeUtterances));
  rc.set("model.blocks", "2");
  int converged = 0, decreasing = 0;
  std::ostringstream per_seed;
  for (int seed = 1; seed <= kSmokeSeeds; ++seed) {
    const auto start = Clock::now();
    const Manifest manifest =
        synth_dataset(synth_spec(rc, seed), scratch / ("smoke" + std::to_string(seed)));
    const Vocabulary vocab = build_vocab(manifest, VocabUnit::kChar);
    const auto utts = prepare_utterances(manifest, vocab, frame_config(rc),
                                         rc.get_int("audio.sample_rate"));
    const ModelConfig config = model_config(rc, static_cast<int>(vocab.num_classes()));
    Rng master(seed);
    Rng init_rng = master.fork();
    Rng train_rng = master.fork();
    ParameterStore params = init_params(config, init_rng);
    TrainOptions opt;
    opt.epochs = kSmokeMaxEpochs;
    opt.batch_size = rc.get_int("optim.batch_size");
    opt.hp = opt_hyper(rc);
    std::vector<double> curve;
    int reached = 0;
    train_loop(config, params, utts, {}, vocab, opt, train_rng,
               [&](int epoch, const ParameterStore&, const std::vector<LogRecord>& records) {
                 curve.push_back(records.at(0).wer);
                 if (records.at(0).wer <= kSmokeTargetWer) reached = epoch;
                 return reached == 0 && seconds_since(start) < kSmokeBudgetS;
               });
    const double elapsed = seconds_since(start);
    const bool ok = reached > 0 && elapsed <= kSmokeBudgetS && vocab.size() <= 6;
    const bool shape = curve.size() >= 3 && curve[1] < curve[0] && curve[2] < curve[1];
    converged += ok;
    decreasing += shape;
    char buf[160];
    std::snprintf(buf, sizeof(buf), " s%d:%s%.0fs first3=%.3f/%.3f/%.3f", seed,
                  reached ? ("e" + std::to_string(reached) + ",").c_str() : "none,", elapsed,
                  curve.size() > 0 ? curve[0] : NAN, curve.size() > 1 ? curve[1] : NAN,
                  curve.size() > 2 ? curve[2] : NAN);
    per_seed << buf;
  }
  const bool pass = converged >= kSmokeSeedsRequired && decreasing >= kSmokeSeedsRequired;
  return {pass, "WER <= 0.05 within " + std::to_string(kSmokeMaxEpochs) + " epochs: " +
                    std::to_string(converged) + "/10 seeds; strictly decreasing first 3 epochs: " +
                    std::to_string(decreasing) + "/10 seeds (need " +
                    std::to_string(kSmokeSeedsRequired) + " each);" + per_seed.str()};
}

// 7. SpecAugment identity and exact masking.
Outcome augmentation() {
  Check check;
  std::mt19937_64 gen(707);
  AugmentPolicy none;
  none.n_freq_masks = 0;
  none.n_time_masks = 0;
  for (int i = 0; i < 1000; ++i) {
    const FeatureMatrix f{test::random_matrix(1 + gen() % 20, 1 + gen() % 60, gen), FrameConfig{}};
    Rng rng(i);
    check.expect(spec_augment(f, none, rng).values == f.values, "zero-mask identity");
  }
  for (int i = 0; i < 1000; ++i) {
    const size_t M = 1 + gen() % 20, T = 1 + gen() % 60;
    const FeatureMatrix f{test::random_matrix(M, T, gen, 1.0, 2.0), FrameConfig{}};
    AugmentPolicy p;
    p.n_freq_masks = static_cast<int>(gen() % 3);
    p.max_freq_width = static_cast<int>(gen() % 10);
    p.n_time_masks = static_cast<int>(gen() % 3);
    p.max_time_width = static_cast<int>(gen() % 30);
    p.max_time_fraction = (gen() % 2) ? 1.0 : 0.1 + 0.1 * (gen() % 5);
    Rng rng(1000 + i), replay(1000 + i);
    const FeatureMatrix out = spec_augment(f, p, rng);
    // Independent replay of the draws: width ~ U{0..cap}, start ~ U{0..n-w}.
    const int64_t freq_cap = std::min<int64_t>(p.max_freq_width, M);
    int64_t time_cap = std::min<int64_t>(p.max_time_width, T);
    if (p.max_time_fraction < 1.0) {
      time_cap = std::min<int64_t>(time_cap, static_cast<int64_t>(p.max_time_fraction * T));
    }
    std::vector<bool> row_masked(M), col_masked(T);
    for (int k = 0; k < p.n_freq_masks; ++k) {
      const int64_t w = replay.uniform_int(0, freq_cap);
      const int64_t s = replay.uniform_int(0, static_cast<int64_t>(M) - w);
      for (int64_t r = s; r < s + w; ++r) row_masked[r] = true;
    }
    for (int k = 0; k < p.n_time_masks; ++k) {
      const int64_t w = replay.uniform_int(0, time_cap);
      const int64_t s = replay.uniform_int(0, static_cast<int64_t>(T) - w);
      for (int64_t t = s; t < s + w; ++t) col_masked[t] = true;
    }
    size_t masked_rows = 0, masked_cols = 0, want_rows = 0, want_cols = 0;
    for (size_t r = 0; r < M; ++r) {
      bool all_zero = true;
      for (size_t t = 0; t < T; ++t) {
        const bool masked = row_masked[r] || col_masked[t];
        const double v = out.values(r, t);
        check.expect(masked ? v == 0.0 : v == f.values(r, t), "masked entry");
        all_zero &= v == 0.0;
      }
      masked_rows += all_zero;
      want_rows += row_masked[r];
    }
    for (size_t t = 0; t < T; ++t) {
      bool all_zero = true;
      for (size_t r = 0; r < M; ++r) all_zero &= out.values(r, t) == 0.0;
      masked_cols += all_zero;
      want_cols += col_masked[t];
    }
    const bool everything = std::count(col_masked.begin(), col_masked.end(), true) ==
                                static_cast<ptrdiff_t>(T) ||
                            std::count(row_masked.begin(), row_masked.end(), true) ==
                                static_cast<ptrdiff_t>(M);
    if (!everything) {
      check.expect(masked_rows == want_rows, "masked row count");
      check.expect(masked_cols == want_cols, "masked column count");
    }
  }
  return {check.ok(), "1000 identity + 1000 masked matrices; " + check.summary()};
}

// 8. Front end.
Outcome front_end() {
  Check check;
  size_t cases = 0;
  for (int win : {16, 25, 64, 100, 400}) {
    for (int hop : {1, 7, 10, 64, 160}) {
      for (int extra : {0, 1, 2, 3, 5, 9, 15, 31, 99, 160, 161, 319, 400, 801, 1000, 4000,
                        4001, 5555, 7919, 10000}) {
        const size_t n = static_cast<size_t>(win + extra);
        const size_t want = 1 + (n - win) / hop;
        check.expect(frame_count(n, win, hop) == want, "frame_count");
        if (hop <= win && extra <= 1000) {
          FrameConfig cfg;
          cfg.win_length = win;
          cfg.hop_length = hop;
          cfg.n_fft = 512;
          AudioClip clip;
          clip.sample_rate = 16000;
          clip.samples.assign(n, 0.1);
          check.expect(stft_magnitude(clip, cfg).cols() == want, "stft frames");
        }
        ++cases;
      }
    }
  }
  double worst = 0.0;
  for (int i = 1; i <= 1000; ++i) {
    const double f = 8000.0 * i / 1000.0 + 0.37;
    const double err = std::abs(mel_to_hz(hz_to_mel(f)) - f) / f;
    worst = std::max(worst, err);
    check.expect(err <= kMelRoundTripTol, "mel round trip");
  }
  FrameConfig cfg;
  const FilterBank fb = mel_filterbank(cfg, 16000);
  for (size_t m = 0; m < fb.weights.rows(); ++m) {
    double peak = 0.0;
    for (double v : fb.weights.row(m)) {
      check.expect(v >= 0.0, "negative weight");
      peak = std::max(peak, v);
    }
    check.expect(peak > 0.0, "empty filter");
  }
  for (size_t k = 0; k < fb.weights.cols(); ++k) {
    const double f = k * 16000.0 / cfg.n_fft;
    if (f <= 0.0 || f >= 8000.0) continue;
    double total = 0.0;
    for (size_t m = 0; m < fb.weights.rows(); ++m) total += fb.weights(m, k);
    check.expect(total > 0.0, "uncovered bin " + std::to_string(k));
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%zu frame-count cases, max mel round-trip err %.1e; ", cases,
                worst);
  return {check.ok(), buf + check.summary()};
}

// 9. Speaker-disjoint splits.
Outcome splits() {
  Check check;
  std::mt19937_64 gen(909);
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const int n_speakers = std::uniform_int_distribution<int>(3, 20)(gen);
    const int n_utts = std::uniform_int_distribution<int>(n_speakers, 120)(gen);
    Manifest m;
    for (int u = 0; u < n_utts; ++u) {
      const int s = u < n_speakers ? u : std::uniform_int_distribution<int>(0, n_speakers - 1)(gen);
      m.push_back({"u" + std::to_string(u) + ".wav", 1.0, "u" + std::to_string(u),
                   "spk" + std::to_string(s), s % 2 ? Gender::kFemale : Gender::kMale});
    }
    const double train = std::uniform_real_distribution<double>(0.3, 0.8)(gen);
    const double dev = std::uniform_real_distribution<double>(0.2, 0.8)(gen) * (1.0 - train);
    const SpeakerSplit split = split_by_speaker(m, {train, dev, 1.0 - train - dev}, seed);
    std::map<std::string, int> owner;
    std::multiset<std::string> seen;
    int k = 0;
    for (const Manifest* part : {&split.train, &split.dev, &split.test}) {
      check.expect(!part->empty(), "empty split");
      for (const auto& e : *part) {
        const auto [it, fresh] = owner.emplace(e.speaker, k);
        check.expect(fresh || it->second == k, "speaker in two splits");
        seen.insert(e.audio_filepath);
      }
      ++k;
    }
    std::multiset<std::string> all;
    for (const auto& e : m) all.insert(e.audio_filepath);
    check.expect(seen == all, "utterances not conserved");
    check.expect(owner.size() == static_cast<size_t>(n_speakers), "speaker lost");

    Manifest ten;
    for (int s = 0; s < 10; ++s) {
      for (int u = 0; u < 1 + static_cast<int>(gen() % 5); ++u) {
        ten.push_back({"x.wav", 1.0, "a", "s" + std::to_string(s), Gender::kUnknown});
      }
    }
    const SpeakerSplit t = split_by_speaker(ten, {0.6, 0.2, 0.2}, seed);
    std::array<std::set<std::string>, 3> sets;
    for (const auto& e : t.train) sets[0].insert(e.speaker);
    for (const auto& e : t.dev) sets[1].insert(e.speaker);
    for (const auto& e : t.test) sets[2].insert(e.speaker);
    check.expect(sets[0].size() == 6 && sets[1].size() == 2 && sets[2].size() == 2, "6/2/2");
  }
  return {check.ok(), "100 seeds; " + check.summary()};
}

int run(const std::string& args) {
  const std::string cmd = std::string(ASR_BINARY) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 10. Bit-reproducible training through the CLI.
Outcome determinism(const std::filesystem::path& scratch) {
  Check check;
  const std::string d = scratch.string();
  const std::string common = "--seed 11 --threads 1 --set model.blocks=2 ";
  check.expect(run(common + "--set audio.n_utterances=20 synth-data --out " + d + "/det") == 0,
               "synth-data");
  for (const char* out : {"/runA", "/runB"}) {
    check.expect(run(common + "train --train " + d + "/det/train.jsonl --dev " + d +
                     "/det/dev.jsonl --epochs 4 --out " + d + out) == 0,
                 "train");
  }
  for (const char* f : {"best.ckpt", "train_log.csv", "last.ckpt"}) {
    const std::string a = test::read_file(scratch / "runA" / f);
    const std::string b = test::read_file(scratch / "runB" / f);
    check.expect(!a.empty() && a == b, std::string(f) + " differs");
  }
  return {check.ok(), "two single-threaded runs, seed 11; " + check.summary()};
}

}  // namespace
}  // namespace asr

int main() {
  using namespace asr;
  kernels::set_num_threads(1);
  test::TempDir scratch;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"ctc oracle equivalence", ctc_oracle},
      {"gradient checks", gradients},
      {"decoder oracles", decoders},
      {"WER oracle", wer_oracle},
      {"parameter count QuartzNet < Jasper", param_counts},
      {"overfit smoke test", [&] { return smoke(scratch.path()); }},
      {"augmentation identity and masking", augmentation},
      {"front end", front_end},
      {"split discipline", splits},
      {"determinism", [&] { return determinism(scratch.path()); }},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
