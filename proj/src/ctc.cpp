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

#include "asr/ctc.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "asr/common.h"

namespace asr {

double log_sum_exp(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

Matrix log_softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (size_t t = 0; t < logits.rows(); ++t) {
    const auto row = logits.row(t);
    const double hi = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - hi);
    const double log_z = hi + std::log(sum);
    for (size_t k = 0; k < row.size(); ++k) out(t, k) = row[k] - log_z;
  }
  return out;
}

size_t min_frames(std::span<const int> labels) {
  size_t n = labels.size();
  for (size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] == labels[i - 1]) ++n;
  }
  return n;
}

CtcResult ctc_loss(const Matrix& log_probs, std::span<const int> labels) {
  const size_t T = log_probs.rows();
  const size_t K = log_probs.cols();
  if (K < 2) {
    throw DataError("ctc_loss: need at least one label class plus blank");
  }
  const int blank = static_cast<int>(K) - 1;
  for (int l : labels) {
    if (l < 0 || l >= blank) {
      throw DataError("ctc_loss: label " + std::to_string(l) +
                      " outside [0, " + std::to_string(blank) + ")");
    }
  }
  const size_t needed = std::max<size_t>(min_frames(labels), 1);
  if (T < needed) {
    throw DataError("ctc_loss: infeasible target, " +
                    std::to_string(labels.size()) + " labels need at least " +
                    std::to_string(needed) + " frames but only " +
                    std::to_string(T) + " are available");
  }

  const size_t S = 2 * labels.size() + 1;
  std::vector<int> ext(S, blank);
  for (size_t i = 0; i < labels.size(); ++i) ext[2 * i + 1] = labels[i];
  // Whether state s may be entered directly from s - 2.
  std::vector<bool> skip(S, false);
  for (size_t s = 2; s < S; ++s) {
    skip[s] = ext[s] != blank && ext[s] != ext[s - 2];
  }

  Matrix alpha(T, S, kLogZero);
  alpha(0, 0) = log_probs(0, blank);
  if (S > 1) alpha(0, 1) = log_probs(0, ext[1]);
  for (size_t t = 1; t < T; ++t) {
    for (size_t s = 0; s < S; ++s) {
      double a = alpha(t - 1, s);
      if (s >= 1) a = log_sum_exp(a, alpha(t - 1, s - 1));
      if (skip[s]) a = log_sum_exp(a, alpha(t - 1, s - 2));
      alpha(t, s) = a == kLogZero ? kLogZero : a + log_probs(t, ext[s]);
    }
  }
  double log_p = alpha(T - 1, S - 1);
  if (S > 1) log_p = log_sum_exp(log_p, alpha(T - 1, S - 2));
  if (!std::isfinite(log_p)) {
    throw NumericError("ctc_loss: target has zero probability");
  }

  // beta(t, s): log-probability of completing the labelling from state s at
  // frame t, excluding frame t's own emission.
  Matrix beta(T, S, kLogZero);
  beta(T - 1, S - 1) = 0.0;
  if (S > 1) beta(T - 1, S - 2) = 0.0;
  for (size_t t = T - 1; t-- > 0;) {
    for (size_t s = 0; s < S; ++s) {
      double b = beta(t + 1, s) + log_probs(t + 1, ext[s]);
      if (s + 1 < S) {
        b = log_sum_exp(b, beta(t + 1, s + 1) + log_probs(t + 1, ext[s + 1]));
      }
      if (s + 2 < S && skip[s + 2]) {
        b = log_sum_exp(b, beta(t + 1, s + 2) + log_probs(t + 1, ext[s + 2]));
      }
      beta(t, s) = b;
    }
  }

  CtcResult result;
  result.loss = -log_p;
  result.grad = Matrix(T, K);
  for (size_t t = 0; t < T; ++t) {
    std::vector<double> occupancy(K, kLogZero);
    for (size_t s = 0; s < S; ++s) {
      occupancy[ext[s]] =
          log_sum_exp(occupancy[ext[s]], alpha(t, s) + beta(t, s));
    }
    for (size_t k = 0; k < K; ++k) {
      const double posterior =
          occupancy[k] == kLogZero ? 0.0 : std::exp(occupancy[k] - log_p);
      result.grad(t, k) = std::exp(log_probs(t, k)) - posterior;
    }
  }
  return result;
}

DecodeResult greedy_decode(const Matrix& log_probs) {
  const int blank = static_cast<int>(log_probs.cols()) - 1;
  DecodeResult result;
  int previous = -1;
  for (size_t t = 0; t < log_probs.rows(); ++t) {
    const auto row = log_probs.row(t);
    size_t best = 0;
    for (size_t k = 1; k < row.size(); ++k) {
      if (row[k] > row[best]) best = k;
    }
    result.score += row[best];
    const int id = static_cast<int>(best);
    if (id != blank && id != previous) {
      result.ids.push_back(id);
    }
    previous = id;
  }
  return result;
}

namespace {

struct PrefixScore {
  double blank = kLogZero;
  double non_blank = kLogZero;
  double total() const { return log_sum_exp(blank, non_blank); }
};

using Beam = std::map<std::vector<int>, PrefixScore>;

std::vector<std::pair<std::vector<int>, PrefixScore>> ranked(const Beam& beam) {
  std::vector<std::pair<std::vector<int>, PrefixScore>> items(beam.begin(),
                                                              beam.end());
  // std::map order is lexicographic, so a stable sort on score keeps the
  // smaller prefix first among equal scores.
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return a.second.total() > b.second.total();
  });
  return items;
}

}  // namespace

DecodeResult beam_decode(const Matrix& log_probs, size_t beam_width) {
  if (beam_width < 1) {
    throw std::invalid_argument("beam_decode: beam width must be >= 1");
  }
  const int blank = static_cast<int>(log_probs.cols()) - 1;
  Beam beam;
  beam[{}] = PrefixScore{0.0, kLogZero};

  for (size_t t = 0; t < log_probs.rows(); ++t) {
    Beam next;
    for (const auto& [prefix, score] : beam) {
      const double total = score.total();
      PrefixScore& stay = next[prefix];
      stay.blank = log_sum_exp(stay.blank, total + log_probs(t, blank));
      const int last = prefix.empty() ? -1 : prefix.back();
      for (int c = 0; c < blank; ++c) {
        const double p = log_probs(t, c);
        std::vector<int> extended = prefix;
        extended.push_back(c);
        PrefixScore& ext = next[extended];
        if (c == last) {
          // A repeat only extends the prefix across a blank.
          ext.non_blank = log_sum_exp(ext.non_blank, score.blank + p);
          PrefixScore& same = next[prefix];
          same.non_blank = log_sum_exp(same.non_blank, score.non_blank + p);
        } else {
          ext.non_blank = log_sum_exp(ext.non_blank, total + p);
        }
      }
    }
    auto items = ranked(next);
    if (items.size() > beam_width) items.resize(beam_width);
    beam = Beam(items.begin(), items.end());
  }

  const auto items = ranked(beam);
  return DecodeResult{items.front().first, items.front().second.total()};
}

}  // namespace asr
