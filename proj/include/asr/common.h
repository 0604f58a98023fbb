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

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace asr {

// Error categories map onto CLI exit codes: usage 1, data 2, numeric 3.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Seeded random source. Draws are built directly on the mt19937_64 bit
/// stream (whose output is fixed by the standard) so that sequences are
/// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  /// Uniform real in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in the closed range [lo, hi].
  int64_t uniform_int(int64_t lo, int64_t hi) {
    if (hi < lo) {
      throw std::invalid_argument("uniform_int: empty range");
    }
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    if (span == 0) {
      return static_cast<int64_t>(engine_());
    }
    const uint64_t limit = UINT64_MAX - (UINT64_MAX % span);
    uint64_t draw = engine_();
    while (draw >= limit) {
      draw = engine_();
    }
    return lo + static_cast<int64_t>(draw % span);
  }

  /// Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) {
      u1 = uniform();
    }
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Derives an independent stream, e.g. one per utterance or per purpose.
  Rng fork() { return Rng(engine_() ^ 0x9E3779B97F4A7C15ull); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace asr
