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

#include "asr/features.h"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <mutex>

namespace asr {
namespace {

// FFTW's planner is not thread-safe; execution with a fixed plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

std::vector<double> make_window(const FrameConfig& cfg) {
  std::vector<double> w(cfg.win_length, 1.0);
  if (cfg.window == WindowType::kHann) {
    // Periodic Hann.
    for (int n = 0; n < cfg.win_length; ++n) {
      w[n] = 0.5 - 0.5 * std::cos(2.0 * M_PI * n / cfg.win_length);
    }
  }
  return w;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

uint32_t get_u32(const char* p) {
  uint32_t v = 0;
  for (int i = 3; i >= 0; --i) {
    v = (v << 8) | static_cast<unsigned char>(p[i]);
  }
  return v;
}

}  // namespace

std::string to_string(WindowType w) {
  return w == WindowType::kHann ? "hann" : "rectangular";
}

WindowType parse_window(const std::string& s) {
  if (s == "hann") return WindowType::kHann;
  if (s == "rectangular") return WindowType::kRectangular;
  throw UsageError("invalid window '" + s + "' (expected hann or rectangular)");
}

void validate(const FrameConfig& cfg, int sample_rate) {
  if (cfg.hop_length < 1 || cfg.hop_length > cfg.win_length ||
      cfg.win_length > cfg.n_fft) {
    throw UsageError("frame config requires 1 <= hop <= win <= n_fft");
  }
  if (!is_power_of_two(cfg.n_fft)) {
    throw UsageError("n_fft must be a power of two");
  }
  if (cfg.n_mels < 1) {
    throw UsageError("n_mels must be positive");
  }
  const double f_max = cfg.resolved_f_max(sample_rate);
  if (cfg.f_min < 0.0 || cfg.f_min >= f_max || f_max > sample_rate / 2.0) {
    throw UsageError("band limits require 0 <= f_min < f_max <= rate/2");
  }
  if (!(cfg.log_epsilon > 0.0)) {
    throw UsageError("log_epsilon must be positive");
  }
}

size_t frame_count(size_t n_samples, int win_length, int hop_length) {
  const auto win = static_cast<size_t>(win_length);
  if (n_samples < win) {
    return 0;
  }
  return 1 + (n_samples - win) / static_cast<size_t>(hop_length);
}

double hz_to_mel(double hz) {
  if (hz < 0.0) {
    throw std::invalid_argument("hz_to_mel: negative frequency");
  }
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

Matrix stft_magnitude(const AudioClip& clip, const FrameConfig& cfg) {
  validate(cfg, clip.sample_rate);
  const size_t n_frames =
      frame_count(clip.samples.size(), cfg.win_length, cfg.hop_length);
  if (n_frames == 0) {
    throw DataError("clip of " + std::to_string(clip.samples.size()) +
                    " samples is shorter than one window (" +
                    std::to_string(cfg.win_length) + ")");
  }
  const auto n_fft = static_cast<size_t>(cfg.n_fft);
  const size_t n_bins = n_fft / 2 + 1;

  std::unique_ptr<double, FftwFree> in(
      static_cast<double*>(fftw_malloc(sizeof(double) * n_fft)));
  std::unique_ptr<fftw_complex, FftwFree> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_bins)));
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(cfg.n_fft, in.get(), out.get(), FFTW_ESTIMATE);
  }

  const auto window = make_window(cfg);
  Matrix mag(n_bins, n_frames);
  for (size_t t = 0; t < n_frames; ++t) {
    const size_t start = t * static_cast<size_t>(cfg.hop_length);
    std::memset(in.get(), 0, sizeof(double) * n_fft);
    for (int n = 0; n < cfg.win_length; ++n) {
      in.get()[n] = clip.samples[start + n] * window[n];
    }
    fftw_execute(plan);
    for (size_t k = 0; k < n_bins; ++k) {
      mag(k, t) = std::hypot(out.get()[k][0], out.get()[k][1]);
    }
  }
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return mag;
}

FilterBank mel_filterbank(const FrameConfig& cfg, int sample_rate) {
  validate(cfg, sample_rate);
  const size_t n_bins = static_cast<size_t>(cfg.n_fft) / 2 + 1;
  const double bin_hz = static_cast<double>(sample_rate) / cfg.n_fft;
  const double mel_lo = hz_to_mel(cfg.f_min);
  const double mel_hi = hz_to_mel(cfg.resolved_f_max(sample_rate));

  // n_mels + 2 points: lower edge, centers, upper edge.
  std::vector<double> points(cfg.n_mels + 2);
  for (size_t i = 0; i < points.size(); ++i) {
    points[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                       (cfg.n_mels + 1));
  }
  for (size_t i = 1; i < points.size(); ++i) {
    if (std::lround(points[i] / bin_hz) == std::lround(points[i - 1] / bin_hz)) {
      throw UsageError("n_mels=" + std::to_string(cfg.n_mels) +
                       " is too large for n_fft=" + std::to_string(cfg.n_fft) +
                       ": two filter points fall in the same FFT bin");
    }
  }

  FilterBank fb;
  fb.weights = Matrix(cfg.n_mels, n_bins);
  fb.centers_hz.assign(points.begin() + 1, points.end() - 1);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double lo = points[m];
    const double center = points[m + 1];
    const double hi = points[m + 2];
    for (size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      const double rise = (f - lo) / (center - lo);
      const double fall = (hi - f) / (hi - center);
      fb.weights(m, k) = std::max(0.0, std::min(rise, fall));
    }
  }
  return fb;
}

FeatureMatrix log_mel(const AudioClip& clip, const FrameConfig& cfg) {
  const Matrix mag = stft_magnitude(clip, cfg);
  const FilterBank fb = mel_filterbank(cfg, clip.sample_rate);
  FeatureMatrix out{Matrix(fb.weights.rows(), mag.cols()), cfg};
  for (size_t m = 0; m < fb.weights.rows(); ++m) {
    const auto w = fb.weights.row(m);
    for (size_t t = 0; t < mag.cols(); ++t) {
      double energy = 0.0;
      for (size_t k = 0; k < w.size(); ++k) {
        if (w[k] != 0.0) {
          const double a = mag(k, t);
          energy += w[k] * a * a;
        }
      }
      out.values(m, t) = std::log(energy + cfg.log_epsilon);
    }
  }
  return out;
}

FeatureMatrix normalize(const FeatureMatrix& features) {
  FeatureMatrix out = features;
  const size_t n = features.n_frames();
  if (n == 0) {
    throw DataError("normalize: feature matrix has no frames");
  }
  for (size_t r = 0; r < out.values.rows(); ++r) {
    auto row = out.values.row(r);
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (double& v : row) {
      v -= mean;
      if (sd >= 1e-8) v /= sd;
    }
  }
  return out;
}

FeatureMatrix featurize(const AudioClip& clip, const FrameConfig& cfg) {
  return normalize(log_mel(clip, cfg));
}

void write_fmx(const FeatureMatrix& features,
               const std::filesystem::path& path) {
  std::string out = "FMX1";
  put_u32(out, static_cast<uint32_t>(features.n_mels()));
  put_u32(out, static_cast<uint32_t>(features.n_frames()));
  for (double v : features.values.data()) {
    const float f = static_cast<float>(v);
    uint32_t bits;
    std::memcpy(&bits, &f, sizeof(bits));
    put_u32(out, bits);
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw DataError("cannot write feature file '" + path.string() + "'");
  }
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
}

Matrix read_fmx(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open feature file '" + path.string() + "'");
  }
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  if (buf.size() < 12 || buf.compare(0, 4, "FMX1") != 0) {
    throw DataError("not an FMX1 file: '" + path.string() + "'");
  }
  const uint32_t rows = get_u32(buf.data() + 4);
  const uint32_t cols = get_u32(buf.data() + 8);
  if (buf.size() != 12 + 4ull * rows * cols) {
    throw DataError("truncated FMX1 file: '" + path.string() + "'");
  }
  Matrix m(rows, cols);
  for (size_t i = 0; i < m.size(); ++i) {
    const uint32_t bits = get_u32(buf.data() + 12 + 4 * i);
    float f;
    std::memcpy(&f, &bits, sizeof(f));
    m.data()[i] = f;
  }
  return m;
}

}  // namespace asr
