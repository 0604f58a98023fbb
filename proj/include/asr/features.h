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

#include <filesystem>

#include "asr/audio_io.h"
#include "asr/tensor.h"

namespace asr {

enum class WindowType { kHann, kRectangular };

std::string to_string(WindowType w);
WindowType parse_window(const std::string& s);

/// Framing and mel-filterbank parameters. Frames are not centered: frame t
/// covers samples [t * hop_length, t * hop_length + win_length).
struct FrameConfig {
  int win_length = 400;
  int hop_length = 160;
  int n_fft = 512;
  WindowType window = WindowType::kHann;
  int n_mels = 64;
  double f_min = 0.0;
  /// Upper band edge; a value <= 0 means sample_rate / 2.
  double f_max = 0.0;
  double log_epsilon = 1e-10;

  double resolved_f_max(int sample_rate) const {
    return f_max > 0.0 ? f_max : sample_rate / 2.0;
  }
};

/// Throws UsageError when the framing or band limits are inconsistent.
void validate(const FrameConfig& cfg, int sample_rate);

/// 1 + floor((n_samples - win) / hop), or 0 when the clip is shorter than a
/// window.
size_t frame_count(size_t n_samples, int win_length, int hop_length);

/// HTK mel scale: 2595 * log10(1 + f / 700).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// One-sided DFT magnitudes, (n_fft/2 + 1) x n_frames.
Matrix stft_magnitude(const AudioClip& clip, const FrameConfig& cfg);

struct FilterBank {
  Matrix weights;  // n_mels x (n_fft/2 + 1)
  std::vector<double> centers_hz;
};

/// Triangular filters with centers equally spaced on the mel axis. Throws
/// UsageError when two filter centers round to the same FFT bin.
FilterBank mel_filterbank(const FrameConfig& cfg, int sample_rate);

/// Log-mel spectrogram, n_mels x n_frames.
struct FeatureMatrix {
  Matrix values;
  FrameConfig meta;

  size_t n_mels() const { return values.rows(); }
  size_t n_frames() const { return values.cols(); }
};

/// ln(filterbank * |STFT|^2 + log_epsilon).
FeatureMatrix log_mel(const AudioClip& clip, const FrameConfig& cfg);

/// Per-row standardization to zero mean and unit population deviation.
/// Rows with deviation below 1e-8 are only centered.
FeatureMatrix normalize(const FeatureMatrix& features);

/// log_mel followed by normalize; the model input.
FeatureMatrix featurize(const AudioClip& clip, const FrameConfig& cfg);

/// FMX1 binary format: "FMX1", u32 n_mels, u32 n_frames (little-endian),
/// then row-major float32 values.
void write_fmx(const FeatureMatrix& features, const std::filesystem::path& path);
Matrix read_fmx(const std::filesystem::path& path);

}  // namespace asr
