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
#include <map>
#include <string>
#include <vector>

#include "asr/dataset.h"

namespace asr {

inline constexpr int kDefaultSampleRate = 16000;

/// Mono waveform with samples in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = kDefaultSampleRate;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Throws DataError if a sample is non-finite or outside [-1, 1], or the
/// rate is not positive.
void validate(const AudioClip& clip);

/// Reads a RIFF/WAVE PCM16 mono file.
AudioClip load_wav(const std::filesystem::path& path);

/// Writes a canonical 44-byte-header PCM16 mono file. Samples are clamped
/// to [-1, 1], scaled by 32768, rounded to nearest and saturated to the
/// int16 range (so 1.0 is stored as 32767).
void save_wav(const AudioClip& clip, const std::filesystem::path& path);

/// Linear-interpolation resampler (no anti-aliasing filter).
AudioClip resample_linear(const AudioClip& clip, int target_rate);

struct Tone {
  double frequency = 0.0;  // Hz
  double duration = 0.0;   // seconds
};

/// Parameters of the synthetic tone corpus. Each transcript is a sequence of
/// vocabulary tokens joined by spaces; each token is rendered as a sine at
/// its tone frequency (shifted by a per-speaker offset), with silent gaps
/// between tokens.
struct SynthSpec {
  int n_utterances = 100;
  int min_tokens = 2;
  int max_tokens = 5;
  std::vector<std::string> vocabulary;
  std::map<std::string, Tone> tone_map;
  double noise_amplitude = 0.01;
  uint64_t seed = 0;

  int sample_rate = kDefaultSampleRate;
  int n_speakers = 10;
  double speaker_offset_hz = 10.0;
  double gap_duration = 0.05;
  double tone_amplitude = 0.5;
  /// FFT size used for the frequency-separation check.
  int n_fft = 512;
};

/// Tokens a..e at 400, 700, ..., 1600 Hz, 120 ms each.
SynthSpec default_synth_spec();

/// Throws DataError on a missing tone entry or two tones closer than two
/// FFT bins.
void validate(const SynthSpec& spec);

/// Renders one transcript (tokens separated by single spaces).
AudioClip synth_utterance(const SynthSpec& spec,
                          const std::vector<std::string>& tokens,
                          int speaker_index, Rng& rng);

/// Writes utt_NNNNN.wav files and manifest.jsonl into out_dir. Output is a
/// pure function of the spec. With zero utterances nothing is written.
Manifest synth_dataset(const SynthSpec& spec,
                       const std::filesystem::path& out_dir);

}  // namespace asr
