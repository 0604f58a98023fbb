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

#include "asr/audio_io.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace asr {
namespace {

uint32_t read_u32(const std::vector<char>& buf, size_t pos) {
  return static_cast<uint32_t>(static_cast<unsigned char>(buf[pos])) |
         static_cast<uint32_t>(static_cast<unsigned char>(buf[pos + 1])) << 8 |
         static_cast<uint32_t>(static_cast<unsigned char>(buf[pos + 2])) << 16 |
         static_cast<uint32_t>(static_cast<unsigned char>(buf[pos + 3])) << 24;
}

uint16_t read_u16(const std::vector<char>& buf, size_t pos) {
  return static_cast<uint16_t>(
      static_cast<unsigned char>(buf[pos]) |
      static_cast<unsigned char>(buf[pos + 1]) << 8);
}

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

void put_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

}  // namespace

void validate(const AudioClip& clip) {
  if (clip.sample_rate <= 0) {
    throw DataError("audio: sample rate must be positive");
  }
  for (size_t i = 0; i < clip.samples.size(); ++i) {
    const double s = clip.samples[i];
    if (!std::isfinite(s) || s < -1.0 || s > 1.0) {
      throw DataError("audio: sample " + std::to_string(i) +
                      " is non-finite or outside [-1, 1]");
    }
  }
}

AudioClip load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open WAV file '" + path.string() + "'");
  }
  std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  const std::string where = " in '" + path.string() + "'";
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0) {
    throw DataError("not a RIFF/WAVE file" + where);
  }

  bool have_fmt = false;
  int sample_rate = 0;
  size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const std::string id(buf.data() + pos, 4);
    const uint32_t size = read_u32(buf, pos + 4);
    const size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + 16 > buf.size()) {
        throw DataError("truncated fmt chunk" + where);
      }
      const uint16_t format = read_u16(buf, body);
      const uint16_t channels = read_u16(buf, body + 2);
      sample_rate = static_cast<int>(read_u32(buf, body + 4));
      const uint16_t bits = read_u16(buf, body + 14);
      if (format != 1) {
        throw DataError("unsupported WAV encoding (PCM required)" + where);
      }
      if (channels != 1) {
        throw DataError("unsupported channel count " +
                        std::to_string(channels) + " (mono required)" + where);
      }
      if (bits != 16) {
        throw DataError("unsupported bit depth " + std::to_string(bits) +
                        " (16-bit required)" + where);
      }
      if (sample_rate <= 0) {
        throw DataError("invalid sample rate" + where);
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) {
        throw DataError("data chunk before fmt chunk" + where);
      }
      if (body + size > buf.size() || size % 2 != 0) {
        throw DataError("truncated data chunk" + where);
      }
      if (size == 0) {
        throw DataError("empty audio" + where);
      }
      AudioClip clip;
      clip.sample_rate = sample_rate;
      clip.samples.resize(size / 2);
      for (size_t i = 0; i < clip.samples.size(); ++i) {
        const auto raw = static_cast<int16_t>(read_u16(buf, body + 2 * i));
        clip.samples[i] = static_cast<double>(raw) / 32768.0;
      }
      return clip;
    }
    pos = body + size + (size & 1);
  }
  throw DataError((have_fmt ? "missing data chunk" : "missing fmt chunk") +
                  where);
}

void save_wav(const AudioClip& clip, const std::filesystem::path& path) {
  if (clip.sample_rate <= 0) {
    throw DataError("audio: sample rate must be positive");
  }
  const auto n = static_cast<uint32_t>(clip.samples.size());
  std::string out;
  out.reserve(44 + 2 * static_cast<size_t>(n));
  out += "RIFF";
  put_u32(out, 36 + 2 * n);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<uint32_t>(clip.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, 2 * n);
  for (double s : clip.samples) {
    if (!std::isfinite(s)) {
      throw DataError("audio: non-finite sample");
    }
    const double clamped = std::clamp(s, -1.0, 1.0);
    // Full-scale 1.0 saturates at 32767.
    const auto q = static_cast<int16_t>(
        std::clamp(std::lround(clamped * 32768.0), -32768L, 32767L));
    put_u16(out, static_cast<uint16_t>(q));
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw DataError("cannot write WAV file '" + path.string() + "'");
  }
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) {
    throw DataError("write failed for '" + path.string() + "'");
  }
}

AudioClip resample_linear(const AudioClip& clip, int target_rate) {
  if (target_rate <= 0) {
    throw std::invalid_argument("resample_linear: target rate must be > 0");
  }
  if (target_rate == clip.sample_rate) {
    return clip;
  }
  AudioClip out;
  out.sample_rate = target_rate;
  const size_t n = clip.samples.size();
  const auto out_len = static_cast<size_t>(std::llround(
      static_cast<double>(n) * target_rate / clip.sample_rate));
  out.samples.resize(out_len);
  const double step = static_cast<double>(clip.sample_rate) / target_rate;
  for (size_t j = 0; j < out_len; ++j) {
    const double p = static_cast<double>(j) * step;
    const auto i0 = std::min(static_cast<size_t>(p), n - 1);
    const size_t i1 = std::min(i0 + 1, n - 1);
    const double frac = p - static_cast<double>(i0);
    const double x0 = clip.samples[i0];
    out.samples[j] = x0 + frac * (clip.samples[i1] - x0);
  }
  return out;
}

SynthSpec default_synth_spec() {
  SynthSpec spec;
  spec.vocabulary = {"a", "b", "c", "d", "e"};
  for (size_t i = 0; i < spec.vocabulary.size(); ++i) {
    spec.tone_map[spec.vocabulary[i]] = Tone{400.0 + 300.0 * i, 0.12};
  }
  return spec;
}

void validate(const SynthSpec& spec) {
  if (spec.n_utterances < 0) {
    throw DataError("synth: n_utterances must be >= 0");
  }
  if (spec.min_tokens < 1 || spec.max_tokens < spec.min_tokens) {
    throw DataError("synth: token range must satisfy 1 <= min <= max");
  }
  if (spec.vocabulary.empty()) {
    throw DataError("synth: empty vocabulary");
  }
  if (spec.noise_amplitude < 0.0 || spec.sample_rate <= 0 ||
      spec.n_speakers < 1 || spec.n_fft <= 0) {
    throw DataError("synth: invalid noise, rate, speaker count or n_fft");
  }
  const double min_sep = 2.0 * spec.sample_rate / spec.n_fft;
  std::vector<double> freqs;
  for (const auto& token : spec.vocabulary) {
    if (token.empty() || token.find(' ') != std::string::npos) {
      throw DataError("synth: tokens must be non-empty and space-free");
    }
    const auto it = spec.tone_map.find(token);
    if (it == spec.tone_map.end()) {
      throw DataError("synth: token '" + token + "' has no tone");
    }
    if (it->second.duration <= 0.0 || it->second.frequency < 0.0) {
      throw DataError("synth: token '" + token + "' has an invalid tone");
    }
    freqs.push_back(it->second.frequency);
  }
  for (size_t i = 0; i < freqs.size(); ++i) {
    for (size_t j = i + 1; j < freqs.size(); ++j) {
      if (std::abs(freqs[i] - freqs[j]) < min_sep) {
        throw DataError("synth: tones of '" + spec.vocabulary[i] + "' and '" +
                        spec.vocabulary[j] +
                        "' are closer than two FFT bins");
      }
    }
  }
}

AudioClip synth_utterance(const SynthSpec& spec,
                          const std::vector<std::string>& tokens,
                          int speaker_index, Rng& rng) {
  const double rate = spec.sample_rate;
  const auto gap = static_cast<size_t>(std::lround(spec.gap_duration * rate));
  const auto ramp = static_cast<size_t>(std::lround(0.005 * rate));
  const double offset = spec.speaker_offset_hz * speaker_index;

  AudioClip clip;
  clip.sample_rate = spec.sample_rate;
  clip.samples.assign(gap, 0.0);
  for (size_t k = 0; k < tokens.size(); ++k) {
    const Tone& tone = spec.tone_map.at(tokens[k]);
    const auto len = static_cast<size_t>(std::lround(tone.duration * rate));
    const double freq = tone.frequency + offset;
    for (size_t i = 0; i < len; ++i) {
      double env = 1.0;
      if (i < ramp) {
        env = static_cast<double>(i) / ramp;
      } else if (len - i <= ramp) {
        env = static_cast<double>(len - i) / ramp;
      }
      clip.samples.push_back(spec.tone_amplitude * env *
                             std::sin(2.0 * M_PI * freq * i / rate));
    }
    clip.samples.insert(clip.samples.end(), gap, 0.0);
  }
  for (double& s : clip.samples) {
    const double noise = spec.noise_amplitude * (2.0 * rng.uniform() - 1.0);
    s = std::clamp(s + noise, -1.0, 1.0);
  }
  return clip;
}

Manifest synth_dataset(const SynthSpec& spec,
                       const std::filesystem::path& out_dir) {
  validate(spec);
  Manifest manifest;
  if (spec.n_utterances == 0) {
    return manifest;
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw DataError("cannot create directory '" + out_dir.string() +
                    "': " + ec.message());
  }

  Rng rng(spec.seed);
  const auto vocab_size = static_cast<int64_t>(spec.vocabulary.size());
  for (int u = 0; u < spec.n_utterances; ++u) {
    const int speaker = u % spec.n_speakers;
    const auto count = rng.uniform_int(spec.min_tokens, spec.max_tokens);
    std::vector<std::string> tokens;
    std::string text;
    for (int64_t k = 0; k < count; ++k) {
      tokens.push_back(spec.vocabulary[rng.uniform_int(0, vocab_size - 1)]);
      text += (k ? " " : "") + tokens.back();
    }
    Rng noise_rng = rng.fork();
    const AudioClip clip = synth_utterance(spec, tokens, speaker, noise_rng);

    char name[32];
    std::snprintf(name, sizeof(name), "utt_%05d.wav", u);
    const auto wav_path = out_dir / name;
    save_wav(clip, wav_path);

    char speaker_id[32];
    std::snprintf(speaker_id, sizeof(speaker_id), "spk%02d", speaker);
    manifest.push_back(ManifestEntry{
        wav_path.string(), clip.duration(), text, speaker_id,
        speaker % 2 == 0 ? Gender::kMale : Gender::kFemale});
  }
  save_manifest(manifest, out_dir / "manifest.jsonl");
  return manifest;
}

}  // namespace asr
