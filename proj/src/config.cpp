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

#include "asr/config.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace asr {
namespace {

using Type = RunConfig::Type;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

bool parse_int(const std::string& s, long long* out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, *out);
  return ec == std::errc() && ptr == end;
}

bool parse_real(const std::string& s, double* out) {
  if (s.empty()) return false;
  try {
    size_t used = 0;
    *out = std::stod(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool parse_bool(const std::string& s, bool* out) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") {
    *out = true;
    return true;
  }
  if (s == "false" || s == "0" || s == "no" || s == "off") {
    *out = false;
    return true;
  }
  return false;
}

const char* type_name(Type t) {
  switch (t) {
    case Type::kInt:
      return "int";
    case Type::kReal:
      return "real";
    case Type::kBool:
      return "bool";
    case Type::kString:
      break;
  }
  return "string";
}

}  // namespace

const std::vector<RunConfig::Entry>& RunConfig::schema() {
  static const std::vector<Entry> entries = {
      {"audio.sample_rate", Type::kInt, "16000", "pipeline sample rate (Hz)"},
      {"audio.n_utterances", Type::kInt, "100", "synthetic utterances"},
      {"audio.min_tokens", Type::kInt, "2", "min tokens per utterance"},
      {"audio.max_tokens", Type::kInt, "5", "max tokens per utterance"},
      {"audio.tokens", Type::kString, "a,b,c,d,e", "synthetic token list"},
      {"audio.base_frequency", Type::kReal, "400", "tone of the first token (Hz)"},
      {"audio.frequency_step", Type::kReal, "300", "tone spacing between tokens (Hz)"},
      {"audio.tone_duration", Type::kReal, "0.12", "tone length (s)"},
      {"audio.gap_duration", Type::kReal, "0.05", "silence between tones (s)"},
      {"audio.noise_amplitude", Type::kReal, "0.01", "uniform noise amplitude"},
      {"audio.n_speakers", Type::kInt, "10", "synthetic speakers"},
      {"audio.speaker_offset", Type::kReal, "10", "per-speaker pitch offset (Hz)"},
      {"features.win_length", Type::kInt, "400", "window length (samples)"},
      {"features.hop_length", Type::kInt, "160", "hop length (samples)"},
      {"features.n_fft", Type::kInt, "512", "FFT size (power of two)"},
      {"features.window", Type::kString, "hann", "hann | rectangular"},
      {"features.n_mels", Type::kInt, "64", "mel filters"},
      {"features.f_min", Type::kReal, "0", "lowest filter edge (Hz)"},
      {"features.f_max", Type::kReal, "0", "highest filter edge (Hz), 0 = rate/2"},
      {"features.log_epsilon", Type::kReal, "1e-10", "log floor"},
      {"augment.enabled", Type::kBool, "false", "apply SpecAugment while training"},
      {"augment.n_freq_masks", Type::kInt, "1", "frequency masks"},
      {"augment.max_freq_width", Type::kInt, "8", "max frequency-mask rows"},
      {"augment.n_time_masks", Type::kInt, "1", "time masks"},
      {"augment.max_time_width", Type::kInt, "20", "max time-mask frames"},
      {"augment.max_time_fraction", Type::kReal, "0.1", "time-mask cap as a fraction of frames"},
      {"augment.fill", Type::kString, "zero", "zero | mean"},
      {"model.arch", Type::kString, "quartznet", "jasper | quartznet"},
      {"model.blocks", Type::kInt, "4", "B, residual blocks"},
      {"model.repeats", Type::kInt, "1", "R, sub-blocks per block"},
      {"model.channels", Type::kInt, "32", "block channels"},
      {"model.kernels", Type::kString, "11,13,15,17", "block kernel widths (first B used)"},
      {"model.block_stride", Type::kInt, "1", "stride of each block"},
      {"model.block_dilation", Type::kInt, "1", "dilation inside blocks"},
      {"model.dropout", Type::kReal, "0", "dropout rate of every layer"},
      {"model.prologue_channels", Type::kInt, "32", "prologue channels"},
      {"model.prologue_kernel", Type::kInt, "11", "prologue kernel width"},
      {"model.prologue_stride", Type::kInt, "2", "prologue stride"},
      {"model.epilogue_channels", Type::kInt, "64", "epilogue channels"},
      {"model.epilogue_kernel", Type::kInt, "29", "first epilogue kernel width"},
      {"model.epilogue_dilation", Type::kInt, "2", "first epilogue dilation"},
      {"optim.learning_rate", Type::kReal, "0.001", "NovoGrad learning rate"},
      {"optim.weight_decay", Type::kReal, "0.001", "weight decay (conv weights)"},
      {"optim.beta1", Type::kReal, "0.95", "first-moment decay"},
      {"optim.beta2", Type::kReal, "0.5", "second-moment decay"},
      {"optim.epsilon", Type::kReal, "1e-8", "denominator floor"},
      {"optim.epochs", Type::kInt, "5", "training epochs"},
      {"optim.batch_size", Type::kInt, "8", "utterances per batch"},
      {"data.unit", Type::kString, "char", "char | word output units"},
      {"data.train_fraction", Type::kReal, "0.6", "speaker share of train"},
      {"data.dev_fraction", Type::kReal, "0.2", "speaker share of dev"},
      {"data.test_fraction", Type::kReal, "0.2", "speaker share of test"},
  };
  return entries;
}

RunConfig::RunConfig() {
  for (const auto& e : schema()) values_[e.key] = e.default_value;
}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const auto& entries = schema();
  const auto it = std::find_if(entries.begin(), entries.end(),
                               [&](const Entry& e) { return e.key == key; });
  if (it == entries.end()) {
    throw UsageError("unknown config key '" + key + "'");
  }
  const std::string value = trim(raw);
  long long i;
  double r;
  bool b;
  const bool ok = (it->type == Type::kInt && parse_int(value, &i)) ||
                  (it->type == Type::kReal && parse_real(value, &r)) ||
                  (it->type == Type::kBool && parse_bool(value, &b)) ||
                  it->type == Type::kString;
  if (!ok) {
    throw UsageError("config key '" + key + "' expects " +
                     type_name(it->type) + ", got '" + value + "'");
  }
  values_[key] = value;
}

void RunConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw UsageError("override '" + assignment + "' is not key=value");
  }
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw UsageError("cannot open config file '" + path.string() + "'");
  }
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    try {
      apply_override(line);
    } catch (const UsageError& e) {
      throw UsageError(path.string() + ":" + std::to_string(line_no) + ": " +
                       e.what());
    }
  }
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw UsageError("unknown config key '" + key + "'");
  }
  return it->second;
}

int RunConfig::get_int(const std::string& key) const {
  return static_cast<int>(std::stoll(get(key)));
}

double RunConfig::get_real(const std::string& key) const {
  return std::stod(get(key));
}

bool RunConfig::get_bool(const std::string& key) const {
  bool b = false;
  parse_bool(get(key), &b);
  return b;
}

std::string RunConfig::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::string RunConfig::help_text() {
  std::string out = "Config keys (section.key = value; default in brackets):\n";
  for (const auto& e : schema()) {
    std::string line = "  " + e.key + " (" + type_name(e.type) + ") [" +
                       e.default_value + "]";
    if (line.size() < 52) line.resize(52, ' ');
    out += line + " " + e.help + "\n";
  }
  return out;
}

FrameConfig frame_config(const RunConfig& rc) {
  FrameConfig cfg;
  cfg.win_length = rc.get_int("features.win_length");
  cfg.hop_length = rc.get_int("features.hop_length");
  cfg.n_fft = rc.get_int("features.n_fft");
  cfg.window = parse_window(rc.get("features.window"));
  cfg.n_mels = rc.get_int("features.n_mels");
  cfg.f_min = rc.get_real("features.f_min");
  cfg.f_max = rc.get_real("features.f_max");
  cfg.log_epsilon = rc.get_real("features.log_epsilon");
  validate(cfg, rc.get_int("audio.sample_rate"));
  return cfg;
}

AugmentPolicy augment_policy(const RunConfig& rc) {
  AugmentPolicy p;
  p.n_freq_masks = rc.get_int("augment.n_freq_masks");
  p.max_freq_width = rc.get_int("augment.max_freq_width");
  p.n_time_masks = rc.get_int("augment.n_time_masks");
  p.max_time_width = rc.get_int("augment.max_time_width");
  p.max_time_fraction = rc.get_real("augment.max_time_fraction");
  p.fill = parse_mask_fill(rc.get("augment.fill"));
  if (p.n_freq_masks < 0 || p.max_freq_width < 0 || p.n_time_masks < 0 ||
      p.max_time_width < 0) {
    throw UsageError("augment counts and widths must be >= 0");
  }
  return p;
}

ModelConfig model_config(const RunConfig& rc, int n_classes) {
  ModelConfig c;
  c.arch = parse_arch(rc.get("model.arch"));
  c.n_mels = rc.get_int("features.n_mels");
  c.n_classes = n_classes;
  c.repeats = rc.get_int("model.repeats");
  const double dropout = rc.get_real("model.dropout");
  c.prologue = {rc.get_int("model.prologue_channels"),
                rc.get_int("model.prologue_kernel"),
                rc.get_int("model.prologue_stride"), 1, dropout};
  const int blocks = rc.get_int("model.blocks");
  const auto kernels = split_list(rc.get("model.kernels"));
  if (blocks < 1 || kernels.size() < static_cast<size_t>(blocks)) {
    throw UsageError("model.kernels needs at least model.blocks (" +
                     std::to_string(blocks) + ") entries");
  }
  for (int b = 0; b < blocks; ++b) {
    long long k;
    if (!parse_int(kernels[b], &k)) {
      throw UsageError("model.kernels entry '" + kernels[b] +
                       "' is not an integer");
    }
    c.blocks.push_back({rc.get_int("model.channels"), static_cast<int>(k),
                        rc.get_int("model.block_stride"),
                        rc.get_int("model.block_dilation"), dropout});
  }
  const int epi = rc.get_int("model.epilogue_channels");
  c.epilogue = {{epi, rc.get_int("model.epilogue_kernel"), 1,
                 rc.get_int("model.epilogue_dilation"), dropout},
                {epi, 1, 1, 1, dropout}};
  validate(c);
  return c;
}

OptHyper opt_hyper(const RunConfig& rc) {
  OptHyper hp;
  hp.learning_rate = rc.get_real("optim.learning_rate");
  hp.weight_decay = rc.get_real("optim.weight_decay");
  hp.beta1 = rc.get_real("optim.beta1");
  hp.beta2 = rc.get_real("optim.beta2");
  hp.epsilon = rc.get_real("optim.epsilon");
  validate(hp);
  return hp;
}

SynthSpec synth_spec(const RunConfig& rc, uint64_t seed) {
  SynthSpec spec;
  spec.n_utterances = rc.get_int("audio.n_utterances");
  spec.min_tokens = rc.get_int("audio.min_tokens");
  spec.max_tokens = rc.get_int("audio.max_tokens");
  spec.vocabulary = split_list(rc.get("audio.tokens"));
  const double base = rc.get_real("audio.base_frequency");
  const double step = rc.get_real("audio.frequency_step");
  const double dur = rc.get_real("audio.tone_duration");
  for (size_t i = 0; i < spec.vocabulary.size(); ++i) {
    spec.tone_map[spec.vocabulary[i]] = Tone{base + step * i, dur};
  }
  spec.noise_amplitude = rc.get_real("audio.noise_amplitude");
  spec.seed = seed;
  spec.sample_rate = rc.get_int("audio.sample_rate");
  spec.n_speakers = rc.get_int("audio.n_speakers");
  spec.speaker_offset_hz = rc.get_real("audio.speaker_offset");
  spec.gap_duration = rc.get_real("audio.gap_duration");
  spec.n_fft = rc.get_int("features.n_fft");
  return spec;
}

SplitFractions split_fractions(const RunConfig& rc) {
  return {rc.get_real("data.train_fraction"), rc.get_real("data.dev_fraction"),
          rc.get_real("data.test_fraction")};
}

}  // namespace asr
