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

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "asr/common.h"
#include "asr/kernels.h"
#include "asr/tensor.h"

namespace asr {

enum class Arch { kJasper, kQuartzNet };

std::string to_string(Arch arch);
Arch parse_arch(const std::string& s);

/// One convolutional layer (conv -> batch norm -> ReLU -> dropout).
struct LayerSpec {
  int channels = 32;
  int kernel = 1;
  int stride = 1;
  int dilation = 1;
  double dropout = 0.0;

  bool operator==(const LayerSpec&) const = default;
};

/// BxR topology: a prologue layer, `blocks.size()` residual blocks of
/// `repeats` sub-blocks each, hidden epilogue layers, then a width-1
/// projection onto n_classes outputs (vocabulary plus blank).
///
/// Jasper uses dense convolutions inside blocks; QuartzNet uses time-channel
/// separable ones (depthwise over time, then pointwise over channels). The
/// prologue and epilogue are dense for both.
struct ModelConfig {
  Arch arch = Arch::kQuartzNet;
  int n_mels = 64;
  int n_classes = 2;
  int repeats = 1;
  LayerSpec prologue{32, 11, 2, 1, 0.0};
  std::vector<LayerSpec> blocks;
  std::vector<LayerSpec> epilogue;

  int num_blocks() const { return static_cast<int>(blocks.size()); }
  /// Output frames for `frames` input frames (ceil division per stride).
  size_t output_length(size_t frames) const;

  bool operator==(const ModelConfig&) const = default;
};

/// Desk-scale default: prologue k=11 s=2 (32 ch); `num_blocks` blocks of
/// 32 channels with kernels 11, 13, 15, 17, ... ; epilogue k=29 d=2 (64 ch)
/// and a width-1 layer (64 ch).
ModelConfig desk_config(Arch arch, int n_mels, int n_classes,
                        int num_blocks = 4);

/// Throws UsageError on invalid topology (even kernels, B or R < 1, ...).
void validate(const ModelConfig& config);

std::map<std::string, std::string> to_key_values(const ModelConfig& config);
ModelConfig model_config_from_key_values(
    const std::map<std::string, std::string>& kv);

/// Learnable tensors and batch-norm buffers keyed by layer name, e.g.
/// "block0.sub0.conv.depthwise" or "prologue.bn.running_mean".
using ParameterStore = std::map<std::string, Tensor>;
/// Same keys and shapes as the ParameterStore it was computed for.
using GradientStore = std::map<std::string, Tensor>;

/// Batch-norm buffers (running statistics) are not trainable.
bool is_trainable(const std::string& name);
/// Weight decay applies to convolution weights only.
bool is_decayed(const std::string& name);

/// He-style initialization scaled by fan-in; biases and shifts zero, gains
/// one, running mean 0 / variance 1, no batches tracked.
ParameterStore init_params(const ModelConfig& config, Rng& rng);

/// Expected (name, shape) layout for `config`.
std::map<std::string, std::vector<size_t>> param_layout(
    const ModelConfig& config);

/// Throws DataError naming the first missing, unexpected or misshaped entry.
void check_params(const ModelConfig& config, const ParameterStore& params);

GradientStore zeros_like(const ParameterStore& params);

/// Learnable scalars of one convolution.
size_t conv_param_count(size_t in_channels, size_t out_channels, size_t kernel,
                        bool bias, bool separable);

/// Exact learnable scalar count (running statistics excluded).
size_t param_count(const ModelConfig& config);

enum class Mode { kTrain, kEval };

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

// ---------------------------------------------------------------------------
// Layer primitives. They operate on a batch of (channels x frames) maps;
// batch-norm statistics pool all frames of all items.

using Batch = std::vector<Matrix>;

struct BatchNormCache {
  Batch normalized;
  std::vector<double> inv_std;
};

/// Train mode normalizes by batch statistics and folds them into the
/// running statistics with `momentum` (the first tracked batch replaces
/// them outright); eval mode normalizes by the running statistics and throws
/// NumericError if no batch has been tracked yet.
Batch batchnorm_forward(const Batch& x, std::span<const double> gain,
                        std::span<const double> shift,
                        std::span<double> running_mean,
                        std::span<double> running_var, double& tracked,
                        Mode mode, BatchNormCache* cache,
                        double momentum = kBatchNormMomentum,
                        double epsilon = kBatchNormEpsilon);

/// Train-mode backward. Accumulates into dgain / dshift.
Batch batchnorm_backward(const Batch& dy, std::span<const double> gain,
                         const BatchNormCache& cache, std::span<double> dgain,
                         std::span<double> dshift);

Matrix relu_forward(const Matrix& x);

/// Train mode zeroes each entry with probability `rate` and scales
/// survivors by 1/(1-rate); the mask (0 or 1/(1-rate)) goes to `mask` when
/// non-null. Eval mode is the identity. Requires 0 <= rate < 1.
Matrix dropout_forward(const Matrix& x, double rate, Rng* rng, Mode mode,
                       Matrix* mask = nullptr);

/// Factored convolution: depthwise [in][kernel] then pointwise [out][in].
void separable_conv1d_forward(const Matrix& x,
                              std::span<const double> depthwise,
                              std::span<const double> pointwise,
                              std::span<const double> bias,
                              const kernels::ConvGeometry& g, Matrix& y);

// ---------------------------------------------------------------------------
// Whole-model passes.

/// Activations recorded by a train-mode forward pass.
class ForwardCache {
 public:
  ForwardCache();
  ~ForwardCache();
  ForwardCache(ForwardCache&&) noexcept;
  ForwardCache& operator=(ForwardCache&&) noexcept;

  bool empty() const;
  struct Impl;
  Impl& impl() { return *impl_; }
  const Impl& impl() const { return *impl_; }

 private:
  std::unique_ptr<Impl> impl_;
};

/// Runs the network on a batch of normalized (n_mels x frames) features and
/// returns one (T_out x n_classes) logit matrix per item. Train mode updates
/// batch-norm running statistics in `params`, draws dropout masks from `rng`
/// and fills `cache` (if given) for model_backward.
std::vector<Matrix> model_forward(const ModelConfig& config,
                                  ParameterStore& params,
                                  std::span<const Matrix> features, Mode mode,
                                  Rng* rng = nullptr,
                                  ForwardCache* cache = nullptr);

/// Eval-mode forward on immutable parameters.
std::vector<Matrix> model_infer(const ModelConfig& config,
                                const ParameterStore& params,
                                std::span<const Matrix> features);

/// Reverse pass from dLoss/dLogits (one T_out x n_classes matrix per item).
GradientStore model_backward(const ModelConfig& config,
                             const ParameterStore& params,
                             const ForwardCache& cache,
                             std::span<const Matrix> dlogits);

}  // namespace asr
