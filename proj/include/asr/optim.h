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
#include <string>

#include "asr/model.h"

namespace asr {

struct OptHyper {
  double learning_rate = 0.001;
  double weight_decay = 0.001;
  double beta1 = 0.95;
  double beta2 = 0.5;
  double epsilon = 1e-8;
};

void validate(const OptHyper& hp);

/// NovoGrad state: a full first moment per tensor but a single scalar second
/// moment per tensor.
struct OptState {
  std::map<std::string, Tensor> first_moment;
  std::map<std::string, double> second_moment;
  int64_t step = 0;
};

/// One NovoGrad update of every trainable tensor l:
///
///   v_l = |g_l|^2                                  (first step)
///   v_l = beta2 * v_l + (1 - beta2) * |g_l|^2      (later steps)
///   m_l = beta1 * m_l + g_l / (sqrt(v_l) + eps) + wd * w_l
///   w_l = w_l - lr * m_l
///
/// with m_l starting from zero, and wd applied to convolution weights only.
/// Batch-norm running statistics are skipped. Throws std::invalid_argument
/// when the key/shape sets disagree and NumericError (naming the tensor) on
/// a non-finite gradient; nothing is modified in either case.
void novograd_step(ParameterStore& params, const GradientStore& grads,
                   OptState& state, const OptHyper& hp);

}  // namespace asr
