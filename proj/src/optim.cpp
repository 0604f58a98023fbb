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

#include "asr/optim.h"

#include <cmath>

namespace asr {

void validate(const OptHyper& hp) {
  if (!(hp.learning_rate >= 0.0) || !(hp.weight_decay >= 0.0) ||
      !(hp.beta1 >= 0.0 && hp.beta1 < 1.0) ||
      !(hp.beta2 >= 0.0 && hp.beta2 < 1.0) || !(hp.epsilon > 0.0)) {
    throw UsageError(
        "optimizer: lr >= 0, weight_decay >= 0, betas in [0, 1), eps > 0 "
        "required");
  }
}

void novograd_step(ParameterStore& params, const GradientStore& grads,
                   OptState& state, const OptHyper& hp) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("novograd_step: parameter/gradient key mismatch");
  }
  for (const auto& [name, w] : params) {
    const auto it = grads.find(name);
    if (it == grads.end() || it->second.shape != w.shape ||
        it->second.size() != w.size()) {
      throw std::invalid_argument("novograd_step: gradient for '" + name +
                                  "' is missing or misshaped");
    }
    if (!is_trainable(name)) continue;
    for (double g : it->second.data) {
      if (!std::isfinite(g)) {
        throw NumericError("non-finite gradient in '" + name + "'");
      }
    }
    if (state.step > 0 && (!state.first_moment.contains(name) ||
                           !state.second_moment.contains(name))) {
      throw std::invalid_argument("novograd_step: optimizer state lacks '" +
                                  name + "'");
    }
  }

  const bool first = state.step == 0;
  for (auto& [name, w] : params) {
    if (!is_trainable(name)) continue;
    const auto& g = grads.at(name).data;
    double norm_sq = 0.0;
    for (double v : g) norm_sq += v * v;

    double& v = state.second_moment[name];
    v = first ? norm_sq : hp.beta2 * v + (1.0 - hp.beta2) * norm_sq;
    const double denom = std::sqrt(v) + hp.epsilon;
    const double decay = is_decayed(name) ? hp.weight_decay : 0.0;

    Tensor& m = state.first_moment[name];
    if (first) m = Tensor(w.shape);
    for (size_t i = 0; i < w.size(); ++i) {
      m.data[i] = hp.beta1 * m.data[i] + (g[i] / denom + decay * w.data[i]);
      w.data[i] -= hp.learning_rate * m.data[i];
    }
  }
  ++state.step;
}

}  // namespace asr
