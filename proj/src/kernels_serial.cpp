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

// Direct, single-threaded formulations of the convolution kernels. They
// follow the textbook definitions term by term and are kept as the reference
// the parallel kernels are tested and benchmarked against.

#include <stdexcept>

#include "asr/kernels.h"

namespace asr::kernels::serial {
namespace {

// x_padded[i, p] with implicit zeros outside [0, T).
double tap(const Matrix& x, size_t i, ptrdiff_t p) {
  if (p < 0 || p >= static_cast<ptrdiff_t>(x.cols())) {
    return 0.0;
  }
  return x(i, static_cast<size_t>(p));
}

ptrdiff_t input_index(const ConvGeometry& g, size_t t, size_t k) {
  return static_cast<ptrdiff_t>(t * g.stride + k * g.dilation) - g.padding();
}

// The output position t that reads input p through tap k, if any.
bool output_index(const ConvGeometry& g, size_t p, size_t k, size_t T_out,
                  size_t* t) {
  const ptrdiff_t shifted =
      static_cast<ptrdiff_t>(p) + g.padding() -
      static_cast<ptrdiff_t>(k * g.dilation);
  if (shifted < 0 || shifted % static_cast<ptrdiff_t>(g.stride) != 0) {
    return false;
  }
  *t = static_cast<size_t>(shifted) / g.stride;
  return *t < T_out;
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void conv1d_forward(const Matrix& x, std::span<const double> weight,
                    std::span<const double> bias, const ConvGeometry& g,
                    Matrix& y) {
  require(x.rows() == g.in_channels &&
              weight.size() == g.out_channels * g.in_channels * g.kernel,
          "serial::conv1d_forward: shape mismatch");
  const size_t T_out = g.out_length(x.cols());
  y = Matrix(g.out_channels, T_out);
  for (size_t o = 0; o < g.out_channels; ++o) {
    for (size_t t = 0; t < T_out; ++t) {
      double acc = bias.empty() ? 0.0 : bias[o];
      for (size_t i = 0; i < g.in_channels; ++i) {
        for (size_t k = 0; k < g.kernel; ++k) {
          acc += weight[(o * g.in_channels + i) * g.kernel + k] *
                 tap(x, i, input_index(g, t, k));
        }
      }
      y(o, t) = acc;
    }
  }
}

void conv1d_backward(const Matrix& x, std::span<const double> weight,
                     const Matrix& dy, const ConvGeometry& g, Matrix* dx,
                     std::span<double> dweight, std::span<double> dbias) {
  const size_t T = x.cols();
  const size_t T_out = g.out_length(T);
  require(dy.rows() == g.out_channels && dy.cols() == T_out,
          "serial::conv1d_backward: upstream gradient shape");
  for (size_t o = 0; o < g.out_channels; ++o) {
    for (size_t t = 0; t < T_out; ++t) {
      if (!dbias.empty()) dbias[o] += dy(o, t);
      if (dweight.empty()) continue;
      for (size_t i = 0; i < g.in_channels; ++i) {
        for (size_t k = 0; k < g.kernel; ++k) {
          dweight[(o * g.in_channels + i) * g.kernel + k] +=
              dy(o, t) * tap(x, i, input_index(g, t, k));
        }
      }
    }
  }
  if (dx == nullptr) return;
  // Gather form: each input position collects from the outputs that read it.
  *dx = Matrix(g.in_channels, T);
  for (size_t i = 0; i < g.in_channels; ++i) {
    for (size_t p = 0; p < T; ++p) {
      double acc = 0.0;
      for (size_t o = 0; o < g.out_channels; ++o) {
        for (size_t k = 0; k < g.kernel; ++k) {
          size_t t;
          if (output_index(g, p, k, T_out, &t)) {
            acc += weight[(o * g.in_channels + i) * g.kernel + k] * dy(o, t);
          }
        }
      }
      (*dx)(i, p) = acc;
    }
  }
}

void depthwise_forward(const Matrix& x, std::span<const double> weight,
                       const ConvGeometry& g, Matrix& y) {
  require(g.in_channels == g.out_channels && x.rows() == g.in_channels &&
              weight.size() == g.in_channels * g.kernel,
          "serial::depthwise_forward: shape mismatch");
  const size_t T_out = g.out_length(x.cols());
  y = Matrix(g.out_channels, T_out);
  for (size_t c = 0; c < g.in_channels; ++c) {
    for (size_t t = 0; t < T_out; ++t) {
      double acc = 0.0;
      for (size_t k = 0; k < g.kernel; ++k) {
        acc += weight[c * g.kernel + k] * tap(x, c, input_index(g, t, k));
      }
      y(c, t) = acc;
    }
  }
}

void depthwise_backward(const Matrix& x, std::span<const double> weight,
                        const Matrix& dy, const ConvGeometry& g, Matrix* dx,
                        std::span<double> dweight) {
  const size_t T = x.cols();
  const size_t T_out = g.out_length(T);
  require(dy.rows() == g.out_channels && dy.cols() == T_out,
          "serial::depthwise_backward: upstream gradient shape");
  if (!dweight.empty()) {
    for (size_t c = 0; c < g.in_channels; ++c) {
      for (size_t t = 0; t < T_out; ++t) {
        for (size_t k = 0; k < g.kernel; ++k) {
          dweight[c * g.kernel + k] +=
              dy(c, t) * tap(x, c, input_index(g, t, k));
        }
      }
    }
  }
  if (dx == nullptr) return;
  *dx = Matrix(g.in_channels, T);
  for (size_t c = 0; c < g.in_channels; ++c) {
    for (size_t p = 0; p < T; ++p) {
      double acc = 0.0;
      for (size_t k = 0; k < g.kernel; ++k) {
        size_t t;
        if (output_index(g, p, k, T_out, &t)) {
          acc += weight[c * g.kernel + k] * dy(c, t);
        }
      }
      (*dx)(c, p) = acc;
    }
  }
}

}  // namespace asr::kernels::serial
