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

#include "asr/kernels.h"

#include <omp.h>

#include <algorithm>
#include <stdexcept>
#include <string>

namespace asr::kernels {
namespace {

void check_shapes(const Matrix& x, std::span<const double> weight,
                  size_t expected_weight, const ConvGeometry& g,
                  const char* who) {
  if (x.rows() != g.in_channels) {
    throw std::invalid_argument(std::string(who) + ": input has " +
                                std::to_string(x.rows()) +
                                " channels, expected " +
                                std::to_string(g.in_channels));
  }
  if (weight.size() != expected_weight) {
    throw std::invalid_argument(std::string(who) + ": weight has " +
                                std::to_string(weight.size()) +
                                " elements, expected " +
                                std::to_string(expected_weight));
  }
  if (g.kernel % 2 == 0 || g.stride == 0 || g.dilation == 0) {
    throw std::invalid_argument(std::string(who) +
                                ": kernel must be odd, stride/dilation >= 1");
  }
}

// Output positions t in [lo, hi) whose input tap t*stride + offset is inside
// [0, in_len).
struct TapRange {
  size_t lo = 0;
  size_t hi = 0;
};

TapRange valid_range(ptrdiff_t offset, size_t in_len, size_t out_len,
                     size_t stride) {
  const auto s = static_cast<ptrdiff_t>(stride);
  const auto n = static_cast<ptrdiff_t>(in_len);
  const ptrdiff_t lo = offset >= 0 ? 0 : (-offset + s - 1) / s;
  const ptrdiff_t last_in = n - 1 - offset;
  if (last_in < 0) {
    return {};
  }
  const ptrdiff_t hi =
      std::min<ptrdiff_t>(static_cast<ptrdiff_t>(out_len), last_in / s + 1);
  if (hi <= lo) {
    return {};
  }
  return {static_cast<size_t>(lo), static_cast<size_t>(hi)};
}

}  // namespace

void set_num_threads(int n) { omp_set_num_threads(std::max(n, 1)); }

void conv1d_forward(const Matrix& x, std::span<const double> weight,
                    std::span<const double> bias, const ConvGeometry& g,
                    Matrix& y) {
  check_shapes(x, weight, g.out_channels * g.in_channels * g.kernel, g,
               "conv1d_forward");
  const size_t T = x.cols();
  const size_t T_out = g.out_length(T);
  y = Matrix(g.out_channels, T_out);
  const ptrdiff_t pad = g.padding();
  const auto out_ch = static_cast<ptrdiff_t>(g.out_channels);

#pragma omp parallel for schedule(static)
  for (ptrdiff_t o = 0; o < out_ch; ++o) {
    double* yo = y.row(o).data();
    const double b = bias.empty() ? 0.0 : bias[o];
    std::fill(yo, yo + T_out, b);
    for (size_t i = 0; i < g.in_channels; ++i) {
      const double* xi = x.row(i).data();
      const double* w = weight.data() + (o * g.in_channels + i) * g.kernel;
      for (size_t k = 0; k < g.kernel; ++k) {
        const ptrdiff_t offset = static_cast<ptrdiff_t>(k * g.dilation) - pad;
        const TapRange r = valid_range(offset, T, T_out, g.stride);
        const double wk = w[k];
        for (size_t t = r.lo; t < r.hi; ++t) {
          yo[t] += wk * xi[t * g.stride + offset];
        }
      }
    }
  }
}

void conv1d_backward(const Matrix& x, std::span<const double> weight,
                     const Matrix& dy, const ConvGeometry& g, Matrix* dx,
                     std::span<double> dweight, std::span<double> dbias) {
  check_shapes(x, weight, g.out_channels * g.in_channels * g.kernel, g,
               "conv1d_backward");
  const size_t T = x.cols();
  const size_t T_out = g.out_length(T);
  if (dy.rows() != g.out_channels || dy.cols() != T_out) {
    throw std::invalid_argument("conv1d_backward: upstream gradient shape");
  }
  const ptrdiff_t pad = g.padding();

  if (!dweight.empty() || !dbias.empty()) {
    const auto out_ch = static_cast<ptrdiff_t>(g.out_channels);
#pragma omp parallel for schedule(static)
    for (ptrdiff_t o = 0; o < out_ch; ++o) {
      const double* dyo = dy.row(o).data();
      if (!dbias.empty()) {
        double acc = 0.0;
        for (size_t t = 0; t < T_out; ++t) acc += dyo[t];
        dbias[o] += acc;
      }
      if (dweight.empty()) continue;
      for (size_t i = 0; i < g.in_channels; ++i) {
        const double* xi = x.row(i).data();
        double* dw = dweight.data() + (o * g.in_channels + i) * g.kernel;
        for (size_t k = 0; k < g.kernel; ++k) {
          const ptrdiff_t offset = static_cast<ptrdiff_t>(k * g.dilation) - pad;
          const TapRange r = valid_range(offset, T, T_out, g.stride);
          double acc = 0.0;
          for (size_t t = r.lo; t < r.hi; ++t) {
            acc += dyo[t] * xi[t * g.stride + offset];
          }
          dw[k] += acc;
        }
      }
    }
  }

  if (dx != nullptr) {
    *dx = Matrix(g.in_channels, T);
    const auto in_ch = static_cast<ptrdiff_t>(g.in_channels);
#pragma omp parallel for schedule(static)
    for (ptrdiff_t i = 0; i < in_ch; ++i) {
      double* dxi = dx->row(i).data();
      for (size_t o = 0; o < g.out_channels; ++o) {
        const double* dyo = dy.row(o).data();
        const double* w = weight.data() + (o * g.in_channels + i) * g.kernel;
        for (size_t k = 0; k < g.kernel; ++k) {
          const ptrdiff_t offset = static_cast<ptrdiff_t>(k * g.dilation) - pad;
          const TapRange r = valid_range(offset, T, T_out, g.stride);
          const double wk = w[k];
          for (size_t t = r.lo; t < r.hi; ++t) {
            dxi[t * g.stride + offset] += wk * dyo[t];
          }
        }
      }
    }
  }
}

void depthwise_forward(const Matrix& x, std::span<const double> weight,
                       const ConvGeometry& g, Matrix& y) {
  if (g.in_channels != g.out_channels) {
    throw std::invalid_argument("depthwise_forward: in/out channels differ");
  }
  check_shapes(x, weight, g.in_channels * g.kernel, g, "depthwise_forward");
  const size_t T = x.cols();
  const size_t T_out = g.out_length(T);
  y = Matrix(g.out_channels, T_out);
  const ptrdiff_t pad = g.padding();
  const auto channels = static_cast<ptrdiff_t>(g.in_channels);

#pragma omp parallel for schedule(static)
  for (ptrdiff_t c = 0; c < channels; ++c) {
    const double* xc = x.row(c).data();
    double* yc = y.row(c).data();
    const double* w = weight.data() + c * g.kernel;
    for (size_t k = 0; k < g.kernel; ++k) {
      const ptrdiff_t offset = static_cast<ptrdiff_t>(k * g.dilation) - pad;
      const TapRange r = valid_range(offset, T, T_out, g.stride);
      const double wk = w[k];
      for (size_t t = r.lo; t < r.hi; ++t) {
        yc[t] += wk * xc[t * g.stride + offset];
      }
    }
  }
}

void depthwise_backward(const Matrix& x, std::span<const double> weight,
                        const Matrix& dy, const ConvGeometry& g, Matrix* dx,
                        std::span<double> dweight) {
  if (g.in_channels != g.out_channels) {
    throw std::invalid_argument("depthwise_backward: in/out channels differ");
  }
  check_shapes(x, weight, g.in_channels * g.kernel, g, "depthwise_backward");
  const size_t T = x.cols();
  const size_t T_out = g.out_length(T);
  if (dy.rows() != g.out_channels || dy.cols() != T_out) {
    throw std::invalid_argument("depthwise_backward: upstream gradient shape");
  }
  const ptrdiff_t pad = g.padding();
  if (dx != nullptr) {
    *dx = Matrix(g.in_channels, T);
  }
  const auto channels = static_cast<ptrdiff_t>(g.in_channels);

#pragma omp parallel for schedule(static)
  for (ptrdiff_t c = 0; c < channels; ++c) {
    const double* xc = x.row(c).data();
    const double* dyc = dy.row(c).data();
    const double* w = weight.data() + c * g.kernel;
    for (size_t k = 0; k < g.kernel; ++k) {
      const ptrdiff_t offset = static_cast<ptrdiff_t>(k * g.dilation) - pad;
      const TapRange r = valid_range(offset, T, T_out, g.stride);
      if (!dweight.empty()) {
        double acc = 0.0;
        for (size_t t = r.lo; t < r.hi; ++t) {
          acc += dyc[t] * xc[t * g.stride + offset];
        }
        dweight[c * g.kernel + k] += acc;
      }
      if (dx != nullptr) {
        double* dxc = dx->row(c).data();
        const double wk = w[k];
        for (size_t t = r.lo; t < r.hi; ++t) {
          dxc[t * g.stride + offset] += wk * dyc[t];
        }
      }
    }
  }
}

}  // namespace asr::kernels
