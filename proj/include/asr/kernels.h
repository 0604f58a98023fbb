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

#include <span>

#include "asr/tensor.h"

/// 1D convolution kernels over (channels x time) maps.
///
/// The functions in `asr::kernels` are OpenMP-parallel. Work is split over
/// output rows (channels) that a single thread owns end to end, so every
/// element is produced by one fixed summation order and the results do not
/// depend on the thread count. `asr::kernels::serial` holds the direct
/// single-threaded formulations used as test oracles and benchmark baselines.
///
/// Padding is "same"-style: (kernel - 1) / 2 * dilation zeros per side, and
/// the output length is ceil(T / stride).
namespace asr::kernels {

struct ConvGeometry {
  size_t in_channels = 1;
  size_t out_channels = 1;
  size_t kernel = 1;
  size_t stride = 1;
  size_t dilation = 1;

  size_t out_length(size_t in_length) const {
    return (in_length + stride - 1) / stride;
  }
  ptrdiff_t padding() const {
    return static_cast<ptrdiff_t>((kernel - 1) / 2 * dilation);
  }
};

/// Dense convolution. weight is [out][in][kernel]; bias may be empty.
/// y is resized to out_channels x out_length(T).
void conv1d_forward(const Matrix& x, std::span<const double> weight,
                    std::span<const double> bias, const ConvGeometry& g,
                    Matrix& y);

/// Accumulates into dweight / dbias (either may be empty to skip) and
/// overwrites dx when non-null.
void conv1d_backward(const Matrix& x, std::span<const double> weight,
                     const Matrix& dy, const ConvGeometry& g, Matrix* dx,
                     std::span<double> dweight, std::span<double> dbias);

/// Per-channel convolution, weight is [channels][kernel]; in_channels must
/// equal out_channels.
void depthwise_forward(const Matrix& x, std::span<const double> weight,
                       const ConvGeometry& g, Matrix& y);

void depthwise_backward(const Matrix& x, std::span<const double> weight,
                        const Matrix& dy, const ConvGeometry& g, Matrix* dx,
                        std::span<double> dweight);

namespace serial {

void conv1d_forward(const Matrix& x, std::span<const double> weight,
                    std::span<const double> bias, const ConvGeometry& g,
                    Matrix& y);
void conv1d_backward(const Matrix& x, std::span<const double> weight,
                     const Matrix& dy, const ConvGeometry& g, Matrix* dx,
                     std::span<double> dweight, std::span<double> dbias);
void depthwise_forward(const Matrix& x, std::span<const double> weight,
                       const ConvGeometry& g, Matrix& y);
void depthwise_backward(const Matrix& x, std::span<const double> weight,
                        const Matrix& dy, const ConvGeometry& g, Matrix* dx,
                        std::span<double> dweight);

}  // namespace serial

/// Sets the OpenMP thread count used by the parallel kernels (n >= 1).
void set_num_threads(int n);

}  // namespace asr::kernels
