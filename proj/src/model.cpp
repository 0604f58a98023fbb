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

#include "asr/model.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

namespace asr {
namespace {

struct ConvUnit {
  std::string name;
  kernels::ConvGeometry geom;
  bool separable = false;
  bool bias = false;
};

struct LayerPlan {
  ConvUnit conv;
  std::string bn;
  size_t channels = 0;
  double dropout = 0.0;
};

struct BlockPlan {
  std::vector<LayerPlan> subs;
  std::optional<LayerPlan> residual;  // width-1 conv + batch norm
};

struct NetworkPlan {
  LayerPlan prologue;
  std::vector<BlockPlan> blocks;
  std::vector<LayerPlan> epilogue;
  ConvUnit output;
};

LayerPlan make_layer(const std::string& prefix, size_t in_channels,
                     const LayerSpec& spec, int stride, bool separable) {
  LayerPlan layer;
  layer.conv.name = prefix + ".conv";
  layer.conv.geom = {in_channels, static_cast<size_t>(spec.channels),
                     static_cast<size_t>(spec.kernel),
                     static_cast<size_t>(stride),
                     static_cast<size_t>(spec.dilation)};
  layer.conv.separable = separable;
  layer.bn = prefix + ".bn";
  layer.channels = static_cast<size_t>(spec.channels);
  layer.dropout = spec.dropout;
  return layer;
}

NetworkPlan make_plan(const ModelConfig& config) {
  NetworkPlan plan;
  size_t channels = static_cast<size_t>(config.n_mels);
  plan.prologue = make_layer("prologue", channels, config.prologue,
                             config.prologue.stride, false);
  channels = plan.prologue.channels;

  const bool separable = config.arch == Arch::kQuartzNet;
  for (size_t b = 0; b < config.blocks.size(); ++b) {
    const LayerSpec& spec = config.blocks[b];
    const std::string prefix = "block" + std::to_string(b);
    BlockPlan block;
    const size_t block_in = channels;
    for (int r = 0; r < config.repeats; ++r) {
      block.subs.push_back(make_layer(prefix + ".sub" + std::to_string(r),
                                      channels, spec, r == 0 ? spec.stride : 1,
                                      separable));
      channels = block.subs.back().channels;
    }
    if (block_in != channels || spec.stride != 1) {
      LayerSpec proj{spec.channels, 1, spec.stride, 1, 0.0};
      block.residual = make_layer(prefix + ".residual", block_in, proj,
                                  spec.stride, false);
    }
    plan.blocks.push_back(std::move(block));
  }
  for (size_t e = 0; e < config.epilogue.size(); ++e) {
    plan.epilogue.push_back(make_layer("epilogue" + std::to_string(e),
                                       channels, config.epilogue[e],
                                       config.epilogue[e].stride, false));
    channels = plan.epilogue.back().channels;
  }
  plan.output.name = "output";
  plan.output.geom = {channels, static_cast<size_t>(config.n_classes), 1, 1, 1};
  plan.output.bias = true;
  return plan;
}

kernels::ConvGeometry depthwise_geometry(const kernels::ConvGeometry& g) {
  return {g.in_channels, g.in_channels, g.kernel, g.stride, g.dilation};
}

kernels::ConvGeometry pointwise_geometry(const kernels::ConvGeometry& g) {
  return {g.in_channels, g.out_channels, 1, 1, 1};
}

void add_conv_layout(const ConvUnit& u,
                     std::map<std::string, std::vector<size_t>>& layout) {
  const auto& g = u.geom;
  if (u.separable) {
    layout[u.name + ".depthwise"] = {g.in_channels, 1, g.kernel};
    layout[u.name + ".pointwise"] = {g.out_channels, g.in_channels, 1};
  } else {
    layout[u.name + ".weight"] = {g.out_channels, g.in_channels, g.kernel};
  }
  if (u.bias) {
    layout[u.name + ".bias"] = {g.out_channels};
  }
}

void add_layer_layout(const LayerPlan& layer,
                      std::map<std::string, std::vector<size_t>>& layout) {
  add_conv_layout(layer.conv, layout);
  for (const char* suffix : {".gain", ".shift", ".running_mean", ".running_var"}) {
    layout[layer.bn + suffix] = {layer.channels};
  }
  layout[layer.bn + ".tracked"] = {1};
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string format_layer(const LayerSpec& l) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%d/%d/%d/%d/%.17g", l.channels, l.kernel,
                l.stride, l.dilation, l.dropout);
  return buf;
}

LayerSpec parse_layer(const std::string& s) {
  LayerSpec l;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%d/%d/%d/%d/%lf%c", &l.channels, &l.kernel,
                  &l.stride, &l.dilation, &l.dropout, &tail) != 5) {
    throw DataError("malformed layer spec '" + s + "'");
  }
  return l;
}

std::string format_layers(const std::vector<LayerSpec>& layers) {
  std::string out;
  for (size_t i = 0; i < layers.size(); ++i) {
    out += (i ? "," : "") + format_layer(layers[i]);
  }
  return out;
}

std::vector<LayerSpec> parse_layers(const std::string& s) {
  std::vector<LayerSpec> layers;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) layers.push_back(parse_layer(item));
  }
  return layers;
}

// ---------------------------------------------------------------------------
// Forward / backward machinery.

struct ConvCache {
  Batch input;
  Batch mid;  // depthwise output of a separable convolution
};

struct LayerCache {
  ConvCache conv;
  BatchNormCache bn;
  Batch activated;  // ReLU output
  Batch mask;       // dropout mask; empty when dropout is inactive
};

struct BlockCache {
  std::vector<LayerCache> subs;
  std::optional<LayerCache> residual;
};

std::span<const double> view(const ParameterStore& p, const std::string& name) {
  return p.at(name).data;
}

Matrix conv_unit_forward(const ConvUnit& u, const ParameterStore& p,
                         const Matrix& x, Matrix* mid) {
  Matrix y;
  const std::span<const double> bias =
      u.bias ? view(p, u.name + ".bias") : std::span<const double>();
  if (u.separable) {
    Matrix local;
    Matrix& dw_out = mid ? *mid : local;
    kernels::depthwise_forward(x, view(p, u.name + ".depthwise"),
                               depthwise_geometry(u.geom), dw_out);
    kernels::conv1d_forward(dw_out, view(p, u.name + ".pointwise"), bias,
                            pointwise_geometry(u.geom), y);
  } else {
    kernels::conv1d_forward(x, view(p, u.name + ".weight"), bias, u.geom, y);
  }
  return y;
}

void conv_unit_backward(const ConvUnit& u, const ParameterStore& p,
                        const Matrix& x, const Matrix* mid, const Matrix& dy,
                        GradientStore& g, Matrix* dx) {
  std::span<double> dbias;
  if (u.bias) dbias = g.at(u.name + ".bias").data;
  if (u.separable) {
    Matrix dmid;
    kernels::conv1d_backward(*mid, view(p, u.name + ".pointwise"), dy,
                             pointwise_geometry(u.geom), &dmid,
                             g.at(u.name + ".pointwise").data, dbias);
    kernels::depthwise_backward(x, view(p, u.name + ".depthwise"), dmid,
                                depthwise_geometry(u.geom), dx,
                                g.at(u.name + ".depthwise").data);
  } else {
    kernels::conv1d_backward(x, view(p, u.name + ".weight"), dy, u.geom, dx,
                             g.at(u.name + ".weight").data, dbias);
  }
}

class Runner {
 public:
  Runner(const ParameterStore& params, ParameterStore* mutable_params,
         Mode mode, Rng* rng)
      : params_(params), mutable_(mutable_params), mode_(mode), rng_(rng) {}

  Batch layer(const LayerPlan& L, const Batch& x, LayerCache* cache,
              const Batch* residual, bool activate) {
    Batch y(x.size());
    Batch mids(L.conv.separable ? x.size() : 0);
    for (size_t b = 0; b < x.size(); ++b) {
      y[b] = conv_unit_forward(L.conv, params_, x[b],
                               L.conv.separable ? &mids[b] : nullptr);
    }
    if (cache) {
      cache->conv.input = x;
      cache->conv.mid = std::move(mids);
    }
    y = batchnorm(L, y, cache ? &cache->bn : nullptr);
    if (residual) {
      for (size_t b = 0; b < y.size(); ++b) {
        const Matrix& r = (*residual)[b];
        if (r.rows() != y[b].rows() || r.cols() != y[b].cols()) {
          throw std::logic_error("residual shape mismatch in " + L.bn);
        }
        for (size_t i = 0; i < r.size(); ++i) y[b].data()[i] += r.data()[i];
      }
    }
    if (!activate) {
      return y;
    }
    const bool drop = mode_ == Mode::kTrain && L.dropout > 0.0;
    if (cache) {
      cache->activated.resize(y.size());
      cache->mask.resize(drop ? y.size() : 0);
    }
    for (size_t b = 0; b < y.size(); ++b) {
      Matrix a = relu_forward(y[b]);
      if (cache) cache->activated[b] = a;
      y[b] = drop ? dropout_forward(a, L.dropout, rng_, mode_,
                                    cache ? &cache->mask[b] : nullptr)
                  : std::move(a);
    }
    return y;
  }

 private:
  Batch batchnorm(const LayerPlan& L, const Batch& x, BatchNormCache* cache) {
    const auto gain = view(params_, L.bn + ".gain");
    const auto shift = view(params_, L.bn + ".shift");
    if (mode_ == Mode::kTrain) {
      if (mutable_ == nullptr) {
        throw std::logic_error("train-mode forward needs mutable parameters");
      }
      return batchnorm_forward(x, gain, shift,
                               mutable_->at(L.bn + ".running_mean").data,
                               mutable_->at(L.bn + ".running_var").data,
                               mutable_->at(L.bn + ".tracked").data[0], mode_,
                               cache);
    }
    std::vector<double> mean = params_.at(L.bn + ".running_mean").data;
    std::vector<double> var = params_.at(L.bn + ".running_var").data;
    double tracked = params_.at(L.bn + ".tracked").data[0];
    try {
      return batchnorm_forward(x, gain, shift, mean, var, tracked, mode_,
                               nullptr);
    } catch (const NumericError&) {
      throw NumericError(L.bn +
                         ": eval mode requires running statistics from at "
                         "least one training batch");
    }
  }

  const ParameterStore& params_;
  ParameterStore* mutable_;
  Mode mode_;
  Rng* rng_;
};

// Backward through dropout, ReLU, batch norm and convolution. `d_sum`
// receives the gradient at the (optional) residual sum point.
Batch layer_backward(const LayerPlan& L, const ParameterStore& p,
                     const LayerCache& cache, Batch d, GradientStore& g,
                     bool activated, bool need_dx, Batch* d_sum) {
  if (activated) {
    for (size_t b = 0; b < d.size(); ++b) {
      auto& db = d[b].data();
      if (!cache.mask.empty()) {
        const auto& m = cache.mask[b].data();
        for (size_t i = 0; i < db.size(); ++i) db[i] *= m[i];
      }
      const auto& a = cache.activated[b].data();
      for (size_t i = 0; i < db.size(); ++i) {
        if (!(a[i] > 0.0)) db[i] = 0.0;
      }
    }
  }
  if (d_sum) *d_sum = d;
  Batch d_conv = batchnorm_backward(d, view(p, L.bn + ".gain"), cache.bn,
                                    g.at(L.bn + ".gain").data,
                                    g.at(L.bn + ".shift").data);
  Batch dx(need_dx ? d.size() : 0);
  for (size_t b = 0; b < d.size(); ++b) {
    const Matrix* mid = L.conv.separable ? &cache.conv.mid[b] : nullptr;
    conv_unit_backward(L.conv, p, cache.conv.input[b], mid, d_conv[b], g,
                       need_dx ? &dx[b] : nullptr);
  }
  return dx;
}

void add_into(Batch& acc, const Batch& x) {
  for (size_t b = 0; b < acc.size(); ++b) {
    auto& a = acc[b].data();
    const auto& v = x[b].data();
    for (size_t i = 0; i < a.size(); ++i) a[i] += v[i];
  }
}

}  // namespace

struct ForwardCache::Impl {
  bool filled = false;
  LayerCache prologue;
  std::vector<BlockCache> blocks;
  std::vector<LayerCache> epilogue;
  Batch output_input;
};

ForwardCache::ForwardCache() : impl_(std::make_unique<Impl>()) {}
ForwardCache::~ForwardCache() = default;
ForwardCache::ForwardCache(ForwardCache&&) noexcept = default;
ForwardCache& ForwardCache::operator=(ForwardCache&&) noexcept = default;
bool ForwardCache::empty() const { return !impl_ || !impl_->filled; }

std::string to_string(Arch arch) {
  return arch == Arch::kJasper ? "jasper" : "quartznet";
}

Arch parse_arch(const std::string& s) {
  if (s == "jasper") return Arch::kJasper;
  if (s == "quartznet") return Arch::kQuartzNet;
  throw UsageError("invalid architecture '" + s +
                   "' (expected jasper or quartznet)");
}

size_t ModelConfig::output_length(size_t frames) const {
  auto apply = [&](int stride) {
    frames = (frames + stride - 1) / stride;
  };
  apply(prologue.stride);
  for (const auto& b : blocks) apply(b.stride);
  for (const auto& e : epilogue) apply(e.stride);
  return frames;
}

ModelConfig desk_config(Arch arch, int n_mels, int n_classes, int num_blocks) {
  ModelConfig c;
  c.arch = arch;
  c.n_mels = n_mels;
  c.n_classes = n_classes;
  c.repeats = 1;
  c.prologue = {32, 11, 2, 1, 0.0};
  for (int b = 0; b < num_blocks; ++b) {
    c.blocks.push_back({32, 11 + 2 * b, 1, 1, 0.0});
  }
  c.epilogue = {{64, 29, 1, 2, 0.0}, {64, 1, 1, 1, 0.0}};
  return c;
}

void validate(const ModelConfig& config) {
  auto check_layer = [](const LayerSpec& l, const std::string& where) {
    if (l.channels < 1 || l.kernel < 1 || l.kernel % 2 == 0 || l.stride < 1 ||
        l.dilation < 1) {
      throw UsageError(where +
                       ": channels >= 1, odd kernel, stride/dilation >= 1 "
                       "required");
    }
    if (!(l.dropout >= 0.0 && l.dropout < 1.0)) {
      throw UsageError(where + ": dropout must lie in [0, 1)");
    }
  };
  if (config.n_mels < 1 || config.n_classes < 2) {
    throw UsageError("model needs n_mels >= 1 and at least one label + blank");
  }
  if (config.blocks.empty() || config.repeats < 1) {
    throw UsageError("model needs B >= 1 blocks and R >= 1 sub-blocks");
  }
  check_layer(config.prologue, "prologue");
  for (size_t b = 0; b < config.blocks.size(); ++b) {
    check_layer(config.blocks[b], "block" + std::to_string(b));
  }
  for (size_t e = 0; e < config.epilogue.size(); ++e) {
    check_layer(config.epilogue[e], "epilogue" + std::to_string(e));
  }
}

std::map<std::string, std::string> to_key_values(const ModelConfig& config) {
  return {
      {"model.arch", to_string(config.arch)},
      {"model.n_mels", std::to_string(config.n_mels)},
      {"model.n_classes", std::to_string(config.n_classes)},
      {"model.repeats", std::to_string(config.repeats)},
      {"model.prologue", format_layer(config.prologue)},
      {"model.blocks", format_layers(config.blocks)},
      {"model.epilogue", format_layers(config.epilogue)},
  };
}

ModelConfig model_config_from_key_values(
    const std::map<std::string, std::string>& kv) {
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) {
      throw DataError("model config is missing '" + key + "'");
    }
    return it->second;
  };
  ModelConfig c;
  try {
    c.arch = parse_arch(get("model.arch"));
    c.n_mels = std::stoi(get("model.n_mels"));
    c.n_classes = std::stoi(get("model.n_classes"));
    c.repeats = std::stoi(get("model.repeats"));
  } catch (const std::logic_error& e) {
    throw DataError(std::string("malformed model config: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(e.what());
  }
  c.prologue = parse_layer(get("model.prologue"));
  c.blocks = parse_layers(get("model.blocks"));
  c.epilogue = parse_layers(get("model.epilogue"));
  return c;
}

bool is_trainable(const std::string& name) {
  return !(ends_with(name, ".running_mean") || ends_with(name, ".running_var") ||
           ends_with(name, ".tracked"));
}

bool is_decayed(const std::string& name) {
  return ends_with(name, ".weight") || ends_with(name, ".depthwise") ||
         ends_with(name, ".pointwise");
}

std::map<std::string, std::vector<size_t>> param_layout(
    const ModelConfig& config) {
  validate(config);
  const NetworkPlan plan = make_plan(config);
  std::map<std::string, std::vector<size_t>> layout;
  add_layer_layout(plan.prologue, layout);
  for (const auto& block : plan.blocks) {
    for (const auto& sub : block.subs) add_layer_layout(sub, layout);
    if (block.residual) add_layer_layout(*block.residual, layout);
  }
  for (const auto& e : plan.epilogue) add_layer_layout(e, layout);
  add_conv_layout(plan.output, layout);
  return layout;
}

ParameterStore init_params(const ModelConfig& config, Rng& rng) {
  ParameterStore params;
  // std::map iteration order fixes the draw order.
  for (const auto& [name, shape] : param_layout(config)) {
    Tensor t(shape);
    if (ends_with(name, ".gain") || ends_with(name, ".running_var")) {
      std::fill(t.data.begin(), t.data.end(), 1.0);
    } else if (is_decayed(name)) {
      // Fan-in: in_channels * kernel (depthwise: kernel).
      const size_t fan_in = shape[1] * shape[2];
      const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
      for (double& v : t.data) v = sd * rng.normal();
    }
    params.emplace(name, std::move(t));
  }
  return params;
}

void check_params(const ModelConfig& config, const ParameterStore& params) {
  const auto layout = param_layout(config);
  for (const auto& [name, shape] : layout) {
    const auto it = params.find(name);
    if (it == params.end()) {
      throw DataError("parameter/config mismatch: missing '" + name + "'");
    }
    if (it->second.shape != shape ||
        it->second.data.size() != Tensor::element_count(shape)) {
      throw DataError("parameter/config mismatch: '" + name + "' has shape " +
                      it->second.shape_string() + ", expected " +
                      Tensor(shape).shape_string());
    }
  }
  for (const auto& [name, t] : params) {
    if (!layout.contains(name)) {
      throw DataError("parameter/config mismatch: unexpected '" + name + "'");
    }
  }
}

GradientStore zeros_like(const ParameterStore& params) {
  GradientStore g;
  for (const auto& [name, t] : params) {
    g.emplace(name, Tensor(t.shape));
  }
  return g;
}

size_t conv_param_count(size_t in_channels, size_t out_channels, size_t kernel,
                        bool bias, bool separable) {
  const size_t weights = separable
                             ? in_channels * kernel + out_channels * in_channels
                             : out_channels * in_channels * kernel;
  return weights + (bias ? out_channels : 0);
}

size_t param_count(const ModelConfig& config) {
  validate(config);
  const NetworkPlan plan = make_plan(config);
  auto layer = [](const LayerPlan& L) {
    const auto& g = L.conv.geom;
    return conv_param_count(g.in_channels, g.out_channels, g.kernel,
                            L.conv.bias, L.conv.separable) +
           2 * L.channels;
  };
  size_t total = layer(plan.prologue);
  for (const auto& block : plan.blocks) {
    for (const auto& sub : block.subs) total += layer(sub);
    if (block.residual) total += layer(*block.residual);
  }
  for (const auto& e : plan.epilogue) total += layer(e);
  const auto& g = plan.output.geom;
  total += conv_param_count(g.in_channels, g.out_channels, 1, true, false);
  return total;
}

Batch batchnorm_forward(const Batch& x, std::span<const double> gain,
                        std::span<const double> shift,
                        std::span<double> running_mean,
                        std::span<double> running_var, double& tracked,
                        Mode mode, BatchNormCache* cache, double momentum,
                        double epsilon) {
  const size_t channels = gain.size();
  size_t count = 0;
  for (const auto& m : x) {
    if (m.rows() != channels) {
      throw std::invalid_argument("batchnorm_forward: channel mismatch");
    }
    count += m.cols();
  }
  if (count == 0) {
    throw std::invalid_argument("batchnorm_forward: empty batch");
  }
  if (mode == Mode::kEval && !(tracked > 0.0)) {
    throw NumericError("batch norm: no running statistics in eval mode");
  }

  Batch y;
  y.reserve(x.size());
  for (const auto& m : x) y.emplace_back(m.rows(), m.cols());
  if (cache) {
    cache->normalized = y;
    cache->inv_std.assign(channels, 0.0);
  }
  const auto n = static_cast<double>(count);
  const auto c_count = static_cast<ptrdiff_t>(channels);

#pragma omp parallel for schedule(static)
  for (ptrdiff_t c = 0; c < c_count; ++c) {
    double mean;
    double var;
    if (mode == Mode::kTrain) {
      mean = 0.0;
      for (const auto& m : x) {
        for (double v : m.row(c)) mean += v;
      }
      mean /= n;
      var = 0.0;
      for (const auto& m : x) {
        for (double v : m.row(c)) var += (v - mean) * (v - mean);
      }
      var /= n;
      const double m = tracked > 0.0 ? momentum : 1.0;
      running_mean[c] = (1.0 - m) * running_mean[c] + m * mean;
      running_var[c] = (1.0 - m) * running_var[c] + m * var;
    } else {
      mean = running_mean[c];
      var = running_var[c];
    }
    const double inv_std = 1.0 / std::sqrt(var + epsilon);
    if (cache) cache->inv_std[c] = inv_std;
    for (size_t b = 0; b < x.size(); ++b) {
      const auto in = x[b].row(c);
      auto out = y[b].row(c);
      for (size_t t = 0; t < in.size(); ++t) {
        const double xhat = (in[t] - mean) * inv_std;
        if (cache) cache->normalized[b](c, t) = xhat;
        out[t] = gain[c] * xhat + shift[c];
      }
    }
  }
  if (mode == Mode::kTrain) {
    tracked += 1.0;
  }
  return y;
}

Batch batchnorm_backward(const Batch& dy, std::span<const double> gain,
                         const BatchNormCache& cache, std::span<double> dgain,
                         std::span<double> dshift) {
  const size_t channels = gain.size();
  size_t count = 0;
  for (const auto& m : dy) count += m.cols();
  const auto n = static_cast<double>(count);
  Batch dx;
  dx.reserve(dy.size());
  for (const auto& m : dy) dx.emplace_back(m.rows(), m.cols());
  const auto c_count = static_cast<ptrdiff_t>(channels);

#pragma omp parallel for schedule(static)
  for (ptrdiff_t c = 0; c < c_count; ++c) {
    double sum_dy = 0.0;
    double sum_dy_xhat = 0.0;
    for (size_t b = 0; b < dy.size(); ++b) {
      const auto d = dy[b].row(c);
      const auto xh = cache.normalized[b].row(c);
      for (size_t t = 0; t < d.size(); ++t) {
        sum_dy += d[t];
        sum_dy_xhat += d[t] * xh[t];
      }
    }
    dgain[c] += sum_dy_xhat;
    dshift[c] += sum_dy;
    const double scale = gain[c] * cache.inv_std[c] / n;
    for (size_t b = 0; b < dy.size(); ++b) {
      const auto d = dy[b].row(c);
      const auto xh = cache.normalized[b].row(c);
      auto out = dx[b].row(c);
      for (size_t t = 0; t < d.size(); ++t) {
        out[t] = scale * (n * d[t] - sum_dy - xh[t] * sum_dy_xhat);
      }
    }
  }
  return dx;
}

Matrix relu_forward(const Matrix& x) {
  Matrix y = x;
  for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
  return y;
}

Matrix dropout_forward(const Matrix& x, double rate, Rng* rng, Mode mode,
                       Matrix* mask) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("dropout rate must lie in [0, 1)");
  }
  if (mode == Mode::kEval || rate == 0.0) {
    if (mask) *mask = Matrix(x.rows(), x.cols(), 1.0);
    return x;
  }
  if (rng == nullptr) {
    throw std::invalid_argument("train-mode dropout needs a random source");
  }
  const double keep_scale = 1.0 / (1.0 - rate);
  Matrix y = x;
  Matrix m(x.rows(), x.cols());
  for (size_t i = 0; i < y.size(); ++i) {
    m.data()[i] = rng->uniform() < rate ? 0.0 : keep_scale;
    y.data()[i] *= m.data()[i];
  }
  if (mask) *mask = std::move(m);
  return y;
}

void separable_conv1d_forward(const Matrix& x,
                              std::span<const double> depthwise,
                              std::span<const double> pointwise,
                              std::span<const double> bias,
                              const kernels::ConvGeometry& g, Matrix& y) {
  Matrix mid;
  kernels::depthwise_forward(x, depthwise, depthwise_geometry(g), mid);
  kernels::conv1d_forward(mid, pointwise, bias, pointwise_geometry(g), y);
}

namespace {

std::vector<Matrix> run_forward(const ModelConfig& config,
                                const ParameterStore& params,
                                ParameterStore* mutable_params,
                                std::span<const Matrix> features, Mode mode,
                                Rng* rng, ForwardCache* cache) {
  check_params(config, params);
  if (features.empty()) {
    throw std::invalid_argument("model_forward: empty batch");
  }
  for (const auto& f : features) {
    if (f.rows() != static_cast<size_t>(config.n_mels) || f.cols() == 0) {
      throw DataError("model_forward: expected " +
                      std::to_string(config.n_mels) +
                      " feature rows and at least one frame");
    }
  }
  const NetworkPlan plan = make_plan(config);
  ForwardCache::Impl* c = cache ? &cache->impl() : nullptr;
  if (c) {
    *c = ForwardCache::Impl{};
    c->blocks.resize(plan.blocks.size());
    c->epilogue.resize(plan.epilogue.size());
  }
  Runner run(params, mutable_params, mode, rng);

  Batch h(features.begin(), features.end());
  h = run.layer(plan.prologue, h, c ? &c->prologue : nullptr, nullptr, true);
  for (size_t b = 0; b < plan.blocks.size(); ++b) {
    const BlockPlan& block = plan.blocks[b];
    BlockCache* bc = c ? &c->blocks[b] : nullptr;
    if (bc) bc->subs.resize(block.subs.size());
    const Batch block_in = h;
    for (size_t r = 0; r + 1 < block.subs.size(); ++r) {
      h = run.layer(block.subs[r], h, bc ? &bc->subs[r] : nullptr, nullptr,
                    true);
    }
    Batch residual;
    if (block.residual) {
      if (bc) bc->residual.emplace();
      residual = run.layer(*block.residual, block_in,
                           bc ? &*bc->residual : nullptr, nullptr, false);
    } else {
      residual = block_in;
    }
    h = run.layer(block.subs.back(), h, bc ? &bc->subs.back() : nullptr,
                  &residual, true);
  }
  for (size_t e = 0; e < plan.epilogue.size(); ++e) {
    h = run.layer(plan.epilogue[e], h, c ? &c->epilogue[e] : nullptr, nullptr,
                  true);
  }
  std::vector<Matrix> logits;
  logits.reserve(h.size());
  for (const auto& x : h) {
    logits.push_back(conv_unit_forward(plan.output, params, x, nullptr)
                         .transposed());
  }
  if (c) {
    c->output_input = std::move(h);
    c->filled = true;
  }
  for (const auto& l : logits) {
    for (double v : l.data()) {
      if (!std::isfinite(v)) {
        throw NumericError("model_forward: non-finite logit");
      }
    }
  }
  return logits;
}

}  // namespace

std::vector<Matrix> model_forward(const ModelConfig& config,
                                  ParameterStore& params,
                                  std::span<const Matrix> features, Mode mode,
                                  Rng* rng, ForwardCache* cache) {
  if (mode == Mode::kEval && cache) {
    throw std::invalid_argument("model_forward: caching requires train mode");
  }
  return run_forward(config, params, &params, features, mode, rng, cache);
}

std::vector<Matrix> model_infer(const ModelConfig& config,
                                const ParameterStore& params,
                                std::span<const Matrix> features) {
  return run_forward(config, params, nullptr, features, Mode::kEval, nullptr,
                     nullptr);
}

GradientStore model_backward(const ModelConfig& config,
                             const ParameterStore& params,
                             const ForwardCache& cache,
                             std::span<const Matrix> dlogits) {
  if (cache.empty()) {
    throw std::logic_error("model_backward: no cached train-mode forward pass");
  }
  const auto& c = cache.impl();
  if (dlogits.size() != c.output_input.size()) {
    throw std::invalid_argument("model_backward: batch size mismatch");
  }
  const NetworkPlan plan = make_plan(config);
  GradientStore g = zeros_like(params);

  Batch d(dlogits.size());
  for (size_t b = 0; b < dlogits.size(); ++b) {
    Matrix dy = dlogits[b].transposed();
    conv_unit_backward(plan.output, params, c.output_input[b], nullptr, dy, g,
                       &d[b]);
  }
  for (size_t e = plan.epilogue.size(); e-- > 0;) {
    d = layer_backward(plan.epilogue[e], params, c.epilogue[e], std::move(d),
                       g, true, true, nullptr);
  }
  for (size_t b = plan.blocks.size(); b-- > 0;) {
    const BlockPlan& block = plan.blocks[b];
    const BlockCache& bc = c.blocks[b];
    Batch d_sum;
    d = layer_backward(block.subs.back(), params, bc.subs.back(), std::move(d),
                       g, true, true, &d_sum);
    for (size_t r = block.subs.size() - 1; r-- > 0;) {
      d = layer_backward(block.subs[r], params, bc.subs[r], std::move(d), g,
                         true, true, nullptr);
    }
    if (block.residual) {
      add_into(d, layer_backward(*block.residual, params, *bc.residual,
                                 std::move(d_sum), g, false, true, nullptr));
    } else {
      add_into(d, d_sum);
    }
  }
  layer_backward(plan.prologue, params, c.prologue, std::move(d), g, true,
                 false, nullptr);
  return g;
}

}  // namespace asr
