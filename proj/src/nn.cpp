// Copyright 2026 The msa Authors.
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

#include "msa/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace msa::nn {

namespace {

std::size_t spatial_size(const Shape& dims) {
  std::size_t n = 1;
  for (std::size_t i = 1; i < dims.size(); ++i) n *= dims[i];
  return n;
}

// Pooled axes are the trailing window.size() axes; leading axes pass through.
std::size_t pool_offset(const Tensor& t, const Shape& window) {
  return t.rank() - window.size();
}

}  // namespace

void ConvSpec::validate() const {
  if (rank() != 1 && rank() != 2)
    throw ShapeError("conv kernel rank must be 1 or 2, got " + std::to_string(rank()));
  for (auto k : kernel)
    if (k == 0) throw ShapeError("conv kernel dims must be positive");
  Shape wdims{out_channels, in_channels};
  wdims.insert(wdims.end(), kernel.begin(), kernel.end());
  if (weights.dims() != wdims)
    throw ShapeError("conv weights " + shape_str(weights.dims()) + " expected " +
                     shape_str(wdims));
  if (bias.dims() != Shape{out_channels})
    throw ShapeError("conv bias " + shape_str(bias.dims()) + " expected [" +
                     std::to_string(out_channels) + "]");
}

Tensor conv_forward(const Tensor& input, const ConvSpec& spec) {
  const std::size_t r = spec.rank();
  const auto& in = input.dims();
  bool ok = in.size() == r + 1 && in[0] == spec.in_channels;
  for (std::size_t a = 0; ok && a < r; ++a) ok = in[a + 1] >= spec.kernel[a];
  if (!ok) {
    Shape expect{spec.in_channels};
    expect.insert(expect.end(), spec.kernel.begin(), spec.kernel.end());
    throw ShapeError("conv input " + shape_str(in) + " incompatible with kernel " +
                     shape_str(spec.weights.dims()) + " (need [in_channels, >= kernel]: " +
                     shape_str(expect) + ")");
  }
  const auto& w = spec.weights.values();
  const auto& x = input.values();
  if (r == 1) {
    const std::size_t len = in[1], k = spec.kernel[0], out_len = len - k + 1;
    Tensor out({spec.out_channels, out_len});
    for (std::size_t o = 0; o < spec.out_channels; ++o) {
      double* dst = &out.data()[o * out_len];
      std::fill(dst, dst + out_len, spec.bias[o]);
      for (std::size_t c = 0; c < spec.in_channels; ++c) {
        const double* src = &x[c * len];
        const double* wk = &w[(o * spec.in_channels + c) * k];
        for (std::size_t t = 0; t < k; ++t) {
          const double wt = wk[t];
          for (std::size_t i = 0; i < out_len; ++i) dst[i] += wt * src[i + t];
        }
      }
    }
    return out;
  }
  const std::size_t h = in[1], wd = in[2], kh = spec.kernel[0], kw = spec.kernel[1];
  const std::size_t oh = h - kh + 1, ow = wd - kw + 1;
  Tensor out({spec.out_channels, oh, ow});
  for (std::size_t o = 0; o < spec.out_channels; ++o) {
    double* dst = &out.data()[o * oh * ow];
    std::fill(dst, dst + oh * ow, spec.bias[o]);
    for (std::size_t c = 0; c < spec.in_channels; ++c) {
      const double* src = &x[c * h * wd];
      const double* wk = &w[(o * spec.in_channels + c) * kh * kw];
      for (std::size_t u = 0; u < kh; ++u)
        for (std::size_t v = 0; v < kw; ++v) {
          const double wt = wk[u * kw + v];
          for (std::size_t i = 0; i < oh; ++i) {
            const double* row = src + (i + u) * wd + v;
            double* drow = dst + i * ow;
            for (std::size_t j = 0; j < ow; ++j) drow[j] += wt * row[j];
          }
        }
    }
  }
  return out;
}

namespace {

// Accumulates input, weight and bias gradients of one convolution.
void conv_backward(const Tensor& input, const ConvSpec& spec, const Tensor& grad_out,
                   Tensor& grad_in, Tensor& grad_w, Tensor& grad_b) {
  const auto& in = input.dims();
  const auto& x = input.values();
  const auto& w = spec.weights.values();
  const auto& g = grad_out.values();
  auto gx = grad_in.data();
  auto gw = grad_w.data();
  if (spec.rank() == 1) {
    const std::size_t len = in[1], k = spec.kernel[0];
    const std::size_t out_len = grad_out.dim(1);
    for (std::size_t o = 0; o < spec.out_channels; ++o) {
      const double* go = &g[o * out_len];
      double sb = 0.0;
      for (std::size_t i = 0; i < out_len; ++i) sb += go[i];
      grad_b[o] += sb;
      for (std::size_t c = 0; c < spec.in_channels; ++c) {
        const double* src = &x[c * len];
        const std::size_t wbase = (o * spec.in_channels + c) * k;
        for (std::size_t t = 0; t < k; ++t) {
          double acc = 0.0;
          const double wt = w[wbase + t];
          double* gsrc = &gx[c * len + t];
          for (std::size_t i = 0; i < out_len; ++i) {
            acc += go[i] * src[i + t];
            gsrc[i] += wt * go[i];
          }
          gw[wbase + t] += acc;
        }
      }
    }
    return;
  }
  const std::size_t h = in[1], wd = in[2], kh = spec.kernel[0], kw = spec.kernel[1];
  const std::size_t oh = grad_out.dim(1), ow = grad_out.dim(2);
  for (std::size_t o = 0; o < spec.out_channels; ++o) {
    const double* go = &g[o * oh * ow];
    double sb = 0.0;
    for (std::size_t i = 0; i < oh * ow; ++i) sb += go[i];
    grad_b[o] += sb;
    for (std::size_t c = 0; c < spec.in_channels; ++c) {
      const double* src = &x[c * h * wd];
      double* gsrc = &gx[c * h * wd];
      const std::size_t wbase = (o * spec.in_channels + c) * kh * kw;
      for (std::size_t u = 0; u < kh; ++u)
        for (std::size_t v = 0; v < kw; ++v) {
          const double wt = w[wbase + u * kw + v];
          double acc = 0.0;
          for (std::size_t i = 0; i < oh; ++i) {
            const double* row = src + (i + u) * wd + v;
            double* grow = gsrc + (i + u) * wd + v;
            const double* gorow = go + i * ow;
            for (std::size_t j = 0; j < ow; ++j) {
              acc += gorow[j] * row[j];
              grow[j] += wt * gorow[j];
            }
          }
          gw[wbase + u * kw + v] += acc;
        }
    }
  }
}

// Visits every pooling window, reporting (output index, flat input index of
// the first maximum).
template <typename F>
void for_each_pool_window(const Tensor& input, const Shape& window, F&& f) {
  const auto& d = input.dims();
  const std::size_t off = pool_offset(input, window);
  const auto& x = input.values();
  if (window.size() == 1) {
    const std::size_t len = d[off], p = window[0], olen = len / p;
    const std::size_t outer = input.size() / len;
    for (std::size_t b = 0; b < outer; ++b)
      for (std::size_t i = 0; i < olen; ++i) {
        std::size_t best = b * len + i * p;
        for (std::size_t t = 1; t < p; ++t)
          if (x[b * len + i * p + t] > x[best]) best = b * len + i * p + t;
        f(b * olen + i, best);
      }
    return;
  }
  const std::size_t h = d[off], w = d[off + 1], ph = window[0], pw = window[1];
  const std::size_t oh = h / ph, ow = w / pw;
  const std::size_t outer = input.size() / (h * w);
  for (std::size_t b = 0; b < outer; ++b)
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j) {
        std::size_t best = b * h * w + (i * ph) * w + j * pw;
        for (std::size_t u = 0; u < ph; ++u)
          for (std::size_t v = 0; v < pw; ++v) {
            const std::size_t idx = b * h * w + (i * ph + u) * w + j * pw + v;
            if (x[idx] > x[best]) best = idx;
          }
        f((b * oh + i) * ow + j, best);
      }
}

Shape pool_output_dims(const Shape& in, const Shape& window) {
  if (window.empty() || window.size() > 2)
    throw ShapeError("maxpool window must have 1 or 2 axes, got " + shape_str(window));
  if (in.size() < window.size())
    throw ShapeError("maxpool window " + shape_str(window) + " has more axes than input " +
                     shape_str(in));
  Shape out = in;
  const std::size_t off = in.size() - window.size();
  for (std::size_t a = 0; a < window.size(); ++a) {
    if (window[a] == 0 || in[off + a] % window[a] != 0)
      throw ShapeError("maxpool window " + shape_str(window) + " does not divide input " +
                       shape_str(in));
    out[off + a] = in[off + a] / window[a];
  }
  return out;
}

}  // namespace

Tensor maxpool_forward(const Tensor& input, const Shape& window) {
  Tensor out(pool_output_dims(input.dims(), window));
  const auto& x = input.values();
  for_each_pool_window(input, window,
                       [&](std::size_t o, std::size_t best) { out[o] = x[best]; });
  return out;
}

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv: return "conv";
    case LayerKind::branch_conv: return "branch_conv";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::relu: return "relu";
    case LayerKind::sigmoid: return "sigmoid";
    case LayerKind::dense: return "dense";
    case LayerKind::softmax: return "softmax";
  }
  return "?";
}

LayerKind layer_kind_from_string(const std::string& s) {
  for (auto k : {LayerKind::conv, LayerKind::branch_conv, LayerKind::maxpool, LayerKind::relu,
                 LayerKind::sigmoid, LayerKind::dense, LayerKind::softmax})
    if (to_string(k) == s) return k;
  throw ValidationError("unknown layer kind '" + s + "'");
}

LayerSpec LayerSpec::conv1d(std::size_t k, std::size_t maps) {
  LayerSpec s;
  s.kind = LayerKind::conv;
  s.kernels = {{k}};
  s.maps = maps;
  return s;
}

LayerSpec LayerSpec::conv2d(std::size_t kh, std::size_t kw, std::size_t maps) {
  LayerSpec s;
  s.kind = LayerKind::conv;
  s.kernels = {{kh, kw}};
  s.maps = maps;
  return s;
}

LayerSpec LayerSpec::branches1d(std::vector<std::size_t> widths, std::size_t maps) {
  LayerSpec s;
  s.kind = LayerKind::branch_conv;
  for (auto w : widths) s.kernels.push_back({w});
  s.maps = maps;
  return s;
}

LayerSpec LayerSpec::maxpool(Shape window) {
  LayerSpec s;
  s.kind = LayerKind::maxpool;
  s.pool = std::move(window);
  return s;
}

LayerSpec LayerSpec::relu() { return LayerSpec{}; }

LayerSpec LayerSpec::sigmoid() {
  LayerSpec s;
  s.kind = LayerKind::sigmoid;
  return s;
}

LayerSpec LayerSpec::dense(std::size_t units) {
  LayerSpec s;
  s.kind = LayerKind::dense;
  s.units = units;
  return s;
}

LayerSpec LayerSpec::softmax() {
  LayerSpec s;
  s.kind = LayerKind::softmax;
  return s;
}

std::vector<Tensor*> Layer::parameters() {
  std::vector<Tensor*> p;
  for (auto& c : convs) {
    p.push_back(&c.weights);
    p.push_back(&c.bias);
  }
  if (spec.kind == LayerKind::dense) {
    p.push_back(&dense_weights);
    p.push_back(&dense_bias);
  }
  return p;
}

std::vector<const Tensor*> Layer::parameters() const {
  std::vector<const Tensor*> p;
  for (const auto& c : convs) {
    p.push_back(&c.weights);
    p.push_back(&c.bias);
  }
  if (spec.kind == LayerKind::dense) {
    p.push_back(&dense_weights);
    p.push_back(&dense_bias);
  }
  return p;
}

Shape infer_output_dims(const LayerSpec& spec, const Shape& in) {
  switch (spec.kind) {
    case LayerKind::conv:
    case LayerKind::branch_conv: {
      if (spec.kernels.empty()) throw ShapeError("conv layer without kernels");
      if (spec.kind == LayerKind::conv && spec.kernels.size() != 1)
        throw ShapeError("conv layer takes exactly one kernel; use branch_conv");
      if (spec.maps == 0) throw ShapeError("conv layer needs at least one feature map");
      const std::size_t r = spec.kernels[0].size();
      Shape out(in.size(), 0);
      for (const auto& k : spec.kernels) {
        if (k.size() != r || (r != 1 && r != 2))
          throw ShapeError("conv branches must share rank 1 or 2");
        if (in.size() != r + 1)
          throw ShapeError("conv input " + shape_str(in) + " incompatible with kernel " +
                           shape_str(k) + " (input rank must be " + std::to_string(r + 1) +
                           ")");
        for (std::size_t a = 0; a < r; ++a) {
          if (k[a] == 0 || k[a] > in[a + 1])
            throw ShapeError("conv input " + shape_str(in) + " smaller than kernel " +
                             shape_str(k));
          out[a + 1] = std::max(out[a + 1], in[a + 1] - k[a] + 1);
        }
      }
      out[0] = spec.maps * spec.kernels.size();
      return out;
    }
    case LayerKind::maxpool:
      return pool_output_dims(in, spec.pool);
    case LayerKind::relu:
    case LayerKind::sigmoid:
      return in;
    case LayerKind::dense:
      if (spec.units == 0) throw ShapeError("dense layer needs at least one unit");
      return {spec.units};
    case LayerKind::softmax:
      if (in.size() != 1)
        throw ShapeError("softmax expects a vector, got " + shape_str(in));
      return in;
  }
  throw ShapeError("unknown layer kind");
}

namespace {

void init_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : t.data()) v = rng.uniform(-r, r);
}

Tensor softmax_of(const Tensor& x) {
  Tensor y(x.dims());
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x.values()) m = std::max(m, v);
  double z = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = std::exp(x[i] - m);
    z += y[i];
  }
  for (auto& v : y.data()) v /= z;
  return y;
}

Tensor layer_forward(const Layer& layer, const Tensor& x) {
  switch (layer.spec.kind) {
    case LayerKind::conv:
      return conv_forward(x, layer.convs[0]);
    case LayerKind::branch_conv: {
      Tensor out(layer.out_dims);
      const std::size_t plane = spatial_size(layer.out_dims);
      std::size_t ch = 0;
      for (const auto& c : layer.convs) {
        Tensor y = conv_forward(x, c);
        const std::size_t r = c.rank();
        for (std::size_t o = 0; o < c.out_channels; ++o, ++ch) {
          if (r == 1) {
            const std::size_t len = y.dim(1);
            for (std::size_t i = 0; i < len; ++i) out[ch * plane + i] = y.at(o, i);
          } else {
            const std::size_t hh = y.dim(1), ww = y.dim(2), ow = layer.out_dims[2];
            for (std::size_t i = 0; i < hh; ++i)
              for (std::size_t j = 0; j < ww; ++j) out[ch * plane + i * ow + j] = y.at(o, i, j);
          }
        }
      }
      return out;
    }
    case LayerKind::maxpool:
      return maxpool_forward(x, layer.spec.pool);
    case LayerKind::relu: {
      Tensor y = x;
      for (auto& v : y.data()) v = v > 0.0 ? v : 0.0;
      return y;
    }
    case LayerKind::sigmoid: {
      Tensor y = x;
      for (auto& v : y.data()) v = 1.0 / (1.0 + std::exp(-v));
      return y;
    }
    case LayerKind::dense: {
      const std::size_t in = layer.dense_weights.dim(1), out = layer.spec.units;
      Tensor y(Shape{out});
      const auto& w = layer.dense_weights.values();
      const auto& xv = x.values();
      for (std::size_t o = 0; o < out; ++o) {
        double acc = layer.dense_bias[o];
        const double* row = &w[o * in];
        for (std::size_t i = 0; i < in; ++i) acc += row[i] * xv[i];
        y[o] = acc;
      }
      return y;
    }
    case LayerKind::softmax:
      return softmax_of(x);
  }
  throw InvariantError("unknown layer kind");
}

// Returns dL/dx and accumulates parameter gradients into `pg`.
Tensor layer_backward(const Layer& layer, const Tensor& x, const Tensor& y, const Tensor& g,
                      std::vector<Tensor>& pg) {
  switch (layer.spec.kind) {
    case LayerKind::conv: {
      Tensor gx(x.dims());
      conv_backward(x, layer.convs[0], g, gx, pg[0], pg[1]);
      return gx;
    }
    case LayerKind::branch_conv: {
      Tensor gx(x.dims());
      const std::size_t plane = spatial_size(layer.out_dims);
      std::size_t ch = 0;
      for (std::size_t b = 0; b < layer.convs.size(); ++b) {
        const auto& c = layer.convs[b];
        Shape odims = x.dims();
        odims[0] = c.out_channels;
        for (std::size_t a = 0; a < c.rank(); ++a) odims[a + 1] = x.dim(a + 1) - c.kernel[a] + 1;
        Tensor gb(odims);
        for (std::size_t o = 0; o < c.out_channels; ++o, ++ch) {
          if (c.rank() == 1) {
            for (std::size_t i = 0; i < odims[1]; ++i) gb.at(o, i) = g[ch * plane + i];
          } else {
            const std::size_t ow = layer.out_dims[2];
            for (std::size_t i = 0; i < odims[1]; ++i)
              for (std::size_t j = 0; j < odims[2]; ++j)
                gb.at(o, i, j) = g[ch * plane + i * ow + j];
          }
        }
        conv_backward(x, c, gb, gx, pg[2 * b], pg[2 * b + 1]);
      }
      return gx;
    }
    case LayerKind::maxpool: {
      Tensor gx(x.dims());
      for_each_pool_window(x, layer.spec.pool,
                           [&](std::size_t o, std::size_t best) { gx[best] += g[o]; });
      return gx;
    }
    case LayerKind::relu: {
      Tensor gx(x.dims());
      for (std::size_t i = 0; i < x.size(); ++i) gx[i] = x[i] > 0.0 ? g[i] : 0.0;
      return gx;
    }
    case LayerKind::sigmoid: {
      Tensor gx(x.dims());
      for (std::size_t i = 0; i < x.size(); ++i) gx[i] = g[i] * y[i] * (1.0 - y[i]);
      return gx;
    }
    case LayerKind::dense: {
      const std::size_t in = layer.dense_weights.dim(1), out = layer.spec.units;
      Tensor gx(x.dims());
      const auto& w = layer.dense_weights.values();
      auto gw = pg[0].data();
      for (std::size_t o = 0; o < out; ++o) {
        const double go = g[o];
        pg[1][o] += go;
        if (go == 0.0) continue;
        const double* row = &w[o * in];
        double* grow = &gw[o * in];
        for (std::size_t i = 0; i < in; ++i) {
          grow[i] += go * x[i];
          gx[i] += go * row[i];
        }
      }
      return gx;
    }
    case LayerKind::softmax: {
      double dot = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) dot += g[i] * y[i];
      Tensor gx(x.dims());
      for (std::size_t i = 0; i < y.size(); ++i) gx[i] = y[i] * (g[i] - dot);
      return gx;
    }
  }
  throw InvariantError("unknown layer kind");
}

}  // namespace

Network Network::build(const Shape& input_dims, const std::vector<LayerSpec>& specs,
                       std::uint64_t seed) {
  if (input_dims.empty()) throw ShapeError("network input dims must be non-empty");
  for (auto d : input_dims)
    if (d == 0) throw ShapeError("network input dims must be positive");
  Network net;
  net.input_dims_ = input_dims;
  net.seed_ = seed;
  Rng rng(seed);
  Shape cur = input_dims;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    Layer layer;
    layer.spec = specs[i];
    layer.in_dims = cur;
    try {
      layer.out_dims = infer_output_dims(specs[i], cur);
    } catch (const ShapeError& e) {
      throw ShapeError("layer " + std::to_string(i) + " (" + to_string(specs[i].kind) +
                       "): " + e.what());
    }
    if (specs[i].kind == LayerKind::conv || specs[i].kind == LayerKind::branch_conv) {
      for (const auto& k : specs[i].kernels) {
        ConvSpec c;
        c.kernel = k;
        c.in_channels = cur[0];
        c.out_channels = specs[i].maps;
        Shape wdims{c.out_channels, c.in_channels};
        wdims.insert(wdims.end(), k.begin(), k.end());
        c.weights = Tensor(wdims);
        c.bias = Tensor(Shape{c.out_channels});
        const std::size_t ksz = shape_size(k);
        init_uniform(c.weights, c.in_channels * ksz, c.out_channels * ksz, rng);
        layer.convs.push_back(std::move(c));
      }
    } else if (specs[i].kind == LayerKind::dense) {
      const std::size_t in = shape_size(cur);
      layer.dense_weights = Tensor({specs[i].units, in});
      layer.dense_bias = Tensor(Shape{specs[i].units});
      init_uniform(layer.dense_weights, in, specs[i].units, rng);
    }
    cur = layer.out_dims;
    net.layers_.push_back(std::move(layer));
  }
  return net;
}

Shape Network::output_dims() const {
  return layers_.empty() ? input_dims_ : layers_.back().out_dims;
}

Trace Network::forward(const Tensor& input) const {
  if (input.dims() != input_dims_)
    throw ShapeError("network input " + shape_str(input.dims()) + " expected " +
                     shape_str(input_dims_));
  Trace t;
  t.activations.reserve(layers_.size() + 1);
  t.activations.push_back(input);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Tensor& x = t.activations.back();
    if (x.dims() != layers_[i].in_dims)
      throw ShapeError("layer " + std::to_string(i) + " expects " +
                       shape_str(layers_[i].in_dims) + ", got " + shape_str(x.dims()));
    t.activations.push_back(layer_forward(layers_[i], x));
  }
  return t;
}

Gradients Network::backward_range(const Trace& trace, Tensor grad, std::size_t end) const {
  if (trace.empty() || trace.activations.size() != layers_.size() + 1)
    throw ValidationError("backward called without a matching forward trace");
  Gradients grads(layers_.size());
  for (std::size_t i = 0; i < layers_.size(); ++i)
    for (const Tensor* p : layers_[i].parameters()) grads[i].emplace_back(p->dims());
  for (std::size_t i = end; i-- > 0;) {
    const Tensor& x = trace.activations[i];
    const Tensor& y = trace.activations[i + 1];
    if (grad.size() != y.size())
      throw ShapeError("gradient " + shape_str(grad.dims()) + " does not match layer " +
                       std::to_string(i) + " output " + shape_str(y.dims()));
    grad = layer_backward(layers_[i], x, y, grad, grads[i]);
  }
  return grads;
}

Gradients Network::backward(const Trace& trace, const Tensor& output_grad) const {
  return backward_range(trace, output_grad, layers_.size());
}

Gradients Network::backward_from_logits(const Trace& trace, const Tensor& logits_grad) const {
  if (layers_.empty() || layers_.back().spec.kind != LayerKind::softmax)
    throw ValidationError("backward_from_logits requires a trailing softmax layer");
  return backward_range(trace, logits_grad, layers_.size() - 1);
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor* p : parameters()) n += p->size();
  return n;
}

std::vector<Tensor*> Network::parameters() {
  std::vector<Tensor*> out;
  for (auto& l : layers_)
    for (Tensor* p : l.parameters()) out.push_back(p);
  return out;
}

std::vector<const Tensor*> Network::parameters() const {
  std::vector<const Tensor*> out;
  for (const auto& l : layers_)
    for (const Tensor* p : l.parameters()) out.push_back(p);
  return out;
}

namespace {

nlohmann::json tensor_json(const Tensor& t) {
  return {{"dims", t.dims()}, {"data", t.values()}};
}

Tensor tensor_from_json(const nlohmann::json& j) {
  return Tensor(j.at("dims").get<Shape>(), j.at("data").get<std::vector<double>>());
}

}  // namespace

nlohmann::json Network::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : layers_) {
    nlohmann::json jl{{"kind", to_string(l.spec.kind)}};
    if (!l.spec.kernels.empty()) jl["kernels"] = l.spec.kernels;
    if (l.spec.maps) jl["maps"] = l.spec.maps;
    if (!l.spec.pool.empty()) jl["pool"] = l.spec.pool;
    if (l.spec.units) jl["units"] = l.spec.units;
    nlohmann::json params = nlohmann::json::array();
    for (const Tensor* p : l.parameters()) params.push_back(tensor_json(*p));
    if (!params.empty()) jl["params"] = params;
    layers.push_back(jl);
  }
  return {{"format", "msa-network"},
          {"version", 1},
          {"seed", seed_},
          {"input_dims", input_dims_},
          {"layers", layers}};
}

Network Network::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "msa-network" || j.value("version", 0) != 1)
    throw ValidationError("not an msa-network v1 document");
  std::vector<LayerSpec> specs;
  for (const auto& jl : j.at("layers")) {
    LayerSpec s;
    s.kind = layer_kind_from_string(jl.at("kind").get<std::string>());
    s.kernels = jl.value("kernels", std::vector<Shape>{});
    s.maps = jl.value("maps", std::size_t{0});
    s.pool = jl.value("pool", Shape{});
    s.units = jl.value("units", std::size_t{0});
    specs.push_back(std::move(s));
  }
  Network net = build(j.at("input_dims").get<Shape>(), specs, j.at("seed").get<std::uint64_t>());
  const auto& jlayers = j.at("layers");
  for (std::size_t i = 0; i < net.layers_.size(); ++i) {
    auto params = net.layers_[i].parameters();
    const auto jp = jlayers[i].value("params", nlohmann::json::array());
    if (jp.size() != params.size())
      throw ValidationError("layer " + std::to_string(i) + " parameter count mismatch");
    for (std::size_t p = 0; p < params.size(); ++p) {
      Tensor t = tensor_from_json(jp[p]);
      if (t.dims() != params[p]->dims())
        throw ShapeError("layer " + std::to_string(i) + " parameter " + std::to_string(p) +
                         " has dims " + shape_str(t.dims()) + ", expected " +
                         shape_str(params[p]->dims()));
      *params[p] = std::move(t);
    }
  }
  return net;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw ValidationError("learning_rate must be finite and non-negative");
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
}

namespace {

std::size_t check_classifier(const Network& net, std::span<const Tensor> inputs,
                             std::span<const int> labels) {
  if (net.layers().empty() || net.layers().back().spec.kind != LayerKind::softmax)
    throw ValidationError("network must end in a softmax layer");
  if (inputs.size() != labels.size())
    throw ValidationError("inputs and labels differ in length");
  const std::size_t classes = net.output_dims()[0];
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes)
      throw ValidationError("label " + std::to_string(labels[i]) + " at index " +
                            std::to_string(i) + " outside [0, " + std::to_string(classes) + ")");
  return classes;
}

double sample_loss(const Tensor& probs, int label) {
  return -std::log(std::max(probs[static_cast<std::size_t>(label)], 1e-300));
}

}  // namespace

double cross_entropy(const Network& net, std::span<const Tensor> inputs,
                     std::span<const int> labels) {
  check_classifier(net, inputs, labels);
  if (inputs.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) total += sample_loss(net.predict(inputs[i]), labels[i]);
  return total / static_cast<double>(inputs.size());
}

TrainResult train_softmax(Network net, std::span<const Tensor> inputs,
                          std::span<const int> labels, const TrainConfig& cfg) {
  cfg.validate();
  check_classifier(net, inputs, labels);
  TrainResult result;
  result.loss_trace.push_back(cross_entropy(net, inputs, labels));
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(inputs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto params = net.parameters();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      Gradients acc;
      for (std::size_t s = start; s < end; ++s) {
        const std::size_t idx = order[s];
        Trace tr = net.forward(inputs[idx]);
        Tensor g = tr.output();
        g[static_cast<std::size_t>(labels[idx])] -= 1.0;
        // softmax input is activations[n - 1]
        Gradients gr = net.backward_from_logits(tr, g);
        if (acc.empty()) {
          acc = std::move(gr);
        } else {
          for (std::size_t l = 0; l < acc.size(); ++l)
            for (std::size_t p = 0; p < acc[l].size(); ++p) {
              auto dst = acc[l][p].data();
              auto src = gr[l][p].data();
              for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
            }
        }
      }
      const double step = cfg.learning_rate / static_cast<double>(end - start);
      std::size_t pi = 0;
      for (auto& layer_grads : acc)
        for (auto& g : layer_grads) {
          auto w = params[pi++]->data();
          auto gv = g.data();
          for (std::size_t k = 0; k < w.size(); ++k) w[k] -= step * gv[k];
        }
    }
    result.loss_trace.push_back(cross_entropy(net, inputs, labels));
    for (const Tensor* p : net.parameters())
      if (!p->all_finite())
        throw InvariantError("non-finite weights after epoch " + std::to_string(epoch + 1) +
                             "; lower the learning rate");
  }
  result.network = std::move(net);
  return result;
}

namespace {

// Hash of every ReLU on/off state and pooling argmax in a trace.
std::uint64_t switch_signature(const Network& net, const Trace& tr) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](std::uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ULL;
  };
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    const auto& layer = net.layers()[i];
    const Tensor& x = tr.activations[i];
    if (layer.spec.kind == LayerKind::relu) {
      for (double v : x.values()) feed(v > 0.0);
    } else if (layer.spec.kind == LayerKind::maxpool) {
      for_each_pool_window(x, layer.spec.pool, [&](std::size_t, std::size_t best) { feed(best); });
    }
  }
  return h;
}

double projected_loss(const Tensor& y, const std::vector<double>& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += r[i] * y[i];
  return s;
}

}  // namespace

GradCheckResult grad_check(const Network& net_in, const Tensor& input,
                           const GradCheckOptions& opts) {
  if (!(opts.epsilon > 0.0)) throw ValidationError("grad_check epsilon must be > 0");
  if (net_in.parameter_count() > kMaxGradCheckParams)
    throw ValidationError("grad_check limited to " + std::to_string(kMaxGradCheckParams) +
                          " parameters, network has " + std::to_string(net_in.parameter_count()));
  Network net = net_in;
  Trace base = net.forward(input);
  Rng rng(opts.seed);
  std::vector<double> r(base.output().size());
  for (auto& v : r) v = rng.uniform(-1.0, 1.0);
  Gradients analytic = net.backward(base, Tensor(base.output().dims(), r));
  const std::uint64_t base_sig = switch_signature(net, base);

  GradCheckResult res;
  bool first = true;
  auto params = net.parameters();
  std::size_t pi = 0;
  for (std::size_t l = 0; l < analytic.size(); ++l)
    for (std::size_t p = 0; p < analytic[l].size(); ++p, ++pi) {
      Tensor& w = *params[pi];
      for (std::size_t k = 0; k < w.size(); ++k) {
        double a = analytic[l][p][k];
        if (first) {
          a += opts.analytic_offset;
          first = false;
        }
        const double saved = w[k];
        w[k] = saved + opts.epsilon;
        Trace plus = net.forward(input);
        w[k] = saved - opts.epsilon;
        Trace minus = net.forward(input);
        w[k] = saved;
        if (switch_signature(net, plus) != base_sig || switch_signature(net, minus) != base_sig) {
          ++res.skipped;
          continue;
        }
        const double numeric =
            (projected_loss(plus.output(), r) - projected_loss(minus.output(), r)) /
            (2.0 * opts.epsilon);
        const double denom = std::max({std::abs(a), std::abs(numeric), 1e-7});
        res.max_rel_error = std::max(res.max_rel_error, std::abs(a - numeric) / denom);
        ++res.checked;
      }
    }
  return res;
}

}  // namespace msa::nn
