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

#pragma once

// Minimal deterministic neural-network kernel: valid convolutions (1-D and
// 2-D, optionally as parallel branches), non-overlapping max pooling, ReLU,
// logistic, dense and softmax layers, mini-batch SGD on softmax
// cross-entropy, and a central-difference gradient checker.
//
// Layout conventions (channels first):
//   1-D activations  [channels, length]
//   2-D activations  [channels, height, width]
//   conv weights     [out_channels, in_channels, k] / [out, in, kh, kw]
//   dense weights    [out, in]; dense layers flatten their input.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "msa/common.hpp"
#include "msa/tensor.hpp"

namespace msa::nn {

struct ConvSpec {
  Shape kernel;  // {k} or {kh, kw}
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  Tensor weights;  // [out, in, *kernel]
  Tensor bias;     // [out]

  std::size_t rank() const { return kernel.size(); }
  void validate() const;
};

// Valid (unpadded) convolution. Throws ShapeError naming both shapes when the
// input does not fit the kernel.
Tensor conv_forward(const Tensor& input, const ConvSpec& spec);

// Non-overlapping max pooling over the trailing spatial axes. `window` has one
// entry per spatial axis; every pooled dim must be divisible by its window.
Tensor maxpool_forward(const Tensor& input, const Shape& window);

enum class LayerKind { conv, branch_conv, maxpool, relu, sigmoid, dense, softmax };

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& s);

// Architecture description of one layer; parameters are allocated when the
// network is built against a concrete input shape.
struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::vector<Shape> kernels;  // conv: one entry; branch_conv: one per branch
  std::size_t maps = 0;        // feature maps per conv branch
  Shape pool;                  // maxpool window per spatial axis
  std::size_t units = 0;       // dense output width

  static LayerSpec conv1d(std::size_t k, std::size_t maps);
  static LayerSpec conv2d(std::size_t kh, std::size_t kw, std::size_t maps);
  // Parallel 1-D convolutions of different widths over the same input. Their
  // outputs are aligned at the start, zero-extended to the longest branch and
  // stacked along the channel axis.
  static LayerSpec branches1d(std::vector<std::size_t> widths, std::size_t maps);
  static LayerSpec maxpool(Shape window);
  static LayerSpec relu();
  static LayerSpec sigmoid();
  static LayerSpec dense(std::size_t units);
  static LayerSpec softmax();
};

struct Layer {
  LayerSpec spec;
  Shape in_dims;
  Shape out_dims;
  std::vector<ConvSpec> convs;  // conv / branch_conv
  Tensor dense_weights;         // [units, in]
  Tensor dense_bias;            // [units]

  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
};

// Output dims of a layer kind as a pure function of its input dims. Throws
// ShapeError when the input is incompatible.
Shape infer_output_dims(const LayerSpec& spec, const Shape& in_dims);

// Activations of every layer from one forward pass; needed by backward().
struct Trace {
  std::vector<Tensor> activations;  // [0] = input, [i + 1] = output of layer i

  bool empty() const { return activations.empty(); }
  const Tensor& output() const { return activations.back(); }
};

// Per-layer parameter gradients, in Layer::parameters() order.
using Gradients = std::vector<std::vector<Tensor>>;

class Network {
 public:
  Network() = default;

  // Validates the shape chain and initializes weights uniformly in
  // [-r, r], r = sqrt(6 / (fan_in + fan_out)); biases start at zero.
  static Network build(const Shape& input_dims, const std::vector<LayerSpec>& specs,
                       std::uint64_t seed);

  const Shape& input_dims() const { return input_dims_; }
  Shape output_dims() const;
  std::uint64_t seed() const { return seed_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  Trace forward(const Tensor& input) const;
  Tensor predict(const Tensor& input) const { return forward(input).output(); }

  // Backpropagates dL/d(output) through every layer.
  Gradients backward(const Trace& trace, const Tensor& output_grad) const;
  // Backpropagates from the input of a trailing softmax layer (the logits).
  Gradients backward_from_logits(const Trace& trace, const Tensor& logits_grad) const;

  std::size_t parameter_count() const;
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;

  nlohmann::json to_json() const;
  static Network from_json(const nlohmann::json& j);

 private:
  Gradients backward_range(const Trace& trace, Tensor grad, std::size_t end) const;

  Shape input_dims_;
  std::vector<Layer> layers_;
  std::uint64_t seed_ = 0;
};

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 10;
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainResult {
  Network network;
  // Mean cross-entropy over the full training set: before training, then
  // after every epoch.
  std::vector<double> loss_trace;
};

// Mini-batch SGD (no momentum) on softmax cross-entropy. The network must
// end in a softmax layer; labels must lie in [0, n_classes).
TrainResult train_softmax(Network net, std::span<const Tensor> inputs,
                          std::span<const int> labels, const TrainConfig& cfg);

double cross_entropy(const Network& net, std::span<const Tensor> inputs,
                     std::span<const int> labels);

struct GradCheckOptions {
  double epsilon = 1e-5;
  std::uint64_t seed = 0;  // seeds the random projection used as scalar loss
  // Added to the first analytic gradient entry; used to verify the checker
  // actually detects wrong gradients.
  double analytic_offset = 0.0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  // Parameters skipped because the perturbation moved a ReLU or pooling
  // switch, where the loss is not differentiable.
  std::size_t skipped = 0;
};

constexpr std::size_t kMaxGradCheckParams = 10000;

// Compares backward() against central differences of L = sum_i r_i * y_i with
// fixed pseudo-random r. Relative error is |a - n| / max(|a|, |n|, 1e-7).
GradCheckResult grad_check(const Network& net, const Tensor& input,
                           const GradCheckOptions& opts = {});

}  // namespace msa::nn
