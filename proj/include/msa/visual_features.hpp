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

// Frame-pair CNN features: every-Nth-frame sampling, optional face-box crop,
// area-averaging downscale, consecutive-frame pairing into 2-channel images,
// zero padding to a fixed canvas, and a two-conv-layer CNN whose logistic
// layer activations, averaged over pairs, form the utterance feature.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "msa/nn.hpp"
#include "msa/tensor.hpp"

namespace msa::visual {

// Grayscale image with values in [0, 1].
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;  // row-major

  Image() = default;
  Image(std::size_t h, std::size_t w, double fill = 0.0) : height(h), width(w), pixels(h * w, fill) {}
  double& at(std::size_t r, std::size_t c) { return pixels[r * width + c]; }
  double at(std::size_t r, std::size_t c) const { return pixels[r * width + c]; }
  friend bool operator==(const Image&, const Image&) = default;
};

// Binary PGM (P5), maxval <= 255.
Image read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Image& img);

struct Box {
  std::size_t x = 0, y = 0, w = 0, h = 0;
  friend bool operator==(const Box&, const Box&) = default;
};

struct FrameSequence {
  std::vector<Image> frames;
  std::vector<Box> boxes;  // empty, or one per frame
};

// Keeps frames 0, stride, 2*stride, ...; at least two must survive.
FrameSequence sample_frames(const FrameSequence& seq, std::size_t stride);

// Crops each frame to its box (when boxes are present), then rescales by
// `factor` with area averaging; output dims are round(dim * factor), min 1.
FrameSequence crop_and_downscale(const FrameSequence& seq, double factor);

Image downscale(const Image& img, double factor);

// [2, H, W]: channel 0 = frame t, channel 1 = frame t + 1.
using PairedFrame = Tensor;

std::vector<PairedFrame> pair_frames(const FrameSequence& seq);

// Places the image at the top-left of a zero canvas.
PairedFrame pad_to_canvas(const PairedFrame& img, std::size_t canvas_h, std::size_t canvas_w);

struct VisualCnnConfig {
  std::size_t stride = 10;
  double scale = 0.5;
  std::size_t canvas_h = 250;
  std::size_t canvas_w = 500;
  std::size_t conv1_maps = 100;
  std::size_t conv1_kh = 10, conv1_kw = 20;
  std::size_t conv2_maps = 100;
  std::size_t conv2_kh = 20, conv2_kw = 30;
  std::size_t pool = 2;
  std::size_t feature_width = 300;

  static VisualCnnConfig paper();
  static VisualCnnConfig desk();

  Shape input_dims() const { return {2, canvas_h, canvas_w}; }
  // conv1 -> relu -> pool -> conv2 -> relu -> pool -> dense(feature_width)
  // -> sigmoid -> dense(n_classes) -> softmax
  std::vector<nn::LayerSpec> layers(std::size_t n_classes) const;
  // Throws ShapeError naming the first layer that does not fit. The paper-size
  // configuration fails here: 250x500 after a valid 10x20 convolution is
  // 241x481, which a 2x2 pool cannot divide.
  void validate(std::size_t n_classes = 2) const;

  nlohmann::json to_json() const;
  static VisualCnnConfig from_json(const nlohmann::json& j);
};

// Sampling, cropping, downscaling, pairing and padding in one step.
std::vector<PairedFrame> preprocess(const FrameSequence& seq, const VisualCnnConfig& cfg);

class VisualModel {
 public:
  VisualModel() = default;
  VisualModel(VisualCnnConfig config, nn::Network network);

  const VisualCnnConfig& config() const { return config_; }
  const nn::Network& network() const { return network_; }

  std::vector<double> pair_features(const PairedFrame& pair) const;
  // Mean of the per-pair logistic activations.
  std::vector<double> features(std::span<const PairedFrame> pairs) const;

  nlohmann::json to_json() const;
  static VisualModel from_json(const nlohmann::json& j);

 private:
  static constexpr std::size_t kFeatureActivation = 8;  // output of layer 7 (sigmoid)
  VisualCnnConfig config_;
  nn::Network network_;
};

VisualModel build_visual_model(const VisualCnnConfig& cfg, std::size_t n_classes,
                               std::uint64_t seed);

std::vector<double> extract_visual_features(const FrameSequence& seq, const VisualModel& model);

struct LabeledPairs {
  std::vector<PairedFrame> pairs;  // already preprocessed
  int label = 0;
};

struct TrainedVisual {
  VisualModel model;
  std::vector<double> loss_trace;
};

// Every pair is one training example carrying its utterance's label.
TrainedVisual train_visual_model(std::span<const LabeledPairs> corpus, const VisualCnnConfig& cfg,
                                 const nn::TrainConfig& tcfg, std::size_t n_classes);

}  // namespace msa::visual
