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

#include "msa/visual_features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace msa::visual {

namespace {

// Skips whitespace and '#' comments in a PGM header.
void skip_space(std::istream& in) {
  while (true) {
    int c = in.peek();
    if (c == '#') {
      std::string dummy;
      std::getline(in, dummy);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

}  // namespace

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open PGM file " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") throw DataError(path.string() + ": only binary PGM (P5) is supported");
  std::size_t w = 0, h = 0;
  int maxval = 0;
  skip_space(in);
  in >> w;
  skip_space(in);
  in >> h;
  skip_space(in);
  in >> maxval;
  if (!in || w == 0 || h == 0 || maxval <= 0 || maxval > 255)
    throw DataError(path.string() + ": bad PGM header");
  in.get();
  std::vector<unsigned char> raw(w * h);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size())
    throw DataError(path.string() + ": truncated PGM data");
  Image img(h, w);
  for (std::size_t i = 0; i < raw.size(); ++i) img.pixels[i] = raw[i] / static_cast<double>(maxval);
  return img;
}

void write_pgm(const std::filesystem::path& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write PGM file " + path.string());
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  std::string raw(img.pixels.size(), '\0');
  for (std::size_t i = 0; i < raw.size(); ++i)
    raw[i] = static_cast<char>(std::lround(std::clamp(img.pixels[i], 0.0, 1.0) * 255.0));
  out.write(raw.data(), static_cast<std::streamsize>(raw.size()));
}

FrameSequence sample_frames(const FrameSequence& seq, std::size_t stride) {
  if (stride < 1) throw ValidationError("frame stride must be >= 1");
  if (!seq.boxes.empty() && seq.boxes.size() != seq.frames.size())
    throw DataError("face box count does not match frame count");
  FrameSequence out;
  for (std::size_t i = 0; i < seq.frames.size(); i += stride) {
    out.frames.push_back(seq.frames[i]);
    if (!seq.boxes.empty()) out.boxes.push_back(seq.boxes[i]);
  }
  if (out.frames.size() < 2)
    throw DataError("sampling " + std::to_string(seq.frames.size()) + " frames with stride " +
                    std::to_string(stride) + " keeps " + std::to_string(out.frames.size()) +
                    " frame(s); pairing needs 2");
  return out;
}

namespace {

// Source-interval overlap weights for area averaging along one axis.
std::vector<std::vector<std::pair<std::size_t, double>>> area_weights(std::size_t in,
                                                                      std::size_t out) {
  std::vector<std::vector<std::pair<std::size_t, double>>> w(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t o = 0; o < out; ++o) {
    const double lo = static_cast<double>(o) * scale, hi = lo + scale;
    for (auto i = static_cast<std::size_t>(std::floor(lo)); i < in && static_cast<double>(i) < hi; ++i) {
      const double ov = std::min(hi, static_cast<double>(i + 1)) - std::max(lo, static_cast<double>(i));
      if (ov > 0) w[o].emplace_back(i, ov / scale);
    }
  }
  return w;
}

}  // namespace

Image downscale(const Image& img, double factor) {
  if (!(factor > 0.0 && factor <= 1.0)) throw ValidationError("downscale factor must be in (0, 1]");
  const auto oh = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(img.height * factor)));
  const auto ow = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(img.width * factor)));
  if (oh == img.height && ow == img.width) return img;
  const auto wr = area_weights(img.height, oh);
  const auto wc = area_weights(img.width, ow);
  Image out(oh, ow);
  for (std::size_t r = 0; r < oh; ++r)
    for (std::size_t c = 0; c < ow; ++c) {
      double s = 0.0;
      for (auto [i, a] : wr[r])
        for (auto [j, b] : wc[c]) s += a * b * img.at(i, j);
      out.at(r, c) = s;
    }
  return out;
}

FrameSequence crop_and_downscale(const FrameSequence& seq, double factor) {
  if (!(factor > 0.0 && factor <= 1.0)) throw ValidationError("downscale factor must be in (0, 1]");
  if (!seq.boxes.empty() && seq.boxes.size() != seq.frames.size())
    throw DataError("face box count does not match frame count");
  FrameSequence out;
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    const Image& src = seq.frames[f];
    Image cropped;
    if (!seq.boxes.empty()) {
      const Box& b = seq.boxes[f];
      if (b.w == 0 || b.h == 0 || b.x + b.w > src.width || b.y + b.h > src.height)
        throw DataError("face box at frame " + std::to_string(f) + " lies outside the " +
                        std::to_string(src.height) + "x" + std::to_string(src.width) + " frame");
      cropped = Image(b.h, b.w);
      for (std::size_t r = 0; r < b.h; ++r)
        for (std::size_t c = 0; c < b.w; ++c) cropped.at(r, c) = src.at(b.y + r, b.x + c);
    } else {
      cropped = src;
    }
    out.frames.push_back(downscale(cropped, factor));
  }
  return out;
}

std::vector<PairedFrame> pair_frames(const FrameSequence& seq) {
  if (seq.frames.size() < 2)
    throw DataError("pairing needs at least 2 frames, got " + std::to_string(seq.frames.size()));
  std::vector<PairedFrame> out;
  for (std::size_t t = 0; t + 1 < seq.frames.size(); ++t) {
    const Image& a = seq.frames[t];
    const Image& b = seq.frames[t + 1];
    if (a.height != b.height || a.width != b.width)
      throw DataError("frames " + std::to_string(t) + " and " + std::to_string(t + 1) +
                      " differ in size");
    Tensor p({2, a.height, a.width});
    std::copy(a.pixels.begin(), a.pixels.end(), p.data().begin());
    std::copy(b.pixels.begin(), b.pixels.end(), p.data().begin() + static_cast<std::ptrdiff_t>(a.pixels.size()));
    out.push_back(std::move(p));
  }
  return out;
}

PairedFrame pad_to_canvas(const PairedFrame& img, std::size_t canvas_h, std::size_t canvas_w) {
  if (img.rank() != 3 || img.dim(0) != 2)
    throw ShapeError("paired frame must be [2, H, W], got " + shape_str(img.dims()));
  const std::size_t h = img.dim(1), w = img.dim(2);
  if (h > canvas_h || w > canvas_w)
    throw DataError("image " + std::to_string(h) + "x" + std::to_string(w) + " exceeds canvas " +
                    std::to_string(canvas_h) + "x" + std::to_string(canvas_w));
  Tensor out({2, canvas_h, canvas_w});
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t k = 0; k < w; ++k) out.at(c, r, k) = img.at(c, r, k);
  return out;
}

VisualCnnConfig VisualCnnConfig::paper() { return VisualCnnConfig{}; }

VisualCnnConfig VisualCnnConfig::desk() {
  VisualCnnConfig c;
  c.stride = 10;
  c.scale = 0.5;
  c.canvas_h = 18;
  c.canvas_w = 26;
  c.conv1_maps = 4;
  c.conv1_kh = 3;
  c.conv1_kw = 5;
  c.conv2_maps = 4;
  c.conv2_kh = 3;
  c.conv2_kw = 4;
  c.pool = 2;
  c.feature_width = 6;
  return c;
}

std::vector<nn::LayerSpec> VisualCnnConfig::layers(std::size_t n_classes) const {
  using nn::LayerSpec;
  return {LayerSpec::conv2d(conv1_kh, conv1_kw, conv1_maps),
          LayerSpec::relu(),
          LayerSpec::maxpool({pool, pool}),
          LayerSpec::conv2d(conv2_kh, conv2_kw, conv2_maps),
          LayerSpec::relu(),
          LayerSpec::maxpool({pool, pool}),
          LayerSpec::dense(feature_width),
          LayerSpec::sigmoid(),
          LayerSpec::dense(n_classes),
          LayerSpec::softmax()};
}

void VisualCnnConfig::validate(std::size_t n_classes) const {
  if (stride == 0 || !(scale > 0.0 && scale <= 1.0) || canvas_h == 0 || canvas_w == 0 ||
      conv1_maps == 0 || conv2_maps == 0 || pool == 0 || feature_width == 0)
    throw ValidationError("visual CNN sizes must be positive and scale in (0, 1]");
  if (n_classes < 2) throw ValidationError("visual CNN needs at least 2 classes");
  Shape cur = input_dims();
  const auto specs = layers(n_classes);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    try {
      cur = nn::infer_output_dims(specs[i], cur);
    } catch (const ShapeError& e) {
      throw ShapeError("visual CNN layer " + std::to_string(i) + " (" + nn::to_string(specs[i].kind) +
                       "): " + e.what());
    }
  }
}

nlohmann::json VisualCnnConfig::to_json() const {
  return {{"stride", stride},         {"scale", scale},           {"canvas_h", canvas_h},
          {"canvas_w", canvas_w},     {"conv1_maps", conv1_maps}, {"conv1_kh", conv1_kh},
          {"conv1_kw", conv1_kw},     {"conv2_maps", conv2_maps}, {"conv2_kh", conv2_kh},
          {"conv2_kw", conv2_kw},     {"pool", pool},             {"feature_width", feature_width}};
}

VisualCnnConfig VisualCnnConfig::from_json(const nlohmann::json& j) {
  VisualCnnConfig c = j.value("preset", std::string("desk")) == "paper" ? paper() : desk();
  c.stride = j.value("stride", c.stride);
  c.scale = j.value("scale", c.scale);
  c.canvas_h = j.value("canvas_h", c.canvas_h);
  c.canvas_w = j.value("canvas_w", c.canvas_w);
  c.conv1_maps = j.value("conv1_maps", c.conv1_maps);
  c.conv1_kh = j.value("conv1_kh", c.conv1_kh);
  c.conv1_kw = j.value("conv1_kw", c.conv1_kw);
  c.conv2_maps = j.value("conv2_maps", c.conv2_maps);
  c.conv2_kh = j.value("conv2_kh", c.conv2_kh);
  c.conv2_kw = j.value("conv2_kw", c.conv2_kw);
  c.pool = j.value("pool", c.pool);
  c.feature_width = j.value("feature_width", c.feature_width);
  return c;
}

std::vector<PairedFrame> preprocess(const FrameSequence& seq, const VisualCnnConfig& cfg) {
  auto pairs = pair_frames(crop_and_downscale(sample_frames(seq, cfg.stride), cfg.scale));
  for (auto& p : pairs) p = pad_to_canvas(p, cfg.canvas_h, cfg.canvas_w);
  return pairs;
}

VisualModel::VisualModel(VisualCnnConfig config, nn::Network network)
    : config_(std::move(config)), network_(std::move(network)) {
  if (network_.input_dims() != config_.input_dims())
    throw ValidationError("visual model input " + shape_str(network_.input_dims()) +
                          " does not match config " + shape_str(config_.input_dims()));
  if (network_.layers().size() != config_.layers(2).size())
    throw ValidationError("visual model layers do not match its config");
}

std::vector<double> VisualModel::pair_features(const PairedFrame& pair) const {
  return network_.forward(pair).activations[kFeatureActivation].values();
}

std::vector<double> VisualModel::features(std::span<const PairedFrame> pairs) const {
  if (pairs.empty()) throw DataError("no frame pairs to extract visual features from");
  std::vector<double> mean(config_.feature_width, 0.0);
  for (const auto& p : pairs) {
    const auto f = pair_features(p);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += f[i];
  }
  for (auto& v : mean) v /= static_cast<double>(pairs.size());
  return mean;
}

nlohmann::json VisualModel::to_json() const {
  return {{"format", "msa-visual-model"},
          {"version", 1},
          {"config", config_.to_json()},
          {"network", network_.to_json()}};
}

VisualModel VisualModel::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "msa-visual-model")
    throw ValidationError("not an msa-visual-model document");
  return VisualModel(VisualCnnConfig::from_json(j.at("config")),
                     nn::Network::from_json(j.at("network")));
}

VisualModel build_visual_model(const VisualCnnConfig& cfg, std::size_t n_classes,
                               std::uint64_t seed) {
  cfg.validate(n_classes);
  return VisualModel(cfg, nn::Network::build(cfg.input_dims(), cfg.layers(n_classes), seed));
}

std::vector<double> extract_visual_features(const FrameSequence& seq, const VisualModel& model) {
  return model.features(preprocess(seq, model.config()));
}

TrainedVisual train_visual_model(std::span<const LabeledPairs> corpus, const VisualCnnConfig& cfg,
                                 const nn::TrainConfig& tcfg, std::size_t n_classes) {
  std::set<int> classes;
  std::vector<Tensor> inputs;
  std::vector<int> labels;
  for (const auto& u : corpus) {
    classes.insert(u.label);
    for (const auto& p : u.pairs) {
      inputs.push_back(p);
      labels.push_back(u.label);
    }
  }
  if (classes.size() < 2)
    throw ValidationError("visual corpus must contain at least 2 classes");
  VisualModel init = build_visual_model(cfg, n_classes, tcfg.seed);
  auto res = nn::train_softmax(init.network(), inputs, labels, tcfg);
  return {VisualModel(cfg, std::move(res.network)), std::move(res.loss_trace)};
}

}  // namespace msa::visual
