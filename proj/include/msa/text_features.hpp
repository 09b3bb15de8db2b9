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

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "msa/nn.hpp"
#include "msa/tensor.hpp"

namespace msa::text {

inline constexpr std::string_view kPadToken = "<pad>";

// Word vectors loaded from a plain-text file ("word v1 ... vd" per line; an
// optional leading "count dim" header line is skipped). Unknown words get a
// vector drawn uniformly from [-0.25, 0.25], seeded by (word, oov_seed), so
// repeated lookups agree. The pad token maps to the zero vector.
class EmbeddingTable {
 public:
  EmbeddingTable(std::size_t dim, std::uint64_t oov_seed);

  static EmbeddingTable load(const std::filesystem::path& path, std::uint64_t oov_seed);
  // Table with a random vector for every word in `vocab`.
  static EmbeddingTable random(const std::vector<std::string>& vocab, std::size_t dim,
                               std::uint64_t seed);
  void save(const std::filesystem::path& path) const;

  std::size_t dim() const { return dim_; }
  std::uint64_t oov_seed() const { return oov_seed_; }
  std::size_t size() const { return entries_.size(); }
  bool contains(const std::string& word) const { return entries_.count(word) > 0; }

  void add(const std::string& word, std::vector<double> vec);
  std::vector<double> lookup(const std::string& word) const;

 private:
  std::size_t dim_;
  std::uint64_t oov_seed_;
  std::map<std::string, std::vector<double>> entries_;
};

// Lowercased whitespace tokenization.
std::vector<std::string> tokenize(std::string_view text);

// Truncates to `width` tokens or pads with kPadToken up to it.
std::vector<std::string> wrap_window(std::span<const std::string> tokens, std::size_t width);

// Row i is the embedding of token i of the wrapped sentence; dims [width, dim].
Tensor embed_sentence(std::span<const std::string> tokens, const EmbeddingTable& table,
                      std::size_t width);

struct TextCnnConfig {
  std::size_t window = 50;
  std::size_t embedding_dim = 300;
  std::vector<std::size_t> conv1_kernels{3, 4};
  std::size_t conv1_maps = 50;  // per kernel size
  std::size_t conv2_kernel = 2;
  std::size_t conv2_maps = 100;
  std::size_t pool = 2;
  std::size_t feature_width = 500;

  static TextCnnConfig paper();
  static TextCnnConfig desk();

  Shape input_dims() const { return {embedding_dim, window}; }
  // conv1 branches -> relu -> pool -> conv2 -> relu -> dense(feature_width)
  // -> relu -> dense(n_classes) -> softmax
  std::vector<nn::LayerSpec> layers(std::size_t n_classes) const;
  // Throws ShapeError if the layer chain does not validate.
  void validate(std::size_t n_classes = 2) const;

  nlohmann::json to_json() const;
  static TextCnnConfig from_json(const nlohmann::json& j);
};

class TextModel {
 public:
  TextModel() = default;
  TextModel(TextCnnConfig config, nn::Network network);

  const TextCnnConfig& config() const { return config_; }
  const nn::Network& network() const { return network_; }
  std::size_t n_classes() const { return network_.output_dims()[0]; }

  Tensor encode(std::span<const std::string> tokens, const EmbeddingTable& table) const;
  // Activations of the fully-connected feature layer.
  std::vector<double> features(std::span<const std::string> tokens,
                               const EmbeddingTable& table) const;
  // Class probabilities from the retained softmax head.
  std::vector<double> probabilities(std::span<const std::string> tokens,
                                    const EmbeddingTable& table) const;

  nlohmann::json to_json() const;
  static TextModel from_json(const nlohmann::json& j);

 private:
  static constexpr std::size_t kFeatureActivation = 7;  // output of layer 6 (relu)
  TextCnnConfig config_;
  nn::Network network_;
};

TextModel build_text_model(const TextCnnConfig& cfg, std::size_t n_classes, std::uint64_t seed);

struct LabeledSentence {
  std::vector<std::string> tokens;
  int label = 0;
};

struct TrainedText {
  TextModel model;
  std::vector<double> loss_trace;
};

// Trains the text CNN with softmax cross-entropy; embeddings stay frozen.
// Network weights are initialized from tcfg.seed.
TrainedText train_text_model(std::span<const LabeledSentence> corpus, const TextCnnConfig& cfg,
                             const EmbeddingTable& table, const nn::TrainConfig& tcfg,
                             std::size_t n_classes);

}  // namespace msa::text
