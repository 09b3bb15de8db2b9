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

#include "msa/text_features.hpp"

#include <cctype>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace msa::text {

EmbeddingTable::EmbeddingTable(std::size_t dim, std::uint64_t oov_seed)
    : dim_(dim), oov_seed_(oov_seed) {
  if (dim == 0) throw ValidationError("embedding dim must be positive");
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path, std::uint64_t oov_seed) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open embedding file " + path.string());
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    std::vector<double> vec;
    double v;
    while (ls >> v) vec.push_back(v);
    if (!ls.eof()) throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad number");
    // "count dim" header
    if (lineno == 1 && vec.size() == 1 && word.find_first_not_of("0123456789") == std::string::npos)
      continue;
    rows.emplace_back(std::move(word), std::move(vec));
  }
  if (rows.empty()) throw DataError("embedding file " + path.string() + " has no vectors");
  EmbeddingTable table(rows.front().second.size(), oov_seed);
  for (auto& [w, v] : rows) {
    if (v.size() != table.dim())
      throw DataError("embedding file " + path.string() + ": vector for '" + w + "' has " +
                      std::to_string(v.size()) + " values, expected " +
                      std::to_string(table.dim()));
    table.add(w, std::move(v));
  }
  return table;
}

EmbeddingTable EmbeddingTable::random(const std::vector<std::string>& vocab, std::size_t dim,
                                      std::uint64_t seed) {
  EmbeddingTable table(dim, seed);
  Rng rng(seed);
  std::set<std::string> sorted(vocab.begin(), vocab.end());
  for (const auto& w : sorted) {
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.uniform(-0.25, 0.25);
    table.add(w, std::move(v));
  }
  return table;
}

void EmbeddingTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write embedding file " + path.string());
  out << std::setprecision(17);
  for (const auto& [w, v] : entries_) {
    out << w;
    for (double x : v) out << ' ' << x;
    out << '\n';
  }
}

void EmbeddingTable::add(const std::string& word, std::vector<double> vec) {
  if (vec.size() != dim_)
    throw ValidationError("embedding for '" + word + "' has length " + std::to_string(vec.size()) +
                          ", table dim is " + std::to_string(dim_));
  entries_[word] = std::move(vec);
}

std::vector<double> EmbeddingTable::lookup(const std::string& word) const {
  if (word == kPadToken) return std::vector<double>(dim_, 0.0);
  if (auto it = entries_.find(word); it != entries_.end()) return it->second;
  Rng rng(mix_seed(fnv1a(word), oov_seed_));
  std::vector<double> v(dim_);
  for (auto& x : v) x = rng.uniform(-0.25, 0.25);
  return v;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> wrap_window(std::span<const std::string> tokens, std::size_t width) {
  std::vector<std::string> out(width, std::string(kPadToken));
  for (std::size_t i = 0; i < width && i < tokens.size(); ++i) out[i] = tokens[i];
  return out;
}

Tensor embed_sentence(std::span<const std::string> tokens, const EmbeddingTable& table,
                      std::size_t width) {
  if (width == 0) throw ValidationError("sentence window must be positive");
  const auto wrapped = wrap_window(tokens, width);
  Tensor out({width, table.dim()});
  for (std::size_t i = 0; i < width; ++i) {
    const auto v = table.lookup(wrapped[i]);
    for (std::size_t d = 0; d < v.size(); ++d) out.at(i, d) = v[d];
  }
  return out;
}

TextCnnConfig TextCnnConfig::paper() { return TextCnnConfig{}; }

TextCnnConfig TextCnnConfig::desk() {
  TextCnnConfig c;
  c.window = 12;
  c.embedding_dim = 16;
  c.conv1_kernels = {3, 4};
  c.conv1_maps = 6;
  c.conv2_kernel = 2;
  c.conv2_maps = 8;
  c.pool = 5;
  c.feature_width = 8;
  return c;
}

std::vector<nn::LayerSpec> TextCnnConfig::layers(std::size_t n_classes) const {
  using nn::LayerSpec;
  return {LayerSpec::branches1d(conv1_kernels, conv1_maps),
          LayerSpec::relu(),
          LayerSpec::maxpool({pool}),
          LayerSpec::conv1d(conv2_kernel, conv2_maps),
          LayerSpec::relu(),
          LayerSpec::dense(feature_width),
          LayerSpec::relu(),
          LayerSpec::dense(n_classes),
          LayerSpec::softmax()};
}

void TextCnnConfig::validate(std::size_t n_classes) const {
  if (window == 0 || embedding_dim == 0 || conv1_kernels.empty() || conv1_maps == 0 ||
      conv2_kernel == 0 || conv2_maps == 0 || pool == 0 || feature_width == 0)
    throw ValidationError("text CNN sizes must all be positive");
  if (n_classes < 2) throw ValidationError("text CNN needs at least 2 classes");
  Shape cur = input_dims();
  for (const auto& s : layers(n_classes)) cur = nn::infer_output_dims(s, cur);
}

nlohmann::json TextCnnConfig::to_json() const {
  return {{"window", window},           {"embedding_dim", embedding_dim},
          {"conv1_kernels", conv1_kernels}, {"conv1_maps", conv1_maps},
          {"conv2_kernel", conv2_kernel}, {"conv2_maps", conv2_maps},
          {"pool", pool},               {"feature_width", feature_width}};
}

TextCnnConfig TextCnnConfig::from_json(const nlohmann::json& j) {
  TextCnnConfig c = j.value("preset", std::string("desk")) == "paper" ? paper() : desk();
  c.window = j.value("window", c.window);
  c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
  c.conv1_kernels = j.value("conv1_kernels", c.conv1_kernels);
  c.conv1_maps = j.value("conv1_maps", c.conv1_maps);
  c.conv2_kernel = j.value("conv2_kernel", c.conv2_kernel);
  c.conv2_maps = j.value("conv2_maps", c.conv2_maps);
  c.pool = j.value("pool", c.pool);
  c.feature_width = j.value("feature_width", c.feature_width);
  return c;
}

TextModel::TextModel(TextCnnConfig config, nn::Network network)
    : config_(std::move(config)), network_(std::move(network)) {
  if (network_.input_dims() != config_.input_dims())
    throw ValidationError("text model input " + shape_str(network_.input_dims()) +
                          " does not match config " + shape_str(config_.input_dims()));
  const auto expect = config_.layers(network_.output_dims()[0]);
  const auto& layers = network_.layers();
  bool ok = layers.size() == expect.size();
  for (std::size_t i = 0; ok && i < layers.size(); ++i)
    ok = layers[i].spec.kind == expect[i].kind && layers[i].spec.kernels == expect[i].kernels &&
         layers[i].spec.maps == expect[i].maps && layers[i].spec.pool == expect[i].pool &&
         layers[i].spec.units == expect[i].units;
  if (!ok) throw ValidationError("text model layers do not match its config");
}

Tensor TextModel::encode(std::span<const std::string> tokens, const EmbeddingTable& table) const {
  if (table.dim() != config_.embedding_dim)
    throw ValidationError("embedding table dim " + std::to_string(table.dim()) +
                          " does not match text model dim " +
                          std::to_string(config_.embedding_dim));
  Tensor rows = embed_sentence(tokens, table, config_.window);
  Tensor x(config_.input_dims());
  for (std::size_t i = 0; i < config_.window; ++i)
    for (std::size_t d = 0; d < config_.embedding_dim; ++d) x.at(d, i) = rows.at(i, d);
  return x;
}

std::vector<double> TextModel::features(std::span<const std::string> tokens,
                                        const EmbeddingTable& table) const {
  nn::Trace tr = network_.forward(encode(tokens, table));
  return tr.activations[kFeatureActivation].values();
}

std::vector<double> TextModel::probabilities(std::span<const std::string> tokens,
                                             const EmbeddingTable& table) const {
  return network_.predict(encode(tokens, table)).values();
}

nlohmann::json TextModel::to_json() const {
  return {{"format", "msa-text-model"},
          {"version", 1},
          {"config", config_.to_json()},
          {"network", network_.to_json()}};
}

TextModel TextModel::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "msa-text-model")
    throw ValidationError("not an msa-text-model document");
  return TextModel(TextCnnConfig::from_json(j.at("config")), nn::Network::from_json(j.at("network")));
}

TextModel build_text_model(const TextCnnConfig& cfg, std::size_t n_classes, std::uint64_t seed) {
  cfg.validate(n_classes);
  return TextModel(cfg, nn::Network::build(cfg.input_dims(), cfg.layers(n_classes), seed));
}

TrainedText train_text_model(std::span<const LabeledSentence> corpus, const TextCnnConfig& cfg,
                             const EmbeddingTable& table, const nn::TrainConfig& tcfg,
                             std::size_t n_classes) {
  std::set<int> classes;
  for (const auto& s : corpus) classes.insert(s.label);
  if (classes.size() < 2)
    throw ValidationError("text corpus must contain at least 2 classes, found " +
                          std::to_string(classes.size()));
  TextModel init = build_text_model(cfg, n_classes, tcfg.seed);
  std::vector<Tensor> inputs;
  std::vector<int> labels;
  inputs.reserve(corpus.size());
  for (const auto& s : corpus) {
    inputs.push_back(init.encode(s.tokens, table));
    labels.push_back(s.label);
  }
  auto res = nn::train_softmax(init.network(), inputs, labels, tcfg);
  return {TextModel(cfg, std::move(res.network)), std::move(res.loss_trace)};
}

}  // namespace msa::text
