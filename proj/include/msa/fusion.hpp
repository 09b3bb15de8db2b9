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

// Feature-level fusion (plain concatenation in canonical T, A, V order, no
// scaling) and a linear SVM trained in the primal with Pegasos-style
// stochastic subgradient steps on the L2-regularized hinge loss.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace msa::fusion {

enum class Modality { text = 0, audio = 1, video = 2 };
inline constexpr std::array<Modality, 3> kAllModalities{Modality::text, Modality::audio,
                                                        Modality::video};

char modality_letter(Modality m);  // 'T', 'A', 'V'
Modality modality_from_letter(char c);

// Ordered, duplicate-free modality subset. Construction canonicalizes order.
class ModalitySet {
 public:
  ModalitySet() = default;
  ModalitySet(std::initializer_list<Modality> ms);
  static ModalitySet parse(const std::string& s);  // "TA", "T+A+V", "A,V"
  // The seven non-empty subsets: A, V, T, T+A, T+V, A+V, T+A+V.
  static std::vector<ModalitySet> all_subsets();

  bool contains(Modality m) const { return bits_ & (1u << static_cast<unsigned>(m)); }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const;
  std::vector<Modality> members() const;  // canonical order
  std::string label() const;              // "T + A + V"
  std::string key() const;                // "TAV"

  friend bool operator==(const ModalitySet&, const ModalitySet&) = default;
  friend bool operator<(const ModalitySet& a, const ModalitySet& b) { return a.bits_ < b.bits_; }

 private:
  unsigned bits_ = 0;
};

struct FeatureRecord {
  std::string utterance_id;
  std::string speaker_id;
  int label = 0;
  std::map<Modality, std::vector<double>> features;
};

struct LayoutEntry {
  Modality modality;
  std::size_t offset;
  std::size_t length;
  friend bool operator==(const LayoutEntry&, const LayoutEntry&) = default;
};

struct FusedVector {
  std::vector<double> values;
  std::vector<LayoutEntry> layout;
};

FusedVector fuse(const FeatureRecord& record, const ModalitySet& modalities);

struct SvmConfig {
  double c = 1.0;
  int epochs = 50;
  std::uint64_t seed = 0;
  // Train one-vs-rest heads even for two classes.
  bool force_one_vs_rest = false;

  void validate() const;
};

struct SvmHead {
  std::vector<double> weights;
  double bias = 0.0;
  double decision(std::span<const double> x) const;
};

struct Prediction {
  int label = 0;
  // Per-class scores. Binary models report {-d, d} for decision value d, so
  // class 1 wins exactly when d > 0.
  std::vector<double> scores;
};

struct SvmModel {
  std::size_t n_classes = 2;
  std::vector<SvmHead> heads;  // 1 for binary, n_classes for one-vs-rest
  std::vector<LayoutEntry> layout;
  SvmConfig config;
  // Regularized hinge objective on the training set after each epoch (binary
  // head, or the mean over one-vs-rest heads).
  std::vector<double> objective_trace;

  std::size_t dim() const { return heads.empty() ? 0 : heads[0].weights.size(); }
  Prediction predict(std::span<const double> x) const;
  Prediction predict(const FusedVector& x) const { return predict(x.values); }

  nlohmann::json to_json() const;
  static SvmModel from_json(const nlohmann::json& j);
};

// lambda = 1 / (C * n); step at update t is 1 / (lambda * t); the bias is an
// augmented constant feature and is regularized with the weights; iterates
// are projected onto the ball of radius 1 / sqrt(lambda).
SvmHead train_binary_head(std::span<const std::vector<double>> xs, std::span<const int> signs,
                          const SvmConfig& cfg, std::vector<double>* objective_trace = nullptr);

double hinge_objective(const SvmHead& head, std::span<const std::vector<double>> xs,
                       std::span<const int> signs, double lambda);

SvmModel train_svm(std::span<const std::vector<double>> xs, std::span<const int> labels,
                   std::size_t n_classes, const SvmConfig& cfg);

SvmModel train_svm(std::span<const FeatureRecord> records, const ModalitySet& modalities,
                   std::size_t n_classes, const SvmConfig& cfg);

}  // namespace msa::fusion
