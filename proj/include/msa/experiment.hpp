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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "msa/audio_features.hpp"
#include "msa/dataset.hpp"
#include "msa/fusion.hpp"
#include "msa/metrics.hpp"
#include "msa/splits.hpp"
#include "msa/text_features.hpp"
#include "msa/visual_features.hpp"

namespace msa::eval {

struct ExperimentConfig {
  text::TextCnnConfig text = text::TextCnnConfig::desk();
  nn::TrainConfig text_train{0.05, 30, 8, 0};
  visual::VisualCnnConfig visual = visual::VisualCnnConfig::desk();
  nn::TrainConfig visual_train{0.1, 60, 8, 0};
  audio::AudioConfig audio;
  fusion::SvmConfig svm;
  // When non-empty, C is chosen per fold and subset on a tuning split of the
  // training ids; otherwise svm.c is used.
  std::vector<double> c_grid{0.1, 1.0, 10.0, 100.0, 1000.0};
  double tuning_fraction = 0.8;
  // Z-score fused vectors with training statistics before the SVM.
  bool scale_features = true;
  std::vector<fusion::ModalitySet> subsets = fusion::ModalitySet::all_subsets();
  SplitMode split_mode = SplitMode::grouped_speaker_kfold;
  std::size_t k = 5;
  std::uint64_t seed = 0;
  // Folds run on this many threads; results do not depend on it.
  std::size_t threads = 1;

  void validate() const;
  nlohmann::json to_json() const;
  // `seed` is mandatory.
  static ExperimentConfig from_json(const nlohmann::json& j);
};

// Z-scoring fitted on training vectors only. An empty scaler is the identity.
struct FeatureScaler {
  std::vector<double> mean;
  std::vector<double> scale;  // 1 / std, or 1 for constant columns

  static FeatureScaler fit(std::span<const std::vector<double>> xs);
  std::vector<double> apply(std::span<const double> x) const;
  nlohmann::json to_json() const;
  static FeatureScaler from_json(const nlohmann::json& j);
};

// Extractors trained on every labeled utterance, features for all of them.
struct ExtractedFeatures {
  std::size_t n_classes = 2;
  std::vector<fusion::FeatureRecord> records;
  std::optional<text::TextModel> text_model;
  std::optional<visual::VisualModel> visual_model;
  std::vector<std::string> warnings;
};

ExtractedFeatures extract_features(const Dataset& ds, const ExperimentConfig& cfg,
                                   const text::EmbeddingTable* table);

struct Classifier {
  FeatureScaler scaler;
  fusion::SvmModel model;

  fusion::Prediction predict(const fusion::FeatureRecord& r, const fusion::ModalitySet& subset) const;
  nlohmann::json to_json() const;
  static Classifier from_json(const nlohmann::json& j);
};

Classifier train_classifier(std::span<const fusion::FeatureRecord> records,
                            const fusion::ModalitySet& subset, std::size_t n_classes,
                            const fusion::SvmConfig& svm, bool scale_features = false);

enum class AuditPhase { text_extractor_train, visual_extractor_train, tuning, svm_train, test };
std::string to_string(AuditPhase p);

struct AuditEvent {
  AuditPhase phase;
  int fold;
  std::string subset;  // empty for extractor phases
  std::vector<std::string> ids;
};

class AuditLog {
 public:
  void record(AuditPhase phase, int fold, std::string subset, std::vector<std::string> ids);
  void append(const AuditLog& other);
  const std::vector<AuditEvent>& events() const { return events_; }
  // Throws InvariantError if any id consumed by a training phase of a fold is
  // also a test id of that fold.
  void check_no_leakage() const;
  // Number of (fold, id) pairs where a test id was consumed in training.
  std::size_t leaked_count() const;
  void write_jsonl(const std::filesystem::path& path) const;

 private:
  std::vector<AuditEvent> events_;
};

struct SubsetResult {
  fusion::ModalitySet subset;
  std::vector<double> fold_macro_f;
  std::vector<double> fold_rmse;
  double mean_macro_f = 0.0;
  double mean_rmse = 0.0;
  MetricsReport pooled;  // over all test predictions
};

struct PredictionRow {
  int fold;
  std::string subset;
  std::string id;
  std::string speaker;
  int truth;
  int predicted;
  std::vector<double> scores;
};

struct ExperimentResult {
  std::string dataset;
  std::string source;  // "in-corpus" or "A->B"
  std::size_t n_classes = 2;
  std::vector<std::string> class_names;
  SplitPlan plan;
  std::vector<SubsetResult> subsets;
  std::vector<PredictionRow> predictions;
  // Test-time features, one record per tested utterance.
  std::vector<fusion::FeatureRecord> test_features;
  AuditLog audit;
  std::vector<std::string> warnings;

  const SubsetResult& subset(const fusion::ModalitySet& s) const;
};

// `table` may be null when no utterance needs raw text embedding.
ExperimentResult run_experiment(const Dataset& ds, const ExperimentConfig& cfg,
                                const text::EmbeddingTable* table);

// Same, with an explicit split plan (checked against the dataset first).
ExperimentResult run_experiment(const Dataset& ds, const ExperimentConfig& cfg,
                                const text::EmbeddingTable* table, const SplitPlan& plan);

// Trains everything on all of `train`, evaluates on all of `test`.
ExperimentResult cross_dataset_run(const Dataset& train, const Dataset& test,
                                   const ExperimentConfig& cfg, const text::EmbeddingTable* table);

}  // namespace msa::eval
