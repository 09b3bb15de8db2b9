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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <set>

#include "msa/experiment.hpp"
#include "msa/labels.hpp"
#include "msa/synthetic.hpp"
#include "support.hpp"

using namespace msa;
using namespace msa::eval;
using fusion::Modality;
using fusion::ModalitySet;

namespace {

// Precomputed-feature corpus: every modality carries `signal * (2y - 1)`
// in its first coordinate plus unit noise.
Dataset feature_corpus(const std::string& name, std::size_t speakers, std::size_t per, double signal,
                       std::uint64_t seed, bool shuffle_labels = false) {
  Rng rng(seed);
  Dataset ds;
  ds.name = name;
  for (std::size_t s = 0; s < speakers; ++s)
    for (std::size_t u = 0; u < per; ++u) {
      Utterance utt;
      utt.id = "s" + std::to_string(s) + "_" + std::to_string(u);
      utt.speaker = "s" + std::to_string(s);
      const int y = static_cast<int>(u % 2);
      const int shown = shuffle_labels ? static_cast<int>(rng.below(2)) : y;
      utt.label = RawLabel::categorical(y ? "positive" : "negative");
      for (auto m : fusion::kAllModalities)
        utt.precomputed[m] = {signal * (2 * shown - 1) + rng.normal(), rng.normal()};
      ds.utterances.push_back(utt);
    }
  return ds;
}

ExperimentConfig fast_config(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.svm.epochs = 20;
  cfg.c_grid = {1.0};
  return cfg;
}

}  // namespace

TEST_CASE("synthetic spec validation and JSON") {
  SyntheticSpec spec;
  spec.seed = 4;
  spec.speaker_confound = 0.3;
  const auto back = SyntheticSpec::from_json(spec.to_json());
  CHECK(back.to_json() == spec.to_json());
  auto j = spec.to_json();
  j.erase("seed");
  CHECK_THROWS_AS(SyntheticSpec::from_json(j), ValidationError);
  spec.n_speakers = 1;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec.n_speakers = 4;
  spec.separability = {1.2, 0.5, 0.5};
  CHECK_THROWS_AS(spec.validate(), ValidationError);
}

TEST_CASE("synthetic corpora are complete and balanced") {
  SyntheticSpec spec;
  spec.n_speakers = 4;
  spec.utt_per_speaker = 6;
  spec.seed = 2;
  const Dataset ds = gen_synthetic(spec);
  CHECK_NOTHROW(ds.validate());
  CHECK(ds.utterances.size() == 24);
  const auto labeled = map_labels(ds);
  CHECK(labeled.size() == 24);
  std::size_t pos = 0;
  for (const auto& l : labeled) pos += l.label == 1;
  CHECK(pos == 12);
  for (const auto& u : ds.utterances) {
    CHECK(u.tokens.has_value());
    CHECK(u.audio.has_value());
    CHECK(u.frames->frames.size() == spec.frames_per_utterance);
  }

  spec.scheme = LabelScheme::four_class_emotion;
  spec.utt_per_speaker = 8;
  const auto four = map_labels(gen_synthetic(spec));
  CHECK(four.size() == 32);
  std::set<int> classes;
  for (const auto& l : four) classes.insert(l.label);
  CHECK(classes.size() == 4);
}

TEST_CASE("same seed writes byte-identical payloads") {
  testing::TempDir a("syn_a"), b("syn_b");
  SyntheticSpec spec;
  spec.n_speakers = 2;
  spec.utt_per_speaker = 2;
  spec.seed = 9;
  write_synthetic(spec, a.path());
  write_synthetic(spec, b.path());
  std::size_t files = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(a.path())) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto rel = std::filesystem::relative(e.path(), a.path());
    CHECK(testing::slurp(e.path()) == testing::slurp(b.path() / rel));
  }
  CHECK(files > 4);
  const Dataset loaded = load_manifest(a / "manifest.json");
  CHECK(loaded.utterances.size() == 4);
  CHECK(loaded.embedding_file.has_value());
}

TEST_CASE("feature scaler") {
  const std::vector<std::vector<double>> xs{{1, 5}, {3, 5}};
  const auto s = FeatureScaler::fit(xs);
  CHECK(s.apply(std::vector<double>{1, 5}) == std::vector<double>{-1, 0});
  CHECK(s.apply(std::vector<double>{5, 7}) == std::vector<double>{3, 2});
  const FeatureScaler empty;
  CHECK(empty.apply(std::vector<double>{4, 2}) == std::vector<double>{4, 2});
  CHECK_THROWS_AS(s.apply(std::vector<double>{1}), ValidationError);
  const auto back = FeatureScaler::from_json(s.to_json());
  CHECK(back.mean == s.mean);
  CHECK(back.scale == s.scale);
}

TEST_CASE("experiment config JSON") {
  auto cfg = fast_config(7);
  cfg.subsets = {ModalitySet::parse("TA")};
  cfg.split_mode = SplitMode::leave_one_speaker_out;
  const auto back = ExperimentConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  auto j = cfg.to_json();
  j.erase("seed");
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), ValidationError);
  cfg.c_grid = {-1.0};
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("audit log detects leakage") {
  AuditLog log;
  log.record(AuditPhase::svm_train, 0, "T", {"a", "b"});
  log.record(AuditPhase::test, 0, "T", {"c"});
  log.record(AuditPhase::test, 1, "T", {"a"});
  CHECK_NOTHROW(log.check_no_leakage());
  CHECK(log.leaked_count() == 0);
  log.record(AuditPhase::text_extractor_train, 1, "", {"a"});
  CHECK(log.leaked_count() == 1);
  CHECK_THROWS_AS(log.check_no_leakage(), InvariantError);
}

TEST_CASE("perfectly predictive features give macro F 1 for every subset") {
  const Dataset ds = feature_corpus("perfect", 6, 6, 50.0, 1);
  const auto res = run_experiment(ds, fast_config(1), nullptr);
  REQUIRE(res.subsets.size() == 7);
  for (const auto& s : res.subsets) CHECK(s.mean_macro_f == 1.0);
  CHECK(res.audit.leaked_count() == 0);
  CHECK(res.predictions.size() == 7 * 36);
}

TEST_CASE("shuffled labels give chance-level macro F") {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto cfg = fast_config(seed);
    cfg.subsets = {ModalitySet::parse("TAV")};
    const auto res = run_experiment(feature_corpus("null", 8, 10, 2.0, 100 + seed, true), cfg, nullptr);
    total += res.subsets[0].mean_macro_f;
  }
  CHECK(total / 10.0 == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("results do not depend on the thread count") {
  const Dataset ds = feature_corpus("threads", 6, 6, 1.0, 3);
  auto cfg = fast_config(3);
  cfg.c_grid = {0.1, 1.0, 10.0};
  const auto a = run_experiment(ds, cfg, nullptr);
  cfg.threads = 3;
  const auto b = run_experiment(ds, cfg, nullptr);
  REQUIRE(a.predictions.size() == b.predictions.size());
  for (std::size_t i = 0; i < a.predictions.size(); ++i) {
    CHECK(a.predictions[i].id == b.predictions[i].id);
    CHECK(a.predictions[i].scores == b.predictions[i].scores);
  }
  for (std::size_t i = 0; i < a.subsets.size(); ++i) CHECK(a.subsets[i].fold_macro_f == b.subsets[i].fold_macro_f);
}

TEST_CASE("missing inputs are reported") {
  Dataset ds = feature_corpus("missing", 4, 4, 1.0, 5);
  ds.utterances[2].precomputed.erase(Modality::video);
  auto two = fast_config(1);
  two.k = 2;
  CHECK_THROWS_AS(run_experiment(ds, two, nullptr), DataError);

  SyntheticSpec spec;
  spec.n_speakers = 3;
  spec.utt_per_speaker = 4;
  spec.seed = 1;
  auto cfg = fast_config(1);
  cfg.subsets = {ModalitySet::parse("T")};
  cfg.k = 3;
  CHECK_THROWS_AS(run_experiment(gen_synthetic(spec), cfg, nullptr), ValidationError);
}

TEST_CASE("raw synthetic corpus runs end to end without leakage") {
  SyntheticSpec spec;
  spec.n_speakers = 4;
  spec.utt_per_speaker = 8;
  spec.seed = 12;
  const Dataset ds = gen_synthetic(spec);
  const auto table = synthetic_embeddings(spec);
  auto cfg = fast_config(12);
  cfg.k = 4;
  cfg.text_train.epochs = 5;
  cfg.visual_train.epochs = 5;
  const auto res = run_experiment(ds, cfg, &table);
  CHECK(res.subsets.size() == 7);
  CHECK(res.audit.leaked_count() == 0);
  std::set<AuditPhase> phases;
  for (const auto& e : res.audit.events()) phases.insert(e.phase);
  CHECK(phases.count(AuditPhase::text_extractor_train) == 1);
  CHECK(phases.count(AuditPhase::visual_extractor_train) == 1);
  CHECK(phases.count(AuditPhase::test) == 1);
  CHECK(res.test_features.size() == 32);
  for (const auto& r : res.test_features) {
    CHECK(r.features.at(Modality::text).size() == 8);
    CHECK(r.features.at(Modality::audio).size() == 21);
    CHECK(r.features.at(Modality::video).size() == 6);
  }
}

TEST_CASE("cross-corpus checks") {
  const Dataset a = feature_corpus("A", 4, 6, 3.0, 1);
  Dataset four = a;
  four.scheme = LabelScheme::four_class_emotion;
  for (auto& u : four.utterances) u.label = RawLabel::categorical("happy");
  CHECK_THROWS_AS(cross_dataset_run(a, four, fast_config(1), nullptr), ValidationError);

  Dataset wide = feature_corpus("B", 4, 6, 3.0, 2);
  for (auto& u : wide.utterances) u.precomputed[Modality::audio].push_back(0.0);
  CHECK_THROWS_AS(cross_dataset_run(a, wide, fast_config(1), nullptr), ValidationError);

  auto cfg = fast_config(1);
  cfg.c_grid.clear();
  const auto self = cross_dataset_run(a, a, cfg, nullptr);
  CHECK_FALSE(self.warnings.empty());
  std::vector<fusion::FeatureRecord> recs;
  for (const auto& u : a.utterances) {
    fusion::FeatureRecord r;
    r.utterance_id = u.id;
    r.label = u.label.category == "positive";
    r.features = u.precomputed;
    recs.push_back(r);
  }
  auto svm = cfg.svm;
  svm.seed = mix_seed(mix_seed(cfg.seed, 1), 4);
  for (const auto& s : self.subsets) {
    const auto clf = train_classifier(recs, s.subset, 2, svm, cfg.scale_features);
    std::size_t compared = 0;
    for (const auto& row : self.predictions) {
      if (row.subset != s.subset.key()) continue;
      const auto& r = recs[compared++];
      CHECK(row.id == r.utterance_id);
      CHECK(row.scores == clf.predict(r, s.subset).scores);
    }
    CHECK(compared == recs.size());
  }

  Dataset inverted = feature_corpus("B", 4, 6, 3.0, 3);
  for (auto& u : inverted.utterances)
    u.label = RawLabel::categorical(u.label.category == "positive" ? "negative" : "positive");
  const auto res = cross_dataset_run(a, inverted, fast_config(1), nullptr);
  for (const auto& s : res.subsets) CHECK(s.mean_macro_f < 0.5);
  CHECK(res.source == "A->B");
  CHECK(res.audit.leaked_count() == 0);
}

TEST_CASE("classifier JSON round trip") {
  const Dataset ds = feature_corpus("clf", 4, 6, 2.0, 8);
  std::vector<fusion::FeatureRecord> recs;
  for (const auto& u : ds.utterances) {
    fusion::FeatureRecord r;
    r.utterance_id = u.id;
    r.label = u.label.category == "positive";
    r.features = u.precomputed;
    recs.push_back(r);
  }
  const auto subset = ModalitySet::parse("AV");
  const auto clf = train_classifier(recs, subset, 2, {}, true);
  const auto back = Classifier::from_json(nlohmann::json::parse(clf.to_json().dump()));
  for (const auto& r : recs) CHECK(back.predict(r, subset).scores == clf.predict(r, subset).scores);
}

TEST_CASE("text-only separability makes text the best unimodal source") {
  double t = 0.0, a = 0.0, v = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SyntheticSpec spec;
    spec.separability = {1.0, 0.0, 0.0};
    spec.seed = 500 + seed;
    const auto table = synthetic_embeddings(spec);
    ExperimentConfig cfg;
    cfg.seed = seed;
    cfg.subsets = {ModalitySet::parse("T"), ModalitySet::parse("A"), ModalitySet::parse("V")};
    const auto res = run_experiment(gen_synthetic(spec), cfg, &table);
    t += res.subset(cfg.subsets[0]).mean_macro_f / 5.0;
    a += res.subset(cfg.subsets[1]).mean_macro_f / 5.0;
    v += res.subset(cfg.subsets[2]).mean_macro_f / 5.0;
  }
  CHECK(t >= a + 0.2);
  CHECK(t >= v + 0.2);
}
