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

#include <cmath>
#include <fstream>
#include <set>

#include "msa/dataset.hpp"
#include "msa/labels.hpp"
#include "msa/metrics.hpp"
#include "msa/splits.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace msa;
using namespace msa::eval;

TEST_CASE("binary sentiment mapping") {
  const auto bin = LabelScheme::binary_sentiment;
  CHECK(map_label(RawLabel::from_scores({2, 1, 0, 1, 3}), bin, "u") == 1);
  CHECK(map_label(RawLabel::from_scores({-2, 1}), bin, "u") == 0);
  CHECK_FALSE(map_label(RawLabel::from_scores({-1, 1}), bin, "u").has_value());
  CHECK_FALSE(map_label(RawLabel::categorical("neutral"), bin, "u").has_value());
  CHECK(map_label(RawLabel::categorical("positive"), bin, "u") == 1);
  CHECK(map_label(RawLabel::categorical("negative"), bin, "u") == 0);
  CHECK_THROWS_AS(map_label(RawLabel::categorical("meh"), bin, "u"), DataError);
  CHECK_THROWS_AS(map_label(RawLabel::from_scores({}), bin, "u"), DataError);
  CHECK_THROWS_AS(map_label(RawLabel::from_scores({4}), bin, "u"), DataError);
  CHECK_THROWS_AS(map_label(RawLabel::from_votes({"happy"}), bin, "u"), DataError);
}

TEST_CASE("four-class emotion mapping") {
  const auto four = LabelScheme::four_class_emotion;
  CHECK(map_label(RawLabel::from_votes({"happy", "happy", "sad"}), four, "u") == 1);
  CHECK_FALSE(map_label(RawLabel::from_votes({"happy", "sad", "angry"}), four, "u").has_value());
  CHECK_FALSE(map_label(RawLabel::from_votes({"happy", "happy", "sad", "sad"}), four, "u").has_value());
  CHECK_FALSE(map_label(RawLabel::from_votes({"fear", "fear", "sad"}), four, "u").has_value());
  CHECK(map_label(RawLabel::categorical("angry"), four, "u") == 0);
  CHECK(map_label(RawLabel::categorical("neutral"), four, "u") == 3);
  CHECK_FALSE(map_label(RawLabel::categorical("excited"), four, "u").has_value());
  CHECK_THROWS_AS(map_label(RawLabel::from_votes({"bored", "bored"}), four, "u"), DataError);
  CHECK(class_names(four) == std::vector<std::string>{"angry", "happy", "sad", "neutral"});
}

TEST_CASE("LOSO gives one fold per speaker") {
  std::vector<SplitItem> items;
  for (int s = 0; s < 10; ++s)
    for (int u = 0; u < 3; ++u) items.push_back({"s" + std::to_string(s) + "u" + std::to_string(u), "s" + std::to_string(s)});
  const auto plan = make_splits(items, SplitMode::leave_one_speaker_out, 0, 1);
  REQUIRE(plan.folds.size() == 10);
  for (const auto& f : plan.folds) {
    REQUIRE(f.test_ids.size() == 3);
    std::set<char> spk;
    for (const auto& id : f.test_ids) spk.insert(id[1]);
    CHECK(spk.size() == 1);
  }
  CHECK(testing::plan_violation(plan, items, true).empty());
}

TEST_CASE("grouped k-fold deals speakers evenly") {
  std::vector<SplitItem> items;
  for (int s = 0; s < 10; ++s) items.push_back({"u" + std::to_string(s), "s" + std::to_string(s)});
  const auto plan = make_splits(items, SplitMode::grouped_speaker_kfold, 5, 3);
  REQUIRE(plan.folds.size() == 5);
  for (const auto& f : plan.folds) CHECK(f.test_ids.size() == 2);
  CHECK_THROWS_AS(make_splits(items, SplitMode::grouped_speaker_kfold, 11, 3), ValidationError);
}

TEST_CASE("speaker-dependent k-fold works with one speaker") {
  std::vector<SplitItem> items;
  for (int u = 0; u < 10; ++u) items.push_back({"u" + std::to_string(u), "solo"});
  const auto plan = make_splits(items, SplitMode::speaker_dependent_kfold, 5, 3);
  CHECK(plan.folds.size() == 5);
  CHECK(testing::plan_violation(plan, items, false).empty());
  CHECK_NOTHROW(check_plan(plan, items));
  CHECK_THROWS_AS(make_splits(items, SplitMode::leave_one_speaker_out, 0, 3), ValidationError);
}

TEST_CASE("random plans satisfy the split invariants") {
  Rng rng(31);
  for (int trial = 0; trial < 150; ++trial) {
    const auto items = testing::random_items(rng, 12, 6);
    std::set<std::string> speakers;
    for (const auto& it : items) speakers.insert(it.speaker);
    const SplitMode modes[] = {SplitMode::leave_one_speaker_out, SplitMode::grouped_speaker_kfold,
                               SplitMode::speaker_dependent_kfold};
    for (auto mode : modes) {
      const std::size_t k = mode == SplitMode::grouped_speaker_kfold
                                ? 2 + rng.below(speakers.size() - 1)
                                : 2 + rng.below(std::min<std::size_t>(items.size(), 6) - 1);
      const auto plan = make_splits(items, mode, k, rng.next_u64());
      CAPTURE(to_string(mode));
      CHECK(testing::plan_violation(plan, items, speaker_independent(mode)) == "");
      CHECK_NOTHROW(check_plan(plan, items));
    }
  }
}

TEST_CASE("check_plan rejects broken plans") {
  std::vector<SplitItem> items{{"a", "s1"}, {"b", "s1"}, {"c", "s2"}, {"d", "s2"}};
  auto plan = make_splits(items, SplitMode::grouped_speaker_kfold, 2, 1);
  auto leaky = plan;
  leaky.folds[0].train_ids.push_back(leaky.folds[0].test_ids[0]);
  CHECK_THROWS_AS(check_plan(leaky, items), InvariantError);
  auto missing = plan;
  missing.folds[1].test_ids.clear();
  CHECK_THROWS_AS(check_plan(missing, items), InvariantError);
  SplitPlan shared;
  shared.mode = SplitMode::grouped_speaker_kfold;
  shared.folds = {{{"a", "c", "d"}, {"b"}}, {{"b"}, {"a", "c", "d"}}};
  CHECK_THROWS_AS(check_plan(shared, items), InvariantError);
  shared.mode = SplitMode::speaker_dependent_kfold;
  CHECK_NOTHROW(check_plan(shared, items));
}

TEST_CASE("splits are seed-deterministic") {
  Rng rng(2);
  const auto items = testing::random_items(rng, 8, 5);
  const auto a = make_splits(items, SplitMode::speaker_dependent_kfold, 3, 77);
  const auto b = make_splits(items, SplitMode::speaker_dependent_kfold, 3, 77);
  for (std::size_t f = 0; f < a.folds.size(); ++f) CHECK(a.folds[f].test_ids == b.folds[f].test_ids);
}

TEST_CASE("tuning split") {
  std::vector<std::string> ids;
  for (int i = 0; i < 10; ++i) ids.push_back("u" + std::to_string(i));
  const auto [tr, va] = make_tuning_split(ids, 0.8, 5);
  CHECK(tr.size() == 8);
  CHECK(va.size() == 2);
  std::set<std::string> all(tr.begin(), tr.end());
  all.insert(va.begin(), va.end());
  CHECK(all.size() == 10);
  CHECK(make_tuning_split(ids, 0.8, 5) == std::make_pair(tr, va));
  const std::vector<std::string> two{"a", "b"};
  CHECK(make_tuning_split(two, 0.99, 1).first.size() == 1);
  CHECK_THROWS_AS(make_tuning_split(std::vector<std::string>{"a"}, 0.8, 1), ValidationError);
}

TEST_CASE("metrics closed forms") {
  const std::vector<int> t{0, 1, 0, 1};
  const auto perfect = compute_metrics(t, t, {}, 2);
  CHECK(perfect.macro_f == 1.0);
  CHECK(perfect.tp_rate == std::vector<double>{1.0, 1.0});
  CHECK(perfect.rmse == 0.0);

  const std::vector<int> p{0, 1, 1, 0};
  CHECK(compute_metrics(t, p, {}, 2).macro_f == doctest::Approx(0.5));

  const std::vector<int> ones{1, 1, 1, 1};
  const auto r = compute_metrics(t, ones, {}, 2);
  const double f_pos = 2.0 * 0.5 * 1.0 / 1.5;
  CHECK(r.macro_f == doctest::Approx(f_pos / 2.0));
  CHECK(r.confusion[0][1] == 2);

  const std::vector<std::vector<double>> sat{{100, -100}, {-100, 100}, {100, -100}, {-100, 100}};
  CHECK(compute_metrics(t, t, sat, 2).rmse < 1e-12);

  CHECK_THROWS_AS(compute_metrics(std::vector<int>{}, std::vector<int>{}, {}, 2), ValidationError);
  CHECK_THROWS_AS(compute_metrics(t, std::vector<int>{0}, {}, 2), ValidationError);
  CHECK_THROWS_AS(compute_metrics(t, std::vector<int>{0, 0, 0, 2}, {}, 2), ValidationError);
}

TEST_CASE("macro F averages over classes seen in truth or predictions") {
  const std::vector<int> t{0, 0, 1};
  const auto r = compute_metrics(t, t, {}, 4);
  CHECK(r.macro_f == 1.0);
  CHECK(r.active == std::vector<bool>{true, true, false, false});
}

TEST_CASE("RMSE uses softmax-normalized scores over all cells") {
  const std::vector<int> t{0, 1};
  const std::vector<int> p{0, 0};
  const std::vector<std::vector<double>> s{{0.0, 0.0}, {1.0, 0.0}};
  const double e = std::exp(1.0) / (std::exp(1.0) + 1.0);
  const double se = 0.25 + 0.25 + e * e + e * e;
  CHECK(compute_metrics(t, p, s, 2).rmse == doctest::Approx(std::sqrt(se / 4.0)));
}

TEST_CASE("metrics agree with the counting oracle") {
  Rng rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 2 + rng.below(3), n = 1 + rng.below(200);
    std::vector<int> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<int>(rng.below(k));
      p[i] = static_cast<int>(rng.below(k));
    }
    const auto r = compute_metrics(t, p, {}, k);
    const auto o = testing::brute_force_metrics(t, p, k);
    CHECK(r.confusion == o.confusion);
    CHECK(r.tp_rate == o.tp_rate);
    CHECK(r.macro_f == o.macro_f);
    for (std::size_t c = 0; c < k; ++c) {
      std::size_t row = 0;
      for (auto v : r.confusion[c]) row += v;
      CHECK(row == r.support[c]);
    }
    CHECK(r.macro_f >= 0.0);
    CHECK(r.macro_f <= 1.0);
  }
}

TEST_CASE("manifest round trip") {
  testing::TempDir dir("manifest");
  Dataset ds;
  ds.name = "tiny";
  ds.scheme = LabelScheme::binary_sentiment;
  Utterance a;
  a.id = "a/1";
  a.speaker = "s1";
  a.label = RawLabel::from_scores({1, 2});
  a.tokens = std::vector<std::string>{"good", "film"};
  a.audio = audio::AudioClip{{0.0, 0.25, -0.5, 0.125}, 8000.0};
  visual::FrameSequence seq;
  seq.frames = {visual::Image(2, 3, 0.2), visual::Image(2, 3, 0.8)};
  seq.boxes = {{0, 0, 3, 2}, {1, 0, 2, 2}};
  a.frames = seq;
  Utterance b;
  b.id = "b";
  b.speaker = "s2";
  b.label = RawLabel::categorical("negative");
  b.precomputed[fusion::Modality::audio] = {0.5, 1.5};
  b.precomputed[fusion::Modality::video] = {2.5};
  ds.utterances = {a, b};

  const auto path = save_manifest(ds, dir.path());
  const Dataset back = load_manifest(path);
  CHECK(back.name == "tiny");
  REQUIRE(back.utterances.size() == 2);
  const auto& ba = back.find("a/1");
  CHECK(ba.tokens == a.tokens);
  CHECK(ba.audio->samples == a.audio->samples);
  CHECK(ba.frames->boxes == seq.boxes);
  CHECK(ba.frames->frames[1].at(0, 0) == doctest::Approx(0.8).epsilon(1e-2));
  CHECK(back.find("b").precomputed == b.precomputed);
  CHECK(map_labels(back).size() == 2);

  const auto first = testing::slurp(path);
  save_manifest(back, dir / "again");
  CHECK(testing::slurp(dir / "again" / "manifest.json") == first);
}

TEST_CASE("manifest and dataset validation errors") {
  testing::TempDir dir("badmanifest");
  CHECK_THROWS_AS(load_manifest(dir / "none.json"), DataError);
  {
    std::ofstream f(dir / "bad.json");
    f << "{ not json";
  }
  CHECK_THROWS_AS(load_manifest(dir / "bad.json"), DataError);
  {
    std::ofstream f(dir / "dup.json");
    f << R"({"schema_version":1,"label_scheme":"binary-sentiment","utterances":[
      {"id":"x","speaker":"s","label":{"category":"positive"},"tokens":["a"]},
      {"id":"x","speaker":"s","label":{"category":"negative"},"tokens":["b"]}]})";
  }
  CHECK_THROWS_AS(load_manifest(dir / "dup.json"), DataError);
  {
    std::ofstream f(dir / "nopayload.json");
    f << R"({"schema_version":1,"label_scheme":"binary-sentiment","utterances":[
      {"id":"x","speaker":"s","label":{"category":"positive"}}]})";
  }
  CHECK_THROWS_AS(load_manifest(dir / "nopayload.json"), DataError);
  {
    std::ofstream f(dir / "transcript.json");
    f << R"({"schema_version":1,"label_scheme":"binary-sentiment","utterances":[
      {"id":"x","speaker":"s","label":{"category":"positive"},"transcript":"Great Movie"}]})";
  }
  CHECK(load_manifest(dir / "transcript.json").utterances[0].tokens ==
        std::vector<std::string>{"great", "movie"});
  {
    std::ofstream f(dir / "nowav.json");
    f << R"({"schema_version":1,"label_scheme":"binary-sentiment","utterances":[
      {"id":"x","speaker":"s","label":{"category":"positive"},"audio":"missing.wav"}]})";
  }
  CHECK_THROWS_AS(load_manifest(dir / "nowav.json"), DataError);
}
