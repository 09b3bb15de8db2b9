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

#include <algorithm>
#include <fstream>

#include "msa/text_features.hpp"
#include "support.hpp"

using namespace msa;
using namespace msa::text;

namespace {

EmbeddingTable small_table() {
  return EmbeddingTable::random({"good", "bad", "movie", "the", "plot", "was", "a", "film"}, 16, 5);
}

std::vector<std::string> words(const std::string& s) { return tokenize(s); }

}  // namespace

TEST_CASE("tokenize splits on whitespace and lowercases") {
  CHECK(tokenize("  Great\tMOVIE\nindeed ") == std::vector<std::string>{"great", "movie", "indeed"});
  CHECK(tokenize("").empty());
}

TEST_CASE("wrap_window pads and truncates") {
  const std::vector<std::string> t{"a", "b", "c"};
  CHECK(wrap_window(t, 5) == std::vector<std::string>{"a", "b", "c", "<pad>", "<pad>"});
  CHECK(wrap_window(t, 2) == std::vector<std::string>{"a", "b"});
}

TEST_CASE("embed_sentence rows") {
  const auto table = small_table();
  const Tensor empty = embed_sentence({}, table, 4);
  CHECK(empty.dims() == Shape{4, 16});
  for (double v : empty.values()) CHECK(v == 0.0);

  const std::vector<std::string> rep{"good", "good"};
  const Tensor t = embed_sentence(rep, table, 4);
  for (std::size_t d = 0; d < 16; ++d) CHECK(t.at(0, d) == t.at(1, d));
  CHECK_THROWS_AS(embed_sentence(rep, table, 0), ValidationError);
}

TEST_CASE("OOV vectors are seeded and stable") {
  const auto table = small_table();
  CHECK_FALSE(table.contains("zebra"));
  const auto a = table.lookup("zebra");
  CHECK(a == table.lookup("zebra"));
  CHECK(a != table.lookup("yak"));
  CHECK(a.size() == 16);
  EmbeddingTable other(16, 6);
  CHECK(other.lookup("zebra") != a);
}

TEST_CASE("embedding file round trip with optional header") {
  testing::TempDir dir("emb");
  const auto table = small_table();
  table.save(dir / "e.txt");
  const auto back = EmbeddingTable::load(dir / "e.txt", 5);
  CHECK(back.size() == table.size());
  CHECK(back.lookup("movie") == table.lookup("movie"));

  {
    std::ofstream f(dir / "h.txt");
    f << "2 3\nfoo 1 2 3\nbar 4 5 6\n";
  }
  const auto h = EmbeddingTable::load(dir / "h.txt", 0);
  CHECK(h.dim() == 3);
  CHECK(h.lookup("bar") == std::vector<double>{4, 5, 6});

  {
    std::ofstream f(dir / "bad.txt");
    f << "foo 1 2 3\nbar 4 5\n";
  }
  CHECK_THROWS_AS(EmbeddingTable::load(dir / "bad.txt", 0), DataError);
  CHECK_THROWS_AS(EmbeddingTable::load(dir / "missing.txt", 0), ValidationError);
  CHECK_THROWS_AS(EmbeddingTable(3, 0).add("x", {1.0}), ValidationError);
}

TEST_CASE("paper config emits 500-d vectors") {
  const auto cfg = TextCnnConfig::paper();
  CHECK(cfg.window == 50);
  CHECK(cfg.embedding_dim == 300);
  const auto model = build_text_model(cfg, 2, 1);
  EmbeddingTable table(300, 1);
  CHECK(model.features(words("a short sentence"), table).size() == 500);
}

TEST_CASE("desk config emits feature_width values regardless of sentence length") {
  const auto table = small_table();
  const auto model = build_text_model(TextCnnConfig::desk(), 2, 3);
  for (const char* s : {"", "good", "the plot was good", "a film a film a film a film a film a film a film"})
    CHECK(model.features(words(s), table).size() == 8);
  CHECK(model.features(words("good movie"), table) == model.features(words("good movie"), table));
}

TEST_CASE("both kernel widths contribute feature maps") {
  auto cfg = TextCnnConfig::desk();
  const auto both = build_text_model(cfg, 2, 3);
  cfg.conv1_kernels = {3};
  const auto one = build_text_model(cfg, 2, 3);
  const auto table = small_table();
  const auto x = both.encode(words("good movie"), table);
  const std::size_t w_both = both.network().forward(x).activations[1].dim(0);
  const std::size_t w_one = one.network().forward(x).activations[1].dim(0);
  CHECK(w_both - w_one == cfg.conv1_maps);
}

TEST_CASE("tail padding never changes a full window") {
  const auto table = small_table();
  const auto model = build_text_model(TextCnnConfig::desk(), 2, 9);
  auto full = words("the plot was good the film was bad a movie the plot was");
  REQUIRE(full.size() >= model.config().window);
  auto padded = full;
  padded.insert(padded.end(), 4, std::string(kPadToken));
  CHECK(model.features(full, table) == model.features(padded, table));
}

TEST_CASE("encode checks the table dimension") {
  const auto model = build_text_model(TextCnnConfig::desk(), 2, 3);
  EmbeddingTable wrong(5, 0);
  CHECK_THROWS_AS(model.features(words("good"), wrong), ValidationError);
}

TEST_CASE("config validation rejects chains that do not fit") {
  auto cfg = TextCnnConfig::desk();
  cfg.pool = 7;
  CHECK_THROWS_AS(cfg.validate(), ShapeError);
  cfg = TextCnnConfig::desk();
  cfg.window = 2;
  CHECK_THROWS_AS(cfg.validate(), ShapeError);
  CHECK_THROWS_AS(TextCnnConfig::desk().validate(1), ValidationError);
  cfg = TextCnnConfig::desk();
  cfg.conv1_maps = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("config JSON round trip") {
  auto cfg = TextCnnConfig::desk();
  cfg.conv1_maps = 7;
  const auto back = TextCnnConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  const auto paper = TextCnnConfig::from_json({{"preset", "paper"}});
  CHECK(paper.feature_width == 500);
}

TEST_CASE("a single predictive token is learned to perfect training accuracy") {
  std::vector<std::string> vocab{"good", "bad", "movie", "the", "plot", "was", "a", "film"};
  const auto table = EmbeddingTable::random(vocab, 16, 11);
  Rng rng(4);
  const std::vector<std::string> filler{"movie", "the", "plot", "was", "a", "film"};
  std::vector<LabeledSentence> corpus;
  for (int i = 0; i < 20; ++i) {
    LabeledSentence s;
    s.label = i % 2;
    const std::size_t n = 3 + rng.below(5);
    for (std::size_t j = 0; j < n; ++j) s.tokens.push_back(filler[rng.below(filler.size())]);
    s.tokens.insert(s.tokens.begin() + static_cast<long>(rng.below(n)), s.label ? "good" : "bad");
    corpus.push_back(s);
  }
  const auto res = train_text_model(corpus, TextCnnConfig::desk(), table, {0.05, 80, 4, 2}, 2);
  int correct = 0;
  for (const auto& s : corpus) {
    const auto p = res.model.probabilities(s.tokens, table);
    correct += (p[1] > p[0]) == (s.label == 1);
  }
  CHECK(correct == 20);

  const auto again = train_text_model(corpus, TextCnnConfig::desk(), table, {0.05, 80, 4, 2}, 2);
  CHECK(again.loss_trace == res.loss_trace);
  CHECK(again.model.features(corpus[0].tokens, table) == res.model.features(corpus[0].tokens, table));
}

TEST_CASE("learning rate 0 keeps the initial features") {
  const auto table = small_table();
  std::vector<LabeledSentence> corpus{{words("good movie"), 1}, {words("bad film"), 0}};
  const auto res = train_text_model(corpus, TextCnnConfig::desk(), table, {0.0, 3, 1, 6}, 2);
  const auto fresh = build_text_model(TextCnnConfig::desk(), 2, 6);
  CHECK(res.model.features(corpus[0].tokens, table) == fresh.features(corpus[0].tokens, table));
}

TEST_CASE("a corpus with one class is rejected") {
  const auto table = small_table();
  std::vector<LabeledSentence> corpus{{words("good movie"), 1}, {words("good film"), 1}};
  CHECK_THROWS_AS(train_text_model(corpus, TextCnnConfig::desk(), table, {}, 2), ValidationError);
}

TEST_CASE("text model JSON round trip") {
  const auto table = small_table();
  const auto model = build_text_model(TextCnnConfig::desk(), 3, 8);
  const auto back = TextModel::from_json(nlohmann::json::parse(model.to_json().dump()));
  CHECK(back.n_classes() == 3);
  CHECK(back.features(words("the plot"), table) == model.features(words("the plot"), table));
  CHECK_THROWS_AS(TextModel::from_json({{"format", "other"}}), ValidationError);
}
