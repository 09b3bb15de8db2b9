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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "msa/audio_features.hpp"
#include "msa/cli.hpp"
#include "msa/dataset.hpp"
#include "msa/experiment.hpp"
#include "msa/fusion.hpp"
#include "msa/metrics.hpp"
#include "msa/nn.hpp"
#include "msa/splits.hpp"
#include "msa/synthetic.hpp"
#include "msa/text_features.hpp"
#include "msa/tsne.hpp"
#include "msa/visual_features.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace msa;
using eval::ExperimentConfig;
using eval::SplitMode;
using fusion::Modality;
using fusion::ModalitySet;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Tensor random_tensor(const Shape& dims, Rng& rng) {
  Tensor t(dims);
  for (auto& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

// 1. Gradients of random desk-scale networks.

nn::Network random_text_net(Rng& rng, std::uint64_t seed) {
  using nn::LayerSpec;
  const std::size_t dim = 2 + rng.below(5);
  const std::size_t k1 = 2 + rng.below(2), k2 = k1 + 1 + rng.below(2);
  const std::size_t pool = 2 + rng.below(2);
  const std::size_t pooled = 3 + rng.below(3);
  const std::size_t len = pool * pooled + k1 - 1;
  return nn::Network::build(
      {dim, len},
      {LayerSpec::branches1d({k1, k2}, 2 + rng.below(3)), LayerSpec::relu(), LayerSpec::maxpool({pool}),
       LayerSpec::conv1d(2, 2 + rng.below(4)), LayerSpec::relu(), LayerSpec::dense(3 + rng.below(6)),
       LayerSpec::relu(), LayerSpec::dense(2 + rng.below(3)), LayerSpec::softmax()},
      seed);
}

nn::Network random_visual_net(Rng& rng, std::uint64_t seed) {
  using nn::LayerSpec;
  const std::size_t kh = 2 + rng.below(2), kw = 2 + rng.below(3);
  const std::size_t h = 2 * (3 + rng.below(3)) + kh - 1, w = 2 * (3 + rng.below(4)) + kw - 1;
  return nn::Network::build(
      {2, h, w},
      {LayerSpec::conv2d(kh, kw, 2 + rng.below(3)), LayerSpec::relu(), LayerSpec::maxpool({2, 2}),
       LayerSpec::conv2d(2, 2, 2 + rng.below(3)), LayerSpec::relu(), LayerSpec::dense(3 + rng.below(6)),
       LayerSpec::sigmoid(), LayerSpec::dense(2 + rng.below(3)), LayerSpec::softmax()},
      seed);
}

Verdict gradients() {
  Rng rng(2026);
  double worst = 0.0;
  std::size_t max_params = 0, checked = 0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto net = i < 10 ? random_text_net(rng, i) : random_visual_net(rng, i);
    max_params = std::max(max_params, net.parameter_count());
    if (net.parameter_count() > 10000) return {false, "network exceeds 10k parameters"};
    nn::GradCheckOptions opts;
    opts.seed = i;
    const auto r = nn::grad_check(net, random_tensor(net.input_dims(), rng), opts);
    worst = std::max(worst, r.max_rel_error);
    checked += r.checked;
  }
  return {worst < 1e-4, fmt("20 nets, max rel error %.2e, largest %.0f params, %.0f entries checked",
                            worst, static_cast<double>(max_params), static_cast<double>(checked))};
}

// 2. Feature widths of the paper-size extractors and the fused vector.

Verdict shapes() {
  const auto tcfg = text::TextCnnConfig::paper();
  const auto tm = text::build_text_model(tcfg, 2, 1);
  text::EmbeddingTable table(tcfg.embedding_dim, 3);
  const std::vector<std::string> sentence{"the", "movie", "was", "great"};
  const auto tf = tm.features(sentence, table);

  // Logistic layer width of the paper visual chain on the smallest canvas it
  // divides evenly, and of a built model with the paper feature width.
  auto vcfg = visual::VisualCnnConfig::paper();
  vcfg.canvas_h = 251;
  vcfg.canvas_w = 501;
  Shape dims = vcfg.input_dims();
  const auto specs = vcfg.layers(2);
  Shape logistic;
  for (const auto& s : specs) {
    dims = nn::infer_output_dims(s, dims);
    if (s.kind == nn::LayerKind::sigmoid) logistic = dims;
  }
  auto desk = visual::VisualCnnConfig::desk();
  desk.feature_width = 300;
  const auto vm = visual::build_visual_model(desk, 2, 4);
  visual::FrameSequence seq;
  Rng rng(5);
  for (int f = 0; f < 21; ++f) {
    visual::Image img(2 * desk.canvas_h, 2 * desk.canvas_w);
    for (auto& p : img.pixels) p = rng.uniform();
    seq.frames.push_back(img);
  }
  const auto vf = visual::extract_visual_features(seq, vm);

  audio::AudioClip clip;
  clip.sample_rate = 8000;
  for (int i = 0; i < 8000; ++i)
    clip.samples.push_back(0.4 * std::sin(2.0 * std::numbers::pi * 140.0 * i / 8000.0) * (1.0 + 0.3 * std::sin(i / 900.0)));
  const audio::AudioConfig acfg;
  const auto af = audio::extract_audio_features(clip, acfg);

  fusion::FeatureRecord rec;
  rec.features[Modality::text] = tf;
  rec.features[Modality::audio] = af.values;
  rec.features[Modality::video] = vf;
  const auto fused = fusion::fuse(rec, ModalitySet::parse("TAV"));
  const std::size_t expected = 500 + acfg.catalog.size() + 300;
  const bool ok = tf.size() == 500 && logistic == Shape{300} && vf.size() == 300 &&
                  af.values.size() == acfg.catalog.size() && fused.values.size() == expected;
  return {ok, fmt("text %.0f, visual %.0f, fused %.0f", static_cast<double>(tf.size()),
                  static_cast<double>(vf.size()), static_cast<double>(fused.values.size())) +
                  fmt(" (expected %.0f)", static_cast<double>(expected))};
}

// 3. Metrics against a counting oracle.

Verdict metrics() {
  Rng rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(999);
    const std::size_t k = 2 + rng.below(3);
    std::vector<int> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = static_cast<int>(rng.below(k));
      pred[i] = rng.bernoulli(0.5) ? truth[i] : static_cast<int>(rng.below(k));
    }
    const auto got = eval::compute_metrics(truth, pred, {}, k);
    const auto want = testing::brute_force_metrics(truth, pred, k);
    if (got.confusion != want.confusion || got.tp_rate != want.tp_rate || got.macro_f != want.macro_f)
      return {false, "mismatch on trial " + std::to_string(trial)};
  }
  return {true, "1000 label vectors agree exactly"};
}

// 4. Split and leakage invariants over saved and reloaded manifests.

eval::Dataset random_manifest(Rng& rng, int index) {
  eval::Dataset ds;
  ds.name = "m" + std::to_string(index);
  const std::size_t speakers = 2 + rng.below(6);
  for (std::size_t s = 0; s < speakers; ++s) {
    const std::size_t per = 2 + rng.below(5);
    for (std::size_t u = 0; u < per; ++u) {
      eval::Utterance utt;
      utt.id = "spk" + std::to_string(s) + "_utt" + std::to_string(u);
      utt.speaker = "spk" + std::to_string(s);
      const int y = static_cast<int>(u % 2);
      utt.label = eval::RawLabel::categorical(y ? "positive" : "negative");
      for (auto m : fusion::kAllModalities) utt.precomputed[m] = {y + rng.normal(), rng.normal()};
      ds.utterances.push_back(utt);
    }
  }
  Rng order(rng.next_u64());
  order.shuffle(ds.utterances);
  return ds;
}

// Test ids consumed by any training phase of the same fold.
std::size_t count_leaks(const eval::AuditLog& log) {
  std::map<int, std::set<std::string>> train, test;
  for (const auto& e : log.events()) {
    auto& dst = e.phase == eval::AuditPhase::test ? test[e.fold] : train[e.fold];
    dst.insert(e.ids.begin(), e.ids.end());
  }
  std::size_t leaks = 0;
  for (const auto& [fold, ids] : test)
    for (const auto& id : ids) leaks += train[fold].count(id);
  return leaks;
}

Verdict splits() {
  testing::TempDir dir("acceptance_splits");
  Rng rng(404);
  std::size_t leaks = 0, folds = 0;
  for (int i = 0; i < 200; ++i) {
    const auto path = eval::save_manifest(random_manifest(rng, i), dir / ("m" + std::to_string(i)));
    const auto ds = eval::load_manifest(path);
    std::vector<eval::SplitItem> items;
    std::set<std::string> speakers;
    for (const auto& u : ds.utterances) {
      items.push_back({u.id, u.speaker});
      speakers.insert(u.speaker);
    }

    ExperimentConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(i);
    cfg.svm.epochs = 10;
    cfg.c_grid = {0.1, 1.0};
    cfg.subsets = {ModalitySet::parse("T"), ModalitySet::parse("TAV")};
    cfg.split_mode = i % 2 ? SplitMode::leave_one_speaker_out : SplitMode::grouped_speaker_kfold;
    cfg.k = 2 + rng.below(speakers.size() - 1);
    const auto res = eval::run_experiment(ds, cfg, nullptr);
    const auto problem = testing::plan_violation(res.plan, items, true);
    if (!problem.empty()) return {false, "manifest " + std::to_string(i) + ": " + problem};
    std::set<std::string> tested;
    for (const auto& e : res.audit.events())
      if (e.phase == eval::AuditPhase::test) tested.insert(e.ids.begin(), e.ids.end());
    if (tested.size() != items.size()) return {false, "manifest " + std::to_string(i) + ": untested ids"};
    leaks += count_leaks(res.audit);
    folds += res.plan.folds.size();
  }
  return {leaks == 0, fmt("200 manifests, %.0f folds, %.0f leaked ids", static_cast<double>(folds),
                          static_cast<double>(leaks))};
}

// 5-7. Qualitative trends on synthetic corpora.

Verdict multimodality() {
  const auto uni = {ModalitySet::parse("T"), ModalitySet::parse("A"), ModalitySet::parse("V")};
  double tri_sum = 0.0, best_sum = 0.0;
  int wins = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    eval::SyntheticSpec spec;
    spec.separability = {0.6, 0.6, 0.6};
    spec.seed = 100 + s;
    const auto table = eval::synthetic_embeddings(spec);
    ExperimentConfig cfg;
    cfg.seed = s;
    cfg.subsets = {ModalitySet::parse("T"), ModalitySet::parse("A"), ModalitySet::parse("V"),
                   ModalitySet::parse("TAV")};
    const auto res = eval::run_experiment(eval::gen_synthetic(spec), cfg, &table);
    double best = 0.0;
    for (const auto& m : uni) best = std::max(best, res.subset(m).mean_macro_f);
    const double tri = res.subset(ModalitySet::parse("TAV")).mean_macro_f;
    tri_sum += tri;
    best_sum += best;
    wins += tri > best;
  }
  return {tri_sum >= best_sum && wins >= 7,
          fmt("trimodal mean %.3f, best unimodal mean %.3f, %.0f/10 strict wins", tri_sum / 10, best_sum / 10, wins)};
}

Verdict speaker_gap() {
  double dep = 0.0, ind = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    eval::SyntheticSpec spec;
    spec.separability = {0.8, 0.8, 0.8};
    spec.speaker_confound = 0.8;
    spec.seed = 300 + s;
    const auto table = eval::synthetic_embeddings(spec);
    const auto ds = eval::gen_synthetic(spec);
    ExperimentConfig cfg;
    cfg.seed = s;
    cfg.subsets = {ModalitySet::parse("TAV")};
    cfg.split_mode = SplitMode::speaker_dependent_kfold;
    dep += eval::run_experiment(ds, cfg, &table).subsets[0].mean_macro_f;
    cfg.split_mode = SplitMode::grouped_speaker_kfold;
    ind += eval::run_experiment(ds, cfg, &table).subsets[0].mean_macro_f;
  }
  return {dep / 10 - ind / 10 >= 0.05,
          fmt("speaker-dependent %.3f, speaker-independent %.3f, gap %.3f", dep / 10, ind / 10, (dep - ind) / 10)};
}

Verdict cross_corpus() {
  double in = 0.0, cross = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    eval::SyntheticSpec a;
    a.name = "corpus-a";
    a.seed = 700 + s;
    eval::SyntheticSpec b = a;
    b.name = "corpus-b";
    b.shifted = true;
    b.seed = 900 + s;
    const auto table = eval::synthetic_embeddings(a);
    const auto da = eval::gen_synthetic(a), db = eval::gen_synthetic(b);
    ExperimentConfig cfg;
    cfg.seed = s;
    cfg.subsets = {ModalitySet::parse("TAV")};
    in += eval::run_experiment(da, cfg, &table).subsets[0].mean_macro_f;
    cross += eval::cross_dataset_run(da, db, cfg, &table).subsets[0].mean_macro_f;
  }
  return {in / 5 - cross / 5 >= 0.10,
          fmt("in-corpus %.3f, cross-corpus %.3f, gap %.3f", in / 5, cross / 5, (in - cross) / 5)};
}

// 8. Audio closed forms.

Verdict audio_forms() {
  const double rate = 8000;
  audio::AudioClip sine;
  sine.sample_rate = rate;
  for (int i = 0; i < 800; ++i) sine.samples.push_back(0.5 * std::sin(2.0 * std::numbers::pi * 100.0 * i / rate));
  const double p = audio::frame_pitch(sine.samples, rate, {});
  const bool pitch_ok = p > 0.0 && std::abs(rate / p - rate / 100.0) <= 1.0;

  audio::AudioClip flat;
  flat.sample_rate = rate;
  flat.samples.assign(8000, 0.5);
  audio::AudioConfig raw;
  raw.standardize = false;
  const auto f = audio::extract_audio_features(flat, raw).values;
  const bool const_ok = std::abs(f[7 + 1] - 0.5) < 1e-6 && std::abs(f[7 + 2] - 0.5) < 1e-6 &&
                        std::abs(f[7 + 3]) < 1e-6 && std::abs(f[14 + 1]) < 1e-6;

  // A gliding, amplitude-modulated tone with silent gaps.
  audio::AudioClip glide;
  glide.sample_rate = rate;
  double phase = 0.0;
  for (int i = 0; i < 16000; ++i) {
    const double t = i / rate;
    phase += 2.0 * std::numbers::pi * (120.0 + 80.0 * t) / rate;
    const double gate = std::fmod(t, 0.5) < 0.4 ? 1.0 : 0.0;
    glide.samples.push_back(gate * (0.3 + 0.2 * std::sin(7.0 * t)) * std::sin(phase));
  }
  const auto z = audio::z_standardize(audio::compute_llds(audio::frame_clip(glide)));
  double worst = 0.0;
  for (std::size_t c = 0; c < audio::kNumLlds; ++c) {
    std::vector<double> v;
    for (std::size_t i = 0; i < z.frame_count(); ++i)
      if (z.voiced[i]) v.push_back(z.channels[c][i]);
    double mean = 0.0, sq = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    for (double x : v) sq += (x - mean) * (x - mean);
    worst = std::max({worst, std::abs(mean), std::abs(std::sqrt(sq / static_cast<double>(v.size())) - 1.0)});
  }
  const bool z_ok = z.degenerate.empty() && z.voiced_count() < z.frame_count() && worst < 1e-9;
  return {pitch_ok && const_ok && z_ok,
          fmt("sine pitch %.2f Hz, constant intensity mean %.6f, z deviation %.1e", p, f[8], worst)};
}

// 9. SVM behaviour.

double accuracy(const fusion::SvmModel& m, const std::vector<std::vector<double>>& xs, const std::vector<int>& ys) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) hit += m.predict(xs[i]).label == ys[i];
  return static_cast<double>(hit) / static_cast<double>(xs.size());
}

Verdict svm() {
  Rng rng(909);
  double worst_sep = 1.0;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> w(5);
    for (auto& v : w) v = rng.normal();
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    while (xs.size() < 200) {
      std::vector<double> x(5);
      double d = 0.0;
      for (std::size_t j = 0; j < 5; ++j) {
        x[j] = rng.normal() * 2.0;
        d += w[j] * x[j];
      }
      if (std::abs(d) < 0.5) continue;
      xs.push_back(x);
      ys.push_back(d > 0.0);
    }
    worst_sep = std::min(worst_sep, accuracy(fusion::train_svm(xs, ys, 2, {100.0, 500, 1, false}), xs, ys));
  }

  const std::vector<std::vector<double>> xor_x{{0, 0}, {1, 1}, {0, 1}, {1, 0}};
  const std::vector<int> xor_y{0, 0, 1, 1};
  double worst_xor = 0.0;
  for (double c : {0.1, 1.0, 100.0})
    worst_xor = std::max(worst_xor, accuracy(fusion::train_svm(xor_x, xor_y, 2, {c, 500, 3, false}), xor_x, xor_y));

  std::size_t disagreements = 0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    for (int i = 0; i < 60; ++i) {
      const int y = static_cast<int>(rng.below(2));
      xs.push_back({rng.normal() + y, rng.normal() - y, rng.normal()});
      ys.push_back(y);
    }
    fusion::SvmConfig cfg{1.0, 40, static_cast<std::uint64_t>(trial), false};
    const auto bin = fusion::train_svm(xs, ys, 2, cfg);
    cfg.force_one_vs_rest = true;
    const auto ovr = fusion::train_svm(xs, ys, 2, cfg);
    for (int i = 0; i < 200; ++i) {
      const std::vector<double> x{rng.normal() * 3, rng.normal() * 3, rng.normal() * 3};
      disagreements += bin.predict(x).label != ovr.predict(x).label;
    }
  }
  return {worst_sep >= 0.99 && worst_xor <= 0.75 && disagreements == 0,
          fmt("separable accuracy %.3f, XOR accuracy %.2f, one-vs-rest disagreements %.0f", worst_sep, worst_xor,
              static_cast<double>(disagreements))};
}

// 10. t-SNE.

Verdict tsne() {
  Rng rng(1010);
  std::vector<std::vector<double>> xs(100, std::vector<double>(10));
  for (auto& x : xs)
    for (auto& v : x) v = rng.normal();
  viz::TsneConfig cfg;
  cfg.iterations = 400;
  cfg.seed = 1;
  const auto r = viz::tsne_2d(xs, cfg);
  std::size_t rises = 0;
  for (std::size_t t = r.kl_trace.size() / 2; t < r.kl_trace.size(); ++t) rises += r.kl_trace[t] > r.kl_trace[t - 1];

  double min_gap = 1e300;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng crng(seed + 10);
    std::vector<int> labels;
    const auto pts = testing::two_clusters(40, 5, crng, labels);
    viz::TsneConfig ccfg;
    ccfg.perplexity = 5;
    ccfg.iterations = 300;
    ccfg.seed = seed;
    min_gap = std::min(min_gap, testing::cluster_gap(viz::tsne_2d(pts, ccfg).points, labels));
  }

  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::vector<double>> small(6 + rng.below(15), std::vector<double>(5));
    for (auto& x : small)
      for (auto& v : x) v = rng.normal();
    const auto p = viz::joint_affinities(small, 1.5);
    std::vector<double> y(2 * small.size());
    for (auto& v : y) v = rng.normal();
    const auto g = viz::kl_gradient(p, y);
    for (std::size_t i = 0; i < y.size(); ++i) {
      auto a = y, b = y;
      a[i] += 1e-5;
      b[i] -= 1e-5;
      const double num = (viz::kl_divergence(p, a) - viz::kl_divergence(p, b)) / 2e-5;
      worst = std::max(worst, std::abs(num - g[i]) / std::max({std::abs(num), std::abs(g[i]), 1e-7}));
    }
  }
  return {rises == 0 && min_gap > 0.0 && worst < 1e-3,
          fmt("KL rises in final half %.0f, min cluster gap %.2f, gradient rel error %.1e",
              static_cast<double>(rises), min_gap, worst)};
}

// 11. Replays from run records.

int cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  return cli::run(args, out, err);
}

// Names of report files that differ between two output directories.
std::vector<std::string> differing_reports(const fs::path& a, const fs::path& b, std::size_t& compared) {
  std::vector<std::string> diff;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    const auto ext = e.path().extension();
    if (ext != ".csv" && ext != ".svg") continue;
    const auto rel = fs::relative(e.path(), a);
    ++compared;
    if (!fs::exists(b / rel) || testing::slurp(e.path()) != testing::slurp(b / rel)) diff.push_back(rel.string());
  }
  return diff;
}

Verdict replay() {
  testing::TempDir dir("acceptance_replay");
  const auto s = [&](const std::string& name) { return (dir / name).string(); };
  std::ofstream(dir / "exp.json") << R"({"seed": 11, "experiment": {"text_train": {"epochs": 4},
    "visual_train": {"epochs": 4}, "svm": {"epochs": 15}, "c_grid": [0.1, 1.0],
    "split": {"mode": "grouped_speaker_kfold", "k": 3}}})";
  const auto synth = [&](const std::string& out, const std::string& seed, bool shifted) {
    return cli({"synth", "-s", "seed=" + seed, "-s", "output_dir=" + s(out), "-s", "synthetic.n_speakers=4", "-s",
                "synthetic.utt_per_speaker=6", "-s", "synthetic.name=" + out, "-s",
                std::string("synthetic.shifted=") + (shifted ? "true" : "false")});
  };
  if (synth("a", "21", false) || synth("b", "22", true)) return {false, "synth failed"};
  const std::string cfg = s("exp.json"), ma = s("a") + "/manifest.json", mb = s("b") + "/manifest.json";
  struct Run {
    std::string name;
    std::vector<std::string> args;
  };
  const std::vector<Run> runs{
      {"eval", {"eval", "-c", cfg, "-s", "manifest=" + ma}},
      {"extract", {"extract", "-c", cfg, "-s", "manifest=" + ma}},
      {"train", {"train", "-c", cfg, "-s", "manifest=" + ma}},
      {"cross", {"cross", "-c", cfg, "-s", "manifest=" + ma, "-s", "test_manifest=" + mb}},
      {"viz", {"viz", "-s", "seed=2", "-s", "viz.iterations=150", "-s", "viz.perplexity=5"}},
  };
  std::size_t compared = 0;
  for (const auto& r : runs) {
    auto args = r.args;
    args.push_back("-s");
    args.push_back("output_dir=" + s(r.name));
    if (r.name == "viz") {
      args.push_back("-s");
      args.push_back("viz.input_dir=" + s("eval"));
    }
    if (cli(args)) return {false, r.name + " failed"};
    if (cli({r.name, "--from-record", s(r.name) + "/run_record.json", "-s", "output_dir=" + s(r.name + "_again")}))
      return {false, r.name + " replay failed"};
    const auto diff = differing_reports(dir / r.name, dir / (r.name + "_again"), compared);
    if (!diff.empty()) return {false, r.name + " replay differs in " + diff.front()};
  }
  return {compared > 0, fmt("%.0f report files byte-identical across 5 replays", static_cast<double>(compared))};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"gradient correctness", gradients},
      {"shape contracts", shapes},
      {"metric oracle equivalence", metrics},
      {"split invariants", splits},
      {"multimodality trend", multimodality},
      {"speaker-dependence gap", speaker_gap},
      {"cross-corpus degradation", cross_corpus},
      {"audio closed forms", audio_forms},
      {"SVM correctness", svm},
      {"t-SNE sanity", tsne},
      {"reproducibility", replay},
  };
  // Wall-clock budgets in seconds; 0 means none.
  const std::map<std::size_t, double> budget{{1, 120.0}, {3, 60.0}, {5, 600.0}};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (auto it = budget.find(i + 1); it != budget.end() && secs > it->second) {
      v.pass = false;
      v.detail += fmt("; over the %.0f s budget", it->second);
    }
    failures += !v.pass;
    std::printf("criterion %zu %s: %s (%s, %.1f s)\n", i + 1, criteria[i].first.c_str(), v.pass ? "PASS" : "FAIL",
                v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
