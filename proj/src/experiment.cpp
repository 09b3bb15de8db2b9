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

#include "msa/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include "msa/common.hpp"
#include "msa/labels.hpp"

namespace msa::eval {

using fusion::FeatureRecord;
using fusion::Modality;
using fusion::ModalitySet;
using nlohmann::json;

namespace {

json train_config_json(const nn::TrainConfig& t) {
  return {{"learning_rate", t.learning_rate}, {"epochs", t.epochs}, {"batch_size", t.batch_size}};
}

nn::TrainConfig train_config_from_json(const json& j, nn::TrainConfig t) {
  t.learning_rate = j.value("learning_rate", t.learning_rate);
  t.epochs = j.value("epochs", t.epochs);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.validate();
  return t;
}

std::string modality_name(Modality m) {
  switch (m) {
    case Modality::text: return "text";
    case Modality::audio: return "audio";
    case Modality::video: return "video";
  }
  return "?";
}

std::string join_ids(const std::vector<std::string>& ids, std::size_t limit = 10) {
  std::string s;
  for (std::size_t i = 0; i < ids.size() && i < limit; ++i) s += (i ? ", " : "") + ids[i];
  if (ids.size() > limit) s += ", ... (" + std::to_string(ids.size()) + " total)";
  return s;
}

enum class Source { precomputed, raw };

// A dataset with labels mapped and fold-independent work done up front.
struct Prepared {
  const Dataset* ds = nullptr;
  std::string prefix;  // prepended to ids in the audit log
  std::vector<LabeledUtterance> items;
  std::map<std::string, std::size_t> index;
  std::map<Modality, Source> source;
  std::vector<std::vector<double>> audio;                  // per item, when needed
  std::vector<std::vector<visual::PairedFrame>> pairs;     // per item, raw video only
  std::vector<std::string> warnings;

  const Utterance& utt(std::size_t i) const { return ds->utterances[items[i].index]; }
  std::string audit_id(std::size_t i) const { return prefix + items[i].id; }
};

std::set<Modality> needed_modalities(const ExperimentConfig& cfg) {
  std::set<Modality> out;
  for (const auto& s : cfg.subsets)
    for (auto m : s.members()) out.insert(m);
  return out;
}

Prepared prepare(const Dataset& ds, const ExperimentConfig& cfg, const text::EmbeddingTable* table,
                 std::string prefix) {
  ds.validate();
  Prepared p;
  p.ds = &ds;
  p.prefix = std::move(prefix);
  p.items = map_labels(ds);
  if (p.items.empty()) throw DataError("dataset '" + ds.name + "' has no utterances left after label mapping");
  for (std::size_t i = 0; i < p.items.size(); ++i) p.index[p.items[i].id] = i;
  for (Modality m : needed_modalities(cfg)) {
    bool any_pre = false;
    for (std::size_t i = 0; i < p.items.size(); ++i) any_pre = any_pre || p.utt(i).has_precomputed(m);
    std::vector<std::string> missing;
    for (std::size_t i = 0; i < p.items.size(); ++i) {
      const auto& u = p.utt(i);
      if (any_pre ? !u.has_precomputed(m) : !u.has_payload(m)) missing.push_back(u.id);
    }
    if (!missing.empty())
      throw DataError("dataset '" + ds.name + "': missing " + modality_name(m) +
                      (any_pre ? " precomputed features" : " payload") + " for utterances: " +
                      join_ids(missing));
    p.source[m] = any_pre ? Source::precomputed : Source::raw;
    if (any_pre) {
      const std::size_t d = p.utt(0).precomputed.at(m).size();
      for (std::size_t i = 0; i < p.items.size(); ++i)
        if (p.utt(i).precomputed.at(m).size() != d)
          throw DataError("utterance '" + p.items[i].id + "': " + modality_name(m) +
                          " feature length differs from the rest of the dataset");
    }
  }
  if (p.source.count(Modality::text) && p.source[Modality::text] == Source::raw && !table)
    throw ValidationError("text features need an embedding table (set embedding_file)");
  if (p.source.count(Modality::audio)) {
    p.audio.resize(p.items.size());
    for (std::size_t i = 0; i < p.items.size(); ++i) {
      const auto& u = p.utt(i);
      if (p.source[Modality::audio] == Source::precomputed) {
        p.audio[i] = u.precomputed.at(Modality::audio);
        continue;
      }
      auto f = audio::extract_audio_features(*u.audio, cfg.audio);
      for (auto& w : f.warnings) p.warnings.push_back("utterance '" + u.id + "': " + w);
      p.audio[i] = std::move(f.values);
    }
  }
  if (p.source.count(Modality::video) && p.source[Modality::video] == Source::raw) {
    p.pairs.resize(p.items.size());
    for (std::size_t i = 0; i < p.items.size(); ++i) {
      try {
        p.pairs[i] = visual::preprocess(*p.utt(i).frames, cfg.visual);
      } catch (const DataError& e) {
        throw DataError("utterance '" + p.items[i].id + "': " + e.what());
      }
    }
  }
  return p;
}

struct Side {
  const Prepared* data;
  std::vector<std::size_t> idx;

  std::vector<std::string> audit_ids() const {
    std::vector<std::string> out;
    for (auto i : idx) out.push_back(data->audit_id(i));
    return out;
  }
};

struct FoldOutput {
  AuditLog audit;
  std::vector<MetricsReport> reports;  // per subset
  std::vector<std::vector<PredictionRow>> rows;
  std::vector<FeatureRecord> test_records;
};

std::vector<FeatureRecord> extract(const Side& side, const ExperimentConfig& cfg,
                                   const text::EmbeddingTable* table, const text::TextModel* tm,
                                   const visual::VisualModel* vm) {
  std::vector<FeatureRecord> out;
  const Prepared& p = *side.data;
  for (auto i : side.idx) {
    const auto& u = p.utt(i);
    FeatureRecord r{u.id, u.speaker, p.items[i].label, {}};
    for (const auto& [m, src] : p.source) {
      if (src == Source::precomputed) {
        r.features[m] = u.precomputed.at(m);
      } else if (m == Modality::text) {
        r.features[m] = tm->features(*u.tokens, *table);
      } else if (m == Modality::audio) {
        r.features[m] = p.audio[i];
      } else {
        r.features[m] = vm->features(p.pairs[i]);
      }
    }
    (void)cfg;
    out.push_back(std::move(r));
  }
  return out;
}

void train_extractors(const Side& train, const ExperimentConfig& cfg, const text::EmbeddingTable* table,
                      std::size_t n_classes, std::uint64_t seed, std::optional<text::TextModel>& tm,
                      std::optional<visual::VisualModel>& vm, AuditLog* audit, int fold) {
  const Prepared& tp = *train.data;
  if (tp.source.count(Modality::text) && tp.source.at(Modality::text) == Source::raw) {
    std::vector<text::LabeledSentence> corpus;
    for (auto i : train.idx) corpus.push_back({*tp.utt(i).tokens, tp.items[i].label});
    nn::TrainConfig tc = cfg.text_train;
    tc.seed = mix_seed(seed, 1);
    tm = text::train_text_model(corpus, cfg.text, *table, tc, n_classes).model;
    if (audit) audit->record(AuditPhase::text_extractor_train, fold, "", train.audit_ids());
  }
  if (tp.source.count(Modality::video) && tp.source.at(Modality::video) == Source::raw) {
    std::vector<visual::LabeledPairs> corpus;
    for (auto i : train.idx) corpus.push_back({tp.pairs[i], tp.items[i].label});
    nn::TrainConfig tc = cfg.visual_train;
    tc.seed = mix_seed(seed, 2);
    vm = visual::train_visual_model(corpus, cfg.visual, tc, n_classes).model;
    if (audit) audit->record(AuditPhase::visual_extractor_train, fold, "", train.audit_ids());
  }
}

// Best C on a tuning split of the training records; svm.c when the split
// leaves a single class to train on.
double tune_c(const std::vector<FeatureRecord>& train_recs, const ModalitySet& subset,
              std::size_t n_classes, const fusion::SvmConfig& svm, const ExperimentConfig& cfg,
              std::uint64_t seed) {
  std::vector<std::string> ids;
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < train_recs.size(); ++i) {
    ids.push_back(train_recs[i].utterance_id);
    pos[ids.back()] = i;
  }
  auto [tr_ids, val_ids] = make_tuning_split(ids, cfg.tuning_fraction, seed);
  std::vector<FeatureRecord> tr, val;
  std::set<int> classes;
  for (const auto& id : tr_ids) {
    tr.push_back(train_recs[pos[id]]);
    classes.insert(tr.back().label);
  }
  for (const auto& id : val_ids) val.push_back(train_recs[pos[id]]);
  if (classes.size() < 2) return svm.c;
  double best_f = -1.0, best_c = svm.c;
  for (double c : cfg.c_grid) {
    fusion::SvmConfig trial = svm;
    trial.c = c;
    auto m = train_classifier(tr, subset, n_classes, trial, cfg.scale_features);
    std::vector<int> truth, pred;
    for (const auto& r : val) {
      truth.push_back(r.label);
      pred.push_back(m.predict(r, subset).label);
    }
    const double f = compute_metrics(truth, pred, {}, n_classes).macro_f;
    if (f > best_f) {
      best_f = f;
      best_c = c;
    }
  }
  return best_c;
}

FoldOutput run_fold(int fold, const Side& train, const Side& test, const ExperimentConfig& cfg,
                    const text::EmbeddingTable* table, std::size_t n_classes) {
  FoldOutput out;
  const std::uint64_t fseed = mix_seed(cfg.seed, static_cast<std::uint64_t>(fold) + 1);
  const Prepared& tp = *train.data;

  std::optional<text::TextModel> tm;
  std::optional<visual::VisualModel> vm;
  train_extractors(train, cfg, table, n_classes, fseed, tm, vm, &out.audit, fold);
  const text::TextModel* tmp = tm ? &*tm : nullptr;
  const visual::VisualModel* vmp = vm ? &*vm : nullptr;
  const auto train_recs = extract(train, cfg, table, tmp, vmp);
  out.test_records = extract(test, cfg, table, tmp, vmp);

  for (const auto& subset : cfg.subsets) {
    fusion::SvmConfig svm = cfg.svm;
    svm.seed = mix_seed(fseed, 4);
    if (!cfg.c_grid.empty() && train_recs.size() >= 2) {
      std::vector<std::string> audit_ids;
      for (auto i : train.idx) audit_ids.push_back(tp.audit_id(i));
      out.audit.record(AuditPhase::tuning, fold, subset.key(), audit_ids);
      svm.c = tune_c(train_recs, subset, n_classes, svm, cfg, mix_seed(fseed, 3));
    }
    const auto model = train_classifier(train_recs, subset, n_classes, svm, cfg.scale_features);
    out.audit.record(AuditPhase::svm_train, fold, subset.key(), train.audit_ids());
    std::vector<int> truth, pred;
    std::vector<std::vector<double>> scores;
    std::vector<PredictionRow> rows;
    for (const auto& r : out.test_records) {
      auto p = model.predict(r, subset);
      truth.push_back(r.label);
      pred.push_back(p.label);
      scores.push_back(p.scores);
      rows.push_back({fold, subset.key(), r.utterance_id, r.speaker_id, r.label, p.label, p.scores});
    }
    out.audit.record(AuditPhase::test, fold, subset.key(), test.audit_ids());
    out.reports.push_back(compute_metrics(truth, pred, scores, n_classes));
    out.rows.push_back(std::move(rows));
  }
  return out;
}

std::vector<FoldOutput> run_folds(const std::vector<std::pair<Side, Side>>& folds,
                                  const ExperimentConfig& cfg, const text::EmbeddingTable* table,
                                  std::size_t n_classes) {
  std::vector<FoldOutput> outs(folds.size());
  std::vector<std::exception_ptr> errors(folds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t f; (f = next++) < folds.size();) {
      try {
        outs[f] = run_fold(static_cast<int>(f), folds[f].first, folds[f].second, cfg, table, n_classes);
      } catch (...) {
        errors[f] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(cfg.threads, 1, std::max<std::size_t>(folds.size(), 1));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return outs;
}

void assemble(ExperimentResult& res, std::vector<FoldOutput>& outs, const ExperimentConfig& cfg) {
  for (std::size_t s = 0; s < cfg.subsets.size(); ++s) {
    SubsetResult sr;
    sr.subset = cfg.subsets[s];
    std::vector<int> truth, pred;
    std::vector<std::vector<double>> scores;
    for (auto& o : outs) {
      sr.fold_macro_f.push_back(o.reports[s].macro_f);
      sr.fold_rmse.push_back(o.reports[s].rmse);
      for (auto& r : o.rows[s]) {
        truth.push_back(r.truth);
        pred.push_back(r.predicted);
        scores.push_back(r.scores);
        res.predictions.push_back(r);
      }
    }
    for (double f : sr.fold_macro_f) sr.mean_macro_f += f / static_cast<double>(sr.fold_macro_f.size());
    for (double r : sr.fold_rmse) sr.mean_rmse += r / static_cast<double>(sr.fold_rmse.size());
    sr.pooled = compute_metrics(truth, pred, scores, res.n_classes);
    res.subsets.push_back(std::move(sr));
  }
  for (auto& o : outs) {
    res.audit.append(o.audit);
    for (auto& r : o.test_records) res.test_features.push_back(std::move(r));
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  text.validate(2);
  visual.validate(2);
  text_train.validate();
  visual_train.validate();
  svm.validate();
  for (double c : c_grid)
    if (!(c > 0.0)) throw ValidationError("c_grid values must be positive");
  if (!(tuning_fraction > 0.0 && tuning_fraction < 1.0))
    throw ValidationError("tuning_fraction must lie in (0, 1)");
  if (subsets.empty()) throw ValidationError("at least one modality subset is required");
  for (const auto& s : subsets)
    if (s.empty()) throw ValidationError("modality subsets must be non-empty");
  if (k < 2 && split_mode != SplitMode::leave_one_speaker_out)
    throw ValidationError("k must be >= 2");
}

json ExperimentConfig::to_json() const {
  json subs = json::array();
  for (const auto& s : subsets) subs.push_back(s.key());
  return {{"text", text.to_json()},
          {"text_train", train_config_json(text_train)},
          {"visual", visual.to_json()},
          {"visual_train", train_config_json(visual_train)},
          {"audio", audio.to_json()},
          {"svm", {{"c", svm.c}, {"epochs", svm.epochs}, {"force_one_vs_rest", svm.force_one_vs_rest}}},
          {"c_grid", c_grid},
          {"tuning_fraction", tuning_fraction},
          {"scale_features", scale_features},
          {"subsets", subs},
          {"split", {{"mode", eval::to_string(split_mode)}, {"k", k}}},
          {"seed", seed},
          {"threads", threads}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  try {
    if (j.contains("text")) c.text = text::TextCnnConfig::from_json(j.at("text"));
    if (j.contains("text_train")) c.text_train = train_config_from_json(j.at("text_train"), c.text_train);
    if (j.contains("visual")) c.visual = visual::VisualCnnConfig::from_json(j.at("visual"));
    if (j.contains("visual_train"))
      c.visual_train = train_config_from_json(j.at("visual_train"), c.visual_train);
    if (j.contains("audio")) c.audio = audio::AudioConfig::from_json(j.at("audio"));
    if (j.contains("svm")) {
      const auto& s = j.at("svm");
      c.svm.c = s.value("c", c.svm.c);
      c.svm.epochs = s.value("epochs", c.svm.epochs);
      c.svm.force_one_vs_rest = s.value("force_one_vs_rest", c.svm.force_one_vs_rest);
    }
    c.c_grid = j.value("c_grid", c.c_grid);
    c.tuning_fraction = j.value("tuning_fraction", c.tuning_fraction);
    c.scale_features = j.value("scale_features", c.scale_features);
    if (j.contains("subsets")) {
      c.subsets.clear();
      for (const auto& s : j.at("subsets")) c.subsets.push_back(ModalitySet::parse(s.get<std::string>()));
    }
    if (j.contains("split")) {
      const auto& s = j.at("split");
      if (s.contains("mode")) c.split_mode = split_mode_from_string(s.at("mode").get<std::string>());
      c.k = s.value("k", c.k);
    }
    if (!j.contains("seed")) throw ValidationError("config requires an explicit seed");
    c.seed = j.at("seed").get<std::uint64_t>();
    c.threads = j.value("threads", c.threads);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

FeatureScaler FeatureScaler::fit(std::span<const std::vector<double>> xs) {
  if (xs.empty()) throw ValidationError("cannot fit a scaler on no vectors");
  const std::size_t d = xs[0].size();
  FeatureScaler s;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 1.0);
  const double n = static_cast<double>(xs.size());
  for (const auto& x : xs)
    for (std::size_t i = 0; i < d; ++i) s.mean[i] += x[i] / n;
  std::vector<double> var(d, 0.0);
  for (const auto& x : xs)
    for (std::size_t i = 0; i < d; ++i) var[i] += (x[i] - s.mean[i]) * (x[i] - s.mean[i]) / n;
  for (std::size_t i = 0; i < d; ++i)
    if (var[i] > 1e-24) s.scale[i] = 1.0 / std::sqrt(var[i]);
  return s;
}

std::vector<double> FeatureScaler::apply(std::span<const double> x) const {
  if (mean.empty()) return {x.begin(), x.end()};
  if (x.size() != mean.size())
    throw ValidationError("scaler expects " + std::to_string(mean.size()) + " features, got " +
                          std::to_string(x.size()));
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean[i]) * scale[i];
  return out;
}

json FeatureScaler::to_json() const { return {{"mean", mean}, {"scale", scale}}; }

FeatureScaler FeatureScaler::from_json(const json& j) {
  FeatureScaler s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.scale = j.at("scale").get<std::vector<double>>();
  if (s.mean.size() != s.scale.size()) throw ValidationError("scaler mean/scale lengths differ");
  return s;
}

fusion::Prediction Classifier::predict(const FeatureRecord& r, const ModalitySet& subset) const {
  return model.predict(scaler.apply(fusion::fuse(r, subset).values));
}

json Classifier::to_json() const {
  return {{"format", "msa-classifier"}, {"version", 1}, {"scaler", scaler.to_json()}, {"svm", model.to_json()}};
}

Classifier Classifier::from_json(const json& j) {
  if (j.value("format", "") != "msa-classifier") throw ValidationError("not an msa-classifier document");
  return {FeatureScaler::from_json(j.at("scaler")), fusion::SvmModel::from_json(j.at("svm"))};
}

Classifier train_classifier(std::span<const FeatureRecord> recs, const ModalitySet& subset,
                            std::size_t n_classes, const fusion::SvmConfig& svm, bool scale_features) {
  if (recs.empty()) throw ValidationError("cannot train a classifier on no records");
  std::vector<std::vector<double>> xs;
  std::vector<int> ys;
  for (const auto& r : recs) {
    xs.push_back(fusion::fuse(r, subset).values);
    ys.push_back(r.label);
  }
  Classifier out;
  if (scale_features) {
    out.scaler = FeatureScaler::fit(xs);
    for (auto& x : xs) x = out.scaler.apply(x);
  }
  out.model = fusion::train_svm(xs, ys, n_classes, svm);
  out.model.layout = fusion::fuse(recs.front(), subset).layout;
  return out;
}

ExtractedFeatures extract_features(const Dataset& ds, const ExperimentConfig& cfg,
                                   const text::EmbeddingTable* table) {
  cfg.validate();
  Prepared p = prepare(ds, cfg, table, "");
  Side all{&p, {}};
  for (std::size_t i = 0; i < p.items.size(); ++i) all.idx.push_back(i);
  ExtractedFeatures out;
  out.n_classes = class_count(ds.scheme);
  out.warnings = p.warnings;
  train_extractors(all, cfg, table, out.n_classes, mix_seed(cfg.seed, 0), out.text_model, out.visual_model, nullptr, 0);
  out.records = extract(all, cfg, table, out.text_model ? &*out.text_model : nullptr,
                        out.visual_model ? &*out.visual_model : nullptr);
  return out;
}

std::string to_string(AuditPhase p) {
  switch (p) {
    case AuditPhase::text_extractor_train: return "text_extractor_train";
    case AuditPhase::visual_extractor_train: return "visual_extractor_train";
    case AuditPhase::tuning: return "tuning";
    case AuditPhase::svm_train: return "svm_train";
    case AuditPhase::test: return "test";
  }
  return "?";
}

void AuditLog::record(AuditPhase phase, int fold, std::string subset, std::vector<std::string> ids) {
  events_.push_back({phase, fold, std::move(subset), std::move(ids)});
}

void AuditLog::append(const AuditLog& other) {
  events_.insert(events_.end(), other.events_.begin(), other.events_.end());
}

std::size_t AuditLog::leaked_count() const {
  std::map<int, std::set<std::string>> test_ids, train_ids;
  for (const auto& e : events_) {
    auto& dst = e.phase == AuditPhase::test ? test_ids[e.fold] : train_ids[e.fold];
    dst.insert(e.ids.begin(), e.ids.end());
  }
  std::size_t leaked = 0;
  for (const auto& [fold, ids] : train_ids) {
    const auto& t = test_ids[fold];
    for (const auto& id : ids) leaked += t.count(id);
  }
  return leaked;
}

void AuditLog::check_no_leakage() const {
  std::map<int, std::set<std::string>> test_ids;
  for (const auto& e : events_)
    if (e.phase == AuditPhase::test) test_ids[e.fold].insert(e.ids.begin(), e.ids.end());
  for (const auto& e : events_) {
    if (e.phase == AuditPhase::test) continue;
    for (const auto& id : e.ids)
      if (test_ids[e.fold].count(id))
        throw InvariantError("leakage: test utterance '" + id + "' consumed by " + to_string(e.phase) +
                             " in fold " + std::to_string(e.fold));
  }
}

void AuditLog::write_jsonl(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write audit log " + path.string());
  for (const auto& e : events_) {
    json j = {{"phase", to_string(e.phase)}, {"fold", e.fold}, {"subset", e.subset}, {"ids", e.ids}};
    out << j.dump() << '\n';
  }
}

const SubsetResult& ExperimentResult::subset(const ModalitySet& s) const {
  for (const auto& r : subsets)
    if (r.subset == s) return r;
  throw ValidationError("subset " + s.label() + " was not evaluated");
}

ExperimentResult run_experiment(const Dataset& ds, const ExperimentConfig& cfg,
                                const text::EmbeddingTable* table) {
  cfg.validate();
  const auto labeled = map_labels(ds);
  std::vector<SplitItem> items;
  for (const auto& l : labeled) items.push_back({l.id, l.speaker});
  return run_experiment(ds, cfg, table, make_splits(items, cfg.split_mode, cfg.k, cfg.seed));
}

ExperimentResult run_experiment(const Dataset& ds, const ExperimentConfig& cfg,
                                const text::EmbeddingTable* table, const SplitPlan& plan) {
  cfg.validate();
  Prepared p = prepare(ds, cfg, table, "");
  std::vector<SplitItem> items;
  for (const auto& l : p.items) items.push_back({l.id, l.speaker});
  check_plan(plan, items);

  std::vector<std::pair<Side, Side>> folds;
  for (const auto& f : plan.folds) {
    Side tr{&p, {}}, te{&p, {}};
    for (const auto& id : f.train_ids) tr.idx.push_back(p.index.at(id));
    for (const auto& id : f.test_ids) te.idx.push_back(p.index.at(id));
    folds.emplace_back(std::move(tr), std::move(te));
  }
  ExperimentResult res;
  res.dataset = ds.name;
  res.source = "in-corpus";
  res.n_classes = class_count(ds.scheme);
  res.class_names = class_names(ds.scheme);
  res.plan = plan;
  res.warnings = p.warnings;
  auto outs = run_folds(folds, cfg, table, res.n_classes);
  assemble(res, outs, cfg);
  res.audit.check_no_leakage();
  return res;
}

ExperimentResult cross_dataset_run(const Dataset& train, const Dataset& test,
                                   const ExperimentConfig& cfg, const text::EmbeddingTable* table) {
  cfg.validate();
  if (train.scheme != test.scheme)
    throw ValidationError("label schemes differ (" + to_string(train.scheme) + " vs " +
                          to_string(test.scheme) + "); map both corpora to the same scheme");
  const bool same_name = train.name == test.name;
  Prepared a = prepare(train, cfg, table, same_name ? "" : train.name + ":");
  Prepared b = prepare(test, cfg, table, same_name ? "" : test.name + ":");
  for (const auto& [m, src] : a.source) {
    if (b.source.at(m) != src)
      throw ValidationError(modality_name(m) + " features are precomputed in one corpus and raw in the other; "
                            "extract both with the same configuration");
    if (src == Source::precomputed) {
      const auto da = a.utt(0).precomputed.at(m).size(), db = b.utt(0).precomputed.at(m).size();
      if (da != db)
        throw ValidationError(modality_name(m) + " dimension mismatch: " + std::to_string(da) + " vs " +
                              std::to_string(db) + "; re-extract both corpora with a shared " +
                              (m == Modality::text ? "embedding table" : m == Modality::audio ? "catalog" : "visual config"));
    }
  }
  Side tr{&a, {}}, te{&b, {}};
  for (std::size_t i = 0; i < a.items.size(); ++i) tr.idx.push_back(i);
  for (std::size_t i = 0; i < b.items.size(); ++i) te.idx.push_back(i);

  ExperimentResult res;
  res.dataset = test.name;
  res.source = train.name + "->" + test.name;
  res.n_classes = class_count(train.scheme);
  res.class_names = class_names(train.scheme);
  Fold f;
  for (const auto& l : a.items) f.train_ids.push_back(l.id);
  for (const auto& l : b.items) f.test_ids.push_back(l.id);
  res.plan.mode = SplitMode::grouped_speaker_kfold;
  res.plan.seed = cfg.seed;
  res.plan.folds.push_back(std::move(f));
  res.warnings = a.warnings;
  res.warnings.insert(res.warnings.end(), b.warnings.begin(), b.warnings.end());
  auto outs = run_folds({{tr, te}}, cfg, table, res.n_classes);
  assemble(res, outs, cfg);
  if (same_name) {
    res.warnings.push_back("train and test corpora are both named '" + train.name +
                           "'; treated as a degenerate transfer and the leakage audit is skipped");
  } else {
    res.audit.check_no_leakage();
  }
  return res;
}

}  // namespace msa::eval
