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

#include "msa/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "msa/common.hpp"

namespace msa::fusion {

char modality_letter(Modality m) {
  switch (m) {
    case Modality::text: return 'T';
    case Modality::audio: return 'A';
    case Modality::video: return 'V';
  }
  return '?';
}

Modality modality_from_letter(char c) {
  switch (c) {
    case 'T': case 't': return Modality::text;
    case 'A': case 'a': return Modality::audio;
    case 'V': case 'v': return Modality::video;
  }
  throw ValidationError(std::string("unknown modality '") + c + "'");
}

ModalitySet::ModalitySet(std::initializer_list<Modality> ms) {
  for (auto m : ms) bits_ |= 1u << static_cast<unsigned>(m);
}

ModalitySet ModalitySet::parse(const std::string& s) {
  ModalitySet out;
  for (char c : s) {
    if (c == '+' || c == ',' || c == ' ') continue;
    out.bits_ |= 1u << static_cast<unsigned>(modality_from_letter(c));
  }
  if (out.empty()) throw ValidationError("empty modality subset '" + s + "'");
  return out;
}

std::vector<ModalitySet> ModalitySet::all_subsets() {
  using M = Modality;
  return {{M::audio},           {M::video},           {M::text},
          {M::text, M::audio},  {M::text, M::video},  {M::audio, M::video},
          {M::text, M::audio, M::video}};
}

std::size_t ModalitySet::size() const { return members().size(); }

std::vector<Modality> ModalitySet::members() const {
  std::vector<Modality> out;
  for (auto m : kAllModalities)
    if (contains(m)) out.push_back(m);
  return out;
}

std::string ModalitySet::label() const {
  std::string s;
  for (auto m : members()) {
    if (!s.empty()) s += " + ";
    s += modality_letter(m);
  }
  return s;
}

std::string ModalitySet::key() const {
  std::string s;
  for (auto m : members()) s += modality_letter(m);
  return s;
}

FusedVector fuse(const FeatureRecord& record, const ModalitySet& modalities) {
  if (modalities.empty()) throw ValidationError("fusion needs at least one modality");
  FusedVector out;
  for (auto m : modalities.members()) {
    auto it = record.features.find(m);
    if (it == record.features.end())
      throw DataError("utterance '" + record.utterance_id + "' has no " +
                      std::string(1, modality_letter(m)) + " features");
    out.layout.push_back({m, out.values.size(), it->second.size()});
    out.values.insert(out.values.end(), it->second.begin(), it->second.end());
  }
  return out;
}

void SvmConfig::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("SVM C must be positive");
  if (epochs < 1) throw ValidationError("SVM epochs must be >= 1");
}

double SvmHead::decision(std::span<const double> x) const {
  if (x.size() != weights.size())
    throw ValidationError("SVM input has " + std::to_string(x.size()) + " features, model expects " +
                          std::to_string(weights.size()));
  double s = bias;
  for (std::size_t i = 0; i < x.size(); ++i) s += weights[i] * x[i];
  return s;
}

Prediction SvmModel::predict(std::span<const double> x) const {
  if (heads.empty()) throw ValidationError("SVM model has no heads");
  Prediction p;
  if (heads.size() == 1) {
    const double d = heads[0].decision(x);
    p.scores = {-d, d};
    p.label = d > 0.0 ? 1 : 0;
    return p;
  }
  for (const auto& h : heads) p.scores.push_back(h.decision(x));
  p.label = 0;
  for (std::size_t k = 1; k < p.scores.size(); ++k)
    if (p.scores[k] > p.scores[static_cast<std::size_t>(p.label)]) p.label = static_cast<int>(k);
  return p;
}

double hinge_objective(const SvmHead& head, std::span<const std::vector<double>> xs,
                       std::span<const int> signs, double lambda) {
  double norm2 = head.bias * head.bias;
  for (double w : head.weights) norm2 += w * w;
  double loss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    loss += std::max(0.0, 1.0 - signs[i] * head.decision(xs[i]));
  return 0.5 * lambda * norm2 + loss / static_cast<double>(xs.size());
}

SvmHead train_binary_head(std::span<const std::vector<double>> xs, std::span<const int> signs,
                          const SvmConfig& cfg, std::vector<double>* objective_trace) {
  cfg.validate();
  if (xs.empty()) throw ValidationError("SVM training set is empty");
  const std::size_t n = xs.size(), d = xs[0].size();
  const double lambda = 1.0 / (cfg.c * static_cast<double>(n));
  const double radius = 1.0 / std::sqrt(lambda);
  SvmHead h{std::vector<double>(d, 0.0), 0.0};
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::uint64_t t = 0;
  SvmHead best;
  double best_obj = 0.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    SvmHead avg{std::vector<double>(d, 0.0), 0.0};
    for (std::size_t idx : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double y = signs[idx];
      const bool violated = y * h.decision(xs[idx]) < 1.0;
      const double shrink = 1.0 - eta * lambda;
      for (auto& w : h.weights) w *= shrink;
      h.bias *= shrink;
      if (violated) {
        const auto& x = xs[idx];
        for (std::size_t k = 0; k < d; ++k) h.weights[k] += eta * y * x[k];
        h.bias += eta * y;
      }
      double norm2 = h.bias * h.bias;
      for (double w : h.weights) norm2 += w * w;
      if (norm2 > radius * radius) {
        const double s = radius / std::sqrt(norm2);
        for (auto& w : h.weights) w *= s;
        h.bias *= s;
      }
      for (std::size_t k = 0; k < d; ++k) avg.weights[k] += h.weights[k] / static_cast<double>(n);
      avg.bias += h.bias / static_cast<double>(n);
    }
    const double obj = hinge_objective(avg, xs, signs, lambda);
    if (epoch == 0 || obj < best_obj) {
      best = std::move(avg);
      best_obj = obj;
    }
    if (objective_trace) objective_trace->push_back(best_obj);
  }
  return best;
}

SvmModel train_svm(std::span<const std::vector<double>> xs, std::span<const int> labels,
                   std::size_t n_classes, const SvmConfig& cfg) {
  cfg.validate();
  if (xs.size() != labels.size()) throw ValidationError("SVM features and labels differ in length");
  if (xs.empty()) throw ValidationError("SVM training set is empty");
  if (n_classes < 2) throw ValidationError("SVM needs at least 2 classes");
  const std::size_t d = xs[0].size();
  std::set<int> present;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].size() != d)
      throw ValidationError("inconsistent feature dims: row " + std::to_string(i) + " has " +
                            std::to_string(xs[i].size()) + ", row 0 has " + std::to_string(d));
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= n_classes)
      throw ValidationError("label " + std::to_string(labels[i]) + " outside [0, " +
                            std::to_string(n_classes) + ")");
    present.insert(labels[i]);
  }
  if (present.size() < 2)
    throw ValidationError("SVM training data contains a single class");
  SvmModel model;
  model.n_classes = n_classes;
  model.config = cfg;
  std::vector<int> signs(labels.size());
  if (n_classes == 2 && !cfg.force_one_vs_rest) {
    for (std::size_t i = 0; i < labels.size(); ++i) signs[i] = labels[i] == 1 ? 1 : -1;
    model.heads.push_back(train_binary_head(xs, signs, cfg, &model.objective_trace));
    return model;
  }
  model.objective_trace.assign(static_cast<std::size_t>(cfg.epochs), 0.0);
  for (std::size_t k = 0; k < n_classes; ++k) {
    for (std::size_t i = 0; i < labels.size(); ++i)
      signs[i] = static_cast<std::size_t>(labels[i]) == k ? 1 : -1;
    std::vector<double> trace;
    model.heads.push_back(train_binary_head(xs, signs, cfg, &trace));
    for (std::size_t e = 0; e < trace.size(); ++e)
      model.objective_trace[e] += trace[e] / static_cast<double>(n_classes);
  }
  return model;
}

SvmModel train_svm(std::span<const FeatureRecord> records, const ModalitySet& modalities,
                   std::size_t n_classes, const SvmConfig& cfg) {
  std::vector<std::vector<double>> xs;
  std::vector<int> labels;
  std::vector<LayoutEntry> layout;
  for (const auto& r : records) {
    FusedVector f = fuse(r, modalities);
    if (xs.empty()) {
      layout = f.layout;
    } else if (f.layout != layout) {
      throw ValidationError("utterance '" + r.utterance_id +
                            "' has feature dims inconsistent with the rest of the training set");
    }
    xs.push_back(std::move(f.values));
    labels.push_back(r.label);
  }
  SvmModel m = train_svm(xs, labels, n_classes, cfg);
  m.layout = std::move(layout);
  return m;
}

nlohmann::json SvmModel::to_json() const {
  nlohmann::json jh = nlohmann::json::array();
  for (const auto& h : heads) jh.push_back({{"weights", h.weights}, {"bias", h.bias}});
  nlohmann::json jl = nlohmann::json::array();
  for (const auto& e : layout)
    jl.push_back({{"modality", std::string(1, modality_letter(e.modality))},
                  {"offset", e.offset},
                  {"length", e.length}});
  return {{"format", "msa-svm"},
          {"version", 1},
          {"n_classes", n_classes},
          {"c", config.c},
          {"epochs", config.epochs},
          {"seed", config.seed},
          {"one_vs_rest", heads.size() > 1},
          {"heads", jh},
          {"layout", jl}};
}

SvmModel SvmModel::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "msa-svm" || j.value("version", 0) != 1)
    throw ValidationError("not an msa-svm v1 document");
  SvmModel m;
  m.n_classes = j.at("n_classes").get<std::size_t>();
  m.config.c = j.at("c").get<double>();
  m.config.epochs = j.at("epochs").get<int>();
  m.config.seed = j.at("seed").get<std::uint64_t>();
  m.config.force_one_vs_rest = j.value("one_vs_rest", false) && m.n_classes == 2;
  for (const auto& h : j.at("heads"))
    m.heads.push_back({h.at("weights").get<std::vector<double>>(), h.at("bias").get<double>()});
  for (const auto& e : j.value("layout", nlohmann::json::array()))
    m.layout.push_back({modality_from_letter(e.at("modality").get<std::string>().at(0)),
                        e.at("offset").get<std::size_t>(), e.at("length").get<std::size_t>()});
  const std::size_t expect_heads = m.n_classes == 2 && !m.config.force_one_vs_rest ? 1 : m.n_classes;
  if (m.heads.size() != expect_heads) throw ValidationError("SVM head count does not match classes");
  for (const auto& h : m.heads)
    if (h.weights.size() != m.heads[0].weights.size())
      throw ValidationError("SVM heads differ in dimension");
  return m;
}

}  // namespace msa::fusion
