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

#include "msa/splits.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "msa/common.hpp"

namespace msa::eval {

std::string to_string(SplitMode m) {
  switch (m) {
    case SplitMode::speaker_dependent_kfold: return "speaker_dependent_kfold";
    case SplitMode::leave_one_speaker_out: return "leave_one_speaker_out";
    case SplitMode::grouped_speaker_kfold: return "grouped_speaker_kfold";
  }
  return "?";
}

SplitMode split_mode_from_string(const std::string& s) {
  for (auto m : {SplitMode::speaker_dependent_kfold, SplitMode::leave_one_speaker_out,
                 SplitMode::grouped_speaker_kfold})
    if (to_string(m) == s) return m;
  throw ValidationError("unknown split mode '" + s + "'");
}

bool speaker_independent(SplitMode m) { return m != SplitMode::speaker_dependent_kfold; }

SplitPlan make_splits(std::span<const SplitItem> items, SplitMode mode, std::size_t k,
                      std::uint64_t seed) {
  std::set<std::string> ids;
  for (const auto& it : items)
    if (!ids.insert(it.id).second) throw DataError("duplicate utterance id '" + it.id + "'");
  std::vector<std::string> speakers;
  {
    std::set<std::string> s;
    for (const auto& it : items) s.insert(it.speaker);
    speakers.assign(s.begin(), s.end());
  }
  SplitPlan plan;
  plan.mode = mode;
  plan.seed = seed;
  Rng rng(seed);
  // fold index of every item
  std::vector<std::size_t> assign(items.size());
  std::size_t n_folds = 0;
  switch (mode) {
    case SplitMode::leave_one_speaker_out: {
      if (speakers.size() < 2)
        throw ValidationError("leave-one-speaker-out needs at least 2 speakers");
      std::map<std::string, std::size_t> idx;
      for (std::size_t i = 0; i < speakers.size(); ++i) idx[speakers[i]] = i;
      for (std::size_t i = 0; i < items.size(); ++i) assign[i] = idx[items[i].speaker];
      n_folds = speakers.size();
      break;
    }
    case SplitMode::grouped_speaker_kfold: {
      if (k < 2) throw ValidationError("grouped speaker k-fold needs k >= 2");
      if (k > speakers.size())
        throw ValidationError("grouped speaker k-fold with k=" + std::to_string(k) + " but only " +
                              std::to_string(speakers.size()) + " speakers");
      rng.shuffle(speakers);
      std::map<std::string, std::size_t> group;
      for (std::size_t i = 0; i < speakers.size(); ++i) group[speakers[i]] = i % k;
      for (std::size_t i = 0; i < items.size(); ++i) assign[i] = group[items[i].speaker];
      n_folds = k;
      break;
    }
    case SplitMode::speaker_dependent_kfold: {
      if (k < 2) throw ValidationError("k-fold needs k >= 2");
      if (k > items.size())
        throw ValidationError("k-fold with k=" + std::to_string(k) + " but only " +
                              std::to_string(items.size()) + " utterances");
      std::vector<std::size_t> order(items.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      rng.shuffle(order);
      for (std::size_t r = 0; r < order.size(); ++r) assign[order[r]] = r % k;
      n_folds = k;
      break;
    }
  }
  plan.folds.resize(n_folds);
  for (std::size_t f = 0; f < n_folds; ++f)
    for (std::size_t i = 0; i < items.size(); ++i)
      (assign[i] == f ? plan.folds[f].test_ids : plan.folds[f].train_ids).push_back(items[i].id);
  return plan;
}

void check_plan(const SplitPlan& plan, std::span<const SplitItem> items) {
  std::map<std::string, std::string> speaker_of;
  for (const auto& it : items) speaker_of[it.id] = it.speaker;
  std::map<std::string, std::size_t> tested;
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    const auto& fold = plan.folds[f];
    std::set<std::string> train(fold.train_ids.begin(), fold.train_ids.end());
    std::set<std::string> train_spk;
    for (const auto& id : fold.train_ids) {
      if (!speaker_of.count(id)) throw InvariantError("fold " + std::to_string(f) + " trains on unknown id " + id);
      train_spk.insert(speaker_of[id]);
    }
    for (const auto& id : fold.test_ids) {
      if (!speaker_of.count(id)) throw InvariantError("fold " + std::to_string(f) + " tests unknown id " + id);
      if (train.count(id)) throw InvariantError("fold " + std::to_string(f) + " trains and tests on " + id);
      if (speaker_independent(plan.mode) && train_spk.count(speaker_of[id]))
        throw InvariantError("fold " + std::to_string(f) + " has speaker '" + speaker_of[id] +
                             "' in both train and test");
      ++tested[id];
    }
  }
  for (const auto& it : items)
    if (tested[it.id] != 1)
      throw InvariantError("utterance '" + it.id + "' tested " + std::to_string(tested[it.id]) +
                           " times");
}

std::pair<std::vector<std::string>, std::vector<std::string>> make_tuning_split(
    std::span<const std::string> ids, double fraction, std::uint64_t seed) {
  if (ids.size() < 2) throw ValidationError("tuning split needs at least 2 utterances");
  if (!(fraction > 0.0 && fraction < 1.0)) throw ValidationError("tuning fraction must be in (0, 1)");
  std::vector<std::string> shuffled(ids.begin(), ids.end());
  Rng rng(seed);
  rng.shuffle(shuffled);
  auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ids.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, ids.size() - 1);
  std::vector<std::string> train(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::string> val(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train), shuffled.end());
  return {std::move(train), std::move(val)};
}

}  // namespace msa::eval
