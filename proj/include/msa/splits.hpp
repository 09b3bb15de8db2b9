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

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace msa::eval {

enum class SplitMode { speaker_dependent_kfold, leave_one_speaker_out, grouped_speaker_kfold };

std::string to_string(SplitMode m);
SplitMode split_mode_from_string(const std::string& s);
bool speaker_independent(SplitMode m);

struct SplitItem {
  std::string id;
  std::string speaker;
};

struct Fold {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

struct SplitPlan {
  SplitMode mode = SplitMode::grouped_speaker_kfold;
  std::vector<Fold> folds;
  std::uint64_t seed = 0;
};

// leave_one_speaker_out: one fold per speaker (k ignored), speakers in sorted
//   order.
// grouped_speaker_kfold: speakers sorted, shuffled by seed, dealt round-robin
//   into k groups.
// speaker_dependent_kfold: utterances shuffled by seed, dealt round-robin into
//   k folds.
// Within a fold, ids keep the order of `items`.
SplitPlan make_splits(std::span<const SplitItem> items, SplitMode mode, std::size_t k,
                      std::uint64_t seed);

// Throws InvariantError unless every item is tested exactly once, train and
// test are disjoint, and (in speaker-independent modes) no speaker appears on
// both sides of a fold.
void check_plan(const SplitPlan& plan, std::span<const SplitItem> items);

// Shuffled split; the first round(fraction * n) ids (at least 1, at most
// n - 1) go to training.
std::pair<std::vector<std::string>, std::vector<std::string>> make_tuning_split(
    std::span<const std::string> ids, double fraction, std::uint64_t seed);

}  // namespace msa::eval
