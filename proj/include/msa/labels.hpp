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

#include <optional>
#include <string>
#include <vector>

#include "msa/dataset.hpp"

namespace msa::eval {

// binary-sentiment: 0 = negative, 1 = positive.
// four-class-emotion: 0 = angry, 1 = happy, 2 = sad, 3 = neutral.
std::size_t class_count(LabelScheme s);
std::vector<std::string> class_names(LabelScheme s);

// nullopt means the utterance is dropped (neutral sentiment, zero mean score,
// no majority, or an emotion outside the four kept classes). Unmappable
// payloads throw DataError naming the utterance.
std::optional<int> map_label(const RawLabel& label, LabelScheme scheme, const std::string& utt_id);

struct LabeledUtterance {
  std::size_t index;  // into Dataset::utterances
  std::string id;
  std::string speaker;
  int label;
};

std::vector<LabeledUtterance> map_labels(const Dataset& ds);

}  // namespace msa::eval
