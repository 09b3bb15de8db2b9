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

#include "msa/labels.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "msa/common.hpp"

namespace msa::eval {

namespace {

const std::set<std::string>& known_emotions() {
  static const std::set<std::string> s{"happy", "sad",         "neutral", "angry",
                                       "surprised", "excited", "frustration", "disgust",
                                       "fear",  "other"};
  return s;
}

std::optional<int> emotion_class(const std::string& e) {
  if (e == "angry") return 0;
  if (e == "happy") return 1;
  if (e == "sad") return 2;
  if (e == "neutral") return 3;
  return std::nullopt;
}

}  // namespace

std::size_t class_count(LabelScheme s) {
  return s == LabelScheme::binary_sentiment ? 2 : 4;
}

std::vector<std::string> class_names(LabelScheme s) {
  if (s == LabelScheme::binary_sentiment) return {"negative", "positive"};
  return {"angry", "happy", "sad", "neutral"};
}

std::optional<int> map_label(const RawLabel& label, LabelScheme scheme, const std::string& utt) {
  auto bad = [&](const std::string& why) {
    return DataError("utterance '" + utt + "': " + why);
  };
  if (scheme == LabelScheme::binary_sentiment) {
    switch (label.kind) {
      case RawLabel::Kind::categorical:
        if (label.category == "positive") return 1;
        if (label.category == "negative") return 0;
        if (label.category == "neutral") return std::nullopt;
        throw bad("unknown sentiment label '" + label.category + "'");
      case RawLabel::Kind::scores: {
        if (label.scores.empty()) throw bad("empty annotator score list");
        double sum = 0.0;
        for (double s : label.scores) {
          if (!(s >= -3.0 && s <= 3.0)) throw bad("annotator score outside [-3, 3]");
          sum += s;
        }
        const double mean = sum / static_cast<double>(label.scores.size());
        if (mean > 0.0) return 1;
        if (mean < 0.0) return 0;
        return std::nullopt;
      }
      case RawLabel::Kind::votes:
        throw bad("emotion votes cannot be mapped to binary sentiment");
    }
  }
  switch (label.kind) {
    case RawLabel::Kind::categorical:
      if (!known_emotions().count(label.category))
        throw bad("unknown emotion label '" + label.category + "'");
      return emotion_class(label.category);
    case RawLabel::Kind::votes: {
      if (label.votes.empty()) throw bad("empty vote list");
      std::map<std::string, std::size_t> counts;
      for (const auto& v : label.votes) {
        if (!known_emotions().count(v)) throw bad("unknown emotion vote '" + v + "'");
        ++counts[v];
      }
      auto top = std::max_element(counts.begin(), counts.end(),
                                  [](const auto& a, const auto& b) { return a.second < b.second; });
      if (top->second < 2 || 2 * top->second <= label.votes.size()) return std::nullopt;
      return emotion_class(top->first);
    }
    case RawLabel::Kind::scores:
      throw bad("sentiment scores cannot be mapped to emotion classes");
  }
  throw bad("unmappable label");
}

std::vector<LabeledUtterance> map_labels(const Dataset& ds) {
  std::vector<LabeledUtterance> out;
  for (std::size_t i = 0; i < ds.utterances.size(); ++i) {
    const auto& u = ds.utterances[i];
    if (auto c = map_label(u.label, ds.scheme, u.id)) out.push_back({i, u.id, u.speaker, *c});
  }
  return out;
}

}  // namespace msa::eval
