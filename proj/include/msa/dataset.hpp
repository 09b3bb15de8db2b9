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

// In-memory corpus and its JSON manifest.
//
// Manifest schema (version 1), paths relative to the manifest's directory:
//   {
//     "schema_version": 1,
//     "dataset": "mosi-like",
//     "language": "en",
//     "label_scheme": "binary-sentiment" | "four-class-emotion",
//     "embedding_file": "embeddings.txt",              (optional)
//     "utterances": [{
//       "id": "u1", "speaker": "s1",
//       "label": {"category": "positive"} | {"scores": [2, 1, 0]} | {"votes": ["happy", ...]},
//       "tokens": ["great", "movie"] | "transcript": "Great movie",
//       "audio": "u1.wav",                  "audio_features": [...],
//       "frames": ["u1_000.pgm", ...],      "face_boxes": [[x, y, w, h], ...],
//       "video_features": [...],            "text_features": [...]
//     }]
//   }
// Precomputed *_features fields take precedence over raw payloads.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "msa/audio_features.hpp"
#include "msa/fusion.hpp"
#include "msa/visual_features.hpp"

namespace msa::eval {

enum class LabelScheme { binary_sentiment, four_class_emotion };

std::string to_string(LabelScheme s);
LabelScheme label_scheme_from_string(const std::string& s);

struct RawLabel {
  enum class Kind { categorical, scores, votes };
  Kind kind = Kind::categorical;
  std::string category;
  std::vector<double> scores;
  std::vector<std::string> votes;

  static RawLabel categorical(std::string c);
  static RawLabel from_scores(std::vector<double> s);
  static RawLabel from_votes(std::vector<std::string> v);
};

struct Utterance {
  std::string id;
  std::string speaker;
  RawLabel label;
  std::optional<std::vector<std::string>> tokens;
  std::optional<audio::AudioClip> audio;
  std::optional<visual::FrameSequence> frames;
  std::map<fusion::Modality, std::vector<double>> precomputed;

  bool has_precomputed(fusion::Modality m) const { return precomputed.count(m) > 0; }
  bool has_payload(fusion::Modality m) const;
};

struct Dataset {
  std::string name;
  std::string language = "en";
  LabelScheme scheme = LabelScheme::binary_sentiment;
  std::optional<std::filesystem::path> embedding_file;
  std::vector<Utterance> utterances;

  // Unique ids, non-empty speakers, at least one payload per utterance.
  void validate() const;
  const Utterance& find(const std::string& id) const;
};

Dataset load_manifest(const std::filesystem::path& path);

// Writes payloads (WAV, PGM) next to the manifest and returns its path.
// Output is byte-deterministic for a given dataset.
std::filesystem::path save_manifest(const Dataset& ds, const std::filesystem::path& dir);

}  // namespace msa::eval
