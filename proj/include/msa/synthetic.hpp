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

// Synthetic multimodal corpora with controllable per-modality class signal.
//
// For every utterance and modality an independent "cue class" is drawn: the
// true label with probability `separability`, otherwise a uniformly random
// class. The modality payload then expresses its cue class clearly:
//   text   a cue word from the cue class's lexicon among filler words
//   audio  skew of the per-block pitch/intensity contour (upward spikes vs
//          downward dips), which survives per-utterance z-standardization
//   video  mouth curvature drawn on a face whose position and brightness are
//          speaker-specific
// With probability `speaker_confound` the text and video cues use
// speaker-private forms (private words, private patch positions) that only a
// model that has seen that speaker can decode. `shifted` renders a different
// "language" vocabulary and inverts the audio and video encodings.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "msa/dataset.hpp"
#include "msa/text_features.hpp"

namespace msa::eval {

struct SyntheticSpec {
  std::string name = "synthetic";
  std::size_t n_speakers = 10;
  std::size_t utt_per_speaker = 12;
  std::array<double, 3> separability{0.6, 0.6, 0.6};  // T, A, V
  double speaker_confound = 0.0;
  bool shifted = false;
  LabelScheme scheme = LabelScheme::binary_sentiment;
  std::size_t frames_per_utterance = 21;
  double audio_seconds = 1.0;
  double sample_rate = 8000.0;
  std::size_t embedding_dim = 16;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static SyntheticSpec from_json(const nlohmann::json& j);
};

Dataset gen_synthetic(const SyntheticSpec& spec);

// Random word vectors for the (unshifted) synthetic vocabulary.
text::EmbeddingTable synthetic_embeddings(const SyntheticSpec& spec);

// Writes manifest.json, WAV/PGM payloads and embeddings.txt under `dir`.
std::filesystem::path write_synthetic(const SyntheticSpec& spec, const std::filesystem::path& dir);

}  // namespace msa::eval
