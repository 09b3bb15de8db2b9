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

#include "msa/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "msa/common.hpp"
#include "msa/labels.hpp"

namespace msa::eval {

namespace {

constexpr std::size_t kFillerWords = 40;
constexpr std::size_t kSharedCueWords = 5;
constexpr std::size_t kPrivateCueWords = 1;
constexpr std::size_t kFrameH = 36, kFrameW = 52, kFaceH = 32, kFaceW = 48;

std::string word_prefix(const SyntheticSpec& s) { return s.shifted ? "es_" : ""; }

std::string filler(const SyntheticSpec& s, std::size_t i) {
  return word_prefix(s) + "w" + std::to_string(i);
}

std::string shared_cue(const SyntheticSpec& s, int cls, std::size_t j) {
  return word_prefix(s) + class_names(s.scheme)[static_cast<std::size_t>(cls)] + std::to_string(j);
}

std::string private_cue(const SyntheticSpec& s, std::size_t spk, int cls, std::size_t j) {
  return word_prefix(s) + "s" + std::to_string(spk) + "_" +
         class_names(s.scheme)[static_cast<std::size_t>(cls)] + std::to_string(j);
}

struct SpeakerStyle {
  double pitch_base;
  double amp_base;
  std::size_t face_x, face_y;
  double face_level;
  // Private video cue: patch position (row, col) in face coordinates per class.
  std::vector<std::pair<std::size_t, std::size_t>> patch;
};

int draw_cue(Rng& rng, int label, double separability, std::size_t k) {
  if (rng.bernoulli(separability)) return label;
  return static_cast<int>(rng.below(k));
}

std::vector<std::string> make_tokens(const SyntheticSpec& s, Rng& rng, std::size_t spk, int cue,
                                     bool priv) {
  const std::size_t len = 4 + rng.below(6);
  std::vector<std::string> toks;
  for (std::size_t i = 0; i < len; ++i) toks.push_back(filler(s, rng.below(kFillerWords)));
  for (int rep = 0; rep < 2; ++rep) {
    const std::string word = priv ? private_cue(s, spk, cue, rng.below(kPrivateCueWords))
                                  : shared_cue(s, cue, rng.below(kSharedCueWords));
    toks.insert(toks.begin() + static_cast<std::ptrdiff_t>(rng.below(toks.size() + 1)), word);
  }
  return toks;
}

// Direction (+1 spikes, -1 dips) of the pitch and intensity contours.
std::pair<int, int> audio_directions(const SyntheticSpec& s, int cue) {
  int dp, di;
  if (class_count(s.scheme) == 2) {
    dp = di = cue == 1 ? 1 : -1;
  } else {
    dp = (cue & 1) ? 1 : -1;
    di = (cue & 2) ? 1 : -1;
  }
  if (s.shifted) {
    dp = -dp;
    di = -di;
  }
  return {dp, di};
}

audio::AudioClip make_audio(const SyntheticSpec& s, Rng& rng, const SpeakerStyle& st, int cue) {
  audio::AudioClip clip;
  clip.sample_rate = s.sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(s.audio_seconds * s.sample_rate));
  clip.samples.assign(n, 0.0);
  const auto block = static_cast<std::size_t>(std::llround(0.1 * s.sample_rate));
  const auto [dp, di] = audio_directions(s, cue);
  const std::size_t blocks = (n + block - 1) / block;
  // block 0 is silence, so voicing detection has something to reject; a
  // fixed share of the voiced blocks carry the spike or dip
  std::vector<std::size_t> order;
  for (std::size_t b = 1; b < blocks; ++b) order.push_back(b);
  rng.shuffle(order);
  const std::size_t n_spikes = std::max<std::size_t>(1, order.size() / 4);
  std::vector<bool> spike(blocks, false);
  for (std::size_t i = 0; i < n_spikes && i < order.size(); ++i) spike[order[i]] = true;
  double phase = 0.0;
  for (std::size_t bi = 0; bi < blocks; ++bi) {
    const bool voiced = bi > 0;
    const double f0 = st.pitch_base * (spike[bi] ? 1.0 + 0.35 * dp : 1.0 + rng.uniform(-0.03, 0.03));
    const double amp = voiced ? st.amp_base * (spike[bi] ? 1.0 + 0.6 * di : 1.0 + rng.uniform(-0.05, 0.05))
                              : 0.0;
    for (std::size_t i = bi * block; i < std::min(n, (bi + 1) * block); ++i) {
      phase += 2.0 * M_PI * f0 / s.sample_rate;
      clip.samples[i] = amp * (0.8 * std::sin(phase) + 0.2 * std::sin(2.0 * phase)) + 0.002 * rng.normal();
    }
  }
  for (auto& x : clip.samples) x = std::clamp(x, -1.0, 1.0);
  return clip;
}

visual::FrameSequence make_frames(const SyntheticSpec& s, Rng& rng, const SpeakerStyle& st,
                                  int cue, bool priv) {
  const std::size_t k = class_count(s.scheme);
  // mouth curvature in [-1, 1]: -1 frown ... +1 smile
  double curve = k == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(cue) / static_cast<double>(k - 1);
  if (s.shifted) curve = -curve;
  if (priv) curve = 0.0;
  visual::FrameSequence seq;
  const std::size_t t_count = s.frames_per_utterance;
  for (std::size_t t = 0; t < t_count; ++t) {
    const double onset = t_count > 1 ? static_cast<double>(t) / static_cast<double>(t_count - 1) : 1.0;
    const double strength = 0.4 + 0.6 * onset;
    visual::Image img(kFrameH, kFrameW, 0.1);
    for (std::size_t r = 0; r < kFaceH; ++r)
      for (std::size_t c = 0; c < kFaceW; ++c) {
        const double dy = (static_cast<double>(r) - kFaceH / 2.0) / (kFaceH / 2.0);
        const double dx = (static_cast<double>(c) - kFaceW / 2.0) / (kFaceW / 2.0);
        if (dx * dx + dy * dy <= 1.0) img.at(st.face_y + r, st.face_x + c) = st.face_level;
      }
    for (std::size_t eye : {kFaceW / 3, 2 * kFaceW / 3})
      for (std::size_t r = 9; r < 12; ++r)
        for (std::size_t c = eye - 2; c < eye + 2; ++c) img.at(st.face_y + r, st.face_x + c) = 0.05;
    const double mid = kFaceW / 2.0, half = kFaceW * 0.3;
    for (auto c = static_cast<std::size_t>(mid - half); c < static_cast<std::size_t>(mid + half); ++c) {
      const double u = (static_cast<double>(c) - mid) / half;
      const double row = 22.0 - curve * 5.0 * u * u;
      for (int w = 0; w < 2; ++w) {
        const auto r = static_cast<std::size_t>(std::lround(row)) + static_cast<std::size_t>(w);
        img.at(st.face_y + r, st.face_x + c) = st.face_level - 0.45 * strength;
      }
    }
    if (priv) {
      const auto [pr, pc] = st.patch[static_cast<std::size_t>(cue)];
      for (std::size_t r = pr; r < pr + 4; ++r)
        for (std::size_t c = pc; c < pc + 4; ++c) img.at(st.face_y + r, st.face_x + c) = 0.95 * strength;
    }
    for (auto& p : img.pixels) p = std::clamp(p + 0.04 * rng.normal(), 0.0, 1.0);
    seq.frames.push_back(std::move(img));
    seq.boxes.push_back({st.face_x, st.face_y, kFaceW, kFaceH});
  }
  return seq;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (n_speakers < 2) throw ValidationError("synthetic corpus needs at least 2 speakers");
  if (utt_per_speaker < 1) throw ValidationError("synthetic corpus needs utterances per speaker");
  for (double v : separability)
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("separability must lie in [0, 1]");
  if (!(speaker_confound >= 0.0 && speaker_confound <= 1.0))
    throw ValidationError("speaker_confound must lie in [0, 1]");
  if (frames_per_utterance < 2) throw ValidationError("need at least 2 frames per utterance");
  if (!(audio_seconds >= 0.2) || !(sample_rate >= 2000.0))
    throw ValidationError("audio must be >= 0.2 s at >= 2 kHz");
  if (embedding_dim == 0) throw ValidationError("embedding_dim must be positive");
}

nlohmann::json SyntheticSpec::to_json() const {
  return {{"name", name},
          {"n_speakers", n_speakers},
          {"utt_per_speaker", utt_per_speaker},
          {"separability", separability},
          {"speaker_confound", speaker_confound},
          {"shifted", shifted},
          {"label_scheme", eval::to_string(scheme)},
          {"frames_per_utterance", frames_per_utterance},
          {"audio_seconds", audio_seconds},
          {"sample_rate", sample_rate},
          {"embedding_dim", embedding_dim},
          {"seed", seed}};
}

SyntheticSpec SyntheticSpec::from_json(const nlohmann::json& j) {
  SyntheticSpec s;
  s.name = j.value("name", s.name);
  s.n_speakers = j.value("n_speakers", s.n_speakers);
  s.utt_per_speaker = j.value("utt_per_speaker", s.utt_per_speaker);
  s.separability = j.value("separability", s.separability);
  s.speaker_confound = j.value("speaker_confound", s.speaker_confound);
  s.shifted = j.value("shifted", s.shifted);
  s.scheme = label_scheme_from_string(j.value("label_scheme", eval::to_string(s.scheme)));
  s.frames_per_utterance = j.value("frames_per_utterance", s.frames_per_utterance);
  s.audio_seconds = j.value("audio_seconds", s.audio_seconds);
  s.sample_rate = j.value("sample_rate", s.sample_rate);
  s.embedding_dim = j.value("embedding_dim", s.embedding_dim);
  if (!j.contains("seed")) throw ValidationError("synthetic spec requires an explicit seed");
  s.seed = j.at("seed").get<std::uint64_t>();
  s.validate();
  return s;
}

Dataset gen_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t k = class_count(spec.scheme);
  const auto names = class_names(spec.scheme);
  Rng rng(spec.seed);
  Dataset ds;
  ds.name = spec.name;
  ds.language = spec.shifted ? "es" : "en";
  ds.scheme = spec.scheme;
  for (std::size_t spk = 0; spk < spec.n_speakers; ++spk) {
    SpeakerStyle st;
    st.pitch_base = rng.uniform(110.0, 220.0);
    st.amp_base = rng.uniform(0.2, 0.45);
    st.face_x = rng.below(kFrameW - kFaceW + 1);
    st.face_y = rng.below(kFrameH - kFaceH + 1);
    st.face_level = rng.uniform(0.45, 0.7);
    for (std::size_t c = 0; c < k; ++c) st.patch.emplace_back(2 + rng.below(10), 6 + rng.below(kFaceW - 14));
    std::vector<int> labels(spec.utt_per_speaker);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % k);
    rng.shuffle(labels);
    for (std::size_t i = 0; i < spec.utt_per_speaker; ++i) {
      Utterance u;
      char id[32];
      std::snprintf(id, sizeof id, "s%02zu_u%03zu", spk, i);
      u.id = id;
      u.speaker = "spk" + std::to_string(spk);
      const int y = labels[i];
      if (spec.scheme == LabelScheme::binary_sentiment) {
        u.label = RawLabel::categorical(names[static_cast<std::size_t>(y)]);
      } else {
        u.label = RawLabel::from_votes({names[static_cast<std::size_t>(y)], names[static_cast<std::size_t>(y)], "other"});
      }
      const int cue_t = draw_cue(rng, y, spec.separability[0], k);
      const int cue_a = draw_cue(rng, y, spec.separability[1], k);
      const int cue_v = draw_cue(rng, y, spec.separability[2], k);
      const bool priv_t = rng.bernoulli(spec.speaker_confound);
      const bool priv_v = rng.bernoulli(spec.speaker_confound);
      u.tokens = make_tokens(spec, rng, spk, cue_t, priv_t);
      u.audio = make_audio(spec, rng, st, cue_a);
      u.frames = make_frames(spec, rng, st, cue_v, priv_v);
      ds.utterances.push_back(std::move(u));
    }
  }
  return ds;
}

text::EmbeddingTable synthetic_embeddings(const SyntheticSpec& spec) {
  SyntheticSpec plain = spec;
  plain.shifted = false;
  const std::size_t k = class_count(spec.scheme), dim = spec.embedding_dim;
  const std::uint64_t seed = mix_seed(spec.seed, 0xe5b);
  text::EmbeddingTable table(dim, seed);
  Rng rng(seed);
  auto random_vec = [&](double scale) {
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.uniform(-scale, scale);
    return v;
  };
  // Filler words behave like low-norm function words. Shared cue words
  // cluster around a per-class direction, as sentiment words do in pretrained
  // embeddings; private cue words are salient but unstructured.
  for (std::size_t i = 0; i < kFillerWords; ++i) table.add(filler(plain, i), random_vec(0.1));
  for (std::size_t c = 0; c < k; ++c) {
    const auto proto = random_vec(0.5);
    for (std::size_t j = 0; j < kSharedCueWords; ++j) {
      auto v = proto;
      for (auto& x : v) x += rng.uniform(-0.15, 0.15);
      table.add(shared_cue(plain, static_cast<int>(c), j), std::move(v));
    }
  }
  for (std::size_t spk = 0; spk < spec.n_speakers; ++spk)
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t j = 0; j < kPrivateCueWords; ++j)
        table.add(private_cue(plain, spk, static_cast<int>(c), j), random_vec(0.5));
  return table;
}

std::filesystem::path write_synthetic(const SyntheticSpec& spec, const std::filesystem::path& dir) {
  Dataset ds = gen_synthetic(spec);
  std::filesystem::create_directories(dir);
  synthetic_embeddings(spec).save(dir / "embeddings.txt");
  ds.embedding_file = "embeddings.txt";
  return save_manifest(ds, dir);
}

}  // namespace msa::eval
