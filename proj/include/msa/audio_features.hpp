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

// openSMILE-lite acoustic features: fixed-rate framing, per-frame low-level
// descriptors (pitch, intensity, zero-crossing rate), intensity-based voicing,
// per-utterance z-standardization over voiced frames, and statistical
// functionals. The default catalog is 3 LLDs x 7 functionals = 21 values.

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace msa::audio {

struct AudioClip {
  std::vector<double> samples;  // mono, in [-1, 1]
  double sample_rate = 0.0;

  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

// 16-bit PCM mono WAV only.
AudioClip read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const AudioClip& clip);

struct FramingConfig {
  double frame_rate = 30.0;  // Hz
  double window = 0.1;       // seconds
};

struct Frames {
  std::vector<std::vector<double>> windows;
  double sample_rate = 0.0;
};

// Window i starts at sample floor(i * sample_rate / frame_rate) and spans
// round(window * sample_rate) samples; only full windows are kept.
Frames frame_clip(const AudioClip& clip, const FramingConfig& cfg = {});

enum class Lld { pitch = 0, intensity = 1, zcr = 2 };
inline constexpr std::size_t kNumLlds = 3;
std::string to_string(Lld lld);

struct LldConfig {
  double voicing_threshold = 0.01;  // RMS
  double min_pitch = 50.0;          // Hz
  double max_pitch = 500.0;         // Hz
};

struct LldFrameSeries {
  double frame_rate = 30.0;
  double window = 0.1;
  std::array<std::vector<double>, kNumLlds> channels;
  std::vector<bool> voiced;
  // Channels whose voiced frames had zero variance during z-standardization.
  std::vector<Lld> degenerate;

  std::size_t frame_count() const { return voiced.size(); }
  std::size_t voiced_count() const;
  const std::vector<double>& channel(Lld lld) const {
    return channels[static_cast<std::size_t>(lld)];
  }
};

double frame_intensity(std::span<const double> window);
double frame_zcr(std::span<const double> window, double sample_rate);
// Autocorrelation pitch in [min_pitch, max_pitch]; 0 if no positive peak.
double frame_pitch(std::span<const double> window, double sample_rate, const LldConfig& cfg);

LldFrameSeries compute_llds(const Frames& frames, const LldConfig& cfg = {},
                            const FramingConfig& framing = {});

// Standardizes every channel over voiced frames (population std). Unvoiced
// frames are left untouched. Requires at least 2 voiced frames; a channel
// with zero variance becomes all zeros on voiced frames and is listed in
// `degenerate`.
LldFrameSeries z_standardize(const LldFrameSeries& series);

enum class Functional {
  amplitude_mean = 0,  // mean |x|
  arithmetic_mean,
  root_quadratic_mean,
  std_dev,
  min,
  max,
  range,
};
inline constexpr std::size_t kNumFunctionals = 7;
std::string to_string(Functional f);

struct FunctionalCatalog {
  std::string version = "lite-v1";
  std::vector<Lld> llds{Lld::pitch, Lld::intensity, Lld::zcr};
  std::vector<Functional> functionals{
      Functional::amplitude_mean, Functional::arithmetic_mean, Functional::root_quadratic_mean,
      Functional::std_dev,        Functional::min,             Functional::max,
      Functional::range};

  std::size_t size() const { return llds.size() * functionals.size(); }
  // "pitch.arithmetic_mean", ... in output order (LLD-major).
  std::vector<std::string> names() const;
};

double apply_functional(Functional f, std::span<const double> values);

// Functionals of each LLD over the voiced frames (all frames when none are
// voiced), LLD-major order.
std::vector<double> apply_functionals(const LldFrameSeries& series,
                                      const FunctionalCatalog& catalog = {});

struct AudioConfig {
  FramingConfig framing;
  LldConfig lld;
  FunctionalCatalog catalog;
  bool standardize = true;

  nlohmann::json to_json() const;
  static AudioConfig from_json(const nlohmann::json& j);
};

struct AudioFeatures {
  std::vector<double> values;
  std::vector<std::string> warnings;
};

AudioFeatures extract_audio_features(const AudioClip& clip, const AudioConfig& cfg = {});

}  // namespace msa::audio
