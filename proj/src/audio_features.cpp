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

#include "msa/audio_features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "msa/common.hpp"

namespace msa::audio {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t read_u16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}

}  // namespace

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open WAV file " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto fail = [&](const std::string& why) { return DataError(path.string() + ": " + why); };
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw fail("not a RIFF/WAVE file");
  std::size_t pos = 12;
  bool have_fmt = false;
  std::uint32_t rate = 0;
  AudioClip clip;
  while (pos + 8 <= buf.size()) {
    const std::uint32_t len = read_u32(&buf[pos + 4]);
    const std::size_t body = pos + 8;
    if (body + len > buf.size()) throw fail("truncated chunk");
    if (std::memcmp(&buf[pos], "fmt ", 4) == 0) {
      if (len < 16) throw fail("short fmt chunk");
      const auto format = read_u16(&buf[body]);
      const auto channels = read_u16(&buf[body + 2]);
      rate = read_u32(&buf[body + 4]);
      const auto bits = read_u16(&buf[body + 14]);
      if (format != 1 || channels != 1 || bits != 16)
        throw fail("only 16-bit PCM mono is supported (format " + std::to_string(format) +
                   ", channels " + std::to_string(channels) + ", bits " + std::to_string(bits) + ")");
      if (rate == 0) throw fail("zero sample rate");
      have_fmt = true;
    } else if (std::memcmp(&buf[pos], "data", 4) == 0) {
      if (!have_fmt) throw fail("data chunk before fmt chunk");
      clip.samples.resize(len / 2);
      for (std::size_t i = 0; i < clip.samples.size(); ++i) {
        const auto raw = static_cast<std::int16_t>(read_u16(&buf[body + 2 * i]));
        clip.samples[i] = raw / 32768.0;
      }
      clip.sample_rate = rate;
      return clip;
    }
    pos = body + len + (len & 1);
  }
  throw fail("no data chunk");
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip) {
  if (!(clip.sample_rate > 0)) throw ValidationError("WAV sample rate must be positive");
  const auto rate = static_cast<std::uint32_t>(std::lround(clip.sample_rate));
  const auto data_len = static_cast<std::uint32_t>(clip.samples.size() * 2);
  std::string s = "RIFF";
  put_u32(s, 36 + data_len);
  s += "WAVEfmt ";
  put_u32(s, 16);
  put_u16(s, 1);
  put_u16(s, 1);
  put_u32(s, rate);
  put_u32(s, rate * 2);
  put_u16(s, 2);
  put_u16(s, 16);
  s += "data";
  put_u32(s, data_len);
  for (double x : clip.samples) {
    const long q = std::clamp(std::lround(x * 32768.0), -32768L, 32767L);
    put_u16(s, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write WAV file " + path.string());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

Frames frame_clip(const AudioClip& clip, const FramingConfig& cfg) {
  if (!(clip.sample_rate > 0)) throw DataError("audio clip has non-positive sample rate");
  if (!(cfg.frame_rate > 0) || !(cfg.window > 0))
    throw ValidationError("frame rate and window must be positive");
  const auto win = static_cast<std::size_t>(std::llround(cfg.window * clip.sample_rate));
  if (win == 0 || clip.samples.size() < win)
    throw DataError("audio clip of " + std::to_string(clip.samples.size()) +
                    " samples is shorter than one " + std::to_string(win) + "-sample window");
  Frames f;
  f.sample_rate = clip.sample_rate;
  const double hop = clip.sample_rate / cfg.frame_rate;
  for (std::size_t i = 0;; ++i) {
    const auto start = static_cast<std::size_t>(std::floor(static_cast<double>(i) * hop + 1e-9));
    if (start + win > clip.samples.size()) break;
    f.windows.emplace_back(clip.samples.begin() + static_cast<std::ptrdiff_t>(start),
                           clip.samples.begin() + static_cast<std::ptrdiff_t>(start + win));
  }
  return f;
}

std::string to_string(Lld lld) {
  switch (lld) {
    case Lld::pitch: return "pitch";
    case Lld::intensity: return "intensity";
    case Lld::zcr: return "zcr";
  }
  return "?";
}

std::size_t LldFrameSeries::voiced_count() const {
  return static_cast<std::size_t>(std::count(voiced.begin(), voiced.end(), true));
}

double frame_intensity(std::span<const double> w) {
  if (w.empty()) return 0.0;
  double s = 0.0;
  for (double x : w) s += x * x;
  return std::sqrt(s / static_cast<double>(w.size()));
}

double frame_zcr(std::span<const double> w, double sample_rate) {
  if (w.size() < 2) return 0.0;
  std::size_t crossings = 0;
  for (std::size_t i = 1; i < w.size(); ++i)
    if ((w[i - 1] >= 0.0) != (w[i] >= 0.0)) ++crossings;
  return static_cast<double>(crossings) / (static_cast<double>(w.size()) / sample_rate);
}

double frame_pitch(std::span<const double> w, double sample_rate, const LldConfig& cfg) {
  const auto lo = static_cast<std::size_t>(std::ceil(sample_rate / cfg.max_pitch));
  auto hi = static_cast<std::size_t>(std::floor(sample_rate / cfg.min_pitch));
  if (w.size() < 2) return 0.0;
  hi = std::min(hi, w.size() - 1);
  if (lo < 1 || lo > hi) return 0.0;
  // Unbiased autocorrelation over lags lo-1 .. hi+1 so every lag in range
  // has neighbours for the local-maximum test.
  const std::size_t first = lo - 1, last = std::min(hi + 1, w.size() - 1);
  std::vector<double> r(last - first + 1);
  for (std::size_t lag = first; lag <= last; ++lag) {
    double s = 0.0;
    for (std::size_t n = 0; n + lag < w.size(); ++n) s += w[n] * w[n + lag];
    r[lag - first] = s / static_cast<double>(w.size() - lag);
  }
  double best = 0.0;
  std::size_t best_lag = 0;
  for (std::size_t lag = lo; lag <= hi; ++lag)
    if (r[lag - first] > best) {
      best = r[lag - first];
      best_lag = lag;
    }
  if (best_lag == 0) return 0.0;
  // Prefer the shortest lag that is a local peak close to the global one;
  // the unbiased estimate scores every period multiple about equally.
  for (std::size_t lag = lo; lag < best_lag; ++lag) {
    const double v = r[lag - first];
    if (v >= 0.9 * best && v >= r[lag - first - 1] && v >= r[lag - first + 1]) {
      best_lag = lag;
      break;
    }
  }
  return sample_rate / static_cast<double>(best_lag);
}

LldFrameSeries compute_llds(const Frames& frames, const LldConfig& cfg,
                            const FramingConfig& framing) {
  if (frames.windows.empty()) throw DataError("no frames to analyse");
  LldFrameSeries s;
  s.frame_rate = framing.frame_rate;
  s.window = framing.window;
  for (const auto& w : frames.windows) {
    const double intensity = frame_intensity(w);
    const bool voiced = intensity >= cfg.voicing_threshold;
    s.channels[static_cast<std::size_t>(Lld::intensity)].push_back(intensity);
    s.channels[static_cast<std::size_t>(Lld::zcr)].push_back(frame_zcr(w, frames.sample_rate));
    s.channels[static_cast<std::size_t>(Lld::pitch)].push_back(
        voiced ? frame_pitch(w, frames.sample_rate, cfg) : 0.0);
    s.voiced.push_back(voiced);
  }
  return s;
}

LldFrameSeries z_standardize(const LldFrameSeries& series) {
  const std::size_t nv = series.voiced_count();
  if (nv < 2)
    throw DataError("z-standardization needs at least 2 voiced frames, got " + std::to_string(nv));
  LldFrameSeries out = series;
  out.degenerate.clear();
  for (std::size_t c = 0; c < kNumLlds; ++c) {
    auto& ch = out.channels[c];
    double mean = 0.0;
    for (std::size_t i = 0; i < ch.size(); ++i)
      if (series.voiced[i]) mean += ch[i];
    mean /= static_cast<double>(nv);
    double var = 0.0;
    for (std::size_t i = 0; i < ch.size(); ++i)
      if (series.voiced[i]) var += (ch[i] - mean) * (ch[i] - mean);
    const double sd = std::sqrt(var / static_cast<double>(nv));
    const bool flat = !(sd > 1e-12 * std::max(1.0, std::abs(mean)));
    if (flat) out.degenerate.push_back(static_cast<Lld>(c));
    for (std::size_t i = 0; i < ch.size(); ++i)
      if (series.voiced[i]) ch[i] = flat ? 0.0 : (ch[i] - mean) / sd;
  }
  return out;
}

std::string to_string(Functional f) {
  switch (f) {
    case Functional::amplitude_mean: return "amplitude_mean";
    case Functional::arithmetic_mean: return "arithmetic_mean";
    case Functional::root_quadratic_mean: return "root_quadratic_mean";
    case Functional::std_dev: return "std_dev";
    case Functional::min: return "min";
    case Functional::max: return "max";
    case Functional::range: return "range";
  }
  return "?";
}

std::vector<std::string> FunctionalCatalog::names() const {
  std::vector<std::string> out;
  for (auto l : llds)
    for (auto f : functionals) out.push_back(to_string(l) + "." + to_string(f));
  return out;
}

double apply_functional(Functional f, std::span<const double> v) {
  if (v.empty()) throw DataError("functional over an empty series");
  const double n = static_cast<double>(v.size());
  switch (f) {
    case Functional::amplitude_mean: {
      double s = 0.0;
      for (double x : v) s += std::abs(x);
      return s / n;
    }
    case Functional::arithmetic_mean: {
      double s = 0.0;
      for (double x : v) s += x;
      return s / n;
    }
    case Functional::root_quadratic_mean: {
      double s = 0.0;
      for (double x : v) s += x * x;
      return std::sqrt(s / n);
    }
    case Functional::std_dev: {
      const double m = apply_functional(Functional::arithmetic_mean, v);
      double s = 0.0;
      for (double x : v) s += (x - m) * (x - m);
      return std::sqrt(s / n);
    }
    case Functional::min: return *std::min_element(v.begin(), v.end());
    case Functional::max: return *std::max_element(v.begin(), v.end());
    case Functional::range: {
      auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      return *hi - *lo;
    }
  }
  throw InvariantError("unknown functional");
}

std::vector<double> apply_functionals(const LldFrameSeries& series,
                                      const FunctionalCatalog& catalog) {
  if (series.frame_count() == 0) throw DataError("functionals over an empty series");
  const bool any_voiced = series.voiced_count() > 0;
  std::vector<double> out;
  out.reserve(catalog.size());
  for (auto lld : catalog.llds) {
    const auto& ch = series.channel(lld);
    std::vector<double> vals;
    for (std::size_t i = 0; i < ch.size(); ++i)
      if (!any_voiced || series.voiced[i]) vals.push_back(ch[i]);
    for (auto f : catalog.functionals) out.push_back(apply_functional(f, vals));
  }
  return out;
}

nlohmann::json AudioConfig::to_json() const {
  std::vector<std::string> l, f;
  for (auto x : catalog.llds) l.push_back(to_string(x));
  for (auto x : catalog.functionals) f.push_back(to_string(x));
  return {{"frame_rate", framing.frame_rate},
          {"window", framing.window},
          {"voicing_threshold", lld.voicing_threshold},
          {"min_pitch", lld.min_pitch},
          {"max_pitch", lld.max_pitch},
          {"standardize", standardize},
          {"catalog", {{"version", catalog.version}, {"llds", l}, {"functionals", f}}}};
}

AudioConfig AudioConfig::from_json(const nlohmann::json& j) {
  AudioConfig c;
  c.framing.frame_rate = j.value("frame_rate", c.framing.frame_rate);
  c.framing.window = j.value("window", c.framing.window);
  c.lld.voicing_threshold = j.value("voicing_threshold", c.lld.voicing_threshold);
  c.lld.min_pitch = j.value("min_pitch", c.lld.min_pitch);
  c.lld.max_pitch = j.value("max_pitch", c.lld.max_pitch);
  c.standardize = j.value("standardize", c.standardize);
  if (j.contains("catalog")) {
    const auto& jc = j.at("catalog");
    c.catalog.version = jc.value("version", c.catalog.version);
    if (jc.contains("llds")) {
      c.catalog.llds.clear();
      for (const auto& s : jc.at("llds")) {
        const auto name = s.get<std::string>();
        bool found = false;
        for (auto l : {Lld::pitch, Lld::intensity, Lld::zcr})
          if (to_string(l) == name) {
            c.catalog.llds.push_back(l);
            found = true;
          }
        if (!found) throw ValidationError("unknown LLD '" + name + "'");
      }
    }
    if (jc.contains("functionals")) {
      c.catalog.functionals.clear();
      for (const auto& s : jc.at("functionals")) {
        const auto name = s.get<std::string>();
        bool found = false;
        for (std::size_t k = 0; k < kNumFunctionals; ++k)
          if (to_string(static_cast<Functional>(k)) == name) {
            c.catalog.functionals.push_back(static_cast<Functional>(k));
            found = true;
          }
        if (!found) throw ValidationError("unknown functional '" + name + "'");
      }
    }
  }
  if (c.catalog.size() == 0) throw ValidationError("audio catalog is empty");
  return c;
}

AudioFeatures extract_audio_features(const AudioClip& clip, const AudioConfig& cfg) {
  AudioFeatures out;
  LldFrameSeries series = compute_llds(frame_clip(clip, cfg.framing), cfg.lld, cfg.framing);
  if (cfg.standardize) {
    if (series.voiced_count() >= 2) {
      series = z_standardize(series);
      for (auto l : series.degenerate)
        out.warnings.push_back("zero-variance " + to_string(l) + " channel set to zero");
    } else {
      out.warnings.push_back("fewer than 2 voiced frames; standardization skipped");
    }
  }
  out.values = apply_functionals(series, cfg.catalog);
  return out;
}

}  // namespace msa::audio
