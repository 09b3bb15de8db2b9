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

#include "msa/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "msa/common.hpp"
#include "msa/text_features.hpp"

namespace msa::eval {

namespace fs = std::filesystem;
using fusion::Modality;
using nlohmann::json;

std::string to_string(LabelScheme s) {
  return s == LabelScheme::binary_sentiment ? "binary-sentiment" : "four-class-emotion";
}

LabelScheme label_scheme_from_string(const std::string& s) {
  if (s == "binary-sentiment") return LabelScheme::binary_sentiment;
  if (s == "four-class-emotion") return LabelScheme::four_class_emotion;
  throw ValidationError("unknown label scheme '" + s + "'");
}

RawLabel RawLabel::categorical(std::string c) {
  RawLabel l;
  l.kind = Kind::categorical;
  l.category = std::move(c);
  return l;
}

RawLabel RawLabel::from_scores(std::vector<double> s) {
  RawLabel l;
  l.kind = Kind::scores;
  l.scores = std::move(s);
  return l;
}

RawLabel RawLabel::from_votes(std::vector<std::string> v) {
  RawLabel l;
  l.kind = Kind::votes;
  l.votes = std::move(v);
  return l;
}

bool Utterance::has_payload(Modality m) const {
  if (has_precomputed(m)) return true;
  switch (m) {
    case Modality::text: return tokens.has_value();
    case Modality::audio: return audio.has_value();
    case Modality::video: return frames.has_value();
  }
  return false;
}

void Dataset::validate() const {
  std::set<std::string> ids;
  for (const auto& u : utterances) {
    if (u.id.empty()) throw DataError("utterance with empty id in dataset '" + name + "'");
    if (!ids.insert(u.id).second) throw DataError("duplicate utterance id '" + u.id + "'");
    if (u.speaker.empty()) throw DataError("utterance '" + u.id + "' has no speaker");
    bool any = false;
    for (auto m : fusion::kAllModalities) any = any || u.has_payload(m);
    if (!any) throw DataError("utterance '" + u.id + "' has no modality payload");
    if (u.label.kind == RawLabel::Kind::scores && u.label.scores.empty())
      throw DataError("utterance '" + u.id + "' has an empty score list");
  }
}

const Utterance& Dataset::find(const std::string& id) const {
  for (const auto& u : utterances)
    if (u.id == id) return u;
  throw DataError("no utterance '" + id + "' in dataset '" + name + "'");
}

namespace {

RawLabel parse_label(const json& j, const std::string& id) {
  if (j.is_string()) return RawLabel::categorical(j.get<std::string>());
  if (!j.is_object()) throw DataError("utterance '" + id + "': label must be an object");
  if (j.contains("category")) return RawLabel::categorical(j.at("category").get<std::string>());
  if (j.contains("scores")) return RawLabel::from_scores(j.at("scores").get<std::vector<double>>());
  if (j.contains("votes")) return RawLabel::from_votes(j.at("votes").get<std::vector<std::string>>());
  throw DataError("utterance '" + id + "': label needs category, scores or votes");
}

json label_json(const RawLabel& l) {
  switch (l.kind) {
    case RawLabel::Kind::categorical: return {{"category", l.category}};
    case RawLabel::Kind::scores: return {{"scores", l.scores}};
    case RawLabel::Kind::votes: return {{"votes", l.votes}};
  }
  return {};
}

std::string safe_name(const std::string& id) {
  std::string s = id;
  for (auto& c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  return s;
}

}  // namespace

Dataset load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  const fs::path base = path.parent_path();
  Dataset ds;
  try {
    if (j.value("schema_version", 0) != 1)
      throw DataError("manifest " + path.string() + ": unsupported schema_version");
    ds.name = j.value("dataset", path.stem().string());
    ds.language = j.value("language", "en");
    ds.scheme = label_scheme_from_string(j.at("label_scheme").get<std::string>());
    if (j.contains("embedding_file")) {
      fs::path e = j.at("embedding_file").get<std::string>();
      ds.embedding_file = e.is_absolute() ? e : base / e;
    }
    for (const auto& ju : j.at("utterances")) {
      Utterance u;
      u.id = ju.at("id").get<std::string>();
      u.speaker = ju.at("speaker").get<std::string>();
      u.label = parse_label(ju.at("label"), u.id);
      if (ju.contains("tokens")) {
        u.tokens = ju.at("tokens").get<std::vector<std::string>>();
      } else if (ju.contains("transcript")) {
        u.tokens = text::tokenize(ju.at("transcript").get<std::string>());
      } else if (ju.contains("transcript_path")) {
        std::ifstream tf(base / ju.at("transcript_path").get<std::string>());
        if (!tf) throw DataError("utterance '" + u.id + "': cannot read transcript");
        std::stringstream ss;
        ss << tf.rdbuf();
        u.tokens = text::tokenize(ss.str());
      }
      if (ju.contains("text_features"))
        u.precomputed[Modality::text] = ju.at("text_features").get<std::vector<double>>();
      if (ju.contains("audio_features"))
        u.precomputed[Modality::audio] = ju.at("audio_features").get<std::vector<double>>();
      else if (ju.contains("audio"))
        u.audio = audio::read_wav(base / ju.at("audio").get<std::string>());
      if (ju.contains("video_features")) {
        u.precomputed[Modality::video] = ju.at("video_features").get<std::vector<double>>();
      } else if (ju.contains("frames")) {
        visual::FrameSequence seq;
        for (const auto& f : ju.at("frames"))
          seq.frames.push_back(visual::read_pgm(base / f.get<std::string>()));
        if (ju.contains("face_boxes")) {
          for (const auto& b : ju.at("face_boxes")) {
            const auto v = b.get<std::vector<std::size_t>>();
            if (v.size() != 4) throw DataError("utterance '" + u.id + "': face box needs 4 values");
            seq.boxes.push_back({v[0], v[1], v[2], v[3]});
          }
          if (seq.boxes.size() != seq.frames.size())
            throw DataError("utterance '" + u.id + "': face box count differs from frame count");
        }
        u.frames = std::move(seq);
      }
      ds.utterances.push_back(std::move(u));
    }
  } catch (const json::exception& e) {
    throw DataError("manifest " + path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw DataError("manifest " + path.string() + ": " + e.what());
  }
  ds.validate();
  return ds;
}

fs::path save_manifest(const Dataset& ds, const fs::path& dir) {
  ds.validate();
  fs::create_directories(dir);
  json ju = json::array();
  for (const auto& u : ds.utterances) {
    json e{{"id", u.id}, {"speaker", u.speaker}, {"label", label_json(u.label)}};
    const std::string stem = safe_name(u.id);
    if (u.tokens) e["tokens"] = *u.tokens;
    if (auto it = u.precomputed.find(Modality::text); it != u.precomputed.end())
      e["text_features"] = it->second;
    if (auto it = u.precomputed.find(Modality::audio); it != u.precomputed.end()) {
      e["audio_features"] = it->second;
    } else if (u.audio) {
      fs::create_directories(dir / "audio");
      const std::string rel = "audio/" + stem + ".wav";
      audio::write_wav(dir / rel, *u.audio);
      e["audio"] = rel;
    }
    if (auto it = u.precomputed.find(Modality::video); it != u.precomputed.end()) {
      e["video_features"] = it->second;
    } else if (u.frames) {
      fs::create_directories(dir / "frames");
      json frames = json::array();
      for (std::size_t f = 0; f < u.frames->frames.size(); ++f) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "_%03zu.pgm", f);
        const std::string rel = "frames/" + stem + buf;
        visual::write_pgm(dir / rel, u.frames->frames[f]);
        frames.push_back(rel);
      }
      e["frames"] = frames;
      if (!u.frames->boxes.empty()) {
        json boxes = json::array();
        for (const auto& b : u.frames->boxes) boxes.push_back({b.x, b.y, b.w, b.h});
        e["face_boxes"] = boxes;
      }
    }
    ju.push_back(std::move(e));
  }
  json j{{"schema_version", 1},
         {"dataset", ds.name},
         {"language", ds.language},
         {"label_scheme", to_string(ds.scheme)},
         {"utterances", ju}};
  if (ds.embedding_file) {
    const fs::path e = *ds.embedding_file;
    j["embedding_file"] = e.is_absolute() ? fs::relative(e, dir).string() : e.string();
  }
  const fs::path out = dir / "manifest.json";
  std::ofstream os(out);
  if (!os) throw ValidationError("cannot write manifest " + out.string());
  os << j.dump(1) << '\n';
  return out;
}

}  // namespace msa::eval
