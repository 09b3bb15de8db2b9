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

#include "msa/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>

#include "CLI11.hpp"
#include "msa/charts.hpp"
#include "msa/common.hpp"
#include "msa/experiment.hpp"
#include "msa/labels.hpp"
#include "msa/synthetic.hpp"
#include "msa/tsne.hpp"

namespace msa::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using fusion::FeatureRecord;
using fusion::Modality;
using fusion::ModalitySet;

namespace {

const std::vector<std::vector<std::string>> kPathKeys = {
    {"output_dir"}, {"manifest"}, {"test_manifest"}, {"embedding_file"}, {"viz", "input_dir"}};

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) rows.push_back(parse_csv_line(line));
  if (rows.empty()) throw DataError(path.string() + " is empty");
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name, const fs::path& file) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError(file.string() + " has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

double parse_double(const std::string& s, const fs::path& file) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(file.string() + ": '" + s + "' is not a number");
  }
}

void resolve_paths(json& cfg) {
  for (const auto& keys : kPathKeys) {
    json* cur = &cfg;
    bool found = true;
    for (const auto& k : keys) {
      if (!cur->is_object() || !cur->contains(k)) {
        found = false;
        break;
      }
      cur = &(*cur)[k];
    }
    if (!found) continue;
    if (!cur->is_string()) throw ValidationError("config path field must be a string");
    *cur = fs::absolute(fs::path(cur->get<std::string>())).lexically_normal().string();
  }
}

fs::path required_path(const json& cfg, const std::string& key, bool must_exist) {
  if (!cfg.contains(key)) throw ValidationError("config is missing '" + key + "'");
  fs::path p = cfg.at(key).get<std::string>();
  if (must_exist && !fs::exists(p)) throw ValidationError(key + " not found: " + p.string());
  return p;
}

std::uint64_t seed_of(const json& cfg) { return cfg.at("seed").get<std::uint64_t>(); }

eval::ExperimentConfig experiment_config(const json& cfg) {
  json e = cfg.value("experiment", json::object());
  if (!e.contains("seed")) e["seed"] = cfg.at("seed");
  return eval::ExperimentConfig::from_json(e);
}

std::optional<text::EmbeddingTable> load_table(const json& cfg, const eval::Dataset& ds) {
  std::optional<fs::path> path;
  if (cfg.contains("embedding_file")) {
    path = cfg.at("embedding_file").get<std::string>();
  } else if (ds.embedding_file) {
    path = *ds.embedding_file;
  }
  if (!path) return std::nullopt;
  if (!fs::exists(*path)) throw ValidationError("embedding file not found: " + path->string());
  return text::EmbeddingTable::load(*path, mix_seed(seed_of(cfg), 0x7e47));
}

std::string group_of(const ModalitySet& s) {
  return s.size() == 1 ? "unimodal" : s.size() == 2 ? "bimodal" : "multimodal";
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::string content;
  for (const auto& l : lines) content += l + "\n";
  viz::write_text_file(path, content);
}

void write_classes(const fs::path& dir, const std::vector<std::string>& names) {
  std::vector<std::string> lines{"index,name"};
  for (std::size_t i = 0; i < names.size(); ++i) lines.push_back(std::to_string(i) + "," + csv_field(names[i]));
  write_lines(dir / "classes.csv", lines);
}

void write_features(const fs::path& path, const std::vector<FeatureRecord>& records) {
  std::size_t width = 0;
  for (const auto& r : records)
    for (const auto& [m, v] : r.features) width = std::max(width, v.size());
  std::string header = "utterance_id,speaker_id,label,modality";
  for (std::size_t i = 0; i < width; ++i) header += ",v" + std::to_string(i);
  std::vector<std::string> lines{header};
  for (const auto& r : records)
    for (const auto& [m, v] : r.features) {
      std::string line = csv_field(r.utterance_id) + "," + csv_field(r.speaker_id) + "," +
                         std::to_string(r.label) + "," + std::string(1, fusion::modality_letter(m));
      for (double x : v) line += "," + exact(x);
      lines.push_back(line);
    }
  write_lines(path, lines);
}

void write_warnings(const fs::path& dir, const std::vector<std::string>& warnings) {
  if (!warnings.empty()) write_lines(dir / "warnings.txt", warnings);
}

void write_experiment(const fs::path& dir, const eval::ExperimentResult& res) {
  std::size_t k = 0;
  for (const auto& s : res.subsets) k = std::max(k, s.fold_macro_f.size());
  std::string header = "subset,group,source,dataset,macro_f,rmse";
  for (std::size_t f = 0; f < k; ++f) header += ",fold_" + std::to_string(f + 1);
  std::vector<std::string> report{header};
  std::vector<std::string> tp{"subset,source,class,tp_rate,support"};
  for (const auto& s : res.subsets) {
    std::string line = csv_field(s.subset.label()) + "," + group_of(s.subset) + "," + csv_field(res.source) +
                       "," + csv_field(res.dataset) + "," + fixed(s.mean_macro_f) + "," + fixed(s.mean_rmse);
    for (double f : s.fold_macro_f) line += "," + fixed(f);
    report.push_back(line);
    for (std::size_t c = 0; c < res.n_classes; ++c)
      tp.push_back(csv_field(s.subset.label()) + "," + csv_field(res.source) + "," +
                   csv_field(res.class_names[c]) + "," + fixed(s.pooled.tp_rate[c]) + "," +
                   std::to_string(s.pooled.support[c]));
  }
  write_lines(dir / "report.csv", report);
  write_lines(dir / "tp_rate.csv", tp);

  std::string ph = "fold,subset,utterance_id,speaker_id,truth,predicted";
  for (std::size_t c = 0; c < res.n_classes; ++c) ph += ",score_" + std::to_string(c);
  std::vector<std::string> preds{ph};
  for (const auto& p : res.predictions) {
    std::string line = std::to_string(p.fold) + "," + p.subset + "," + csv_field(p.id) + "," +
                       csv_field(p.speaker) + "," + std::to_string(p.truth) + "," + std::to_string(p.predicted);
    for (double s : p.scores) line += "," + exact(s);
    preds.push_back(line);
  }
  write_lines(dir / "predictions.csv", preds);
  write_features(dir / "features.csv", res.test_features);
  write_classes(dir, res.class_names);
  res.audit.write_jsonl(dir / "audit.jsonl");
  write_warnings(dir, res.warnings);
}

void write_json(const fs::path& path, const json& j) { viz::write_text_file(path, j.dump(1) + "\n"); }

void cmd_synth(const json& cfg, const fs::path& out) {
  json s = cfg.value("synthetic", json::object());
  if (!s.contains("seed")) s["seed"] = cfg.at("seed");
  eval::write_synthetic(eval::SyntheticSpec::from_json(s), out);
}

void cmd_extract(const json& cfg, const fs::path& out, bool train) {
  const auto ecfg = experiment_config(cfg);
  const auto ds = eval::load_manifest(required_path(cfg, "manifest", true));
  const auto table = load_table(cfg, ds);
  auto ex = eval::extract_features(ds, ecfg, table ? &*table : nullptr);
  write_features(out / "features.csv", ex.records);
  write_classes(out, eval::class_names(ds.scheme));
  if (ex.text_model) write_json(out / "text_model.json", ex.text_model->to_json());
  if (ex.visual_model) write_json(out / "visual_model.json", ex.visual_model->to_json());
  write_warnings(out, ex.warnings);
  if (!train) return;
  fs::create_directories(out / "models");
  std::vector<std::string> summary{"subset,train_macro_f"};
  for (const auto& subset : ecfg.subsets) {
    fusion::SvmConfig svm = ecfg.svm;
    svm.seed = mix_seed(ecfg.seed, 4);
    const auto clf = eval::train_classifier(ex.records, subset, ex.n_classes, svm, ecfg.scale_features);
    write_json(out / "models" / ("classifier_" + subset.key() + ".json"), clf.to_json());
    std::vector<int> truth, pred;
    for (const auto& r : ex.records) {
      truth.push_back(r.label);
      pred.push_back(clf.predict(r, subset).label);
    }
    summary.push_back(csv_field(subset.label()) + "," +
                      fixed(eval::compute_metrics(truth, pred, {}, ex.n_classes).macro_f));
  }
  write_lines(out / "train_summary.csv", summary);
}

void cmd_eval(const json& cfg, const fs::path& out) {
  const auto ecfg = experiment_config(cfg);
  const auto ds = eval::load_manifest(required_path(cfg, "manifest", true));
  const auto table = load_table(cfg, ds);
  write_experiment(out, eval::run_experiment(ds, ecfg, table ? &*table : nullptr));
}

void cmd_cross(const json& cfg, const fs::path& out) {
  const auto ecfg = experiment_config(cfg);
  const auto a = eval::load_manifest(required_path(cfg, "manifest", true));
  const auto b = eval::load_manifest(required_path(cfg, "test_manifest", true));
  const auto table = load_table(cfg, a);
  write_experiment(out, eval::cross_dataset_run(a, b, ecfg, table ? &*table : nullptr));
}

void cmd_viz(const json& cfg, const fs::path& out) {
  const json v = cfg.value("viz", json::object());
  if (!v.contains("input_dir")) throw ValidationError("config is missing 'viz.input_dir'");
  const fs::path in = v.at("input_dir").get<std::string>();
  if (!fs::is_directory(in)) throw ValidationError("viz.input_dir not found: " + in.string());

  const auto report_path = in / "report.csv";
  const auto report = read_csv(report_path);
  const auto& rh = report[0];
  const auto c_subset = column(rh, "subset", report_path), c_source = column(rh, "source", report_path),
             c_f = column(rh, "macro_f", report_path);
  std::vector<viz::BarGroup> groups;
  for (std::size_t i = 1; i < report.size(); ++i) {
    const auto& row = report[i];
    auto g = std::find_if(groups.begin(), groups.end(), [&](const auto& x) { return x.name == row[c_subset]; });
    if (g == groups.end()) {
      groups.push_back({row[c_subset], {}});
      g = groups.end() - 1;
    }
    g->bars.push_back({row[c_source], parse_double(row[c_f], report_path)});
  }
  viz::write_text_file(out / "macro_f.svg", viz::bars_svg(groups, "Macro F-score by modality subset", "macro F"));

  const auto tp_path = in / "tp_rate.csv";
  const auto tp = read_csv(tp_path);
  const auto t_subset = column(tp[0], "subset", tp_path), t_source = column(tp[0], "source", tp_path),
             t_class = column(tp[0], "class", tp_path), t_rate = column(tp[0], "tp_rate", tp_path);
  std::set<std::string> sources;
  for (std::size_t i = 1; i < tp.size(); ++i) sources.insert(tp[i][t_source]);
  std::vector<viz::BarGroup> tp_groups;
  for (std::size_t i = 1; i < tp.size(); ++i) {
    const auto& row = tp[i];
    const std::string name = sources.size() > 1 ? row[t_subset] + " (" + row[t_source] + ")" : row[t_subset];
    auto g = std::find_if(tp_groups.begin(), tp_groups.end(), [&](const auto& x) { return x.name == name; });
    if (g == tp_groups.end()) {
      tp_groups.push_back({name, {}});
      g = tp_groups.end() - 1;
    }
    g->bars.push_back({row[t_class], parse_double(row[t_rate], tp_path)});
  }
  viz::write_text_file(out / "tp_rate.svg", viz::bars_svg(tp_groups, "TP-rate by class", "TP-rate"));

  const auto classes_path = in / "classes.csv";
  const auto classes = read_csv(classes_path);
  std::vector<std::string> class_names;
  for (std::size_t i = 1; i < classes.size(); ++i) class_names.push_back(classes[i].at(1));

  const auto feat_path = in / "features.csv";
  const auto feats = read_csv(feat_path);
  const auto f_id = column(feats[0], "utterance_id", feat_path), f_label = column(feats[0], "label", feat_path),
             f_mod = column(feats[0], "modality", feat_path);
  std::vector<std::string> order;
  std::map<std::string, int> labels;
  std::map<std::string, std::map<Modality, std::vector<double>>> vectors;
  for (std::size_t i = 1; i < feats.size(); ++i) {
    const auto& row = feats[i];
    const auto& id = row[f_id];
    if (!vectors.count(id)) {
      order.push_back(id);
      labels[id] = static_cast<int>(parse_double(row[f_label], feat_path));
    }
    if (row[f_mod].size() != 1) throw DataError(feat_path.string() + ": bad modality '" + row[f_mod] + "'");
    std::vector<double> values;
    for (std::size_t c = f_mod + 1; c < row.size(); ++c) values.push_back(parse_double(row[c], feat_path));
    vectors[id][fusion::modality_from_letter(row[f_mod][0])] = std::move(values);
  }

  viz::TsneConfig tc;
  tc.perplexity = v.value("perplexity", tc.perplexity);
  tc.iterations = v.value("iterations", tc.iterations);
  tc.seed = seed_of(cfg);
  const std::size_t max_points = v.value("max_points", viz::kMaxTsnePoints);
  if (order.size() > max_points) {
    Rng rng(mix_seed(tc.seed, 0x5a));
    rng.shuffle(order);
    order.resize(max_points);
    std::sort(order.begin(), order.end());
  }
  std::vector<ModalitySet> sets;
  for (const char* key : {"T", "A", "V", "TAV"}) sets.push_back(ModalitySet::parse(key));
  for (const auto& set : sets) {
    bool complete = !order.empty();
    for (const auto& id : order)
      for (auto m : set.members()) complete = complete && vectors[id].count(m);
    if (!complete) continue;
    std::vector<std::vector<double>> xs;
    for (const auto& id : order) {
      std::vector<double> x;
      for (auto m : set.members()) x.insert(x.end(), vectors[id][m].begin(), vectors[id][m].end());
      xs.push_back(std::move(x));
    }
    const auto scaler = eval::FeatureScaler::fit(xs);
    for (auto& x : xs) x = scaler.apply(x);
    const auto proj = viz::tsne_2d(xs, tc);
    std::vector<viz::ScatterPoint> pts;
    std::vector<std::string> lines{"utterance_id,label,x,y"};
    for (std::size_t i = 0; i < order.size(); ++i) {
      pts.push_back({proj.points[i][0], proj.points[i][1], labels[order[i]]});
      lines.push_back(csv_field(order[i]) + "," + std::to_string(labels[order[i]]) + "," +
                      exact(proj.points[i][0]) + "," + exact(proj.points[i][1]));
    }
    viz::write_text_file(out / ("tsne_" + set.key() + ".svg"),
                         viz::scatter_svg(pts, class_names, "t-SNE of " + set.label() + " features"));
    write_lines(out / ("tsne_" + set.key() + ".csv"), lines);
  }
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

int fail(std::ostream& err, int code, const char* kind, const std::string& message) {
  err << "msa-error code=" << code << " kind=" << kind << " message=" << one_line(message) << "\n";
  return code;
}

json load_json_file(const fs::path& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw ValidationError(what + " not found: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(what + " " + path.string() + " is not valid JSON: " + e.what());
  }
}

void execute(const std::string& command, json cfg, std::ostream& out) {
  if (!cfg.is_object()) throw ValidationError("config must be a JSON object");
  if (!cfg.contains("seed") || !cfg.at("seed").is_number_unsigned())
    throw ValidationError("config requires an explicit non-negative integer 'seed'");
  resolve_paths(cfg);
  const fs::path dir = required_path(cfg, "output_dir", false);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ValidationError("cannot create output_dir " + dir.string());
  if (command == "synth") {
    cmd_synth(cfg, dir);
  } else if (command == "extract") {
    cmd_extract(cfg, dir, false);
  } else if (command == "train") {
    cmd_extract(cfg, dir, true);
  } else if (command == "eval") {
    cmd_eval(cfg, dir);
  } else if (command == "cross") {
    cmd_cross(cfg, dir);
  } else {
    cmd_viz(cfg, dir);
  }
  write_json(dir / "run_record.json", {{"format", "msa-run-record"}, {"version", 1}, {"command", command}, {"config", cfg}});
  out << "ok " << command << " " << dir.string() << "\n";
}

}  // namespace

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ValidationError("override '" + assignment + "' is not key=value");
  const std::string path = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* cur = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ValidationError("override path '" + path + "' has an empty segment");
    if (!cur->is_object()) {
      if (!cur->is_null()) throw ValidationError("override path '" + path + "' crosses a non-object");
      *cur = json::object();
    }
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      return;
    }
    cur = &(*cur)[key];
    start = dot + 1;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multimodal sentiment analysis toolkit", "msa"};
  app.require_subcommand(1);
  struct Options {
    std::string config;
    std::string record;
    std::vector<std::string> sets;
  };
  std::map<std::string, Options> opts;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"synth", "Generate a synthetic multimodal corpus"},
      {"extract", "Train feature extractors on a corpus and write features"},
      {"train", "Extract features and train one classifier per modality subset"},
      {"eval", "Cross-validated evaluation over modality subsets"},
      {"cross", "Train on one corpus, evaluate on another"},
      {"viz", "Charts and t-SNE projections from an eval or cross output directory"}};
  for (const auto& [name, desc] : commands) {
    auto* sub = app.add_subcommand(name, desc);
    auto& o = opts[name];
    sub->add_option("-c,--config", o.config, "JSON config file");
    sub->add_option("--from-record", o.record, "Repeat a run from its run_record.json");
    sub->add_option("-s,--set", o.sets, "Override a config field: dotted.path=value");
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    return fail(err, 1, "validation", e.what());
  }
  std::string command;
  for (const auto& [name, desc] : commands)
    if (app.got_subcommand(name)) command = name;
  const auto& o = opts[command];
  try {
    json cfg = json::object();
    if (!o.record.empty() && !o.config.empty())
      throw ValidationError("--config and --from-record are mutually exclusive");
    if (!o.record.empty()) {
      json rec = load_json_file(o.record, "run record");
      if (rec.value("format", "") != "msa-run-record") throw ValidationError(o.record + " is not a run record");
      if (rec.value("command", "") != command)
        throw ValidationError("run record is for '" + rec.value("command", "") + "', not '" + command + "'");
      cfg = rec.at("config");
    } else if (!o.config.empty()) {
      cfg = load_json_file(o.config, "config");
    }
    for (const auto& s : o.sets) apply_override(cfg, s);
    execute(command, std::move(cfg), out);
    return 0;
  } catch (const InvariantError& e) {
    return fail(err, 3, "invariant", e.what());
  } catch (const DataError& e) {
    return fail(err, 2, "data", e.what());
  } catch (const ValidationError& e) {
    return fail(err, 1, "validation", e.what());
  } catch (const json::exception& e) {
    return fail(err, 1, "validation", std::string("config: ") + e.what());
  } catch (const std::exception& e) {
    return fail(err, 3, "invariant", e.what());
  }
}

}  // namespace msa::cli
