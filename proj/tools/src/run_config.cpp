// Copyright 2026 The probekit Authors.
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

#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "probekit/checksum.hpp"
#include "probekit/error.hpp"

namespace probekit::cli {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, "config: " + message);
}

void check_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) fail(std::string(where) + " must be an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const auto a : allowed) ok = ok || key == a;
    if (!ok) fail("unknown key '" + key + "' in " + std::string(where));
  }
}

template <typename T>
void read(const json& j, std::string_view key, T& out) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    fail("bad value for '" + std::string(key) + "'");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void read_path(const json& j, std::string_view key, const std::filesystem::path& base,
               std::filesystem::path& out) {
  std::string s;
  read(j, key, s);
  if (!s.empty()) out = resolve(base, s);
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

RunConfig RunConfig::from_json(std::string_view text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("config: ") + e.what());
  }
  check_keys(j, "config",
             {"language", "seed", "deterministic", "output", "paths", "vocab", "embed", "rank",
              "eval", "energy", "report"});
  RunConfig c;
  read(j, "language", c.language);
  read(j, "seed", c.embed.seed);
  read(j, "deterministic", c.deterministic);
  std::string output;
  read(j, "output", output);
  if (!output.empty()) c.output = resolve(base_dir, output);

  if (const auto it = j.find("paths"); it != j.end()) {
    const json& p = *it;
    check_keys(p, "paths",
               {"corpus", "triples", "templates", "vocab", "table", "predictions", "manifest",
                "scores", "stub", "subsets"});
    read_path(p, "corpus", base_dir, c.paths.corpus);
    read_path(p, "triples", base_dir, c.paths.triples);
    read_path(p, "templates", base_dir, c.paths.templates);
    read_path(p, "vocab", base_dir, c.paths.vocab);
    read_path(p, "table", base_dir, c.paths.table);
    read_path(p, "predictions", base_dir, c.paths.predictions);
    read_path(p, "manifest", base_dir, c.paths.manifest);
    read_path(p, "scores", base_dir, c.paths.scores);
    read_path(p, "stub", base_dir, c.paths.stub);
    std::map<std::string, std::string> subsets;
    read(p, "subsets", subsets);
    for (const auto& [name, path] : subsets) c.paths.subsets[name] = resolve(base_dir, path);
  }
  if (const auto it = j.find("vocab"); it != j.end()) {
    check_keys(*it, "vocab", {"sizes", "min_frequency", "max_word_length", "lowercase"});
    std::vector<std::int64_t> sizes;
    read(*it, "sizes", sizes);
    if (it->contains("sizes")) {
      c.vocab_sizes.clear();
      for (const auto s : sizes) {
        if (s <= 0) fail("vocab sizes must be positive");
        c.vocab_sizes.push_back(static_cast<std::size_t>(s));
      }
    }
    read(*it, "min_frequency", c.vocab.min_frequency);
    read(*it, "max_word_length", c.vocab.max_word_length);
    read(*it, "lowercase", c.vocab.lowercase);
  }
  if (const auto it = j.find("embed"); it != j.end()) {
    check_keys(*it, "embed",
               {"dim", "window", "negatives", "epochs", "learning_rate", "min_count",
                "char_ngram_min", "char_ngram_max", "ngram_buckets", "workers"});
    read(*it, "dim", c.embed.dim);
    read(*it, "window", c.embed.window);
    read(*it, "negatives", c.embed.negatives);
    read(*it, "epochs", c.embed.epochs);
    read(*it, "learning_rate", c.embed.learning_rate);
    read(*it, "min_count", c.embed.min_count);
    read(*it, "char_ngram_min", c.embed.char_ngram_min);
    read(*it, "char_ngram_max", c.embed.char_ngram_max);
    read(*it, "ngram_buckets", c.embed.ngram_buckets);
    read(*it, "workers", c.embed.workers);
  }
  if (const auto it = j.find("rank"); it != j.end()) {
    check_keys(*it, "rank", {"exclude_subject", "workers"});
    read(*it, "exclude_subject", c.rank.exclude_subject);
    read(*it, "workers", c.rank.workers);
  }
  if (const auto it = j.find("eval"); it != j.end()) {
    check_keys(*it, "eval", {"p5", "most_frequent", "diversity", "buckets", "subset"});
    read(*it, "p5", c.eval.p5);
    read(*it, "most_frequent", c.eval.most_frequent);
    read(*it, "diversity", c.eval.diversity);
    read(*it, "buckets", c.eval.buckets);
    read(*it, "subset", c.eval_subset);
  }
  if (const auto it = j.find("energy"); it != j.end()) {
    check_keys(*it, "energy", {"pue", "carbon_intensity", "runs", "ratio"});
    read(*it, "pue", c.pue);
    read(*it, "carbon_intensity", c.carbon_intensity);
    if (const auto runs = it->find("runs"); runs != it->end()) {
      if (!runs->is_array()) fail("energy.runs must be an array");
      for (const auto& r : *runs) {
        check_keys(r, "energy run", {"label", "power_watts", "hours"});
        EnergyRun run;
        read(r, "label", run.label);
        read(r, "power_watts", run.power_watts);
        read(r, "hours", run.hours);
        c.energy_runs.push_back(run);
      }
    }
    if (const auto ratio = it->find("ratio"); ratio != it->end() && !ratio->is_null()) {
      std::vector<std::string> labels;
      read(*it, "ratio", labels);
      if (labels.size() != 2) fail("energy.ratio must name two runs");
      c.energy_ratio = std::make_pair(labels[0], labels[1]);
    }
  }
  if (const auto it = j.find("report"); it != j.end()) {
    check_keys(*it, "report", {"subset", "runs"});
    read(*it, "subset", c.report_subset);
    if (const auto runs = it->find("runs"); runs != it->end()) {
      if (!runs->is_array()) fail("report.runs must be an array");
      for (const auto& r : *runs) {
        check_keys(r, "report run", {"model", "vocab_size", "predictions"});
        ReportRun run;
        read(r, "model", run.model);
        read(r, "vocab_size", run.vocab_size);
        read_path(r, "predictions", base_dir, run.predictions);
        c.report_runs.push_back(run);
      }
    }
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "config file not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str(), path.parent_path());
}

std::string RunConfig::to_json() const {
  json paths_json{{"corpus", paths.corpus.string()},
                  {"triples", paths.triples.string()},
                  {"templates", paths.templates.string()},
                  {"vocab", paths.vocab.string()},
                  {"table", paths.table.string()},
                  {"predictions", paths.predictions.string()},
                  {"manifest", paths.manifest.string()},
                  {"scores", paths.scores.string()},
                  {"stub", paths.stub.string()},
                  {"subsets", json::object()}};
  for (const auto& [name, p] : paths.subsets) paths_json["subsets"][name] = p.string();

  json energy_json = json::array();
  for (const auto& r : energy_runs) {
    energy_json.push_back({{"label", r.label}, {"power_watts", r.power_watts}, {"hours", r.hours}});
  }
  json report_json = json::array();
  for (const auto& r : report_runs) {
    report_json.push_back({{"model", r.model},
                           {"vocab_size", r.vocab_size},
                           {"predictions", r.predictions.string()}});
  }
  json j{
      {"language", language},
      {"seed", embed.seed},
      {"deterministic", deterministic},
      {"paths", paths_json},
      {"vocab",
       {{"sizes", vocab_sizes},
        {"min_frequency", vocab.min_frequency},
        {"max_word_length", vocab.max_word_length},
        {"lowercase", vocab.lowercase}}},
      {"embed", json::parse(embed.to_json())},
      {"rank", {{"exclude_subject", rank.exclude_subject}, {"workers", rank.workers}}},
      {"eval",
       {{"p5", eval.p5},
        {"most_frequent", eval.most_frequent},
        {"diversity", eval.diversity},
        {"buckets", eval.buckets},
        {"subset", eval_subset}}},
      {"energy",
       {{"pue", pue},
        {"carbon_intensity", carbon_intensity},
        {"runs", energy_json},
        {"ratio", energy_ratio ? json{energy_ratio->first, energy_ratio->second} : json()}}},
      {"report", {{"subset", report_subset}, {"runs", report_json}}},
  };
  return j.dump();
}

std::string RunConfig::checksum() const { return sha256_hex(to_json()); }

void RunConfig::validate() const {
  if (vocab_sizes.empty()) fail("vocab sizes must not be empty");
  for (const auto s : vocab_sizes) {
    if (s == 0) fail("vocab sizes must be positive");
  }
  VocabTrainConfig v = vocab;
  v.target_size = vocab_sizes.front();
  v.validate();
  embed.validate();
  if (rank.workers < 1) fail("rank.workers must be >= 1");
  if (language.empty()) fail("language must not be empty");

  std::vector<std::pair<std::string, std::filesystem::path>> referenced{
      {"corpus", paths.corpus},       {"triples", paths.triples},
      {"templates", paths.templates}, {"vocab", paths.vocab},
      {"table", paths.table},         {"predictions", paths.predictions},
      {"manifest", paths.manifest},   {"scores", paths.scores},
      {"stub", paths.stub}};
  for (const auto& [name, p] : paths.subsets) referenced.emplace_back("subset " + name, p);
  for (const auto& r : report_runs) referenced.emplace_back("report run " + r.model, r.predictions);
  for (const auto& [name, p] : referenced) {
    if (!p.empty() && !std::filesystem::exists(p)) {
      throw Error(ErrorCode::kNotFound, name + " path does not exist: " + p.string());
    }
  }
  std::set<std::string> labels;
  for (const auto& r : energy_runs) {
    if (r.label.empty()) fail("energy runs need a label");
    if (!labels.insert(r.label).second) fail("duplicate energy run label '" + r.label + "'");
  }
  if (energy_ratio && (!labels.count(energy_ratio->first) || !labels.count(energy_ratio->second))) {
    fail("energy.ratio names an unknown run");
  }
  for (const auto& r : report_runs) {
    if (r.model.empty()) fail("report runs need a model name");
    if (r.predictions.empty()) fail("report run '" + r.model + "' needs a predictions path");
  }
}

void RunConfig::apply_deterministic() {
  embed.workers = 1;
  rank.workers = 1;
  deterministic = true;
}

}  // namespace probekit::cli
