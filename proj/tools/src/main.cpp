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

#include <charconv>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "json.hpp"
#include "probekit/error.hpp"
#include "run_config.hpp"

namespace {

using probekit::Error;
using probekit::ErrorCode;
using namespace probekit::cli;

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

void print_error(std::string_view command, std::string_view code, std::string_view message) {
  const nlohmann::json record{
      {"error", {{"command", command}, {"code", code}, {"message", message}}}};
  std::cerr << record.dump() << "\n";
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t pos; (pos = s.find(sep, start)) != std::string::npos; start = pos + 1) {
    parts.push_back(s.substr(start, pos - start));
  }
  parts.push_back(s.substr(start));
  return parts;
}

double parse_double(const std::string& s, std::string_view what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kInvalidArgument, "bad number '" + s + "' in " + std::string(what));
  }
  return v;
}

// Values given on the command line; each one set overrides the config file.
struct Overrides {
  std::string config;
  std::string output, language, corpus, triples, templates, vocab, table, predictions, manifest,
      scores, stub;
  std::vector<std::string> subsets;
  std::vector<std::size_t> vocab_sizes;
  std::uint64_t seed = 0;
  bool deterministic = false;
  int workers = 0;
  // embed
  int dim = 0, epochs = 0;
  std::int64_t min_count = -1;
  bool no_ngrams = false;
  // rank
  std::string rank_kind;
  bool exclude_subject = false;
  // evaluate
  std::string eval_subset;
  bool no_p5 = false, no_mf = false, no_diversity = false, no_buckets = false;
  // energy
  std::vector<std::string> energy_runs;
  double pue = 0.0, carbon_intensity = 0.0;
  std::string ratio;
  // report
  std::vector<std::string> report_runs;
  std::string report_subset;
};

// True when `name` was given either before or after the subcommand.
bool given_on(const CLI::App& app, const CLI::App& sub, const std::string& name) {
  for (const CLI::App* a : {&app, &sub}) {
    try {
      if (a->count(name) > 0) return true;
    } catch (const CLI::OptionNotFound&) {
    }
  }
  return false;
}

RunConfig build_config(const Overrides& o, const CLI::App& app, const CLI::App& sub) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : RunConfig::load(o.config);
  const auto given = [&](const char* name) { return given_on(app, sub, name); };
  const auto set_path = [&](const char* flag, const std::string& v, std::filesystem::path& out) {
    if (given(flag)) out = v;
  };
  set_path("--output", o.output, cfg.output);
  set_path("--corpus", o.corpus, cfg.paths.corpus);
  set_path("--triples", o.triples, cfg.paths.triples);
  set_path("--templates", o.templates, cfg.paths.templates);
  set_path("--vocab", o.vocab, cfg.paths.vocab);
  set_path("--table", o.table, cfg.paths.table);
  set_path("--predictions", o.predictions, cfg.paths.predictions);
  set_path("--manifest", o.manifest, cfg.paths.manifest);
  set_path("--scores", o.scores, cfg.paths.scores);
  set_path("--stub", o.stub, cfg.paths.stub);
  if (given("--lang")) cfg.language = o.language;
  for (const auto& s : o.subsets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::kInvalidArgument, "--subset expects NAME=PATH, got '" + s + "'");
    }
    cfg.paths.subsets[s.substr(0, eq)] = s.substr(eq + 1);
  }
  if (given("--vocab-size")) cfg.vocab_sizes = o.vocab_sizes;
  if (given("--seed")) cfg.embed.seed = o.seed;
  if (given("--workers")) cfg.embed.workers = cfg.rank.workers = o.workers;
  if (given("--dim")) cfg.embed.dim = o.dim;
  if (given("--epochs")) cfg.embed.epochs = o.epochs;
  if (given("--min-count")) cfg.embed.min_count = o.min_count;
  if (o.no_ngrams) cfg.embed.char_ngram_min = cfg.embed.char_ngram_max = 0;
  if (o.exclude_subject) cfg.rank.exclude_subject = true;
  if (given("--eval-subset")) cfg.eval_subset = o.eval_subset;
  if (o.no_p5) cfg.eval.p5 = false;
  if (o.no_mf) cfg.eval.most_frequent = false;
  if (o.no_diversity) cfg.eval.diversity = false;
  if (o.no_buckets) cfg.eval.buckets = false;
  if (given("--pue")) cfg.pue = o.pue;
  if (given("--carbon-intensity")) cfg.carbon_intensity = o.carbon_intensity;
  if (!o.energy_runs.empty()) {
    cfg.energy_runs.clear();
    for (const auto& r : o.energy_runs) {
      const auto parts = split(r, ':');
      if (parts.size() != 3) {
        throw Error(ErrorCode::kInvalidArgument, "--run expects LABEL:WATTS:HOURS, got '" + r + "'");
      }
      cfg.energy_runs.push_back(
          {parts[0], parse_double(parts[1], "--run"), parse_double(parts[2], "--run")});
    }
  }
  if (given("--ratio")) {
    const auto parts = split(o.ratio, '/');
    if (parts.size() != 2) {
      throw Error(ErrorCode::kInvalidArgument, "--ratio expects A/B, got '" + o.ratio + "'");
    }
    cfg.energy_ratio = std::make_pair(parts[0], parts[1]);
  }
  if (!o.report_runs.empty()) {
    cfg.report_runs.clear();
    for (const auto& r : o.report_runs) {
      const auto parts = split(r, ':');
      if (parts.size() < 3) {
        throw Error(ErrorCode::kInvalidArgument,
                    "--model-run expects MODEL:VOCAB_SIZE:PREDICTIONS, got '" + r + "'");
      }
      std::string path = parts[2];
      for (std::size_t i = 3; i < parts.size(); ++i) path += ":" + parts[i];
      const double size = parse_double(parts[1], "--model-run");
      if (size < 0) throw Error(ErrorCode::kInvalidArgument, "negative vocab size in --model-run");
      cfg.report_runs.push_back({parts[0], static_cast<std::size_t>(size), path});
    }
  }
  if (given("--report-subset")) cfg.report_subset = o.report_subset;
  if (o.deterministic || cfg.deterministic) cfg.apply_deterministic();
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"probekit: cloze-style knowledge probing with static subword embeddings"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;

  app.add_option("--config", o.config, "JSON run config");
  app.add_option("--output", o.output, "Output directory");
  app.add_option("--seed", o.seed, "Training seed");
  app.add_flag("--deterministic", o.deterministic, "Force single-worker modes");
  app.add_option("--workers", o.workers, "Worker threads for training and ranking");
  app.add_option("--lang", o.language, "Language tag of the dataset");
  app.add_option("--corpus", o.corpus, "Text corpus, one sentence per line");
  app.add_option("--triples", o.triples, "Triples JSONL");
  app.add_option("--templates", o.templates, "Relation templates JSONL");
  app.add_option("--vocab", o.vocab, "Vocabulary file");
  app.add_option("--table", o.table, "Embedding table");
  app.add_option("--predictions", o.predictions, "Predictions JSONL");
  app.add_option("--manifest", o.manifest, "Masked-LM manifest JSONL");
  app.add_option("--scores", o.scores, "Masked-LM score JSONL");
  app.add_option("--stub", o.stub, "Stub scorer lookup JSON");
  app.add_option("--subset", o.subsets, "Named id list, NAME=PATH");
  app.add_option("--vocab-size", o.vocab_sizes, "Vocabulary sizes");

  auto* build_vocab = app.add_subcommand("build-vocab", "Train wordpiece vocabularies");
  auto* tok = app.add_subcommand("tokenize", "Tokenize a corpus");
  auto* train = app.add_subcommand("train-embeddings", "Train static subword embeddings");
  train->add_option("--dim", o.dim, "Vector dimension");
  train->add_option("--epochs", o.epochs, "Training epochs");
  train->add_option("--min-count", o.min_count, "Minimum token count");
  train->add_flag("--no-ngrams", o.no_ngrams, "Disable character n-grams");
  auto* cands = app.add_subcommand("build-candidates", "Build per-relation candidate sets");
  auto* rank = app.add_subcommand("rank", "Rank candidates");
  rank->add_option("kind", o.rank_kind, "static, oracle or mlm")
      ->required()
      ->check(CLI::IsMember({"static", "oracle", "mlm"}));
  rank->add_flag("--exclude-subject", o.exclude_subject, "Drop the candidate equal to the subject");
  auto* manifest = app.add_subcommand("export-manifest", "Write the masked-LM scoring manifest");
  auto* stub = app.add_subcommand("stub-score", "Score a manifest with the lookup-table scorer");
  auto* eval = app.add_subcommand("evaluate", "Compute metrics for a predictions file");
  eval->add_option("--eval-subset", o.eval_subset, "Evaluate on a named subset");
  eval->add_flag("--no-p5", o.no_p5, "Skip p@5");
  eval->add_flag("--no-mf", o.no_mf, "Skip p1 without the most frequent object");
  eval->add_flag("--no-diversity", o.no_diversity, "Skip entropy and distinct counts");
  eval->add_flag("--no-buckets", o.no_buckets, "Skip subject length buckets");
  auto* energy = app.add_subcommand("energy", "Estimate training energy and emissions");
  energy->add_option("--run", o.energy_runs, "LABEL:WATTS:HOURS");
  energy->add_option("--pue", o.pue, "Power usage effectiveness");
  energy->add_option("--carbon-intensity", o.carbon_intensity, "CO2e per kWh");
  energy->add_option("--ratio", o.ratio, "A/B ratio of two runs");
  auto* report = app.add_subcommand("report", "Tabulate p1 across runs");
  report->add_option("--model-run", o.report_runs, "MODEL:VOCAB_SIZE:PREDICTIONS");
  report->add_option("--report-subset", o.report_subset, "Subset column name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("", "usage", e.what());
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::string command = sub->get_name();
  try {
    const RunConfig cfg = build_config(o, app, *sub);
    CommandResult result;
    if (sub == build_vocab) result = cmd_build_vocab(cfg);
    else if (sub == tok) result = cmd_tokenize(cfg);
    else if (sub == train) result = cmd_train_embeddings(cfg);
    else if (sub == cands) result = cmd_build_candidates(cfg);
    else if (sub == rank) {
      command += " " + o.rank_kind;
      result = cmd_rank(cfg, *parse_rank_kind(o.rank_kind));
    } else if (sub == manifest) result = cmd_export_manifest(cfg);
    else if (sub == stub) result = cmd_stub_score(cfg);
    else if (sub == eval) result = cmd_evaluate(cfg);
    else if (sub == energy) result = cmd_energy(cfg);
    else result = cmd_report(cfg);
    std::cout << result.summary;
    return 0;
  } catch (const Error& e) {
    print_error(command, probekit::to_string(e.code()), e.what());
    return kExitError;
  } catch (const std::exception& e) {
    print_error(command, "internal", e.what());
    return kExitInternal;
  }
}
