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

#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "probekit/checksum.hpp"
#include "probekit/error.hpp"
#include "probekit/kb.hpp"
#include "probekit/utf8.hpp"

#ifndef PROBEKIT_VERSION
#define PROBEKIT_VERSION "unknown"
#endif

namespace probekit::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * fraction);
  return buf;
}

// Tracks what a command read and wrote, then emits its manifest.
class Artifacts {
 public:
  Artifacts(std::string command, const RunConfig& cfg) : command_(std::move(command)), cfg_(cfg) {
    std::error_code ec;
    fs::create_directories(cfg.output, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create output directory " + cfg.output.string());
  }

  const fs::path& input(std::string_view role, const fs::path& path) {
    if (path.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  command_ + " needs an input path for '" + std::string(role) + "'");
    }
    if (!fs::is_regular_file(path)) {
      throw Error(ErrorCode::kNotFound, std::string(role) + " not found: " + path.string());
    }
    inputs_.push_back({{"role", role}, {"path", path.string()}, {"sha256", sha256_file(path)}});
    return path;
  }

  fs::path output(const std::string& name) {
    outputs_.push_back(name);
    return cfg_.output / name;
  }

  json& details() { return details_; }

  CommandResult finish(std::string summary) {
    json outputs = json::array();
    for (const auto& name : outputs_) {
      outputs.push_back({{"path", name}, {"sha256", sha256_file(cfg_.output / name)}});
    }
    json manifest{{"command", command_},
                  {"probekit_version", PROBEKIT_VERSION},
                  {"config_checksum", cfg_.checksum()},
                  {"config", json::parse(cfg_.to_json())},
                  {"inputs", inputs_},
                  {"outputs", outputs}};
    if (!details_.is_null()) manifest["details"] = details_;
    const std::string name = command_ + ".manifest.json";
    write_text(cfg_.output / name, manifest.dump(2) + "\n");
    CommandResult result{outputs_, std::move(summary)};
    result.outputs.push_back(name);
    return result;
  }

 private:
  std::string command_;
  const RunConfig& cfg_;
  json inputs_ = json::array();
  std::vector<std::string> outputs_;
  json details_;
};

// Tokenizer settings come from the vocabulary's sidecar when one sits next
// to it, otherwise from the config.
SubwordVocab load_vocab_for(Artifacts& art, const RunConfig& cfg) {
  const fs::path& path = art.input("vocab", cfg.paths.vocab);
  TokenizerOptions options{cfg.vocab.max_word_length, cfg.vocab.lowercase};
  fs::path sidecar = path;
  sidecar.replace_extension(".json");
  if (fs::is_regular_file(sidecar)) {
    art.input("vocab_sidecar", sidecar);
    std::ifstream in(sidecar, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto parsed = parse_vocab_sidecar(ss.str());
    options = {parsed.config.max_word_length, parsed.config.lowercase};
  }
  return load_vocab(path, options);
}

Dataset load_dataset(Artifacts& art, const RunConfig& cfg) {
  art.input("triples", cfg.paths.triples);
  art.input("templates", cfg.paths.templates);
  return ingest_dataset(cfg.paths.triples, cfg.paths.templates, cfg.language);
}

SubsetResult load_subset(Artifacts& art, const RunConfig& cfg, const Dataset& dataset,
                         const std::string& name) {
  const auto it = cfg.paths.subsets.find(name);
  if (it == cfg.paths.subsets.end()) {
    throw Error(ErrorCode::kNotFound, "no path configured for subset '" + name + "'");
  }
  const auto ids = read_id_list(art.input("subset " + name, it->second));
  auto result = apply_subset(dataset, ids);
  art.details()["subset"] = {{"name", name},
                             {"n_triples", result.dataset.size()},
                             {"unknown_ids", result.unknown_ids},
                             {"unknown_sample", result.unknown_sample}};
  return result;
}

// Number of single-symbol tokens; they precede all merges in a trained
// vocabulary.
std::size_t alphabet_size(const SubwordVocab& vocab) {
  std::size_t n = 0;
  for (const auto& tok : vocab.tokens()) {
    if (vocab.is_special(*vocab.find(tok))) continue;
    std::string_view body = tok;
    if (body.starts_with(kContinuationPrefix)) body.remove_prefix(kContinuationPrefix.size());
    n += utf8::length(body) == 1;
  }
  return n;
}

}  // namespace

std::optional<RankKind> parse_rank_kind(std::string_view name) {
  if (name == "static") return RankKind::kStatic;
  if (name == "oracle") return RankKind::kOracle;
  if (name == "mlm") return RankKind::kMlm;
  return std::nullopt;
}

std::string_view to_string(RankKind kind) {
  switch (kind) {
    case RankKind::kStatic: return "static";
    case RankKind::kOracle: return "oracle";
    case RankKind::kMlm: return "mlm";
  }
  return "unknown";
}

CommandResult cmd_build_vocab(const RunConfig& cfg) {
  Artifacts art("build-vocab", cfg);
  const auto& corpus = art.input("corpus", cfg.paths.corpus);
  const std::string corpus_sha = sha256_file(corpus);
  const auto lines = read_lines(corpus);

  // Merges are chosen greedily and independently of the target, so each
  // smaller vocabulary is a prefix of the largest one.
  std::size_t largest = 0;
  for (const auto s : cfg.vocab_sizes) largest = std::max(largest, s);
  VocabTrainConfig train_cfg = cfg.vocab;
  train_cfg.target_size = largest;
  const SubwordVocab full = train_wordpiece(lines, train_cfg);
  const std::size_t min_size = 2 + alphabet_size(full);

  std::string summary;
  json sizes = json::array();
  for (const auto s : cfg.vocab_sizes) {
    if (s < min_size) {
      throw Error(ErrorCode::kInvalidArgument,
                  "vocab size " + std::to_string(s) + " is below the alphabet plus specials (" +
                      std::to_string(min_size) + ")");
    }
    const auto& tokens = full.tokens();
    const std::size_t n = std::min(s, tokens.size());
    const auto vocab = SubwordVocab::from_tokens(
        std::vector<std::string>(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(n)),
        full.options());
    const std::string stem = "vocab-" + std::to_string(s);
    save_vocab(vocab, art.output(stem + ".txt"));
    VocabSidecar sidecar;
    sidecar.config = cfg.vocab;
    sidecar.config.target_size = s;
    sidecar.corpus_sha256 = corpus_sha;
    sidecar.vocab_size = vocab.size();
    write_text(art.output(stem + ".json"), vocab_sidecar_json(sidecar));
    sizes.push_back({{"target", s}, {"actual", vocab.size()}});
    summary += stem + ": " + std::to_string(vocab.size()) + " tokens\n";
  }
  art.details()["sizes"] = sizes;
  return art.finish(summary);
}

CommandResult cmd_tokenize(const RunConfig& cfg) {
  Artifacts art("tokenize", cfg);
  const auto vocab = load_vocab_for(art, cfg);
  const auto lines = read_lines(art.input("corpus", cfg.paths.corpus));
  std::string out;
  std::size_t pieces = 0, unk = 0;
  for (const auto& line : lines) {
    const auto ids = tokenize(vocab, line);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i > 0) out += ' ';
      out += vocab.token(ids[i]);
      unk += ids[i] == vocab.unk_id();
    }
    pieces += ids.size();
    out += '\n';
  }
  write_text(art.output("tokens.txt"), out);
  art.details() = {{"lines", lines.size()}, {"pieces", pieces}, {"unk", unk}};
  return art.finish(std::to_string(lines.size()) + " lines, " + std::to_string(pieces) +
                    " pieces, " + std::to_string(unk) + " [UNK]\n");
}

CommandResult cmd_train_embeddings(const RunConfig& cfg) {
  Artifacts art("train-embeddings", cfg);
  const auto vocab = load_vocab_for(art, cfg);
  const auto lines = read_lines(art.input("corpus", cfg.paths.corpus));
  std::vector<std::vector<TokenId>> corpus;
  corpus.reserve(lines.size());
  for (const auto& line : lines) {
    auto ids = tokenize(vocab, line);
    if (!ids.empty()) corpus.push_back(std::move(ids));
  }
  const auto table = train_static_embeddings(corpus, vocab, cfg.embed);
  save_table(table, art.output("table.vec"));
  write_text(art.output("table.json"), table_metadata_json(table, &cfg.embed));
  art.details() = {{"rows", table.size()}, {"dim", table.dim()}};
  return art.finish(std::to_string(table.size()) + " vectors of dimension " +
                    std::to_string(table.dim()) + "\n");
}

CommandResult cmd_build_candidates(const RunConfig& cfg) {
  Artifacts art("build-candidates", cfg);
  const auto dataset = load_dataset(art, cfg);
  const auto candidates = build_candidates(dataset);
  json relations = json::object();
  for (const auto& [rel, set] : candidates) relations[rel] = set.candidates;
  const json doc{{"config_checksum", cfg.checksum()}, {"relations", relations}};
  write_text(art.output("candidates.json"), doc.dump(2) + "\n");
  return art.finish(std::to_string(candidates.size()) + " relations\n");
}

CommandResult cmd_rank(const RunConfig& cfg, RankKind kind) {
  Artifacts art("rank-" + std::string(to_string(kind)), cfg);
  std::vector<Prediction> predictions;
  switch (kind) {
    case RankKind::kStatic: {
      const auto dataset = load_dataset(art, cfg);
      const auto vocab = load_vocab_for(art, cfg);
      const auto table = load_table(art.input("table", cfg.paths.table));
      predictions = rank_static(table, vocab, dataset, build_candidates(dataset), cfg.rank);
      break;
    }
    case RankKind::kOracle: {
      const auto dataset = load_dataset(art, cfg);
      predictions = rank_oracle(dataset, build_candidates(dataset));
      break;
    }
    case RankKind::kMlm:
      predictions = rank_mlm(art.input("manifest", cfg.paths.manifest),
                             art.input("scores", cfg.paths.scores));
      break;
  }
  std::size_t query_oov = 0, zero_norm = 0, skipped = 0;
  for (const auto& p : predictions) {
    query_oov += p.flags.query_oov;
    zero_norm += p.flags.zero_norm;
    skipped += p.flags.skipped_candidates;
  }
  const std::string name = "predictions-" + std::string(to_string(kind)) + ".jsonl";
  write_predictions(predictions, art.output(name));
  art.details() = {{"predictions", predictions.size()},
                   {"query_oov", query_oov},
                   {"zero_norm", zero_norm},
                   {"skipped_candidates", skipped}};
  return art.finish(std::to_string(predictions.size()) + " predictions -> " + name + "\n");
}

CommandResult cmd_export_manifest(const RunConfig& cfg) {
  Artifacts art("export-manifest", cfg);
  const auto dataset = load_dataset(art, cfg);
  const auto vocab = load_vocab_for(art, cfg);
  const auto rows = build_mlm_manifest(dataset, build_candidates(dataset), vocab);
  write_mlm_manifest(rows, art.output("mlm_manifest.jsonl"));
  std::size_t unk_only = 0;
  for (const auto& r : rows) unk_only += r.unk_only;
  art.details() = {{"rows", rows.size()}, {"unk_only", unk_only}};
  return art.finish(std::to_string(rows.size()) + " manifest rows\n");
}

CommandResult cmd_stub_score(const RunConfig& cfg) {
  Artifacts art("stub-score", cfg);
  const auto rows = read_mlm_manifest(art.input("manifest", cfg.paths.manifest));
  const auto scorer = StubScorer::load(art.input("stub", cfg.paths.stub));
  const auto records = scorer.score(rows);
  write_score_file(records, art.output("scores.jsonl"));
  return art.finish(std::to_string(records.size()) + " score records\n");
}

CommandResult cmd_evaluate(const RunConfig& cfg) {
  Artifacts art("evaluate", cfg);
  auto dataset = load_dataset(art, cfg);
  if (!cfg.eval_subset.empty()) dataset = load_subset(art, cfg, dataset, cfg.eval_subset).dataset;
  const auto predictions = read_predictions(art.input("predictions", cfg.paths.predictions));
  std::optional<SubwordVocab> vocab;
  if (cfg.eval.buckets) {
    if (cfg.paths.vocab.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "evaluate: length buckets need a vocabulary (or disable buckets)");
    }
    vocab = load_vocab_for(art, cfg);
  }
  const auto report = evaluate(predictions, dataset, vocab ? &*vocab : nullptr, cfg.eval);
  write_text(art.output("metrics.json"), metrics_json(report, cfg.checksum()));
  write_text(art.output("per_relation.tsv"), per_relation_tsv(report));
  if (cfg.eval.buckets) write_text(art.output("buckets.tsv"), buckets_tsv(report));
  write_text(art.output("summary.tsv"), summary_tsv(report));
  return art.finish(summary_tsv(report));
}

CommandResult cmd_energy(const RunConfig& cfg) {
  Artifacts art("energy", cfg);
  if (cfg.energy_runs.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "energy: no runs configured");
  }
  std::vector<FootprintRow> rows;
  for (const auto& r : cfg.energy_runs) {
    rows.push_back(footprint(r.label, {r.power_watts, r.hours, cfg.pue, cfg.carbon_intensity}));
  }
  std::optional<FootprintRatio> ratio;
  if (cfg.energy_ratio) {
    const auto find = [&](const std::string& label) -> const FootprintRow& {
      for (const auto& row : rows) {
        if (row.label == label) return row;
      }
      throw Error(ErrorCode::kNotFound, "energy: unknown run '" + label + "'");
    };
    ratio = footprint_ratio(find(cfg.energy_ratio->first).input,
                            find(cfg.energy_ratio->second).input);
  }
  write_text(art.output("footprint.json"), footprint_json(rows, ratio));
  const auto tsv = footprint_tsv(rows, ratio);
  write_text(art.output("footprint.tsv"), tsv);
  return art.finish(tsv);
}

CommandResult cmd_report(const RunConfig& cfg) {
  Artifacts art("report", cfg);
  if (cfg.report_runs.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "report: no runs configured");
  }
  const auto dataset = load_dataset(art, cfg);
  std::optional<Dataset> subset;
  if (cfg.paths.subsets.count(cfg.report_subset)) {
    subset = load_subset(art, cfg, dataset, cfg.report_subset).dataset;
  }
  std::string tsv = "model\tvocab_size\tp1_lama\tp1_" + cfg.report_subset + "\n";
  std::string table = "model\tvocab size\tp1 LAMA\tp1 " + cfg.report_subset + "\n";
  json rows = json::array();
  for (const auto& run : cfg.report_runs) {
    const auto predictions = read_predictions(art.input("predictions " + run.model, run.predictions));
    const double full = precision_at_k(predictions, dataset, 1).macro;
    std::optional<double> part;
    if (subset) part = precision_at_k(predictions, *subset, 1).macro;
    const std::string size = std::to_string(run.vocab_size);
    tsv += run.model + "\t" + size + "\t" + format_number(full) + "\t" +
           (part ? format_number(*part) : "NA") + "\n";
    table += run.model + "\t" + size + "\t" + percent(full) + "\t" +
             (part ? percent(*part) : "NA") + "\n";
    rows.push_back({{"model", run.model},
                    {"vocab_size", run.vocab_size},
                    {"p1_lama", full},
                    {"p1_subset", part ? json(*part) : json()}});
  }
  const json doc{{"config_checksum", cfg.checksum()}, {"subset", cfg.report_subset}, {"rows", rows}};
  write_text(art.output("report.tsv"), tsv);
  write_text(art.output("report.json"), doc.dump(2) + "\n");
  return art.finish(table);
}

}  // namespace probekit::cli
