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

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "run_config.hpp"

namespace probekit::cli {

enum class RankKind { kStatic, kOracle, kMlm };

std::optional<RankKind> parse_rank_kind(std::string_view name);
std::string_view to_string(RankKind kind);

struct CommandResult {
  // Paths relative to the output directory, manifest last.
  std::vector<std::string> outputs;
  // Human-readable summary for stdout.
  std::string summary;
};

// Every command writes its artifacts under cfg.output together with
// "<command>.manifest.json", which records the config checksum and the
// SHA-256 of every input and output. Outputs depend only on the inputs and
// the config, so reruns are byte-identical.

/// One vocab-<size>.txt plus sidecar per configured size.
CommandResult cmd_build_vocab(const RunConfig& cfg);
/// tokens.txt: the corpus with every line replaced by its pieces.
CommandResult cmd_tokenize(const RunConfig& cfg);
/// table.vec plus table.json metadata.
CommandResult cmd_train_embeddings(const RunConfig& cfg);
/// candidates.json.
CommandResult cmd_build_candidates(const RunConfig& cfg);
/// predictions-<kind>.jsonl.
CommandResult cmd_rank(const RunConfig& cfg, RankKind kind);
/// mlm_manifest.jsonl for an external masked-LM scorer.
CommandResult cmd_export_manifest(const RunConfig& cfg);
/// scores.jsonl produced by the lookup-table scorer.
CommandResult cmd_stub_score(const RunConfig& cfg);
/// metrics.json plus per_relation.tsv, buckets.tsv and summary.tsv.
CommandResult cmd_evaluate(const RunConfig& cfg);
/// footprint.json and footprint.tsv.
CommandResult cmd_energy(const RunConfig& cfg);
/// report.tsv and report.json: model, vocab size, p1 on the full dataset and
/// on the report subset.
CommandResult cmd_report(const RunConfig& cfg);

}  // namespace probekit::cli
