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

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "probekit/embed.hpp"
#include "probekit/kb.hpp"
#include "probekit/vocab.hpp"

namespace probekit {

struct ScoredCandidate {
  std::string candidate;
  double score = 0.0;

  friend bool operator==(const ScoredCandidate&, const ScoredCandidate&) = default;
};

struct PredictionFlags {
  // Some subject piece had no vector and was replaced by zeros.
  bool query_oov = false;
  // At least one pair involved a zero-norm vector and was scored -1.
  bool zero_norm = false;
  // Candidates that had at least one piece without a vector.
  std::size_t oov_candidates = 0;
  // Candidates absent from an MLM score file because the scorer skipped
  // them (only allowed for [UNK]-only rows).
  std::size_t skipped_candidates = 0;

  friend bool operator==(const PredictionFlags&, const PredictionFlags&) = default;
};

struct Prediction {
  std::string triple_id;
  std::string relation_id;
  // Descending score; equal scores ordered by candidate label.
  std::vector<ScoredCandidate> ranked;
  PredictionFlags flags;

  const std::string& top() const { return ranked.front().candidate; }
  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Sorts by descending score, then ascending candidate label.
void sort_ranked(std::vector<ScoredCandidate>& ranked);

struct CosineScore {
  double value = -1.0;
  bool zero_norm = false;
};

/// Cosine similarity; -1 with `zero_norm` set when either vector has zero
/// norm.
CosineScore cosine(std::span<const double> a, std::span<const double> b);

struct StaticRankOptions {
  // Drop the candidate whose label equals the subject string.
  bool exclude_subject = false;
  int workers = 1;
};

/// Nearest-neighbour ranking: the subject's composed vector is compared with
/// each candidate's composed vector by cosine. The relation template is not
/// used. Output is grouped by relation (sorted), triples in input order.
std::vector<Prediction> rank_static(const EmbeddingTable& table, const SubwordVocab& vocab,
                                    const Dataset& dataset, const CandidateMap& candidates,
                                    const StaticRankOptions& options = {});

/// Always predicts the relation's most frequent gold object; the remaining
/// candidates follow by descending gold frequency. Scores are relative
/// frequencies.
std::vector<Prediction> rank_oracle(const Dataset& dataset, const CandidateMap& candidates);

// One query for an external masked-LM scorer.
struct ManifestRow {
  std::string triple_id;
  std::string relation_id;
  std::string candidate;
  std::string query_text;
  std::vector<TokenId> mask_token_ids;
  std::vector<std::string> mask_tokens;
  // Candidate tokenized to [UNK] only; scorers may skip the row.
  bool unk_only = false;
};

/// One row per (triple, candidate); the query carries as many [MASK] tokens
/// as the candidate has pieces under `scorer_vocab`.
std::vector<ManifestRow> build_mlm_manifest(const Dataset& dataset,
                                            const CandidateMap& candidates,
                                            const SubwordVocab& scorer_vocab);
void write_mlm_manifest(std::span<const ManifestRow> rows, const std::filesystem::path& path);
std::vector<ManifestRow> read_mlm_manifest(const std::filesystem::path& path);

/// build_mlm_manifest + write_mlm_manifest; returns the number of rows.
std::size_t export_mlm_manifest(const Dataset& dataset, const CandidateMap& candidates,
                                const SubwordVocab& scorer_vocab,
                                const std::filesystem::path& out_path);

struct MlmScoreRecord {
  std::string triple_id;
  std::string candidate;
  // One log-probability per mask position.
  std::vector<double> token_logprobs;

  // Non-empty, finite, all values <= 0.
  void validate() const;
  double mean_logprob() const;
};

std::vector<MlmScoreRecord> read_score_file(const std::filesystem::path& path);
void write_score_file(std::span<const MlmScoreRecord> records,
                      const std::filesystem::path& path);

/// Candidate score = mean token log-probability. Every manifest row needs a
/// record (except skipped [UNK]-only rows, which rank last); record order is
/// irrelevant.
std::vector<Prediction> rank_mlm(std::span<const ManifestRow> manifest,
                                 std::span<const MlmScoreRecord> scores);
std::vector<Prediction> rank_mlm(const std::filesystem::path& manifest_path,
                                 const std::filesystem::path& score_path);

// Lookup-table scorer producing valid score files without a model.
struct StubScorer {
  // Exact per-(triple, candidate) log-probs; length must match the row.
  std::map<std::pair<std::string, std::string>, std::vector<double>> entries;
  // Per mask-token log-prob, used when no exact entry exists.
  std::map<std::string, double, std::less<>> token_logprobs;
  double default_logprob = -10.0;

  static StubScorer from_json(std::string_view json);
  static StubScorer load(const std::filesystem::path& path);
  std::vector<MlmScoreRecord> score(std::span<const ManifestRow> manifest) const;
};

void write_predictions(std::span<const Prediction> predictions,
                       const std::filesystem::path& path);
std::vector<Prediction> read_predictions(const std::filesystem::path& path);

}  // namespace probekit
