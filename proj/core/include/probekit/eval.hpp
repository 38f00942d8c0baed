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
#include <vector>

#include "probekit/kb.hpp"
#include "probekit/rank.hpp"
#include "probekit/vocab.hpp"

namespace probekit {

struct PrecisionResult {
  std::map<std::string, double> per_relation;
  // Unweighted mean over relations.
  double macro = 0.0;
};

/// Per relation, the fraction of triples whose gold object is among the top
/// `k` ranked candidates. Every dataset triple needs a prediction;
/// predictions for triples outside the dataset are ignored.
PrecisionResult precision_at_k(std::span<const Prediction> predictions, const Dataset& dataset,
                               std::size_t k);

struct MostFrequentExcluded {
  double p1_mf = 0.0;
  std::map<std::string, double> per_relation;
  // Relations whose triples all had the most frequent object.
  std::vector<std::string> dropped_relations;
};

/// Macro p@1 after removing triples whose gold object is their relation's
/// most frequent one (ties: lexicographically smallest).
MostFrequentExcluded p1_excluding_most_frequent(std::span<const Prediction> predictions,
                                                const Dataset& dataset);

struct Diversity {
  // Base-2 entropy of the top-1 predictions pooled over all triples.
  double entropy_bits = 0.0;
  // Mean over relations of the number of distinct top-1 predictions.
  double avg_distinct_predictions = 0.0;
  std::size_t distinct_predictions = 0;
};

Diversity diversity(std::span<const Prediction> predictions, const Dataset& dataset);

struct Bucket {
  std::size_t n = 0;
  std::size_t correct = 0;
  // Micro p@1 within the bucket.
  double p1 = 0.0;
};

/// Triples grouped by the number of pieces their subject tokenizes into.
std::map<std::size_t, Bucket> bucket_by_subject_length(std::span<const Prediction> predictions,
                                                       const Dataset& dataset,
                                                       const SubwordVocab& vocab);

struct RelationMetrics {
  double p_at_1 = 0.0;
  double p_at_5 = 0.0;
  std::size_t n_triples = 0;
};

struct EvalOptions {
  bool p5 = true;
  bool most_frequent = true;
  bool diversity = true;
  bool buckets = true;
};

struct MetricsReport {
  std::map<std::string, RelationMetrics> per_relation;
  double macro_p1 = 0.0;
  double macro_p5 = 0.0;
  double p1_mf = 0.0;
  std::vector<std::string> mf_dropped_relations;
  double entropy_bits = 0.0;
  double avg_distinct_predictions = 0.0;
  std::size_t distinct_predictions = 0;
  std::map<std::size_t, Bucket> buckets;
  std::size_t n_triples = 0;
  EvalOptions options;
};

/// Runs the enabled metrics. `vocab` is required when buckets are enabled.
MetricsReport evaluate(std::span<const Prediction> predictions, const Dataset& dataset,
                       const SubwordVocab* vocab, const EvalOptions& options = {});

/// Deterministic JSON rendering. `config_checksum` is embedded when
/// non-empty.
std::string metrics_json(const MetricsReport& report, const std::string& config_checksum = {});
MetricsReport parse_metrics_json(std::string_view json);

// Flat tables for plotting.
std::string per_relation_tsv(const MetricsReport& report);
std::string buckets_tsv(const MetricsReport& report);
std::string summary_tsv(const MetricsReport& report);

}  // namespace probekit
