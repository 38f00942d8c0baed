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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "probekit/vocab.hpp"

namespace probekit {

// Skip-gram with negative sampling over wordpiece tokens, with hashed
// character n-grams. Defaults follow the usual fastText settings.
struct EmbedTrainConfig {
  int dim = 300;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double learning_rate = 0.05;
  std::int64_t min_count = 5;
  // Either bound set to 0 disables character n-grams.
  int char_ngram_min = 3;
  int char_ngram_max = 6;
  std::int64_t ngram_buckets = 2'000'000;
  std::uint64_t seed = 1;
  // 1 = deterministic. More workers apply lock-free racy updates and results
  // vary between runs.
  int workers = 1;

  bool ngrams_enabled() const noexcept {
    return char_ngram_min > 0 && char_ngram_max > 0;
  }
  void validate() const;
  std::string to_json() const;
  // SHA-256 of to_json(); recorded in table metadata.
  std::string checksum() const;
};

enum class TableSource { kTrained, kImported };

std::string_view to_string(TableSource source);

struct TableMetadata {
  TableSource source = TableSource::kImported;
  std::string config_checksum;
};

class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim);

  // Appends a row. Throws on wrong dimension, non-finite values or a
  // duplicate token.
  void add(std::string token, std::span<const float> values);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::span<const float> row(std::size_t index) const {
    return {data_.data() + index * dim_, dim_};
  }
  std::optional<std::size_t> find(std::string_view token) const;
  std::optional<std::span<const float>> lookup(std::string_view token) const;

  // Copy with every component multiplied by `factor`.
  EmbeddingTable scaled(float factor) const;

  TableMetadata& metadata() noexcept { return metadata_; }
  const TableMetadata& metadata() const noexcept { return metadata_; }

 private:
  std::size_t dim_;
  std::vector<std::string> tokens_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>> index_;
  TableMetadata metadata_;
};

/// Trains one vector per vocabulary token occurring at least `min_count`
/// times. A token's output vector is the mean of its own input row and the
/// rows of its hashed character n-grams.
EmbeddingTable train_static_embeddings(std::span<const std::vector<TokenId>> corpus,
                                       const SubwordVocab& vocab,
                                       const EmbedTrainConfig& cfg);

/// Character n-grams of `token` bracketed by '<' and '>', lengths in
/// [min_n, max_n] code points. Exposed for tests.
std::vector<std::string> char_ngrams(std::string_view token, int min_n, int max_n);

struct ComposedVector {
  std::vector<double> values;
  // Number of pieces that were absent from the table and replaced by zeros.
  std::size_t missing = 0;

  bool has_missing() const noexcept { return missing > 0; }
};

/// Arithmetic mean of the piece vectors. Throws on an empty sequence.
ComposedVector compose(const EmbeddingTable& table,
                       std::span<const std::string> pieces);
ComposedVector compose(const EmbeddingTable& table, const SubwordVocab& vocab,
                       std::span<const TokenId> ids);

// Text format: header "count dim", then "token v1 ... vd" per line.
void save_table(const EmbeddingTable& table, const std::filesystem::path& path);
EmbeddingTable load_table(const std::filesystem::path& path);

struct ImportedTable {
  EmbeddingTable table;
  // Set when an expected vocabulary was supplied.
  std::optional<double> coverage;
  std::size_t covered = 0;
};

/// Loads a table produced by an external tool and tags it as imported.
ImportedTable import_external_table(const std::filesystem::path& path,
                                    const SubwordVocab* expected_vocab = nullptr);

/// Metadata sidecar for a saved table.
std::string table_metadata_json(const EmbeddingTable& table,
                                const EmbedTrainConfig* cfg = nullptr);

}  // namespace probekit
