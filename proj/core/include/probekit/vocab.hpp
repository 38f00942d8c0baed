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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace probekit {

inline constexpr std::string_view kUnkToken = "[UNK]";
inline constexpr std::string_view kMaskToken = "[MASK]";
inline constexpr std::string_view kContinuationPrefix = "##";

using TokenId = std::int32_t;

struct VocabTrainConfig {
  std::size_t target_size = 30000;
  // Minimum corpus frequency of a symbol pair before it may be merged.
  std::uint64_t min_frequency = 2;
  // Words longer than this (in code points) are skipped during training and
  // tokenize to [UNK].
  std::size_t max_word_length = 100;
  bool lowercase = false;

  void validate() const;
};

// Pretokenization settings that travel with a vocabulary.
struct TokenizerOptions {
  std::size_t max_word_length = 100;
  bool lowercase = false;
};

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

// Wordpiece token inventory. Ids are dense and equal to the token's line
// number in vocab.txt. [UNK] and [MASK] are always present.
class SubwordVocab {
 public:
  // Validates the token list; throws Error on duplicates, missing specials,
  // empty tokens or malformed continuation markers.
  static SubwordVocab from_tokens(std::vector<std::string> tokens,
                                  TokenizerOptions options = {});

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::string& token(TokenId id) const;
  std::optional<TokenId> find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }

  TokenId unk_id() const noexcept { return unk_id_; }
  TokenId mask_id() const noexcept { return mask_id_; }
  bool is_special(TokenId id) const noexcept {
    return id == unk_id_ || id == mask_id_;
  }

  const TokenizerOptions& options() const noexcept { return options_; }
  // Longest token in code points, continuation marker excluded.
  std::size_t max_piece_chars() const noexcept { return max_piece_chars_; }

  friend bool operator==(const SubwordVocab& a, const SubwordVocab& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  SubwordVocab() = default;

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId, StringHash, std::equal_to<>> ids_;
  TokenId unk_id_ = 0;
  TokenId mask_id_ = 0;
  TokenizerOptions options_;
  std::size_t max_piece_chars_ = 0;
};

/// Trains a wordpiece vocabulary. Starting from the character alphabet of the
/// retained words, repeatedly merges the adjacent symbol pair with the highest
/// freq(ab) / (freq(a) * freq(b)) until `target_size` tokens exist or no pair
/// reaches `min_frequency`. Ties go to the lexicographically smallest merged
/// string. Output order: [UNK], [MASK], sorted alphabet, merges in order.
SubwordVocab train_wordpiece(std::span<const std::string> lines,
                             const VocabTrainConfig& cfg);
SubwordVocab train_wordpiece(std::istream& corpus, const VocabTrainConfig& cfg);

/// Greedy longest-match-first segmentation of one pretokenized word.
std::vector<TokenId> tokenize_word(const SubwordVocab& vocab,
                                   std::string_view word);

/// Whitespace pretokenization followed by tokenize_word on every word.
std::vector<TokenId> tokenize(const SubwordVocab& vocab, std::string_view text);

std::vector<std::string> tokenize_to_pieces(const SubwordVocab& vocab,
                                            std::string_view text);

// vocab.txt: one token per line, line number = id.
void save_vocab(const SubwordVocab& vocab, const std::filesystem::path& path);
SubwordVocab load_vocab(const std::filesystem::path& path,
                        TokenizerOptions options = {});

struct VocabSidecar {
  VocabTrainConfig config;
  std::string corpus_sha256;
  std::size_t vocab_size = 0;
  std::string normalization = "none";
};

/// JSON sidecar describing how a vocab.txt was produced.
std::string vocab_sidecar_json(const VocabSidecar& sidecar);
VocabSidecar parse_vocab_sidecar(std::string_view json);

}  // namespace probekit
