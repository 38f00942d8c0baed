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

#include "probekit/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <tuple>

#include "json.hpp"
#include "probekit/error.hpp"
#include "probekit/utf8.hpp"

namespace probekit {
namespace {

bool is_continuation(std::string_view token) {
  return token.starts_with(kContinuationPrefix);
}

std::string_view strip_continuation(std::string_view token) {
  return is_continuation(token) ? token.substr(kContinuationPrefix.size()) : token;
}

using PairKey = std::uint64_t;

PairKey pair_key(std::uint32_t a, std::uint32_t b) {
  return (static_cast<PairKey>(a) << 32) | b;
}
std::uint32_t pair_left(PairKey k) { return static_cast<std::uint32_t>(k >> 32); }
std::uint32_t pair_right(PairKey k) { return static_cast<std::uint32_t>(k); }

struct TrainingWord {
  std::vector<std::uint32_t> symbols;
  std::int64_t count = 0;
};

// Incremental pair statistics over a weighted word multiset. Symbol and pair
// frequencies are kept exact so candidate scores can be compared by cross
// multiplication instead of floating-point division.
class MergeState {
 public:
  explicit MergeState(std::map<std::string, std::int64_t> word_counts) {
    for (auto& [word, count] : word_counts) {
      TrainingWord tw;
      tw.count = count;
      const auto chars = utf8::split_chars(word);
      for (std::size_t i = 0; i < chars.size(); ++i) {
        tw.symbols.push_back(
            intern(i == 0 ? chars[i] : std::string(kContinuationPrefix) + chars[i]));
      }
      words_.push_back(std::move(tw));
    }
    for (std::uint32_t w = 0; w < words_.size(); ++w) add_word(w);
  }

  std::vector<std::string> alphabet() const {
    std::vector<std::string> out = symbols_;
    std::sort(out.begin(), out.end());
    return out;
  }

  const std::string& symbol(std::uint32_t id) const { return symbols_[id]; }

  // Best pair by score, then merged string, then (left, right) strings.
  std::optional<PairKey> best_pair(std::uint64_t min_frequency) {
    std::optional<PairKey> best;
    std::string best_merged;
    for (auto it = pair_counts_.begin(); it != pair_counts_.end();) {
      if (it->second <= 0) {
        pair_words_.erase(it->first);
        it = pair_counts_.erase(it);
        continue;
      }
      const PairKey key = it->first;
      const auto count = static_cast<std::uint64_t>(it->second);
      if (count >= min_frequency) {
        if (!best) {
          best = key;
          best_merged = merged(key);
        } else {
          const int cmp = compare_score(key, *best);
          if (cmp > 0) {
            best = key;
            best_merged = merged(key);
          } else if (cmp == 0) {
            std::string m = merged(key);
            const auto lhs = std::tie(m, symbols_[pair_left(key)], symbols_[pair_right(key)]);
            const auto rhs = std::tie(best_merged, symbols_[pair_left(*best)],
                                      symbols_[pair_right(*best)]);
            if (lhs < rhs) {
              best = key;
              best_merged = std::move(m);
            }
          }
        }
      }
      ++it;
    }
    return best;
  }

  std::string merged(PairKey key) const {
    return symbols_[pair_left(key)] +
           std::string(strip_continuation(symbols_[pair_right(key)]));
  }

  // Applies the merge everywhere and returns the merged symbol's string.
  std::string apply(PairKey key) {
    const std::uint32_t a = pair_left(key);
    const std::uint32_t b = pair_right(key);
    const std::uint32_t m = intern(merged(key));
    std::vector<std::uint32_t> affected = std::move(pair_words_[key]);
    std::sort(affected.begin(), affected.end());
    affected.erase(std::unique(affected.begin(), affected.end()), affected.end());
    for (std::uint32_t w : affected) {
      auto& syms = words_[w].symbols;
      bool present = false;
      for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
        if (syms[i] == a && syms[i + 1] == b) {
          present = true;
          break;
        }
      }
      if (!present) continue;
      remove_word(w);
      std::vector<std::uint32_t> out;
      out.reserve(syms.size());
      for (std::size_t i = 0; i < syms.size(); ++i) {
        if (i + 1 < syms.size() && syms[i] == a && syms[i + 1] == b) {
          out.push_back(m);
          ++i;
        } else {
          out.push_back(syms[i]);
        }
      }
      syms = std::move(out);
      add_word(w);
    }
    if (const auto it = pair_counts_.find(key); it != pair_counts_.end() && it->second <= 0) {
      pair_counts_.erase(it);
      pair_words_.erase(key);
    }
    return symbols_[m];
  }

 private:
  std::uint32_t intern(const std::string& s) {
    auto [it, inserted] = symbol_ids_.try_emplace(s, static_cast<std::uint32_t>(symbols_.size()));
    if (inserted) {
      symbols_.push_back(s);
      symbol_counts_.push_back(0);
    }
    return it->second;
  }

  void add_word(std::uint32_t w) {
    const auto& tw = words_[w];
    for (std::size_t i = 0; i < tw.symbols.size(); ++i) {
      symbol_counts_[tw.symbols[i]] += tw.count;
      if (i + 1 < tw.symbols.size()) {
        const PairKey k = pair_key(tw.symbols[i], tw.symbols[i + 1]);
        pair_counts_[k] += tw.count;
        pair_words_[k].push_back(w);
      }
    }
  }

  void remove_word(std::uint32_t w) {
    const auto& tw = words_[w];
    for (std::size_t i = 0; i < tw.symbols.size(); ++i) {
      symbol_counts_[tw.symbols[i]] -= tw.count;
      if (i + 1 < tw.symbols.size()) {
        pair_counts_[pair_key(tw.symbols[i], tw.symbols[i + 1])] -= tw.count;
      }
    }
  }

  // Sign of score(x) - score(y) where score = n_ab / (n_a * n_b).
  int compare_score(PairKey x, PairKey y) const {
    __extension__ typedef unsigned __int128 u128;
    const auto n = [&](std::uint32_t s) { return static_cast<u128>(symbol_counts_[s]); };
    const u128 lhs = static_cast<u128>(pair_counts_.at(x)) * n(pair_left(y)) * n(pair_right(y));
    const u128 rhs = static_cast<u128>(pair_counts_.at(y)) * n(pair_left(x)) * n(pair_right(x));
    return lhs > rhs ? 1 : (lhs < rhs ? -1 : 0);
  }

  std::vector<TrainingWord> words_;
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, std::uint32_t> symbol_ids_;
  std::vector<std::int64_t> symbol_counts_;
  std::unordered_map<PairKey, std::int64_t> pair_counts_;
  std::unordered_map<PairKey, std::vector<std::uint32_t>> pair_words_;
};

class WordCounter {
 public:
  explicit WordCounter(const VocabTrainConfig& cfg) : cfg_(cfg) {}

  void add_line(std::string_view line) {
    for (auto& word : utf8::split_whitespace(line)) {
      ++seen_;
      if (utf8::length(word) > cfg_.max_word_length) continue;
      ++counts_[cfg_.lowercase ? utf8::ascii_lower(word) : std::move(word)];
    }
  }

  SubwordVocab finish() && {
    if (seen_ == 0) {
      throw Error(ErrorCode::kInvalidArgument, "train_wordpiece: corpus contains no words");
    }
    MergeState state(std::move(counts_));
    std::vector<std::string> tokens{std::string(kUnkToken), std::string(kMaskToken)};
    const auto alphabet = state.alphabet();
    if (alphabet.size() + tokens.size() > cfg_.target_size) {
      throw Error(ErrorCode::kInvalidArgument,
                  "train_wordpiece: target_size " + std::to_string(cfg_.target_size) +
                      " is below alphabet (" + std::to_string(alphabet.size()) +
                      ") + specials (2)");
    }
    std::set<std::string, std::less<>> present(tokens.begin(), tokens.end());
    for (const auto& s : alphabet) {
      if (present.insert(s).second) tokens.push_back(s);
    }
    while (tokens.size() < cfg_.target_size) {
      const auto best = state.best_pair(cfg_.min_frequency);
      if (!best) break;
      std::string merged = state.apply(*best);
      if (present.insert(merged).second) tokens.push_back(std::move(merged));
    }
    return SubwordVocab::from_tokens(
        std::move(tokens), TokenizerOptions{cfg_.max_word_length, cfg_.lowercase});
  }

 private:
  const VocabTrainConfig& cfg_;
  std::map<std::string, std::int64_t> counts_;
  std::size_t seen_ = 0;
};

}  // namespace

void VocabTrainConfig::validate() const {
  if (target_size == 0) {
    throw Error(ErrorCode::kInvalidArgument, "vocab target_size must be positive");
  }
  if (min_frequency == 0) {
    throw Error(ErrorCode::kInvalidArgument, "vocab min_frequency must be positive");
  }
  if (max_word_length == 0) {
    throw Error(ErrorCode::kInvalidArgument, "vocab max_word_length must be positive");
  }
}

SubwordVocab SubwordVocab::from_tokens(std::vector<std::string> tokens,
                                       TokenizerOptions options) {
  SubwordVocab v;
  v.options_ = options;
  v.ids_.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& t = tokens[i];
    const bool special = t == kUnkToken || t == kMaskToken;
    if (!special) {
      if (t.empty()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "vocab: empty token at id " + std::to_string(i));
      }
      if (is_continuation(t)) {
        const auto rest = strip_continuation(t);
        if (rest.empty() || rest.starts_with(kContinuationPrefix)) {
          throw Error(ErrorCode::kInvalidArgument,
                      "vocab: malformed continuation token '" + t + "'");
        }
      }
    }
    if (!v.ids_.emplace(t, static_cast<TokenId>(i)).second) {
      throw Error(ErrorCode::kInvalidArgument, "vocab: duplicate token '" + t + "'");
    }
    v.max_piece_chars_ = std::max(v.max_piece_chars_, utf8::length(strip_continuation(t)));
  }
  const auto unk = v.ids_.find(kUnkToken);
  const auto mask = v.ids_.find(kMaskToken);
  if (unk == v.ids_.end() || mask == v.ids_.end()) {
    throw Error(ErrorCode::kInvalidArgument, "vocab: missing [UNK] or [MASK]");
  }
  v.unk_id_ = unk->second;
  v.mask_id_ = mask->second;
  v.tokens_ = std::move(tokens);
  return v;
}

const std::string& SubwordVocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw Error(ErrorCode::kNotFound, "vocab: id out of range " + std::to_string(id));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::optional<TokenId> SubwordVocab::find(std::string_view token) const {
  const auto it = ids_.find(token);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

SubwordVocab train_wordpiece(std::span<const std::string> lines,
                             const VocabTrainConfig& cfg) {
  cfg.validate();
  WordCounter counter(cfg);
  for (const auto& line : lines) counter.add_line(line);
  return std::move(counter).finish();
}

SubwordVocab train_wordpiece(std::istream& corpus, const VocabTrainConfig& cfg) {
  cfg.validate();
  WordCounter counter(cfg);
  std::string line;
  while (std::getline(corpus, line)) counter.add_line(line);
  return std::move(counter).finish();
}

std::vector<TokenId> tokenize_word(const SubwordVocab& vocab, std::string_view word) {
  const std::string normalized =
      vocab.options().lowercase ? utf8::ascii_lower(word) : std::string(word);
  // Byte offsets of every code point boundary.
  std::vector<std::size_t> bounds{0};
  for (const auto& ch : utf8::split_chars(normalized)) {
    bounds.push_back(bounds.back() + ch.size());
  }
  const std::size_t nchars = bounds.size() - 1;
  if (nchars == 0) return {};
  if (nchars > vocab.options().max_word_length) return {vocab.unk_id()};

  std::vector<TokenId> pieces;
  std::string candidate;
  std::size_t start = 0;
  while (start < nchars) {
    const std::size_t longest = std::min(nchars, start + vocab.max_piece_chars());
    std::optional<TokenId> match;
    std::size_t end = longest;
    for (; end > start; --end) {
      candidate.clear();
      if (start > 0) candidate.append(kContinuationPrefix);
      candidate.append(normalized, bounds[start], bounds[end] - bounds[start]);
      match = vocab.find(candidate);
      if (match) break;
    }
    if (!match) return {vocab.unk_id()};
    pieces.push_back(*match);
    start = end;
  }
  return pieces;
}

std::vector<TokenId> tokenize(const SubwordVocab& vocab, std::string_view text) {
  std::vector<TokenId> ids;
  for (const auto& word : utf8::split_whitespace(text)) {
    const auto pieces = tokenize_word(vocab, word);
    ids.insert(ids.end(), pieces.begin(), pieces.end());
  }
  return ids;
}

std::vector<std::string> tokenize_to_pieces(const SubwordVocab& vocab,
                                            std::string_view text) {
  std::vector<std::string> out;
  for (TokenId id : tokenize(vocab, text)) out.push_back(vocab.token(id));
  return out;
}

void save_vocab(const SubwordVocab& vocab, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (const auto& t : vocab.tokens()) out << t << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

SubwordVocab load_vocab(const std::filesystem::path& path, TokenizerOptions options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return SubwordVocab::from_tokens(std::move(tokens), options);
}

std::string vocab_sidecar_json(const VocabSidecar& sidecar) {
  nlohmann::json j;
  j["config"] = {
      {"target_size", sidecar.config.target_size},
      {"min_frequency", sidecar.config.min_frequency},
      {"max_word_length", sidecar.config.max_word_length},
      {"lowercase", sidecar.config.lowercase},
  };
  j["corpus_sha256"] = sidecar.corpus_sha256;
  j["vocab_size"] = sidecar.vocab_size;
  j["normalization"] = sidecar.normalization;
  j["pretokenization"] = "unicode_whitespace";
  return j.dump(2) + "\n";
}

VocabSidecar parse_vocab_sidecar(std::string_view json) {
  try {
    const auto j = nlohmann::json::parse(json);
    VocabSidecar s;
    const auto& c = j.at("config");
    s.config.target_size = c.at("target_size").get<std::size_t>();
    s.config.min_frequency = c.at("min_frequency").get<std::uint64_t>();
    s.config.max_word_length = c.at("max_word_length").get<std::size_t>();
    s.config.lowercase = c.at("lowercase").get<bool>();
    s.corpus_sha256 = j.at("corpus_sha256").get<std::string>();
    s.vocab_size = j.at("vocab_size").get<std::size_t>();
    s.normalization = j.value("normalization", "none");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("vocab sidecar: ") + e.what());
  }
}

}  // namespace probekit
