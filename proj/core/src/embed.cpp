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

#include "probekit/embed.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "probekit/checksum.hpp"
#include "probekit/error.hpp"
#include "probekit/utf8.hpp"

namespace probekit {
namespace {

constexpr std::size_t kNegativeTableSize = 10'000'000;
constexpr double kUnigramPower = 0.75;

std::uint32_t fnv1a(std::string_view s) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : s) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

float sigmoid(float x) {
  if (x > 8.0f) return 1.0f;
  if (x < -8.0f) return 0.0f;
  return 1.0f / (1.0f + std::exp(-x));
}

// Plain access for single-worker training; relaxed atomics for the racy
// multi-worker mode so concurrent updates stay well-defined.
template <bool Shared>
struct Cell {
  static float load(const float& x) {
    if constexpr (Shared) {
      return std::atomic_ref<float>(const_cast<float&>(x)).load(std::memory_order_relaxed);
    } else {
      return x;
    }
  }
  static void add(float& x, float delta) {
    if constexpr (Shared) {
      std::atomic_ref<float> ref(x);
      ref.store(ref.load(std::memory_order_relaxed) + delta, std::memory_order_relaxed);
    } else {
      x += delta;
    }
  }
};

struct Model {
  std::size_t dim = 0;
  std::vector<float> input;   // word rows then compacted n-gram bucket rows
  std::vector<float> output;  // one row per word
  std::vector<std::vector<std::uint32_t>> subwords;  // input rows per word
  std::vector<std::uint32_t> negative_table;
};

struct Sentence {
  std::vector<std::uint32_t> words;
};

class Trainer {
 public:
  Trainer(Model& model, const EmbedTrainConfig& cfg, std::uint64_t total_tokens)
      : model_(model), cfg_(cfg), total_tokens_(total_tokens) {}

  template <bool Shared>
  void run(std::span<const Sentence> sentences, std::uint64_t seed,
           std::atomic<std::uint64_t>& processed) {
    std::mt19937_64 rng(seed);
    std::vector<float> hidden(model_.dim);
    std::vector<float> grad(model_.dim);
    const double budget = static_cast<double>(cfg_.epochs) * static_cast<double>(total_tokens_);
    std::uniform_int_distribution<int> window_dist(1, cfg_.window);
    std::uniform_int_distribution<std::size_t> neg_dist(0, model_.negative_table.size() - 1);

    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
      for (const auto& sentence : sentences) {
        const auto& words = sentence.words;
        for (std::size_t pos = 0; pos < words.size(); ++pos) {
          const double progress =
              static_cast<double>(processed.fetch_add(1, std::memory_order_relaxed)) / budget;
          const auto lr = static_cast<float>(cfg_.learning_rate * std::max(0.0, 1.0 - progress));
          const int span = window_dist(rng);
          const auto& rows = model_.subwords[words[pos]];
          for (int offset = -span; offset <= span; ++offset) {
            if (offset == 0) continue;
            const auto ctx = static_cast<std::ptrdiff_t>(pos) + offset;
            if (ctx < 0 || ctx >= static_cast<std::ptrdiff_t>(words.size())) continue;
            compute_hidden<Shared>(rows, hidden);
            std::fill(grad.begin(), grad.end(), 0.0f);
            const std::uint32_t target = words[static_cast<std::size_t>(ctx)];
            binary_update<Shared>(target, true, lr, hidden, grad);
            for (int n = 0; n < cfg_.negatives; ++n) {
              std::uint32_t neg = model_.negative_table[neg_dist(rng)];
              if (neg == target) continue;
              binary_update<Shared>(neg, false, lr, hidden, grad);
            }
            for (std::uint32_t r : rows) {
              float* in = model_.input.data() + static_cast<std::size_t>(r) * model_.dim;
              for (std::size_t d = 0; d < model_.dim; ++d) Cell<Shared>::add(in[d], grad[d]);
            }
          }
        }
      }
    }
  }

 private:
  template <bool Shared>
  void compute_hidden(const std::vector<std::uint32_t>& rows, std::vector<float>& hidden) const {
    std::fill(hidden.begin(), hidden.end(), 0.0f);
    for (std::uint32_t r : rows) {
      const float* in = model_.input.data() + static_cast<std::size_t>(r) * model_.dim;
      for (std::size_t d = 0; d < model_.dim; ++d) hidden[d] += Cell<Shared>::load(in[d]);
    }
    const float inv = 1.0f / static_cast<float>(rows.size());
    for (float& h : hidden) h *= inv;
  }

  template <bool Shared>
  void binary_update(std::uint32_t target, bool label, float lr,
                     const std::vector<float>& hidden, std::vector<float>& grad) {
    float* out = model_.output.data() + static_cast<std::size_t>(target) * model_.dim;
    float dot = 0.0f;
    for (std::size_t d = 0; d < model_.dim; ++d) dot += Cell<Shared>::load(out[d]) * hidden[d];
    const float alpha = lr * ((label ? 1.0f : 0.0f) - sigmoid(dot));
    for (std::size_t d = 0; d < model_.dim; ++d) {
      grad[d] += alpha * Cell<Shared>::load(out[d]);
      Cell<Shared>::add(out[d], alpha * hidden[d]);
    }
  }

  Model& model_;
  const EmbedTrainConfig& cfg_;
  std::uint64_t total_tokens_;
};

std::vector<std::uint32_t> build_negative_table(std::span<const std::int64_t> counts,
                                                std::mt19937_64& rng) {
  double z = 0.0;
  for (auto c : counts) z += std::pow(static_cast<double>(c), kUnigramPower);
  std::vector<std::uint32_t> table;
  for (std::size_t w = 0; w < counts.size(); ++w) {
    const double share = std::pow(static_cast<double>(counts[w]), kUnigramPower) / z;
    const auto n = std::max<std::size_t>(
        1, static_cast<std::size_t>(share * static_cast<double>(kNegativeTableSize)));
    table.insert(table.end(), n, static_cast<std::uint32_t>(w));
  }
  std::shuffle(table.begin(), table.end(), rng);
  return table;
}

void write_float(std::string& out, float v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    const std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
    if (pos > start) fields.push_back(line.substr(start, pos - start));
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

[[noreturn]] void table_error(const std::filesystem::path& path, std::size_t line,
                              const std::string& what) {
  throw Error(ErrorCode::kParse,
              path.string() + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

void EmbedTrainConfig::validate() const {
  const auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "embed config: " + what);
  };
  if (dim <= 0) fail("dim must be positive");
  if (window <= 0) fail("window must be positive");
  if (negatives <= 0) fail("negatives must be positive");
  if (epochs <= 0) fail("epochs must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    fail("learning_rate must be positive");
  }
  if (min_count <= 0) fail("min_count must be positive");
  if (char_ngram_min < 0 || char_ngram_max < 0) fail("n-gram bounds must be >= 0");
  if (ngrams_enabled() && char_ngram_min > char_ngram_max) {
    fail("char_ngram_min must not exceed char_ngram_max");
  }
  if (ngram_buckets <= 0) fail("ngram_buckets must be positive");
  if (workers <= 0) fail("workers must be positive");
}

std::string EmbedTrainConfig::to_json() const {
  nlohmann::json j{
      {"dim", dim},
      {"window", window},
      {"negatives", negatives},
      {"epochs", epochs},
      {"learning_rate", learning_rate},
      {"min_count", min_count},
      {"char_ngram_min", char_ngram_min},
      {"char_ngram_max", char_ngram_max},
      {"ngram_buckets", ngram_buckets},
      {"seed", seed},
      {"workers", workers},
      {"negative_sampling_power", kUnigramPower},
  };
  return j.dump();
}

std::string EmbedTrainConfig::checksum() const { return sha256_hex(to_json()); }

std::string_view to_string(TableSource source) {
  return source == TableSource::kTrained ? "trained" : "imported";
}

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "embedding dim must be positive");
}

void EmbeddingTable::add(std::string token, std::span<const float> values) {
  if (values.size() != dim_) {
    throw Error(ErrorCode::kMismatch, "embedding row '" + token + "' has " +
                                          std::to_string(values.size()) +
                                          " components, expected " + std::to_string(dim_));
  }
  for (float v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "embedding row '" + token + "' is not finite");
    }
  }
  if (index_.contains(token)) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate embedding token '" + token + "'");
  }
  index_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
  data_.insert(data_.end(), values.begin(), values.end());
}

std::optional<std::size_t> EmbeddingTable::find(std::string_view token) const {
  const auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::span<const float>> EmbeddingTable::lookup(std::string_view token) const {
  const auto idx = find(token);
  if (!idx) return std::nullopt;
  return row(*idx);
}

EmbeddingTable EmbeddingTable::scaled(float factor) const {
  EmbeddingTable out = *this;
  for (float& v : out.data_) v *= factor;
  return out;
}

std::vector<std::string> char_ngrams(std::string_view token, int min_n, int max_n) {
  std::vector<std::string> chars{"<"};
  for (auto& c : utf8::split_chars(token)) chars.push_back(std::move(c));
  chars.emplace_back(">");
  std::vector<std::string> out;
  if (min_n <= 0 || max_n <= 0) return out;
  for (std::size_t i = 0; i < chars.size(); ++i) {
    std::string gram;
    for (std::size_t j = i, n = 1; j < chars.size() && n <= static_cast<std::size_t>(max_n);
         ++j, ++n) {
      gram += chars[j];
      if (n < static_cast<std::size_t>(min_n)) continue;
      // Lone boundary markers carry no information.
      if (n == 1 && (i == 0 || j + 1 == chars.size())) continue;
      out.push_back(gram);
    }
  }
  return out;
}

EmbeddingTable train_static_embeddings(std::span<const std::vector<TokenId>> corpus,
                                       const SubwordVocab& vocab,
                                       const EmbedTrainConfig& cfg) {
  cfg.validate();
  std::vector<std::int64_t> counts(vocab.size(), 0);
  std::uint64_t raw_tokens = 0;
  for (const auto& line : corpus) {
    for (TokenId id : line) {
      if (id < 0 || static_cast<std::size_t>(id) >= vocab.size()) {
        throw Error(ErrorCode::kMismatch,
                    "train_static_embeddings: token id " + std::to_string(id) +
                        " outside vocabulary of size " + std::to_string(vocab.size()));
      }
      ++counts[static_cast<std::size_t>(id)];
      ++raw_tokens;
    }
  }
  if (raw_tokens == 0) {
    throw Error(ErrorCode::kInvalidArgument, "train_static_embeddings: empty corpus");
  }

  // Dictionary: tokens meeting min_count, in vocabulary id order.
  std::vector<std::int32_t> dict_index(vocab.size(), -1);
  std::vector<TokenId> dict_ids;
  std::vector<std::int64_t> dict_counts;
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    if (counts[id] >= cfg.min_count) {
      dict_index[id] = static_cast<std::int32_t>(dict_ids.size());
      dict_ids.push_back(static_cast<TokenId>(id));
      dict_counts.push_back(counts[id]);
    }
  }
  if (dict_ids.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "train_static_embeddings: no token reaches min_count " +
                    std::to_string(cfg.min_count));
  }

  Model model;
  model.dim = static_cast<std::size_t>(cfg.dim);
  const auto nwords = static_cast<std::uint32_t>(dict_ids.size());

  // Only buckets that some dictionary token hashes into are materialised;
  // the rest would never be read or written.
  std::unordered_map<std::uint32_t, std::uint32_t> bucket_rows;
  std::vector<std::uint32_t> bucket_order;
  model.subwords.resize(nwords);
  for (std::uint32_t w = 0; w < nwords; ++w) {
    model.subwords[w].push_back(w);
    if (!cfg.ngrams_enabled()) continue;
    for (const auto& gram : char_ngrams(vocab.token(dict_ids[w]), cfg.char_ngram_min,
                                        cfg.char_ngram_max)) {
      const auto bucket =
          static_cast<std::uint32_t>(fnv1a(gram) % static_cast<std::uint64_t>(cfg.ngram_buckets));
      auto [it, inserted] =
          bucket_rows.try_emplace(bucket, nwords + static_cast<std::uint32_t>(bucket_order.size()));
      if (inserted) bucket_order.push_back(bucket);
      model.subwords[w].push_back(it->second);
    }
  }

  std::mt19937_64 rng(cfg.seed);
  const std::size_t input_rows = nwords + bucket_order.size();
  model.input.resize(input_rows * model.dim);
  const float bound = 1.0f / static_cast<float>(cfg.dim);
  std::uniform_real_distribution<float> init(-bound, bound);
  for (float& v : model.input) v = init(rng);
  model.output.assign(static_cast<std::size_t>(nwords) * model.dim, 0.0f);
  model.negative_table = build_negative_table(dict_counts, rng);

  std::vector<Sentence> sentences;
  std::uint64_t total = 0;
  for (const auto& line : corpus) {
    Sentence s;
    for (TokenId id : line) {
      const auto idx = dict_index[static_cast<std::size_t>(id)];
      if (idx >= 0) s.words.push_back(static_cast<std::uint32_t>(idx));
    }
    total += s.words.size();
    if (!s.words.empty()) sentences.push_back(std::move(s));
  }

  Trainer trainer(model, cfg, total);
  std::atomic<std::uint64_t> processed{0};
  const std::uint64_t base_seed = rng();
  if (cfg.workers == 1) {
    trainer.run<false>(sentences, base_seed, processed);
  } else {
    const auto nworkers = static_cast<std::size_t>(cfg.workers);
    std::vector<std::jthread> threads;
    const std::size_t chunk = (sentences.size() + nworkers - 1) / nworkers;
    for (std::size_t t = 0; t < nworkers; ++t) {
      const std::size_t begin = std::min(sentences.size(), t * chunk);
      const std::size_t end = std::min(sentences.size(), begin + chunk);
      if (begin == end) continue;
      threads.emplace_back([&, begin, end, t] {
        trainer.run<true>(std::span<const Sentence>(sentences).subspan(begin, end - begin),
                          base_seed + t, processed);
      });
    }
  }

  EmbeddingTable table(model.dim);
  std::vector<float> vec(model.dim);
  for (std::uint32_t w = 0; w < nwords; ++w) {
    std::fill(vec.begin(), vec.end(), 0.0f);
    const auto& rows = model.subwords[w];
    for (std::uint32_t r : rows) {
      const float* in = model.input.data() + static_cast<std::size_t>(r) * model.dim;
      for (std::size_t d = 0; d < model.dim; ++d) vec[d] += in[d];
    }
    for (float& v : vec) v /= static_cast<float>(rows.size());
    table.add(vocab.token(dict_ids[w]), vec);
  }
  table.metadata() = {TableSource::kTrained, cfg.checksum()};
  return table;
}

ComposedVector compose(const EmbeddingTable& table, std::span<const std::string> pieces) {
  if (pieces.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "compose: empty token sequence");
  }
  ComposedVector out;
  out.values.assign(table.dim(), 0.0);
  for (const auto& piece : pieces) {
    const auto row = table.lookup(piece);
    if (!row) {
      ++out.missing;
      continue;
    }
    for (std::size_t d = 0; d < table.dim(); ++d) out.values[d] += (*row)[d];
  }
  const double k = static_cast<double>(pieces.size());
  for (double& v : out.values) v /= k;
  return out;
}

ComposedVector compose(const EmbeddingTable& table, const SubwordVocab& vocab,
                       std::span<const TokenId> ids) {
  std::vector<std::string> pieces;
  pieces.reserve(ids.size());
  for (TokenId id : ids) pieces.push_back(vocab.token(id));
  return compose(table, pieces);
}

void save_table(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  std::string line = std::to_string(table.size()) + " " + std::to_string(table.dim()) + "\n";
  out << line;
  for (std::size_t i = 0; i < table.size(); ++i) {
    line = table.tokens()[i];
    for (float v : table.row(i)) {
      line.push_back(' ');
      write_float(line, v);
    }
    line.push_back('\n');
    out << line;
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

EmbeddingTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) table_error(path, 1, "missing header");
  const auto header = split_spaces(line);
  std::size_t count = 0;
  std::size_t dim = 0;
  if (header.size() != 2 || !parse_number(header[0], count) || !parse_number(header[1], dim) ||
      dim == 0) {
    table_error(path, 1, "malformed header, expected 'count dim'");
  }
  EmbeddingTable table(dim);
  std::vector<float> values(dim);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = split_spaces(line);
    if (fields.size() != dim + 1) {
      table_error(path, lineno,
                  "expected " + std::to_string(dim) + " components, found " +
                      std::to_string(fields.size() - 1));
    }
    for (std::size_t d = 0; d < dim; ++d) {
      if (!parse_number(fields[d + 1], values[d])) {
        table_error(path, lineno, "bad number '" + std::string(fields[d + 1]) + "'");
      }
    }
    if (table.size() == count) {
      table_error(path, lineno, "more rows than the header count " + std::to_string(count));
    }
    try {
      table.add(std::string(fields[0]), values);
    } catch (const Error& e) {
      table_error(path, lineno, e.what());
    }
  }
  if (table.size() != count) {
    table_error(path, lineno,
                "header declares " + std::to_string(count) + " rows, found " +
                    std::to_string(table.size()));
  }
  return table;
}

ImportedTable import_external_table(const std::filesystem::path& path,
                                    const SubwordVocab* expected_vocab) {
  ImportedTable result{load_table(path), std::nullopt, 0};
  result.table.metadata() = {TableSource::kImported, sha256_file(path)};
  if (expected_vocab != nullptr) {
    for (const auto& t : expected_vocab->tokens()) {
      if (result.table.find(t)) ++result.covered;
    }
    result.coverage = expected_vocab->size() == 0
                          ? 0.0
                          : static_cast<double>(result.covered) /
                                static_cast<double>(expected_vocab->size());
  }
  return result;
}

std::string table_metadata_json(const EmbeddingTable& table, const EmbedTrainConfig* cfg) {
  nlohmann::json j{
      {"source", std::string(to_string(table.metadata().source))},
      {"dim", table.dim()},
      {"count", table.size()},
      {"config_checksum", table.metadata().config_checksum},
  };
  if (cfg != nullptr) j["config"] = nlohmann::json::parse(cfg->to_json());
  return j.dump(2) + "\n";
}

}  // namespace probekit
