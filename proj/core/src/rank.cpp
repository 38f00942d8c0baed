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

#include "probekit/rank.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <thread>
#include <unordered_map>

#include "json.hpp"
#include "probekit/error.hpp"

namespace probekit {
namespace {

using json = nlohmann::json;

// Score given to a candidate the external scorer skipped.
constexpr double kSkippedScore = std::numeric_limits<double>::lowest();

ComposedVector compose_text(const EmbeddingTable& table, const SubwordVocab& vocab,
                            std::string_view text) {
  const auto ids = tokenize(vocab, text);
  if (ids.empty()) {
    return ComposedVector{std::vector<double>(table.dim(), 0.0), 1};
  }
  return compose(table, vocab, ids);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

template <typename Fn>
void read_json_lines(const std::filesystem::path& path, Fn&& fn) {
  auto in = open_input(path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse,
                  path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

using PairKey = std::pair<std::string_view, std::string_view>;

struct PairHash {
  std::size_t operator()(const PairKey& k) const noexcept {
    const std::size_t h1 = std::hash<std::string_view>{}(k.first);
    const std::size_t h2 = std::hash<std::string_view>{}(k.second);
    return h1 ^ (h2 + 0x9e3779b97f4a7c15ULL + (h1 << 6) + (h1 >> 2));
  }
};

}  // namespace

void sort_ranked(std::vector<ScoredCandidate>& ranked) {
  std::sort(ranked.begin(), ranked.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.candidate < b.candidate;
  });
}

CosineScore cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kMismatch, "cosine: dimension mismatch");
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return {-1.0, true};
  return {dot / (std::sqrt(na) * std::sqrt(nb)), false};
}

std::vector<Prediction> rank_static(const EmbeddingTable& table, const SubwordVocab& vocab,
                                    const Dataset& dataset, const CandidateMap& candidates,
                                    const StaticRankOptions& options) {
  struct Job {
    const Triple* triple;
    const CandidateSet* set;
  };
  std::vector<Job> jobs;
  std::unordered_map<std::string, ComposedVector> cand_vecs;
  for (const auto& rel : dataset.relation_ids()) {
    const auto it = candidates.find(rel);
    if (it == candidates.end()) {
      throw Error(ErrorCode::kNotFound, "rank_static: no candidate set for relation " + rel);
    }
    for (const auto& c : it->second.candidates) {
      if (!cand_vecs.contains(c)) cand_vecs.emplace(c, compose_text(table, vocab, c));
    }
    for (std::size_t i : dataset.triples_of(rel)) jobs.push_back({&dataset.triples()[i], &it->second});
  }

  std::vector<Prediction> out(jobs.size());
  const auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const Triple& t = *jobs[j].triple;
      Prediction p;
      p.triple_id = t.id;
      p.relation_id = t.relation_id;
      const auto query = compose_text(table, vocab, t.subject);
      p.flags.query_oov = query.has_missing();
      for (const auto& c : jobs[j].set->candidates) {
        if (options.exclude_subject && c == t.subject) continue;
        const auto& cv = cand_vecs.at(c);
        if (cv.has_missing()) ++p.flags.oov_candidates;
        const auto s = cosine(query.values, cv.values);
        p.flags.zero_norm = p.flags.zero_norm || s.zero_norm;
        p.ranked.push_back({c, s.value});
      }
      sort_ranked(p.ranked);
      out[j] = std::move(p);
    }
  };

  const auto workers = static_cast<std::size_t>(std::max(1, options.workers));
  if (workers == 1 || jobs.size() < 2) {
    run(0, jobs.size());
  } else {
    const std::size_t chunk = (jobs.size() + workers - 1) / workers;
    std::vector<std::jthread> threads;
    for (std::size_t begin = 0; begin < jobs.size(); begin += chunk) {
      threads.emplace_back(run, begin, std::min(jobs.size(), begin + chunk));
    }
  }
  return out;
}

std::vector<Prediction> rank_oracle(const Dataset& dataset, const CandidateMap& candidates) {
  std::vector<Prediction> out;
  for (const auto& rel : dataset.relation_ids()) {
    const auto it = candidates.find(rel);
    if (it == candidates.end()) {
      throw Error(ErrorCode::kNotFound, "rank_oracle: no candidate set for relation " + rel);
    }
    const auto counts = gold_object_counts(dataset, rel);
    const auto n = static_cast<double>(dataset.triples_of(rel).size());
    std::vector<ScoredCandidate> ranked;
    for (const auto& c : it->second.candidates) {
      const auto cnt = counts.find(c);
      ranked.push_back({c, cnt == counts.end() ? 0.0 : static_cast<double>(cnt->second) / n});
    }
    sort_ranked(ranked);
    for (std::size_t i : dataset.triples_of(rel)) {
      const Triple& t = dataset.triples()[i];
      out.push_back(Prediction{t.id, t.relation_id, ranked, {}});
    }
  }
  return out;
}

std::vector<ManifestRow> build_mlm_manifest(const Dataset& dataset,
                                            const CandidateMap& candidates,
                                            const SubwordVocab& scorer_vocab) {
  struct Encoded {
    std::vector<TokenId> ids;
    bool unk_only = false;
  };
  std::map<std::string, Encoded, std::less<>> encoded;
  std::vector<ManifestRow> rows;
  for (const auto& rel : dataset.relation_ids()) {
    const auto it = candidates.find(rel);
    if (it == candidates.end()) {
      throw Error(ErrorCode::kNotFound, "manifest: no candidate set for relation " + rel);
    }
    const RelationSpec& spec = dataset.spec(rel);
    for (const auto& c : it->second.candidates) {
      if (encoded.contains(c)) continue;
      Encoded e;
      e.ids = tokenize(scorer_vocab, c);
      if (e.ids.empty()) e.ids.push_back(scorer_vocab.unk_id());
      e.unk_only = std::all_of(e.ids.begin(), e.ids.end(),
                               [&](TokenId id) { return id == scorer_vocab.unk_id(); });
      encoded.emplace(c, std::move(e));
    }
    for (std::size_t i : dataset.triples_of(rel)) {
      const Triple& t = dataset.triples()[i];
      for (const auto& c : it->second.candidates) {
        const Encoded& e = encoded.find(c)->second;
        ManifestRow row;
        row.triple_id = t.id;
        row.relation_id = rel;
        row.candidate = c;
        row.query_text = instantiate_query(spec, t.subject, static_cast<int>(e.ids.size()));
        row.mask_token_ids = e.ids;
        for (TokenId id : e.ids) row.mask_tokens.push_back(scorer_vocab.token(id));
        row.unk_only = e.unk_only;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

void write_mlm_manifest(std::span<const ManifestRow> rows, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (const auto& r : rows) {
    json j{
        {"triple_id", r.triple_id},
        {"relation_id", r.relation_id},
        {"candidate", r.candidate},
        {"query_text", r.query_text},
        {"mask_count", r.mask_token_ids.size()},
        {"mask_token_ids", r.mask_token_ids},
        {"mask_tokens", r.mask_tokens},
        {"unk_only", r.unk_only},
    };
    out << j.dump() << '\n';
  }
}

std::vector<ManifestRow> read_mlm_manifest(const std::filesystem::path& path) {
  std::vector<ManifestRow> rows;
  read_json_lines(path, [&](const json& j) {
    ManifestRow r;
    r.triple_id = j.at("triple_id").get<std::string>();
    r.relation_id = j.at("relation_id").get<std::string>();
    r.candidate = j.at("candidate").get<std::string>();
    r.query_text = j.at("query_text").get<std::string>();
    r.mask_token_ids = j.at("mask_token_ids").get<std::vector<TokenId>>();
    r.mask_tokens = j.value("mask_tokens", std::vector<std::string>{});
    r.unk_only = j.value("unk_only", false);
    if (r.mask_token_ids.empty()) {
      throw Error(ErrorCode::kParse, "manifest row without mask tokens");
    }
    rows.push_back(std::move(r));
  });
  return rows;
}

std::size_t export_mlm_manifest(const Dataset& dataset, const CandidateMap& candidates,
                                const SubwordVocab& scorer_vocab,
                                const std::filesystem::path& out_path) {
  const auto rows = build_mlm_manifest(dataset, candidates, scorer_vocab);
  write_mlm_manifest(rows, out_path);
  return rows.size();
}

void MlmScoreRecord::validate() const {
  const std::string where = "score record (" + triple_id + ", " + candidate + ")";
  if (token_logprobs.empty()) {
    throw Error(ErrorCode::kInvalidArgument, where + ": empty token_logprobs");
  }
  for (double v : token_logprobs) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, where + ": non-finite log-prob");
    if (v > 0.0) throw Error(ErrorCode::kInvalidArgument, where + ": positive log-prob");
  }
}

double MlmScoreRecord::mean_logprob() const {
  return std::accumulate(token_logprobs.begin(), token_logprobs.end(), 0.0) /
         static_cast<double>(token_logprobs.size());
}

std::vector<MlmScoreRecord> read_score_file(const std::filesystem::path& path) {
  std::vector<MlmScoreRecord> records;
  read_json_lines(path, [&](const json& j) {
    MlmScoreRecord r;
    r.triple_id = j.at("triple_id").get<std::string>();
    r.candidate = j.at("candidate").get<std::string>();
    // NaN is not representable in JSON; null entries stand in for it.
    for (const auto& v : j.at("token_logprobs")) {
      r.token_logprobs.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                             : v.get<double>());
    }
    r.validate();
    records.push_back(std::move(r));
  });
  return records;
}

void write_score_file(std::span<const MlmScoreRecord> records,
                      const std::filesystem::path& path) {
  auto out = open_output(path);
  for (const auto& r : records) {
    json j{{"triple_id", r.triple_id},
           {"candidate", r.candidate},
           {"token_logprobs", r.token_logprobs}};
    out << j.dump() << '\n';
  }
}

std::vector<Prediction> rank_mlm(std::span<const ManifestRow> manifest,
                                 std::span<const MlmScoreRecord> scores) {
  std::unordered_map<PairKey, const MlmScoreRecord*, PairHash> by_pair;
  by_pair.reserve(scores.size());
  for (const auto& r : scores) {
    r.validate();
    if (!by_pair.emplace(PairKey{r.triple_id, r.candidate}, &r).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate score record for (" + r.triple_id + ", " + r.candidate + ")");
    }
  }

  std::vector<Prediction> out;
  std::unordered_map<std::string_view, std::size_t> slot;
  std::vector<std::string> missing;
  std::size_t missing_total = 0;
  std::size_t matched = 0;
  for (const auto& row : manifest) {
    auto [it, inserted] = slot.try_emplace(row.triple_id, out.size());
    if (inserted) out.push_back(Prediction{row.triple_id, row.relation_id, {}, {}});
    Prediction& p = out[it->second];
    const auto rec = by_pair.find(PairKey{row.triple_id, row.candidate});
    if (rec == by_pair.end()) {
      if (row.unk_only) {
        ++p.flags.skipped_candidates;
        p.ranked.push_back({row.candidate, kSkippedScore});
        continue;
      }
      if (missing.size() < 10) missing.push_back("(" + row.triple_id + ", " + row.candidate + ")");
      ++missing_total;
      continue;
    }
    ++matched;
    if (rec->second->token_logprobs.size() != row.mask_token_ids.size()) {
      throw Error(ErrorCode::kMismatch,
                  "score record (" + row.triple_id + ", " + row.candidate + ") has " +
                      std::to_string(rec->second->token_logprobs.size()) +
                      " log-probs, manifest expects " +
                      std::to_string(row.mask_token_ids.size()));
    }
    p.ranked.push_back({row.candidate, rec->second->mean_logprob()});
  }
  if (missing_total > 0) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorCode::kNotFound, std::to_string(missing_total) +
                                          " manifest pairs have no score record; first: " + list);
  }
  if (matched != scores.size()) {
    throw Error(ErrorCode::kMismatch, std::to_string(scores.size() - matched) +
                                          " score records do not correspond to manifest rows");
  }
  for (auto& p : out) sort_ranked(p.ranked);
  return out;
}

std::vector<Prediction> rank_mlm(const std::filesystem::path& manifest_path,
                                 const std::filesystem::path& score_path) {
  const auto manifest = read_mlm_manifest(manifest_path);
  const auto scores = read_score_file(score_path);
  return rank_mlm(manifest, scores);
}

StubScorer StubScorer::from_json(std::string_view text) {
  StubScorer s;
  try {
    const auto j = json::parse(text);
    s.default_logprob = j.value("default_logprob", -10.0);
    if (const auto it = j.find("tokens"); it != j.end()) {
      for (const auto& [tok, v] : it->items()) s.token_logprobs[tok] = v.get<double>();
    }
    if (const auto it = j.find("entries"); it != j.end()) {
      for (const auto& e : *it) {
        s.entries[{e.at("triple_id").get<std::string>(), e.at("candidate").get<std::string>()}] =
            e.at("token_logprobs").get<std::vector<double>>();
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("stub scorer lookup: ") + e.what());
  }
  const auto check = [](double v) {
    if (!std::isfinite(v) || v > 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "stub scorer lookup: log-probs must be finite and <= 0");
    }
  };
  check(s.default_logprob);
  for (const auto& [_, v] : s.token_logprobs) check(v);
  for (const auto& [_, vs] : s.entries) {
    for (double v : vs) check(v);
  }
  return s;
}

StubScorer StubScorer::load(const std::filesystem::path& path) {
  auto in = open_input(path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

std::vector<MlmScoreRecord> StubScorer::score(std::span<const ManifestRow> manifest) const {
  std::vector<MlmScoreRecord> out;
  out.reserve(manifest.size());
  for (const auto& row : manifest) {
    MlmScoreRecord r{row.triple_id, row.candidate, {}};
    if (const auto it = entries.find({row.triple_id, row.candidate}); it != entries.end()) {
      if (it->second.size() != row.mask_token_ids.size()) {
        throw Error(ErrorCode::kMismatch, "stub entry (" + row.triple_id + ", " + row.candidate +
                                              ") length differs from the mask count");
      }
      r.token_logprobs = it->second;
    } else {
      for (std::size_t i = 0; i < row.mask_token_ids.size(); ++i) {
        const std::string tok =
            i < row.mask_tokens.size() ? row.mask_tokens[i] : std::to_string(row.mask_token_ids[i]);
        const auto t = token_logprobs.find(tok);
        r.token_logprobs.push_back(t == token_logprobs.end() ? default_logprob : t->second);
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_predictions(std::span<const Prediction> predictions,
                       const std::filesystem::path& path) {
  auto out = open_output(path);
  for (const auto& p : predictions) {
    json ranked = json::array();
    for (const auto& c : p.ranked) ranked.push_back(json::array({c.candidate, c.score}));
    json j{
        {"triple_id", p.triple_id},
        {"relation_id", p.relation_id},
        {"ranked", std::move(ranked)},
        {"flags",
         {{"query_oov", p.flags.query_oov},
          {"zero_norm", p.flags.zero_norm},
          {"oov_candidates", p.flags.oov_candidates},
          {"skipped_candidates", p.flags.skipped_candidates}}},
    };
    out << j.dump() << '\n';
  }
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::vector<Prediction> out;
  read_json_lines(path, [&](const json& j) {
    Prediction p;
    p.triple_id = j.at("triple_id").get<std::string>();
    p.relation_id = j.at("relation_id").get<std::string>();
    for (const auto& c : j.at("ranked")) {
      p.ranked.push_back({c.at(0).get<std::string>(), c.at(1).get<double>()});
    }
    if (p.ranked.empty()) throw Error(ErrorCode::kParse, "prediction with no candidates");
    if (const auto f = j.find("flags"); f != j.end()) {
      p.flags.query_oov = f->value("query_oov", false);
      p.flags.zero_norm = f->value("zero_norm", false);
      p.flags.oov_candidates = f->value("oov_candidates", std::size_t{0});
      p.flags.skipped_candidates = f->value("skipped_candidates", std::size_t{0});
    }
    out.push_back(std::move(p));
  });
  return out;
}

}  // namespace probekit
