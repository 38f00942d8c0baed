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

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "probekit/error.hpp"
#include "probekit/eval.hpp"
#include "test_util.hpp"

using namespace probekit;
using probekit::testing::fixture;

namespace {

Prediction pred(std::string id, std::string rel, std::vector<std::string> ranked) {
  Prediction p{std::move(id), std::move(rel), {}, {}};
  double s = 0.0;
  for (auto& c : ranked) p.ranked.push_back({std::move(c), s -= 1.0});
  return p;
}

}  // namespace

TEST_CASE("macro p@1 weights relations equally") {
  std::vector<Triple> triples{{"a0", "s", "A", "x"}};
  std::vector<Prediction> preds{pred("a0", "A", {"x", "y"})};
  for (int i = 0; i < 99; ++i) {
    const auto id = "b" + std::to_string(i);
    triples.push_back({id, "s", "B", "x"});
    preds.push_back(pred(id, "B", {"y", "x"}));
  }
  const auto d = Dataset::from_parts(triples, {{"A", "[X] [Y]"}, {"B", "[X] [Y]"}});
  const auto r = precision_at_k(preds, d, 1);
  CHECK(r.per_relation.at("A") == 1.0);
  CHECK(r.per_relation.at("B") == 0.0);
  CHECK(r.macro == 0.5);
  CHECK(precision_at_k(preds, d, 2).macro == 1.0);
}

TEST_CASE("precision on a hand fixture") {
  // 3 relations x 4 triples; top-1 hits 3, 2, 0; top-5 hits 4, 3, 3.
  std::vector<Triple> triples;
  std::vector<Prediction> preds;
  const std::vector<std::vector<int>> gold_rank{{0, 0, 0, 1}, {0, 0, 3, 7}, {1, 2, 4, 5}};
  const std::vector<std::string> labels{"c0", "c1", "c2", "c3", "c4", "c5", "c6", "c7"};
  for (int r = 0; r < 3; ++r) {
    const auto rel = "R" + std::to_string(r);
    for (int i = 0; i < 4; ++i) {
      const auto id = rel + "#" + std::to_string(i);
      const int g = gold_rank[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)];
      triples.push_back({id, "s", rel, labels[static_cast<std::size_t>(g)]});
      preds.push_back(pred(id, rel, labels));
    }
  }
  const auto d = Dataset::from_parts(
      triples, {{"R0", "[X] [Y]"}, {"R1", "[X] [Y]"}, {"R2", "[X] [Y]"}});
  const auto p1 = precision_at_k(preds, d, 1);
  CHECK(p1.per_relation.at("R0") == 0.75);
  CHECK(p1.per_relation.at("R1") == 0.5);
  CHECK(p1.per_relation.at("R2") == 0.0);
  CHECK(p1.macro == doctest::Approx(1.25 / 3.0).epsilon(1e-15));
  const auto p5 = precision_at_k(preds, d, 5);
  CHECK(p5.macro == doctest::Approx((1.0 + 0.75 + 0.75) / 3.0).epsilon(1e-15));
  CHECK(precision_at_k(preds, d, labels.size()).macro == 1.0);
}

TEST_CASE("precision errors") {
  std::vector<Triple> triples{{"t0", "s", "R", "x"}, {"t1", "s", "R", "y"}};
  const auto d = Dataset::from_parts(triples, {{"R", "[X] [Y]"}});
  std::vector<Prediction> missing{pred("t0", "R", {"x"})};
  CHECK_THROWS_AS(precision_at_k(missing, d, 1), Error);
  std::vector<Prediction> dup{pred("t0", "R", {"x"}), pred("t0", "R", {"x"}),
                              pred("t1", "R", {"y"})};
  CHECK_THROWS_AS(precision_at_k(dup, d, 1), Error);
  std::vector<Prediction> ok{pred("t0", "R", {"x"}), pred("t1", "R", {"y"}),
                             pred("extra", "R", {"y"})};
  CHECK(precision_at_k(ok, d, 1).macro == 1.0);
  CHECK_THROWS_AS(precision_at_k(ok, d, 0), Error);
}

TEST_CASE("p1 excluding the most frequent object") {
  std::vector<Triple> triples{{"1", "s", "R", "A"}, {"2", "s", "R", "A"}, {"3", "s", "R", "B"}};
  const auto d = Dataset::from_parts(triples, {{"R", "[X] [Y]"}});
  const auto oracle = rank_oracle(d, build_candidates(d));
  CHECK(precision_at_k(oracle, d, 1).macro == doctest::Approx(2.0 / 3.0));
  const auto mf = p1_excluding_most_frequent(oracle, d);
  CHECK(mf.p1_mf == 0.0);
  CHECK(mf.dropped_relations.empty());

  std::vector<Triple> only{{"1", "s", "R", "A"}, {"2", "s", "R", "A"}, {"3", "s", "Q", "B"},
                           {"4", "s", "Q", "C"}};
  const auto d2 = Dataset::from_parts(only, {{"R", "[X] [Y]"}, {"Q", "[X] [Y]"}});
  std::vector<Prediction> preds{pred("1", "R", {"A"}), pred("2", "R", {"A"}),
                                pred("3", "Q", {"C", "B"}), pred("4", "Q", {"C", "B"})};
  const auto r = p1_excluding_most_frequent(preds, d2);
  CHECK(r.dropped_relations == std::vector<std::string>{"R"});
  // Q: MF is B by tie-break, leaving triple 4 which is correct.
  CHECK(r.p1_mf == 1.0);
}

TEST_CASE("entropy and distinct predictions") {
  std::vector<Triple> triples;
  std::vector<Prediction> same, spread;
  for (int i = 0; i < 4; ++i) {
    const auto id = std::to_string(i);
    triples.push_back({id, "s", "R", "o" + id});
    same.push_back(pred(id, "R", {"o0", "o1", "o2", "o3"}));
    std::vector<std::string> rot{"o0", "o1", "o2", "o3"};
    std::rotate(rot.begin(), rot.begin() + i, rot.end());
    spread.push_back(pred(id, "R", rot));
  }
  const auto d = Dataset::from_parts(triples, {{"R", "[X] [Y]"}});
  const auto a = diversity(same, d);
  CHECK(a.entropy_bits == 0.0);
  CHECK(a.avg_distinct_predictions == 1.0);
  const auto b = diversity(spread, d);
  CHECK(b.entropy_bits == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(b.avg_distinct_predictions == 4.0);
  CHECK(b.distinct_predictions == 4);
}

TEST_CASE("buckets by subject piece count") {
  const auto vocab = SubwordVocab::from_tokens(
      {"[UNK]", "[MASK]", "a", "b", "c", "##x", "##y", "o", "p"});
  std::vector<Triple> triples{{"1", "a", "R", "o"},
                              {"2", "ax", "R", "o"},
                              {"3", "a b", "R", "p"},
                              {"4", "axy", "R", "p"}};
  // "ax" is unknown as a whole word but splits into a ##x.
  const auto d = Dataset::from_parts(triples, {{"R", "[X] [Y]"}});
  std::vector<Prediction> preds{pred("1", "R", {"o", "p"}), pred("2", "R", {"p", "o"}),
                                pred("3", "R", {"p", "o"}), pred("4", "R", {"p", "o"})};
  const auto b = bucket_by_subject_length(preds, d, vocab);
  REQUIRE(b.size() == 3);
  CHECK(b.at(1).n == 1);
  CHECK(b.at(1).p1 == 1.0);
  CHECK(b.at(2).n == 2);
  CHECK(b.at(2).correct == 1);
  CHECK(b.at(2).p1 == 0.5);
  CHECK(b.at(3).n == 1);
  CHECK(b.at(3).p1 == 1.0);
}

TEST_CASE("metric invariants on random instances") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = probekit::testing::random_instance(seed);
    const auto d = inst.dataset();
    const auto vocab = inst.vocab();
    const auto preds = rank_static(inst.table(), vocab, d, build_candidates(d));
    const auto m = evaluate(preds, d, &vocab);
    CHECK(m.macro_p1 <= m.macro_p5);
    CHECK(m.macro_p5 <= 1.0);
    CHECK(m.entropy_bits >= 0.0);
    CHECK(m.entropy_bits <= std::log2(static_cast<double>(d.size())) + 1e-12);
    std::size_t bucket_total = 0;
    for (const auto& [_, b] : m.buckets) bucket_total += b.n;
    CHECK(bucket_total == d.size());

    std::map<std::string, std::vector<std::string>> ranked;
    for (const auto& p : preds) {
      for (const auto& c : p.ranked) ranked[p.triple_id].push_back(c.candidate);
    }
    const auto brute = probekit::testing::brute_metrics(inst.triples, ranked);
    CHECK(std::abs(m.macro_p1 - brute.macro_p1) <= 1e-9);
    CHECK(std::abs(m.macro_p5 - brute.macro_p5) <= 1e-9);
    CHECK(std::abs(m.p1_mf - brute.p1_mf) <= 1e-9);
    CHECK(std::abs(m.entropy_bits - brute.entropy) <= 1e-9);
    CHECK(std::abs(m.avg_distinct_predictions - brute.avg_distinct) <= 1e-9);
  }
}

TEST_CASE("duplicating a relation leaves macro p@1 unchanged") {
  for (std::uint64_t seed = 40; seed < 50; ++seed) {
    const auto inst = probekit::testing::random_instance(seed);
    const auto d = inst.dataset();
    const auto preds = rank_static(inst.table(), inst.vocab(), d, build_candidates(d));
    const double base = precision_at_k(preds, d, 1).macro;

    auto triples = inst.triples;
    auto specs = inst.specs;
    auto all_preds = preds;
    for (const auto& spec : inst.specs) specs.push_back({spec.relation_id + "_dup", spec.template_text});
    for (const auto& t : inst.triples) triples.push_back({t.id + "_dup", t.subject, t.relation_id + "_dup", t.object});
    for (const auto& p : preds) {
      auto q = p;
      q.triple_id += "_dup";
      q.relation_id += "_dup";
      all_preds.push_back(q);
    }
    const auto doubled = Dataset::from_parts(triples, specs);
    CHECK(precision_at_k(all_preds, doubled, 1).macro == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("mini knowledge base: frozen static report") {
  const auto d = ingest_dataset(fixture("mini_kb/triples.jsonl"),
                                fixture("mini_kb/templates.jsonl"), "en");
  const auto vocab = load_vocab(fixture("mini_kb/vocab.txt"));
  const auto table = load_table(fixture("mini_kb/table.vec"));
  const auto preds = rank_static(table, vocab, d, build_candidates(d));
  const auto m = evaluate(preds, d, &vocab);
  CHECK(m.per_relation.at("P36").p_at_1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(m.per_relation.at("P17").p_at_1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(m.per_relation.at("P1376").p_at_1 == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  CHECK(m.macro_p1 == doctest::Approx(13.0 / 18.0).epsilon(1e-15));
  CHECK(m.macro_p5 == 1.0);
  CHECK(m.p1_mf == doctest::Approx(11.0 / 12.0).epsilon(1e-15));
  CHECK(m.entropy_bits == doctest::Approx(2.7744019192887706).epsilon(1e-14));
  CHECK(m.avg_distinct_predictions == doctest::Approx(10.0 / 3.0).epsilon(1e-15));
  REQUIRE(m.buckets.size() == 3);
  CHECK(m.buckets.at(1).n == 15);
  CHECK(m.buckets.at(1).correct == 11);
  CHECK(m.buckets.at(2).n == 2);
  CHECK(m.buckets.at(2).correct == 1);
  CHECK(m.buckets.at(3).n == 1);
  CHECK(m.buckets.at(3).correct == 1);
  CHECK(m.n_triples == 18);

  const auto* lazio = &*std::find_if(preds.begin(), preds.end(),
                                     [](const Prediction& p) { return p.triple_id == "P36#5"; });
  CHECK(lazio->flags.query_oov);
  CHECK(lazio->flags.zero_norm);
  CHECK(lazio->top() == "Berlin");
}

TEST_CASE("metrics JSON is deterministic and round trips") {
  const auto d = ingest_dataset(fixture("mini_kb/triples.jsonl"),
                                fixture("mini_kb/templates.jsonl"), "en");
  const auto vocab = load_vocab(fixture("mini_kb/vocab.txt"));
  const auto table = load_table(fixture("mini_kb/table.vec"));
  const auto preds = rank_static(table, vocab, d, build_candidates(d));
  const auto m = evaluate(preds, d, &vocab);
  const auto json = metrics_json(m, "abc");
  CHECK(json == metrics_json(evaluate(preds, d, &vocab), "abc"));
  const auto back = parse_metrics_json(json);
  CHECK(back.macro_p1 == m.macro_p1);
  CHECK(back.entropy_bits == m.entropy_bits);
  CHECK(back.per_relation.size() == 3);
  CHECK(back.buckets.at(1).correct == 11);
  CHECK(metrics_json(back, "abc") == json);
  CHECK(summary_tsv(m).find("macro_p1") != std::string::npos);
  CHECK(per_relation_tsv(m).find("P1376") != std::string::npos);
  CHECK(buckets_tsv(m).find("15") != std::string::npos);
}

TEST_CASE("disabled metrics are omitted") {
  const auto d = ingest_dataset(fixture("mini_kb/triples.jsonl"),
                                fixture("mini_kb/templates.jsonl"), "en");
  const auto preds = rank_oracle(d, build_candidates(d));
  EvalOptions opts;
  opts.buckets = false;
  opts.diversity = false;
  const auto m = evaluate(preds, d, nullptr, opts);
  CHECK(m.buckets.empty());
  const auto json = metrics_json(m);
  CHECK(json.find("\"entropy_bits\"") == std::string::npos);
  CHECK_THROWS_AS(evaluate(preds, d, nullptr), Error);
}
