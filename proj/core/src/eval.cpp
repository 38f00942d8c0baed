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

#include "probekit/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <unordered_map>

#include "json.hpp"
#include "probekit/error.hpp"

namespace probekit {
namespace {

using json = nlohmann::json;

// Index from triple id to its prediction, restricted to the dataset.
class PredictionIndex {
 public:
  PredictionIndex(std::span<const Prediction> predictions, const Dataset& dataset) {
    for (const auto& p : predictions) {
      if (dataset.find(p.triple_id) == nullptr) continue;
      if (p.ranked.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "prediction for " + p.triple_id + " is empty");
      }
      if (!by_id_.emplace(p.triple_id, &p).second) {
        throw Error(ErrorCode::kInvalidArgument, "duplicate prediction for " + p.triple_id);
      }
    }
    for (const auto& t : dataset.triples()) {
      if (!by_id_.contains(t.id)) {
        throw Error(ErrorCode::kNotFound, "triple " + t.id + " has no prediction");
      }
    }
  }

  const Prediction& at(const std::string& triple_id) const { return *by_id_.at(triple_id); }

 private:
  std::unordered_map<std::string, const Prediction*> by_id_;
};

bool in_top_k(const Prediction& p, const std::string& gold, std::size_t k) {
  const std::size_t n = std::min(k, p.ranked.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (p.ranked[i].candidate == gold) return true;
  }
  return false;
}

double mean(const std::map<std::string, double>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [_, v] : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

PrecisionResult precision_at_k(std::span<const Prediction> predictions, const Dataset& dataset,
                               std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "precision_at_k: k must be >= 1");
  const PredictionIndex index(predictions, dataset);
  PrecisionResult result;
  for (const auto& rel : dataset.relation_ids()) {
    const auto members = dataset.triples_of(rel);
    std::size_t hits = 0;
    for (std::size_t i : members) {
      const Triple& t = dataset.triples()[i];
      if (in_top_k(index.at(t.id), t.object, k)) ++hits;
    }
    result.per_relation[rel] = static_cast<double>(hits) / static_cast<double>(members.size());
  }
  result.macro = mean(result.per_relation);
  return result;
}

MostFrequentExcluded p1_excluding_most_frequent(std::span<const Prediction> predictions,
                                                const Dataset& dataset) {
  const PredictionIndex index(predictions, dataset);
  MostFrequentExcluded result;
  for (const auto& rel : dataset.relation_ids()) {
    const std::string mf = most_frequent_object(dataset, rel);
    std::size_t kept = 0;
    std::size_t hits = 0;
    for (std::size_t i : dataset.triples_of(rel)) {
      const Triple& t = dataset.triples()[i];
      if (t.object == mf) continue;
      ++kept;
      if (index.at(t.id).top() == t.object) ++hits;
    }
    if (kept == 0) {
      result.dropped_relations.push_back(rel);
      continue;
    }
    result.per_relation[rel] = static_cast<double>(hits) / static_cast<double>(kept);
  }
  result.p1_mf = mean(result.per_relation);
  return result;
}

Diversity diversity(std::span<const Prediction> predictions, const Dataset& dataset) {
  const PredictionIndex index(predictions, dataset);
  Diversity result;
  std::map<std::string, std::size_t> global;
  double distinct_sum = 0.0;
  const auto relations = dataset.relation_ids();
  for (const auto& rel : relations) {
    std::set<std::string> local;
    for (std::size_t i : dataset.triples_of(rel)) {
      const std::string& top = index.at(dataset.triples()[i].id).top();
      ++global[top];
      local.insert(top);
    }
    distinct_sum += static_cast<double>(local.size());
  }
  const auto total = static_cast<double>(dataset.size());
  for (const auto& [_, count] : global) {
    const double p = static_cast<double>(count) / total;
    result.entropy_bits -= p * std::log2(p);
  }
  // -0.0 for a single predicted object.
  result.entropy_bits = std::max(0.0, result.entropy_bits);
  result.distinct_predictions = global.size();
  result.avg_distinct_predictions =
      relations.empty() ? 0.0 : distinct_sum / static_cast<double>(relations.size());
  return result;
}

std::map<std::size_t, Bucket> bucket_by_subject_length(std::span<const Prediction> predictions,
                                                       const Dataset& dataset,
                                                       const SubwordVocab& vocab) {
  const PredictionIndex index(predictions, dataset);
  std::map<std::size_t, Bucket> buckets;
  for (const auto& t : dataset.triples()) {
    Bucket& b = buckets[tokenize(vocab, t.subject).size()];
    ++b.n;
    if (index.at(t.id).top() == t.object) ++b.correct;
  }
  for (auto& [_, b] : buckets) b.p1 = static_cast<double>(b.correct) / static_cast<double>(b.n);
  return buckets;
}

MetricsReport evaluate(std::span<const Prediction> predictions, const Dataset& dataset,
                       const SubwordVocab* vocab, const EvalOptions& options) {
  if (dataset.empty()) throw Error(ErrorCode::kInvalidArgument, "evaluate: empty dataset");
  MetricsReport report;
  report.options = options;
  report.n_triples = dataset.size();
  const auto p1 = precision_at_k(predictions, dataset, 1);
  report.macro_p1 = p1.macro;
  std::map<std::string, double> p5_values;
  if (options.p5) {
    const auto p5 = precision_at_k(predictions, dataset, 5);
    report.macro_p5 = p5.macro;
    p5_values = p5.per_relation;
  }
  for (const auto& [rel, value] : p1.per_relation) {
    RelationMetrics m;
    m.p_at_1 = value;
    m.p_at_5 = options.p5 ? p5_values.at(rel) : 0.0;
    m.n_triples = dataset.triples_of(rel).size();
    report.per_relation.emplace(rel, m);
  }
  if (options.most_frequent) {
    auto mf = p1_excluding_most_frequent(predictions, dataset);
    report.p1_mf = mf.p1_mf;
    report.mf_dropped_relations = std::move(mf.dropped_relations);
  }
  if (options.diversity) {
    const auto d = diversity(predictions, dataset);
    report.entropy_bits = d.entropy_bits;
    report.avg_distinct_predictions = d.avg_distinct_predictions;
    report.distinct_predictions = d.distinct_predictions;
  }
  if (options.buckets) {
    if (vocab == nullptr) {
      throw Error(ErrorCode::kInvalidArgument, "evaluate: length buckets need a vocabulary");
    }
    report.buckets = bucket_by_subject_length(predictions, dataset, *vocab);
  }
  return report;
}

std::string metrics_json(const MetricsReport& report, const std::string& config_checksum) {
  json j;
  j["n_triples"] = report.n_triples;
  j["macro_p1"] = report.macro_p1;
  json per_relation = json::object();
  for (const auto& [rel, m] : report.per_relation) {
    json r{{"p_at_1", m.p_at_1}, {"n_triples", m.n_triples}};
    if (report.options.p5) r["p_at_5"] = m.p_at_5;
    per_relation[rel] = std::move(r);
  }
  j["per_relation"] = std::move(per_relation);
  if (report.options.p5) j["macro_p5"] = report.macro_p5;
  if (report.options.most_frequent) {
    j["p1_mf"] = report.p1_mf;
    j["mf_dropped_relations"] = report.mf_dropped_relations;
  }
  if (report.options.diversity) {
    j["entropy_bits"] = report.entropy_bits;
    j["avg_distinct_predictions"] = report.avg_distinct_predictions;
    j["distinct_predictions"] = report.distinct_predictions;
  }
  if (report.options.buckets) {
    json buckets = json::array();
    for (const auto& [len, b] : report.buckets) {
      buckets.push_back({{"subject_length", len}, {"n", b.n}, {"correct", b.correct}, {"p1", b.p1}});
    }
    j["buckets"] = std::move(buckets);
  }
  j["metadata"] = {
      {"entropy_scope", "global_top1"},
      {"entropy_base", 2},
      {"bucket_mode", "exact_subject_token_length"},
      {"bucket_averaging", "micro"},
      {"precision_averaging", "macro_over_relations"},
      {"most_frequent_tie_break", "lexicographic"},
  };
  if (!config_checksum.empty()) j["config_checksum"] = config_checksum;
  return j.dump(2) + "\n";
}

MetricsReport parse_metrics_json(std::string_view text) {
  try {
    const auto j = json::parse(text);
    MetricsReport r;
    r.n_triples = j.at("n_triples").get<std::size_t>();
    r.macro_p1 = j.at("macro_p1").get<double>();
    r.options.p5 = j.contains("macro_p5");
    r.options.most_frequent = j.contains("p1_mf");
    r.options.diversity = j.contains("entropy_bits");
    r.options.buckets = j.contains("buckets");
    for (const auto& [rel, m] : j.at("per_relation").items()) {
      r.per_relation[rel] = {m.at("p_at_1").get<double>(), m.value("p_at_5", 0.0),
                             m.at("n_triples").get<std::size_t>()};
    }
    if (r.options.p5) r.macro_p5 = j.at("macro_p5").get<double>();
    if (r.options.most_frequent) {
      r.p1_mf = j.at("p1_mf").get<double>();
      r.mf_dropped_relations = j.value("mf_dropped_relations", std::vector<std::string>{});
    }
    if (r.options.diversity) {
      r.entropy_bits = j.at("entropy_bits").get<double>();
      r.avg_distinct_predictions = j.at("avg_distinct_predictions").get<double>();
      r.distinct_predictions = j.value("distinct_predictions", std::size_t{0});
    }
    if (r.options.buckets) {
      for (const auto& b : j.at("buckets")) {
        r.buckets[b.at("subject_length").get<std::size_t>()] = {
            b.at("n").get<std::size_t>(), b.at("correct").get<std::size_t>(),
            b.at("p1").get<double>()};
      }
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("metrics report: ") + e.what());
  }
}

std::string per_relation_tsv(const MetricsReport& report) {
  std::string out = "relation_id\tn_triples\tp_at_1\tp_at_5\n";
  for (const auto& [rel, m] : report.per_relation) {
    out += rel + "\t" + std::to_string(m.n_triples) + "\t" + fmt(m.p_at_1) + "\t" +
           (report.options.p5 ? fmt(m.p_at_5) : std::string("NA")) + "\n";
  }
  return out;
}

std::string buckets_tsv(const MetricsReport& report) {
  std::string out = "subject_length\tn\tcorrect\tp1\n";
  for (const auto& [len, b] : report.buckets) {
    out += std::to_string(len) + "\t" + std::to_string(b.n) + "\t" + std::to_string(b.correct) +
           "\t" + fmt(b.p1) + "\n";
  }
  return out;
}

std::string summary_tsv(const MetricsReport& report) {
  std::string out = "metric\tvalue\n";
  out += "n_triples\t" + std::to_string(report.n_triples) + "\n";
  out += "macro_p1\t" + fmt(report.macro_p1) + "\n";
  if (report.options.p5) out += "macro_p5\t" + fmt(report.macro_p5) + "\n";
  if (report.options.most_frequent) out += "p1_mf\t" + fmt(report.p1_mf) + "\n";
  if (report.options.diversity) {
    out += "entropy_bits\t" + fmt(report.entropy_bits) + "\n";
    out += "avg_distinct_predictions\t" + fmt(report.avg_distinct_predictions) + "\n";
  }
  return out;
}

}  // namespace probekit
