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

#include "probekit/kb.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "json.hpp"
#include "probekit/error.hpp"
#include "probekit/vocab.hpp"

namespace probekit {
namespace {

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

std::string required_string(const nlohmann::json& j, const char* key, std::size_t lineno,
                            std::string_view what) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string() || it->get_ref<const std::string&>().empty()) {
    throw Error(ErrorCode::kParse, std::string(what) + " line " + std::to_string(lineno) +
                                       ": missing or empty string field '" + key + "'");
  }
  return it->get<std::string>();
}

template <typename Fn>
void for_each_json_line(std::istream& in, std::string_view what, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kParse, std::string(what) + " line " + std::to_string(lineno) +
                                         ": malformed JSON (" + e.what() + ")");
    }
    if (!j.is_object()) {
      throw Error(ErrorCode::kParse, std::string(what) + " line " + std::to_string(lineno) +
                                         ": expected a JSON object");
    }
    fn(j, lineno);
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

}  // namespace

void RelationSpec::validate() const {
  if (relation_id.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "relation spec with empty relation id");
  }
  if (count_occurrences(template_text, kSubjectSlot) != 1 ||
      count_occurrences(template_text, kObjectSlot) != 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "template for " + relation_id + " must contain exactly one [X] and one [Y]: '" +
                    template_text + "'");
  }
}

Dataset Dataset::from_parts(std::vector<Triple> triples, std::vector<RelationSpec> specs,
                            std::string language) {
  Dataset d;
  d.language_ = std::move(language);
  for (auto& s : specs) {
    s.validate();
    const std::string key = s.relation_id;
    if (!d.specs_.emplace(key, std::move(s)).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate template for relation " + key);
    }
  }
  std::set<std::string> unknown;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const Triple& t = triples[i];
    if (t.id.empty() || t.subject.empty() || t.relation_id.empty() || t.object.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "triple #" + std::to_string(i) + " has an empty field");
    }
    if (!d.by_id_.emplace(t.id, i).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate triple id " + t.id);
    }
    if (!d.specs_.contains(t.relation_id)) unknown.insert(t.relation_id);
    d.by_relation_[t.relation_id].push_back(i);
  }
  if (!unknown.empty()) {
    std::string list;
    for (const auto& r : unknown) list += (list.empty() ? "" : ", ") + r;
    throw Error(ErrorCode::kNotFound, "triples reference relations without a template: " + list);
  }
  d.triples_ = std::move(triples);
  return d;
}

std::vector<std::string> Dataset::relation_ids() const {
  std::vector<std::string> ids;
  ids.reserve(by_relation_.size());
  for (const auto& [rel, _] : by_relation_) ids.push_back(rel);
  return ids;
}

std::span<const std::size_t> Dataset::triples_of(std::string_view relation_id) const {
  const auto it = by_relation_.find(relation_id);
  if (it == by_relation_.end()) return {};
  return it->second;
}

const RelationSpec& Dataset::spec(std::string_view relation_id) const {
  const auto it = specs_.find(relation_id);
  if (it == specs_.end()) {
    throw Error(ErrorCode::kNotFound, "no template for relation " + std::string(relation_id));
  }
  return it->second;
}

const Triple* Dataset::find(std::string_view triple_id) const {
  const auto it = by_id_.find(triple_id);
  return it == by_id_.end() ? nullptr : &triples_[it->second];
}

bool CandidateSet::contains(std::string_view object) const {
  return std::binary_search(candidates.begin(), candidates.end(), object);
}

Dataset parse_dataset(std::istream& triples, std::istream& templates, std::string language_tag) {
  std::vector<RelationSpec> specs;
  for_each_json_line(templates, "templates", [&](const nlohmann::json& j, std::size_t lineno) {
    specs.push_back({required_string(j, "relation", lineno, "templates"),
                     required_string(j, "template", lineno, "templates")});
  });

  std::vector<Triple> out;
  std::map<std::string, std::size_t> per_relation;
  for_each_json_line(triples, "triples", [&](const nlohmann::json& j, std::size_t lineno) {
    Triple t;
    t.subject = required_string(j, "sub_label", lineno, "triples");
    t.object = required_string(j, "obj_label", lineno, "triples");
    t.relation_id = required_string(j, "predicate_id", lineno, "triples");
    const std::size_t index = per_relation[t.relation_id]++;
    if (j.contains("id")) {
      t.id = required_string(j, "id", lineno, "triples");
    } else {
      t.id = t.relation_id + "#" + std::to_string(index);
    }
    out.push_back(std::move(t));
  });
  return Dataset::from_parts(std::move(out), std::move(specs), std::move(language_tag));
}

Dataset ingest_dataset(const std::filesystem::path& triples_path,
                       const std::filesystem::path& templates_path, std::string language_tag) {
  auto triples = open_input(triples_path);
  auto templates = open_input(templates_path);
  return parse_dataset(triples, templates, std::move(language_tag));
}

CandidateMap build_candidates(const Dataset& dataset) {
  CandidateMap out;
  for (const auto& rel : dataset.relation_ids()) {
    std::set<std::string> objects;
    for (std::size_t i : dataset.triples_of(rel)) objects.insert(dataset.triples()[i].object);
    out.emplace(rel, CandidateSet{rel, {objects.begin(), objects.end()}});
  }
  return out;
}

SubsetResult apply_subset(const Dataset& dataset, std::span<const std::string> ids) {
  std::set<std::string, std::less<>> wanted(ids.begin(), ids.end());
  SubsetResult result;
  for (const auto& id : wanted) {
    if (dataset.find(id) == nullptr) {
      ++result.unknown_ids;
      if (result.unknown_sample.size() < 10) result.unknown_sample.push_back(id);
    }
  }
  std::vector<Triple> kept;
  for (const auto& t : dataset.triples()) {
    if (wanted.contains(t.id)) kept.push_back(t);
  }
  std::vector<RelationSpec> specs;
  for (const auto& [_, spec] : dataset.specs()) specs.push_back(spec);
  result.dataset = Dataset::from_parts(std::move(kept), std::move(specs), dataset.language());
  return result;
}

std::vector<std::string> read_id_list(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    ids.push_back(line.substr(first, last - first + 1));
  }
  return ids;
}

std::map<std::string, std::size_t, std::less<>> gold_object_counts(const Dataset& dataset,
                                                                  std::string_view relation_id) {
  std::map<std::string, std::size_t, std::less<>> counts;
  for (std::size_t i : dataset.triples_of(relation_id)) ++counts[dataset.triples()[i].object];
  return counts;
}

std::string most_frequent_object(const Dataset& dataset, std::string_view relation_id) {
  const auto counts = gold_object_counts(dataset, relation_id);
  if (counts.empty()) {
    throw Error(ErrorCode::kNotFound, "relation " + std::string(relation_id) + " has no triples");
  }
  // Map order is lexicographic, so strict > keeps the smallest on ties.
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

std::string instantiate_query(const RelationSpec& spec, std::string_view subject,
                              int mask_count) {
  if (mask_count < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "instantiate_query: mask count must be >= 1, got " + std::to_string(mask_count));
  }
  spec.validate();
  std::string masks;
  for (int i = 0; i < mask_count; ++i) {
    if (i > 0) masks.push_back(' ');
    masks.append(kMaskToken);
  }
  // Slots are located in the template before substitution so a subject
  // containing "[Y]" is left intact.
  const std::string_view tmpl = spec.template_text;
  const std::size_t x = tmpl.find(kSubjectSlot);
  const std::size_t y = tmpl.find(kObjectSlot);
  const bool subject_first = x < y;
  const std::size_t first = subject_first ? x : y;
  const std::size_t second = subject_first ? y : x;
  const std::size_t first_len = subject_first ? kSubjectSlot.size() : kObjectSlot.size();
  const std::size_t second_len = subject_first ? kObjectSlot.size() : kSubjectSlot.size();
  std::string out;
  out.append(tmpl.substr(0, first));
  out.append(subject_first ? subject : std::string_view(masks));
  out.append(tmpl.substr(first + first_len, second - first - first_len));
  out.append(subject_first ? std::string_view(masks) : subject);
  out.append(tmpl.substr(second + second_len));
  return out;
}

}  // namespace probekit
