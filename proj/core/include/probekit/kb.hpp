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
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace probekit {

inline constexpr std::string_view kSubjectSlot = "[X]";
inline constexpr std::string_view kObjectSlot = "[Y]";

struct Triple {
  std::string id;
  std::string subject;
  std::string relation_id;
  std::string object;

  friend bool operator==(const Triple&, const Triple&) = default;
};

struct RelationSpec {
  std::string relation_id;
  // Contains exactly one [X] and one [Y].
  std::string template_text;

  void validate() const;
};

// Immutable collection of triples grouped by relation. Triples keep their
// input order; relations are iterated in lexicographic id order.
class Dataset {
 public:
  Dataset() = default;

  // Validates ids, fields and that every relation has a template.
  static Dataset from_parts(std::vector<Triple> triples, std::vector<RelationSpec> specs,
                            std::string language = {});

  const std::vector<Triple>& triples() const noexcept { return triples_; }
  std::size_t size() const noexcept { return triples_.size(); }
  bool empty() const noexcept { return triples_.empty(); }
  const std::string& language() const noexcept { return language_; }

  // Relations with at least one triple, sorted.
  std::vector<std::string> relation_ids() const;
  std::span<const std::size_t> triples_of(std::string_view relation_id) const;
  const RelationSpec& spec(std::string_view relation_id) const;
  const std::map<std::string, RelationSpec, std::less<>>& specs() const noexcept {
    return specs_;
  }
  const Triple* find(std::string_view triple_id) const;

 private:
  std::vector<Triple> triples_;
  std::map<std::string, RelationSpec, std::less<>> specs_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_relation_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::string language_;
};

struct CandidateSet {
  std::string relation_id;
  // Distinct, lexicographically sorted.
  std::vector<std::string> candidates;

  bool contains(std::string_view object) const;
};

using CandidateMap = std::map<std::string, CandidateSet, std::less<>>;

/// Reads triples ({id?, sub_label, obj_label, predicate_id}) and templates
/// ({relation, template}) as JSON lines. Missing ids become
/// "<predicate_id>#<index within the relation>".
Dataset ingest_dataset(const std::filesystem::path& triples_path,
                       const std::filesystem::path& templates_path,
                       std::string language_tag);
Dataset parse_dataset(std::istream& triples, std::istream& templates,
                      std::string language_tag);

/// Per relation, the distinct gold objects of its triples.
CandidateMap build_candidates(const Dataset& dataset);

struct SubsetResult {
  Dataset dataset;
  // Listed ids that do not occur in the dataset.
  std::size_t unknown_ids = 0;
  std::vector<std::string> unknown_sample;
};

/// Keeps exactly the listed triples; relations left empty disappear.
SubsetResult apply_subset(const Dataset& dataset, std::span<const std::string> ids);

/// Plain-text id list, one per line; blank lines are ignored.
std::vector<std::string> read_id_list(const std::filesystem::path& path);

/// Gold object frequencies of one relation, keyed by object.
std::map<std::string, std::size_t, std::less<>> gold_object_counts(const Dataset& dataset,
                                                                  std::string_view relation_id);

/// The relation's most frequent gold object; ties go to the
/// lexicographically smallest object.
std::string most_frequent_object(const Dataset& dataset, std::string_view relation_id);

/// Substitutes the subject for [X] and `mask_count` space-separated [MASK]
/// tokens for [Y].
std::string instantiate_query(const RelationSpec& spec, std::string_view subject,
                              int mask_count);

}  // namespace probekit
