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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "probekit/embed.hpp"
#include "probekit/energy.hpp"
#include "probekit/eval.hpp"
#include "probekit/rank.hpp"
#include "probekit/vocab.hpp"

namespace probekit::cli {

struct EnergyRun {
  std::string label;
  double power_watts = 0.0;
  double hours = 0.0;
};

struct ReportRun {
  std::string model;
  std::size_t vocab_size = 0;
  std::filesystem::path predictions;
};

struct InputPaths {
  std::filesystem::path corpus;
  std::filesystem::path triples;
  std::filesystem::path templates;
  std::filesystem::path vocab;
  std::filesystem::path table;
  std::filesystem::path predictions;
  std::filesystem::path manifest;
  std::filesystem::path scores;
  std::filesystem::path stub;
  // Named id lists, e.g. "uhn".
  std::map<std::string, std::filesystem::path> subsets;
};

struct RunConfig {
  InputPaths paths;
  std::string language = "en";
  std::vector<std::size_t> vocab_sizes{30000};
  // target_size is taken from vocab_sizes.
  VocabTrainConfig vocab;
  EmbedTrainConfig embed;
  StaticRankOptions rank;
  EvalOptions eval;
  // Subset name applied by evaluate; empty = full dataset.
  std::string eval_subset;
  std::vector<EnergyRun> energy_runs;
  double pue = kDefaultPue;
  double carbon_intensity = kDefaultCarbonIntensity;
  // Labels of the numerator and denominator runs.
  std::optional<std::pair<std::string, std::string>> energy_ratio;
  std::vector<ReportRun> report_runs;
  std::string report_subset = "uhn";
  std::filesystem::path output = "out";
  bool deterministic = false;

  /// Relative paths are resolved against `base_dir`. Unknown keys are
  /// rejected.
  static RunConfig from_json(std::string_view text, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);

  /// Canonical JSON of every setting except the output directory.
  std::string to_json() const;
  std::string checksum() const;

  /// Vocab sizes positive, nested configs valid, referenced paths exist.
  void validate() const;
  /// Forces single-worker modes.
  void apply_deterministic();
};

/// Shortest round-trip decimal rendering.
std::string format_number(double value);

}  // namespace probekit::cli
