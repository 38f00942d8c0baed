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

#include <optional>
#include <span>
#include <string>

namespace probekit {

inline constexpr double kDefaultPue = 1.58;
// CO2e units per kWh.
inline constexpr double kDefaultCarbonIntensity = 0.954;

struct EnergyInput {
  double power_watts = 0.0;
  double hours = 0.0;
  double pue = kDefaultPue;
  double carbon_intensity = kDefaultCarbonIntensity;

  // power > 0, hours >= 0, pue > 0, carbon_intensity > 0, all finite.
  void validate() const;
};

/// pue * hours * power_watts / 1000.
double energy_kwh(const EnergyInput& input);

/// carbon_intensity * kwh.
double co2e(double kwh, double carbon_intensity = kDefaultCarbonIntensity);

struct FootprintRatio {
  double power = 0.0;
  double hours = 0.0;
  double kwh = 0.0;
  double co2e = 0.0;
};

/// Componentwise a / b. Throws when any denominator is zero.
FootprintRatio footprint_ratio(const EnergyInput& a, const EnergyInput& b);

struct FootprintRow {
  std::string label;
  EnergyInput input;
  double kwh = 0.0;
  double co2e = 0.0;
};

FootprintRow footprint(std::string label, const EnergyInput& input);

std::string footprint_json(std::span<const FootprintRow> rows,
                           const std::optional<FootprintRatio>& ratio);
std::string footprint_tsv(std::span<const FootprintRow> rows,
                          const std::optional<FootprintRatio>& ratio);

}  // namespace probekit
