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

#include "probekit/energy.hpp"

#include <charconv>
#include <cmath>

#include "json.hpp"
#include "probekit/error.hpp"

namespace probekit {
namespace {

double ratio(double a, double b, const char* what) {
  if (b == 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("footprint_ratio: zero denominator for ") + what);
  }
  return a / b;
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

void EnergyInput::validate() const {
  const auto check = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kInvalidArgument, std::string("energy input: ") + what);
  };
  check(std::isfinite(power_watts) && power_watts > 0.0, "power_watts must be > 0");
  check(std::isfinite(hours) && hours >= 0.0, "hours must be >= 0");
  check(std::isfinite(pue) && pue > 0.0, "pue must be > 0");
  check(std::isfinite(carbon_intensity) && carbon_intensity > 0.0,
        "carbon_intensity must be > 0");
}

double energy_kwh(const EnergyInput& input) {
  input.validate();
  return input.pue * input.hours * input.power_watts / 1000.0;
}

double co2e(double kwh, double carbon_intensity) {
  if (!(kwh >= 0.0) || !std::isfinite(kwh)) {
    throw Error(ErrorCode::kInvalidArgument, "co2e: kwh must be finite and >= 0");
  }
  if (!(carbon_intensity > 0.0) || !std::isfinite(carbon_intensity)) {
    throw Error(ErrorCode::kInvalidArgument, "co2e: carbon_intensity must be > 0");
  }
  return carbon_intensity * kwh;
}

FootprintRatio footprint_ratio(const EnergyInput& a, const EnergyInput& b) {
  const double kwh_a = energy_kwh(a);
  const double kwh_b = energy_kwh(b);
  return {
      ratio(a.power_watts, b.power_watts, "power"),
      ratio(a.hours, b.hours, "hours"),
      ratio(kwh_a, kwh_b, "kwh"),
      ratio(co2e(kwh_a, a.carbon_intensity), co2e(kwh_b, b.carbon_intensity), "co2e"),
  };
}

FootprintRow footprint(std::string label, const EnergyInput& input) {
  const double kwh = energy_kwh(input);
  return {std::move(label), input, kwh, co2e(kwh, input.carbon_intensity)};
}

std::string footprint_json(std::span<const FootprintRow> rows,
                           const std::optional<FootprintRatio>& ratio) {
  nlohmann::json j;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"label", r.label},
                         {"power_watts", r.input.power_watts},
                         {"hours", r.input.hours},
                         {"pue", r.input.pue},
                         {"carbon_intensity", r.input.carbon_intensity},
                         {"kwh_pue", r.kwh},
                         {"co2e", r.co2e}});
  }
  if (ratio) {
    j["ratio"] = {{"power", ratio->power},
                  {"hours", ratio->hours},
                  {"kwh_pue", ratio->kwh},
                  {"co2e", ratio->co2e}};
  }
  return j.dump(2) + "\n";
}

std::string footprint_tsv(std::span<const FootprintRow> rows,
                          const std::optional<FootprintRatio>& ratio) {
  std::string out = "model\tpower_w\thours\tkwh_pue\tco2e\n";
  for (const auto& r : rows) {
    out += r.label + "\t" + fmt(r.input.power_watts) + "\t" + fmt(r.input.hours) + "\t" +
           fmt(r.kwh) + "\t" + fmt(r.co2e) + "\n";
  }
  if (ratio) {
    out += "ratio\t" + fmt(ratio->power) + "\t" + fmt(ratio->hours) + "\t" + fmt(ratio->kwh) +
           "\t" + fmt(ratio->co2e) + "\n";
  }
  return out;
}

}  // namespace probekit
