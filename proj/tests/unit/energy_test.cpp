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
#include <vector>

#include "doctest.h"
#include "probekit/energy.hpp"
#include "probekit/error.hpp"

using namespace probekit;

TEST_CASE("energy of short runs") {
  CHECK(energy_kwh({618, 5}) == doctest::Approx(4.8822).epsilon(1e-12));
  CHECK(energy_kwh({618, 0}) == 0.0);
  CHECK(energy_kwh({1000, 1, 1.0}) == 1.0);
}

TEST_CASE("energy and emissions of a long run") {
  const double kwh = energy_kwh({12041, 79});
  CHECK(kwh == doctest::Approx(1502.96).epsilon(1e-5));
  CHECK(co2e(1507) == doctest::Approx(1437.678).epsilon(1e-12));
  CHECK(co2e(kwh) == doctest::Approx(0.954 * kwh).epsilon(1e-15));
}

TEST_CASE("ratios between two runs") {
  const auto r = footprint_ratio({618, 5}, {12041, 79});
  CHECK(r.power == doctest::Approx(618.0 / 12041.0));
  CHECK(r.hours == doctest::Approx(5.0 / 79.0));
  CHECK(r.kwh == doctest::Approx(4.8822 / 1502.95784).epsilon(1e-9));
  CHECK(r.co2e == doctest::Approx(r.kwh).epsilon(1e-12));
  CHECK_THROWS_AS(footprint_ratio({618, 5}, {12041, 0}), Error);
}

TEST_CASE("energy is linear in power and hours") {
  for (double w : {1.0, 37.5, 618.0, 12041.0}) {
    for (double h : {0.5, 5.0, 79.0}) {
      const double base = energy_kwh({w, h});
      CHECK(energy_kwh({2 * w, h}) == doctest::Approx(2 * base).epsilon(1e-14));
      CHECK(energy_kwh({w, 3 * h}) == doctest::Approx(3 * base).epsilon(1e-14));
    }
  }
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(energy_kwh({0, 1}), Error);
  CHECK_THROWS_AS(energy_kwh({-5, 1}), Error);
  CHECK_THROWS_AS(energy_kwh({5, -1}), Error);
  CHECK_THROWS_AS(energy_kwh({5, 1, 0}), Error);
  CHECK_THROWS_AS(energy_kwh({5, 1, 1.58, -1}), Error);
  CHECK_THROWS_AS(co2e(-1), Error);
}

TEST_CASE("footprint rows render") {
  const std::vector<FootprintRow> rows{footprint("small", {618, 5}),
                                       footprint("large", {12041, 79})};
  const auto ratio = footprint_ratio(rows[0].input, rows[1].input);
  CHECK(rows[0].kwh == doctest::Approx(4.8822));
  const auto json = footprint_json(rows, ratio);
  CHECK(json.find("\"small\"") != std::string::npos);
  CHECK(json.find("ratio") != std::string::npos);
  const auto tsv = footprint_tsv(rows, std::nullopt);
  CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 3);
}
