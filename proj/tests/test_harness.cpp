// Copyright 2026 The qsum authors
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "qsum/harness.hpp"

using namespace qsum;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig config;
  config.lengths = {16};
  config.ps = {1.0};
  config.n_grid = {4, 8};
  config.trials = 150;
  config.seed = 42;
  config.r_planes = 4;
  config.epsilon_enc = 0x1.0p-6;
  config.profiles = {
      {PoolProfile::Kind::uniform, 1, 0, 0.0},
      {PoolProfile::Kind::single_spike, 1, 0, 0.0},
  };
  return config;
}

}  // namespace

TEST_CASE("config parsing with overrides and defaults") {
  const std::string text = R"({
    "N": [8, 32],
    "p": [1.5],
    "n_grid": [4, 8, 16],
    "mode": "exact",
    "trials": 77,
    "seed": 9,
    "instances": [{"kind": "spiky", "count": 2, "spikes": 3, "level_fraction": 0.4}],
    "calibration": {"repetitions": 5, "split_ratio": 0.6, "r_planes": 3},
    "qubit_cap": 18,
    "timing": false,
    "out": "x.csv"
  })";
  const ExperimentConfig config = ExperimentConfig::from_json_text(text);
  CHECK(config.lengths == std::vector<std::uint64_t>{8, 32});
  CHECK(config.ps == std::vector<double>{1.5});
  CHECK(config.mode == Mode::exact);
  CHECK(config.trials == 77);
  CHECK(config.profiles.size() == 1);
  CHECK(config.profiles[0].spikes == 3);
  CHECK(config.repetitions == 5);
  CHECK(config.split_ratio == 0.6);
  CHECK(config.r_planes == 3);
  CHECK(config.qubit_cap == 18);
  CHECK(config.out == "x.csv");

  SUBCASE("invalid configs are rejected") {
    ExperimentConfig empty;
    empty.n_grid.clear();
    CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text("{\"mode\": \"banana\"}"),
                    std::invalid_argument);
  }
}

TEST_CASE("classical baseline behaviour") {
  SUBCASE("constant sequences have zero error") {
    SequenceInstance f;
    f.values.assign(32, 1.25);
    CHECK(monte_carlo_baseline_error(f, 5, 300, 3) == 0.0);
  }

  SUBCASE("full enumeration is exact") {
    SequenceInstance f;
    f.values = {1.0, 2.0, 3.0, 4.0};
    const OutcomeDistribution dist = monte_carlo_baseline(f, 4, 100, 7);
    REQUIRE(dist.size() == 1);
    CHECK(std::get<double>(dist.support()[0].first) == doctest::Approx(2.5));
  }

  SUBCASE("a rarely-sampled spike keeps the error near the full mean") {
    SequenceInstance f;
    f.values.assign(64, 0.0);
    f.values[10] = 64.0;  // mean 1
    const double err = monte_carlo_baseline_error(f, 4, 2000, 11);
    CHECK(err >= 0.9);  // miss probability (64-4)/64 is far above 1/4
  }
}

TEST_CASE("sweep rows are deterministic and well formed") {
  const ExperimentConfig config = small_config();
  const auto rows = run_sweep(config);
  // 1 (N,p) x 2 n x 2 instances x 2 algorithms
  CHECK(rows.size() == 8);
  for (const ResultRow& row : rows) {
    CHECK(row.n_actual >= 1);
    CHECK(row.error_at_quarter >= 0.0);
    CHECK(row.success_probability >= 0.0);
    CHECK(row.success_probability <= 1.0);
    CHECK(row.wall_time == 0.0);  // timing disabled by default
  }

  SUBCASE("byte-identical CSV across runs") {
    const auto again = run_sweep(config);
    CHECK(rows_to_csv(rows) == rows_to_csv(again));
  }

  SUBCASE("worker count does not change the rows") {
    setenv("QSUM_WORKERS", "1", 1);
    const auto serial = run_sweep(config);
    unsetenv("QSUM_WORKERS");
    CHECK(rows_to_csv(serial) == rows_to_csv(rows));
  }

  SUBCASE("CSV round-trips through the parser") {
    const std::string path = "/tmp/qsum_harness_test.csv";
    write_rows(rows, path);
    const auto parsed = rows_from_csv_file(path);
    REQUIRE(parsed.size() == rows.size());
    CHECK(parsed[0].algorithm == rows[0].algorithm);
    CHECK(parsed[0].error_at_quarter == rows[0].error_at_quarter);
    std::remove(path.c_str());
  }

  SUBCASE("empty grids are rejected") {
    ExperimentConfig bad = config;
    bad.n_grid.clear();
    CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);
  }
}

TEST_CASE("scaling fits recover synthetic slopes") {
  std::vector<ResultRow> rows;
  for (std::uint64_t n : {4, 8, 16, 32}) {
    ResultRow row;
    row.n_length = 64;
    row.p = 1.0;
    row.n_requested = n;
    row.algorithm = "quantum";
    row.error_at_quarter = 3.0 / (double(n) * double(n));
    rows.push_back(row);
  }
  ScalingFilter filter;
  filter.n_length = 64;
  filter.p = 1.0;
  const ScalingFit fit = fit_scaling(rows, filter);
  CHECK(fit.slope == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(fit.points == 4);

  SUBCASE("fractional exponents fit as well") {
    for (ResultRow& row : rows) {
      row.error_at_quarter = std::pow(double(row.n_requested), -1.5);
    }
    CHECK(fit_scaling(rows, filter).slope == doctest::Approx(-1.5).epsilon(1e-9));
  }

  SUBCASE("zero-error rows are excluded; too few points rejected") {
    rows[0].error_at_quarter = 0.0;
    rows[1].error_at_quarter = 0.0;
    CHECK_THROWS_AS(fit_scaling(rows, filter), std::invalid_argument);
  }
}

TEST_CASE("rate bound shape") {
  // n^{-2} N at p = 1 within the log-free regime
  CHECK(rate_bound(64, 1.0, 8) == doctest::Approx(1.0));
  CHECK(rate_bound(64, 1.0, 16) < rate_bound(64, 1.0, 8));
}

TEST_CASE("instance pools honor the profile list") {
  const ExperimentConfig config = small_config();
  const auto pool = build_instance_pool(config, 16, 1.0);
  REQUIRE(pool.size() == 2);
  CHECK(pool[0].size() == 16);
  // the single-spike instance carries the full-norm spike
  CHECK(lp_norm(pool[1], PNorm{1.0, false}) == doctest::Approx(1.0));
}
