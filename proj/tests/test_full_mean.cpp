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
#include <random>

#include "qsum/full_mean.hpp"

using namespace qsum;

namespace {

MeanOptions fast_options() {
  MeanOptions options;
  options.tail.epsilon_enc = 0x1.0p-6;
  options.trunc.r_planes = 4;
  return options;
}

SequenceInstance random_ball(std::uint64_t n, double p, std::uint64_t seed) {
  return random_ball_instance(n, PNorm{p, false}, InstanceProfile{}, seed);
}

}  // namespace

TEST_CASE("truncation exponent bracketing") {
  CHECK(choose_k(16, 256, 1.0, 1.0) == 8);
  CHECK(choose_k(128, 256, 1.0, 1.0) == 6);

  SUBCASE("the bracketing inequality holds across a grid") {
    for (std::uint64_t n_length : {64, 256, 1024}) {
      for (double p : {1.0, 1.3, 1.7}) {
        for (std::uint64_t n =
                 static_cast<std::uint64_t>(std::sqrt(double(n_length)));
             n < n_length; n += std::max<std::uint64_t>(1, n_length / 17)) {
          const int k = choose_k(n, n_length, p, 1.0);
          const double target = std::pow(
              (double(n_length) / double(n)) *
                  std::max(std::log2(double(n) / std::sqrt(double(n_length))),
                           1.0),
              2.0 / p);
          CHECK(std::exp2(k - 1) < target + 1e-9);
          CHECK(target <= std::exp2(k) + 1e-9);
        }
      }
    }
  }

  SUBCASE("nonincreasing in the budget") {
    int prev = 1 << 20;
    for (std::uint64_t n : {16, 32, 64, 128, 255}) {
      const int k = choose_k(n, 256, 1.0, 1.0);
      CHECK(k <= prev);
      prev = k;
    }
  }

  SUBCASE("out-of-regime budgets are rejected") {
    CHECK_THROWS_AS(choose_k(3, 256, 1.0, 1.0), RegimeError);
    CHECK_THROWS_AS(choose_k(256, 256, 1.0, 1.0), RegimeError);
  }
}

TEST_CASE("dominance inequality used by the composition") {
  // n^2 / N >= max(log2(n / sqrt(N)), 1) whenever n >= sqrt(N)
  for (std::uint64_t n_length : {16, 64, 256, 4096}) {
    for (double factor = 1.0; factor <= 16.0; factor *= 1.3) {
      const double n = factor * std::sqrt(double(n_length));
      if (n > double(n_length)) break;
      CHECK(n * n / double(n_length) >=
            std::max(std::log2(n / std::sqrt(double(n_length))), 1.0) - 1e-12);
    }
  }
}

TEST_CASE("classical regime returns the exact mean, bit for bit") {
  const SequenceInstance f = random_ball(32, 1.0, 3);
  const MeanResult result =
      mean_algorithm(f, 32, 1.0, fast_options(), Mode::exact, 1);
  CHECK(result.path == MeanResult::Path::classical);
  CHECK(result.estimate == mean(f));
  CHECK(result.report.classical_queries == 32);
  CHECK(result.report.quantum_queries == 0);
}

TEST_CASE("starved budgets return the zero estimate") {
  const SequenceInstance f = random_ball(64, 1.0, 5);
  const MeanResult result =
      mean_algorithm(f, 3, 1.0, fast_options(), Mode::exact, 1);
  CHECK(result.path == MeanResult::Path::trivial_zero);
  CHECK(result.estimate == 0.0);
  CHECK(result.report.total_queries() == 0);
}

TEST_CASE("zero input estimates zero in every regime") {
  SequenceInstance zero;
  zero.values.assign(16, 0.0);
  for (std::uint64_t n : {1, 4, 8, 16, 32}) {
    const MeanResult result =
        mean_algorithm(zero, n, 1.0, fast_options(), Mode::exact, 9);
    CHECK(result.estimate == 0.0);
  }
}

TEST_CASE("composed path splits the work and accounts for it") {
  SequenceInstance f;
  f.values.assign(16, 0.0);
  f.values[2] = 16.0;  // boundary spike
  const MeanOptions options = fast_options();
  const MeanResult result = mean_algorithm(f, 8, 1.0, options, Mode::exact, 17);
  CHECK(result.path == MeanResult::Path::composed);
  CHECK(result.truncation_level == choose_k(8, 16, 1.0, 1.0));
  // the spike exceeds the truncation threshold, the rest is zero: both
  // components are exact here, so the estimate matches the mean
  CHECK(result.estimate == doctest::Approx(mean(f)).epsilon(1e-6));
  CHECK(result.report.total_queries() >= 1);

  SUBCASE("budget envelope: documented multiple of the requested n") {
    // the schedule weight bounds the truncated side; the tail adds at most
    // N classical queries per repetition
    const LevelSchedule schedule = LevelSchedule::make(
        result.truncation_level,
        std::max<std::uint64_t>(1, std::uint64_t(options.split_ratio * 8)), 1.0);
    const int r = resolve_r_planes(options.trunc);
    const std::uint64_t per_rep = schedule.schedule_weight() * r + 16;
    CHECK(result.report.total_queries() <=
          std::uint64_t(options.repetitions) * per_rep);
  }
}

TEST_CASE("median composition") {
  CHECK(median_compose({1.0}) == 1.0);
  CHECK(median_compose({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median_compose({5.0, 5.0, 5.0}) == 5.0);

  SUBCASE("exact binomial success bound") {
    const double one = compose_success_lower_bound(1, 0.75);
    CHECK(one == doctest::Approx(0.75));
    const double three = compose_success_lower_bound(3, 0.75);
    CHECK(three == doctest::Approx(1.0 - (3 * 0.0625 * 0.75 + 0.015625)));
    CHECK(three >= 0.6);
    // worst case with two independent 3/4 components per repetition
    const double paired = compose_success_lower_bound(3, 0.5625);
    CHECK(paired == doctest::Approx(0.59327).epsilon(1e-4));
  }
}

TEST_CASE("split identity carries to the composed estimator") {
  SequenceInstance f;
  f.values.assign(16, 0.0);
  f.values[1] = 0.5;
  f.values[7] = 0.5;
  f.values[11] = 15.0;
  const double split = truncated_mean(f, 4.0) + tail_mean(f, 4.0);
  CHECK(split == doctest::Approx(mean(f)).epsilon(1e-12));
}

TEST_CASE("output distributions from the shared-cache runner match direct runs") {
  const SequenceInstance f = random_ball(16, 1.0, 33);
  const MeanOptions options = fast_options();
  const MeanDistribution dist =
      mean_distribution(f, 8, 1.0, options, Mode::exact, 400, 5);
  CHECK(dist.dist.total_mass() == doctest::Approx(1.0));
  CHECK(dist.truncation_level == choose_k(8, 16, 1.0, 1.0));

  // direct per-trial realizations form a statistically close law
  std::vector<Outcome> direct;
  for (int trial = 0; trial < 400; ++trial) {
    direct.push_back(Outcome{
        mean_algorithm(f, 8, 1.0, options, Mode::exact, derive_seed(99, trial))
            .estimate});
  }
  const OutcomeDistribution direct_dist =
      OutcomeDistribution::from_samples(direct);
  const double q_err = error_at_confidence(mean(f), dist.dist, 0.25);
  const double d_err = error_at_confidence(mean(f), direct_dist, 0.25);
  CHECK(std::abs(q_err - d_err) < 0.2);

  SUBCASE("deterministic paths give point masses") {
    const MeanDistribution exact =
        mean_distribution(f, 16, 1.0, options, Mode::exact, 50, 5);
    REQUIRE(exact.dist.size() == 1);
    CHECK(std::get<double>(exact.dist.support()[0].first) == mean(f));
  }
}
