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

#ifndef QSUM_HARNESS_HPP
#define QSUM_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsum/full_mean.hpp"
#include "qsum/hard_instances.hpp"

namespace qsum {

// One instance-pool entry request.
struct PoolProfile {
  enum class Kind { uniform, spiky, single_spike, hard_family } kind =
      Kind::uniform;
  std::uint64_t count = 1;
  std::uint64_t spikes = 2;       // spiky only
  double level_fraction = 0.5;    // spiky: fraction of the feasible height
};

struct ExperimentConfig {
  std::vector<std::uint64_t> lengths{8, 16, 32, 64};
  std::vector<double> ps{1.0};
  std::vector<std::uint64_t> n_grid{};
  Mode mode = Mode::sampled;
  std::uint64_t trials = 10'000;
  std::uint64_t seed = 1;
  std::vector<PoolProfile> profiles{
      {PoolProfile::Kind::uniform, 2, 0, 0.0},
      {PoolProfile::Kind::spiky, 1, 2, 0.5},
      {PoolProfile::Kind::single_spike, 1, 0, 0.0},
      {PoolProfile::Kind::hard_family, 2, 0, 0.0},
  };
  // Calibration constants.
  double m_constant = 1.0;        // threshold choice for the tail
  double c1_choose_k = 1.0;
  double c0_hard = 1.0;
  int repetitions = 3;
  double split_ratio = 1.0;
  double lstar_multiplier = 1.0;
  double success_bound_constant = 4.0;
  int r_planes = 0;               // 0: derived from epsilon_enc
  double epsilon_enc = 0x1.0p-20;
  int qubit_cap = 22;
  std::uint64_t tuple_budget = 10'000'000;
  bool timing = false;            // emit measured wall time (breaks byte-identity)
  std::string out = "results.csv";

  MeanOptions mean_options() const;
  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text);
  void validate() const;
};

struct ResultRow {
  std::uint64_t n_length = 0;  // N
  double p = 1.0;
  std::uint64_t n_requested = 0;
  std::uint64_t n_actual = 0;
  std::string algorithm;
  double error_at_quarter = 0.0;
  double success_probability = 0.0;
  double wall_time = 0.0;
  std::uint64_t seed = 0;
};

// Error-shape reference used for the success column.
double rate_bound(std::uint64_t n_length, double p, std::uint64_t n);

std::vector<ResultRow> run_sweep(const ExperimentConfig& config);

std::string rows_to_csv(const std::vector<ResultRow>& rows);
std::string rows_to_json(const std::vector<ResultRow>& rows);
// Writes the CSV; a ".csv" path also gets a JSON mirror alongside.
void write_rows(const std::vector<ResultRow>& rows, const std::string& csv_path);
std::vector<ResultRow> rows_from_csv_file(const std::string& path);

// Classical baseline: mean of n entries sampled without replacement.
OutcomeDistribution monte_carlo_baseline(const SequenceInstance& f,
                                         std::uint64_t n, std::uint64_t trials,
                                         std::uint64_t seed);
double monte_carlo_baseline_error(const SequenceInstance& f, std::uint64_t n,
                                  std::uint64_t trials, std::uint64_t seed,
                                  double theta = 0.25);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  std::size_t points = 0;
};

struct ScalingFilter {
  std::uint64_t n_length = 0;
  double p = 1.0;
  std::string algorithm = "quantum";
  std::uint64_t n_min = 0;
  std::uint64_t n_max = ~std::uint64_t{0};
  bool worst_per_n = true;
};

// Least-squares fit of log(error) against log(n) for rows in the filter;
// zero-error rows are excluded and at least 3 points are required.
ScalingFit fit_scaling(const std::vector<ResultRow>& rows,
                       const ScalingFilter& filter);

struct CalibrationRecord {
  bool passed = false;
  double lstar_multiplier = 1.0;
  double m_constant = 1.0;
  int repetitions = 3;
  double success_bound_constant = 4.0;
  std::string diagnostics;
  std::string to_json() const;
};

// Searches the smallest constants meeting the 3/4-success targets on a
// small exact-mode grid.
CalibrationRecord calibrate(const ExperimentConfig& config);

// Builds the per-(N, p) instance pool used by the sweep.
std::vector<SequenceInstance> build_instance_pool(const ExperimentConfig& config,
                                                  std::uint64_t n_length,
                                                  double p);

}  // namespace qsum

#endif  // QSUM_HARNESS_HPP
