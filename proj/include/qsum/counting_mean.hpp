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

#ifndef QSUM_COUNTING_MEAN_HPP
#define QSUM_COUNTING_MEAN_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "qsum/query_model.hpp"

namespace qsum {

enum class Mode { exact, sampled };

// Per-level query budgets n_l and boosting repetitions nu_l.
struct LevelSchedule {
  int top_level = 0;  // k
  std::vector<std::uint64_t> n_ell;
  std::vector<int> nu_ell;
  std::vector<int> phase_bits;  // t_l = floor(log2(n_l + 1))

  static LevelSchedule make(int top_level, std::uint64_t n, double p);
  // sum over sigma and levels of nu_l * n_l.
  std::uint64_t schedule_weight() const;
};

struct CountingConfig {
  int phase_bits = 1;  // t
  std::uint64_t queries_per_run() const {
    return (std::uint64_t{1} << phase_bits) - 1;
  }
};

// Phase-estimation counting circuit for a marked set described by a binary
// value encoder: t phase qubits, the index register, and one kickback qubit.
// One run uses exactly 2^t - 1 queries.
StagePtr build_counting_stage(const QueryDescriptor& base, int t);

// Maps a measured basis state of the counting circuit to the amplitude
// estimate sin^2(pi * omega / 2^t).
double decode_amplitude_estimate(std::uint64_t basis, int t, int system_bits);

// Exact distribution of amplitude estimates for the marked fraction.
OutcomeDistribution amplitude_estimation(const SequenceInstance& f,
                                         const QueryDescriptor& base, int t,
                                         const SimLimits& limits = SimLimits{});

// Convenience: marked set given directly as an index predicate.
OutcomeDistribution amplitude_estimation(
    const std::function<bool(std::uint64_t)>& marked, int index_bits, int t,
    const SimLimits& limits = SimLimits{});

// Closed-form phase-readout law for marked fraction a; the production
// fallback past the dense-simulation cap.
std::vector<double> counting_readout_law(double a, int t);

// One counting run: estimated marked-set size 2^{m'} * a_hat using
// floor(log2(n_budget + 1)) phase qubits.
double count_estimate(const SequenceInstance& f,
                      const std::function<bool(double)>& window,
                      std::uint64_t n_budget, std::uint64_t seed,
                      Mode mode = Mode::exact, const SimLimits& limits = SimLimits{});

// Whether z lies in the dyadic window and, if so, which bit of the
// quantized scaled value the given plane reads.
bool level_plane_bit(double z, int level, int sigma, int plane, int r_planes);

// One estimate of the signed level functional: quantize the scaled window
// values to r_planes binary digits, count each plane, and recombine. The
// result carries the window's sign ((-1)^sigma times a nonnegative part).
double level_estimator(const SequenceInstance& f, int level, int sigma,
                       std::uint64_t n_ell, int r_planes, std::uint64_t seed,
                       Mode mode = Mode::exact, const SimLimits& limits = SimLimits{});

// Lower median of repeated runs.
double lower_median(std::vector<double> values);
double median_boost(const std::function<double(std::uint64_t)>& run,
                    int repetitions, std::uint64_t seed);

// Exact binomial bound on the failure probability of a median over
// `repetitions` runs each failing with probability q.
double median_failure_bound(int repetitions, double q);

struct TruncatedOptions {
  int r_planes = 0;                // 0: derive from epsilon_enc
  double epsilon_enc = 0x1.0p-20;  // quantization target when r_planes == 0
  SimLimits limits{};
};

int resolve_r_planes(const TruncatedOptions& options);

// The full multi-level algorithm as one measured program; the circuits do
// not depend on the input, so one build serves many instances and trials.
MeasuredAlgorithm build_truncated_algorithm(std::uint64_t n_length, int top_level,
                                            std::uint64_t n, double p,
                                            const TruncatedOptions& options);

struct TruncatedResult {
  double estimate = 0.0;
  ResourceReport report;
  bool below_guarantee = false;  // budget under the scheduling threshold
};

// Estimates the truncated mean (entries below 2^k) with ~n scheduled
// queries; returns the zero estimate when the budget is below the
// scheduling threshold 2^{(1-p/2)k}.
TruncatedResult truncated_mean_algorithm(const SequenceInstance& f, int top_level,
                                         std::uint64_t n, double p,
                                         const TruncatedOptions& options,
                                         Mode mode, std::uint64_t seed);

// Combination of per-(level, sigma) signed values with 2^l weights; equals
// the truncated mean when fed the exact level functionals.
double combine_levels(int top_level,
                      const std::function<double(int, int)>& signed_level_value);

}  // namespace qsum

#endif  // QSUM_COUNTING_MEAN_HPP
