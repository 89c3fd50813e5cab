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

#ifndef QSUM_FULL_MEAN_HPP
#define QSUM_FULL_MEAN_HPP

#include <cstdint>

#include "qsum/counting_mean.hpp"
#include "qsum/tail_grover.hpp"

namespace qsum {

// Truncation exponent k with 2^{k-1} < c1 (N/n)^{2/p} max(log2(n/sqrt N),1)^{2/p} <= 2^k.
// Requires sqrt(N) <= n < N.
int choose_k(std::uint64_t n, std::uint64_t n_length, double p, double c1_cal);

struct MeanOptions {
  double split_ratio = 1.0;   // budget fraction for the truncated component
  int repetitions = 3;        // median repetitions of (truncated + tail)
  double c1_choose_k = 1.0;
  double c0_trivial = 1.0;    // below c0 * sqrt(N) return the zero estimate
  TailOptions tail{};
  TruncatedOptions trunc{};
  SimLimits limits{};
};

struct MeanResult {
  double estimate = 0.0;
  ResourceReport report;
  int truncation_level = -1;  // k; -1 off the composed path
  enum class Path { classical, trivial_zero, composed } path = Path::composed;
};

// Mean estimator: classical exact evaluation at n >= N, the zero estimate
// below the sqrt(N) threshold, otherwise the median over repeated
// (truncated + tail) sums.
MeanResult mean_algorithm(const SequenceInstance& f, std::uint64_t n, double p,
                          const MeanOptions& options, Mode mode,
                          std::uint64_t seed);

// Median over repeated component sums (lower median).
double median_compose(std::vector<double> component_sums);

// Exact binomial lower bound on the success of a median over `repetitions`
// runs, each succeeding independently with probability per_rep_success.
double compose_success_lower_bound(int repetitions, double per_rep_success);

struct MeanDistribution {
  OutcomeDistribution dist;
  ResourceReport report;   // per-realization resources
  int truncation_level = -1;
  MeanResult::Path path = MeanResult::Path::composed;
};

// Output distribution over `trials` independent realizations; stage
// simulations are shared across trials.
MeanDistribution mean_distribution(const SequenceInstance& f, std::uint64_t n,
                                   double p, const MeanOptions& options,
                                   Mode mode, std::uint64_t trials,
                                   std::uint64_t seed);

}  // namespace qsum

#endif  // QSUM_FULL_MEAN_HPP
