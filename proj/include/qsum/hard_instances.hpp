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

#ifndef QSUM_HARD_INSTANCES_HPP
#define QSUM_HARD_INSTANCES_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qsum/sequences.hpp"

namespace qsum {

// Adversarial spike family: disjoint spikes of equal height, selected by a
// bit vector u; instances at weights {level, level+1} sit inside the unit
// ball and differ in mean by `gap`.
struct HardFamily {
  std::uint64_t n_length = 0;  // N (one spike slot per position)
  double p = 1.0;
  std::uint64_t level = 0;     // weight parameter
  double spike_height = 0.0;   // (level+1)^{-1/p} N^{1/p}
  double gap = 0.0;            // spike_height / N
};

// Perturbation budget function used to gauge how many queries the family
// withstands.
double rho(std::uint64_t total, std::uint64_t weight_a, std::uint64_t weight_b);

// Level choice for the family at query budget n; validates the admissible
// regime and the derived inequalities, naming the first violated one.
HardFamily choose_hard_params(std::uint64_t n, std::uint64_t n_length, double p,
                              double c0_cal);

// Spike instance for a bit vector of length N.
SequenceInstance make_f_u(const HardFamily& family,
                          const std::vector<std::uint8_t>& u);

// Random bit vector with exactly `weight` ones.
std::vector<std::uint8_t> random_weight_vector(std::uint64_t n_length,
                                               std::uint64_t weight,
                                               std::uint64_t seed);

struct ConditionIReport {
  bool ok = true;
  std::vector<std::int64_t> coordinate;  // j(t) per position, -1 if constant
  // Witness of a violation: two vectors agreeing at the claimed coordinate
  // for position t yet producing different values there.
  std::uint64_t t_witness = 0;
  std::vector<std::uint8_t> u_a, u_b;
  std::string detail;
};

// Verifies that each position's value depends on exactly one coordinate of
// u. Exhaustive for length <= exhaustive_limit, otherwise sampled pairs.
ConditionIReport condition_I_check(
    const std::function<SequenceInstance(const std::vector<std::uint8_t>&)>& family,
    std::uint64_t n_length, std::uint64_t sample_pairs = 10'000,
    std::uint64_t seed = 1, std::uint64_t exhaustive_limit = 16);

// Half the minimal mean separation between the two weight classes.
double lower_bound_value(std::uint64_t n, std::uint64_t n_length, double p,
                         double c0_cal);

// Writes sampled family instances plus a manifest JSON to a directory.
std::vector<std::string> export_family(const HardFamily& family,
                                       std::uint64_t per_weight,
                                       const std::string& directory,
                                       std::uint64_t seed);

}  // namespace qsum

#endif  // QSUM_HARD_INSTANCES_HPP
