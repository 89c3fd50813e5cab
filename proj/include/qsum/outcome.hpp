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

#ifndef QSUM_OUTCOME_HPP
#define QSUM_OUTCOME_HPP

#include <compare>
#include <cstdint>
#include <functional>
#include <random>
#include <variant>
#include <vector>

#include "qsum/config.hpp"

namespace qsum {

// A measured index together with a decoded real value.
struct IndexValue {
  std::uint64_t index = 0;
  double value = 0.0;
  auto operator<=>(const IndexValue&) const = default;
};

// Outputs of measured algorithms: a basis index, a real number, or an
// (index, value) pair.
using Outcome = std::variant<std::uint64_t, double, IndexValue>;

enum class DistMode { exact, sampled };

// Finite-support probability measure over outcomes.
class OutcomeDistribution {
 public:
  using Entry = std::pair<Outcome, double>;

  OutcomeDistribution() = default;
  explicit OutcomeDistribution(DistMode mode) : mode_(mode) {}

  // Adds probability mass, merging equal outcomes.
  void add(const Outcome& outcome, double probability);

  // Sorts the support and drops entries below the prune threshold.
  void finalize(double prune = 0.0);

  DistMode mode() const { return mode_; }
  const std::vector<Entry>& support() const { return support_; }
  bool empty() const { return support_.empty(); }
  std::size_t size() const { return support_.size(); }

  double total_mass() const;
  // Throws if exact-mode mass deviates from 1 beyond tol.
  void check_total(double tol) const;

  double probability_of(const Outcome& outcome) const;

  // Applies a map to every outcome and merges collisions.
  OutcomeDistribution transformed(
      const std::function<Outcome(const Outcome&)>& fn) const;

  // Total variation distance; both supports may differ.
  double tv_distance(const OutcomeDistribution& other) const;

  Outcome sample(std::mt19937_64& gen) const;

  static OutcomeDistribution from_samples(const std::vector<Outcome>& samples);

 private:
  std::vector<Entry> support_;
  DistMode mode_ = DistMode::exact;
  bool finalized_ = false;
};

// Smallest eps such that the mass at distance > eps from true_value is at
// most theta. All outcomes must be real numbers.
double error_at_confidence(double true_value, const OutcomeDistribution& dist,
                           double theta = 0.25);

}  // namespace qsum

#endif  // QSUM_OUTCOME_HPP
