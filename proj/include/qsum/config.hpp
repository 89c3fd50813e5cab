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

#ifndef QSUM_CONFIG_HPP
#define QSUM_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace qsum {

// All numeric tolerances used across the library live here so they can be
// adjusted in one place.
struct Tolerances {
  double norm = 1e-10;                 // unit-norm drift allowed per program
  double hadamard_involution = 1e-12;  // W applied twice vs identity
  double distribution_sum = 1e-9;      // exact distribution total mass
  double ball_slack = 1e-12;           // norm-ball membership slack
  double decomposition = 1e-10;        // mean / level decomposition identities
  double split_identity = 1e-12;       // truncated + tail == mean
  double closed_form = 1e-9;           // simulation vs closed-form checks
  double prune = 1e-15;                // probability below which branches drop
};

inline const Tolerances& tolerances() {
  static const Tolerances t{};
  return t;
}

// Resource limits for exact simulation.
struct SimLimits {
  int exact_qubit_cap = 24;                 // dense state vectors up to 2^cap
  std::uint64_t tuple_budget = 10'000'000;  // outcome tuples in exact mode
  bool debug_checks = false;                // bijection / norm asserts
};

class BudgetExceeded : public std::runtime_error {
 public:
  explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when requested parameters fall outside a supported regime
// (maps to CLI exit code 3).
class RegimeError : public std::runtime_error {
 public:
  explicit RegimeError(const std::string& what) : std::runtime_error(what) {}
};

// Compensated summation; sequences can be long and spiky.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

// Deterministic seed derivation; avoids accidental stream overlap when a
// top-level seed fans out to grid points, instances and trials.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  return splitmix64(base ^ splitmix64(salt + 0x61c8864680b583ebull));
}

// Uniform double in [0,1) with platform-independent bit arithmetic.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace qsum

#endif  // QSUM_CONFIG_HPP
