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

#ifndef QSUM_TAIL_GROVER_HPP
#define QSUM_TAIL_GROVER_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qsum/query_model.hpp"

namespace qsum {

// Parameters of the tail estimator: register sizes, search iterations L and
// repetition count L*, and the regime thresholds.
struct TailParams {
  std::uint64_t n_length = 0;   // N
  std::uint64_t threshold = 1;  // M (integer >= 1)
  double p = 1.0;
  int index_bits = 0;           // m' = ceil(log2 N)
  int value_bits = 0;           // m'' > m' + 1
  std::uint64_t iterations = 0;    // L
  std::uint64_t repetitions = 1;   // L*
  std::uint64_t min_threshold = 1; // smallest M with the success guarantee
  bool zero_tail = false;          // M^p > N: tail vanishes on the ball
  bool guaranteed = false;         // M >= min_threshold

  // Width of one decoded step, 2^{-m''+m'+1}.
  double decode_step() const;
  // Queries of the quantum pipeline, (2L+1) * L*.
  std::uint64_t quantum_queries() const {
    return (2 * iterations + 1) * repetitions;
  }
};

struct TailOptions {
  double epsilon_enc = 0x1.0p-20;  // decode-step target
  double lstar_multiplier = 1.0;   // calibration knob on the repetition count
  bool force_quantum = false;      // run amplification even off-guarantee
  SimLimits limits{};
};

// Heavy-entry bookkeeping: the marked index set and its rotation angle.
struct HeavySet {
  std::vector<std::uint64_t> indices;  // D_f
  std::uint64_t count = 0;             // mu_f
  double theta = 0.0;                  // sin^2 theta = mu / 2^{m'}
};

HeavySet heavy_set(const SequenceInstance& f, std::uint64_t threshold,
                   int index_bits);

// Piecewise value-register encoder. Values below threshold map to the
// sentinel 2^{m''-1}; in-range magnitudes map affinely; out-of-range values
// clamp to the register ends.
std::uint64_t beta_encode(double z, std::uint64_t threshold, int index_bits,
                          int value_bits);

// Affine decode of a value-register word; the sentinel decodes to 0.
double phi_decode_value(std::uint64_t x, int index_bits, int value_bits);
IndexValue phi_decode(std::uint64_t index, std::uint64_t x, int index_bits,
                      int value_bits);

// Register sizes, L, L* and regime flags for the given N, M, p. The value
// register is sized so the decode step is at most epsilon_enc.
TailParams choose_tail_params(std::uint64_t n_length, std::uint64_t threshold,
                              double p, double epsilon_enc,
                              double lstar_multiplier = 1.0);

// The search iterate Y = W X W Q J T Q over index + value registers.
UnitaryProgram build_grover_iterate(const TailParams& params);

// The single-run search algorithm: W, then L iterates, then one more query,
// measured once.
StagePtr build_tail_stage(const TailParams& params);

// Exact outcome distribution of one run, as decoded (index, value) pairs.
OutcomeDistribution run_A0(const SequenceInstance& f, const TailParams& params,
                           const SimLimits& limits = SimLimits{});

// Output map over L* runs: drop indices >= N and decoded zeros, deduplicate
// by index, then sum the surviving values and divide by N.
double combine_psi(std::span<const IndexValue> outputs, std::uint64_t n_length,
                   bool debug = false);

struct TailResult {
  double estimate = 0.0;
  ResourceReport report;
  TailParams params;
  enum class Path { zero_tail, classical, quantum } path = Path::zero_tail;
  bool ball_violation = false;
};

// Tail estimator: returns 0 without queries when M^p > N; falls back to
// classical evaluation when the guarantee regime does not apply or when the
// quantum pipeline would cost at least N queries; otherwise runs the
// amplification pipeline.
TailResult tail_algorithm(const SequenceInstance& f, std::uint64_t n_length,
                          std::uint64_t threshold, double p,
                          const TailOptions& options, std::uint64_t seed);

// Exact probability that the pipeline output lands within
// decode_step * mu / N of the true tail mean, computed from one exact
// single-run distribution and coverage combinatorics over the heavy set.
double tail_success_probability(const SequenceInstance& f,
                                const TailParams& params,
                                const SimLimits& limits = SimLimits{});

// Smallest integer threshold M for a query budget n, M >=
// c (N/n)^{2/p} max(log2(n/sqrt(N)), 1)^{2/p}.
std::uint64_t choose_M(std::uint64_t n, std::uint64_t n_length, double p,
                       double c_cal);

}  // namespace qsum

#endif  // QSUM_TAIL_GROVER_HPP
