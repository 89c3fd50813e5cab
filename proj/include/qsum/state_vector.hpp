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

#ifndef QSUM_STATE_VECTOR_HPP
#define QSUM_STATE_VECTOR_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qsum/config.hpp"
#include "qsum/outcome.hpp"

namespace qsum {

using Amp = std::complex<double>;

// Register layout over `qubits` qubits: the index register occupies the
// leading `index_bits` qubits, the value register the next `value_bits`,
// and any remaining qubits are ancillas. Qubit 0 is the most significant
// bit of the basis index (binary expansion convention).
struct RegisterLayout {
  int qubits = 0;
  int index_bits = 0;
  int value_bits = 0;

  int ancilla_bits() const { return qubits - index_bits - value_bits; }
  std::uint64_t dim() const { return std::uint64_t{1} << qubits; }
  std::uint64_t index_dim() const { return std::uint64_t{1} << index_bits; }
  std::uint64_t value_dim() const { return std::uint64_t{1} << value_bits; }

  // Composite basis index of |i1>|i2>|i3>.
  std::uint64_t composite(std::uint64_t i1, std::uint64_t i2,
                          std::uint64_t i3 = 0) const;
  std::uint64_t index_part(std::uint64_t basis) const;
  std::uint64_t value_part(std::uint64_t basis) const;

  void validate() const;  // throws std::invalid_argument
};

// Dense complex amplitude vector over 2^m basis states.
class StateVector {
 public:
  explicit StateVector(RegisterLayout layout);

  const RegisterLayout& layout() const { return layout_; }
  int qubits() const { return layout_.qubits; }
  std::uint64_t dim() const { return layout_.dim(); }

  Amp amplitude(std::uint64_t basis) const { return amps_[basis]; }
  std::span<const Amp> amplitudes() const { return amps_; }
  std::vector<Amp>& raw() { return amps_; }
  const std::vector<Amp>& raw() const { return amps_; }

  double squared_norm() const;
  void check_norm(double tol) const;  // throws on drift

 private:
  RegisterLayout layout_;
  std::vector<Amp> amps_;
};

// |i1>|i2>|i3> with every component range-checked.
StateVector make_basis_state(const RegisterLayout& layout, std::uint64_t i1,
                             std::uint64_t i2, std::uint64_t i3 = 0);

// H^{\otimes index_bits} on the index register, identity elsewhere.
StateVector apply_walsh_hadamard_index_register(StateVector state);

// Hadamard on an explicit qubit set.
StateVector apply_hadamard_qubits(StateVector state,
                                  const std::vector<int>& qubits);

// Relabels basis states: the amplitude at x moves to perm(x).
// Bijectivity is checked when debug is set.
StateVector apply_permutation(StateVector state,
                              const std::function<std::uint64_t(std::uint64_t)>& perm,
                              bool debug = false);

// Multiplies the amplitude at x by sign(x) in {-1,+1}.
StateVector apply_phase_flip(StateVector state,
                             const std::function<int(std::uint64_t)>& sign);

// Exact measurement table |amplitude|^2 with zero entries omitted.
OutcomeDistribution measure_distribution(const StateVector& state,
                                         double prune = tolerances().prune);

// Draws one basis index from the exact distribution; deterministic per seed.
std::uint64_t sample_outcome(const StateVector& state, std::uint64_t rng_seed);
std::uint64_t sample_outcome(const StateVector& state, std::mt19937_64& gen);

namespace detail {
// In-place primitives shared by the program interpreter. `ctrl_mask`
// restricts the action to basis states whose mask bits are all set.
void hadamard_in_place(std::vector<Amp>& a, int qubits,
                       const std::vector<int>& targets,
                       std::uint64_t ctrl_mask = 0);
void permutation_in_place(std::vector<Amp>& a,
                          const std::function<std::uint64_t(std::uint64_t)>& perm,
                          std::uint64_t ctrl_mask = 0, bool debug = false);
void phase_flip_in_place(std::vector<Amp>& a,
                         const std::function<int(std::uint64_t)>& sign,
                         std::uint64_t ctrl_mask = 0);
// Unitary DFT on a contiguous qubit range [first, first+count); inverse
// applies the conjugate transpose.
void fourier_in_place(std::vector<Amp>& a, int qubits, int first, int count,
                      bool inverse);
}  // namespace detail

}  // namespace qsum

#endif  // QSUM_STATE_VECTOR_HPP
