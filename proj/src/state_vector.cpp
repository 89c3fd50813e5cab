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

#include "qsum/state_vector.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qsum {

std::uint64_t RegisterLayout::composite(std::uint64_t i1, std::uint64_t i2,
                                        std::uint64_t i3) const {
  return ((i1 << value_bits) | i2) << ancilla_bits() | i3;
}

std::uint64_t RegisterLayout::index_part(std::uint64_t basis) const {
  return basis >> (value_bits + ancilla_bits());
}

std::uint64_t RegisterLayout::value_part(std::uint64_t basis) const {
  return (basis >> ancilla_bits()) & (value_dim() - 1);
}

void RegisterLayout::validate() const {
  if (index_bits < 1 || value_bits < 1 || index_bits + value_bits > qubits) {
    throw std::invalid_argument("RegisterLayout: need m' >= 1, m'' >= 1, m' + m'' <= m");
  }
  if (qubits > 62) {
    throw std::invalid_argument("RegisterLayout: qubit count out of range");
  }
}

StateVector::StateVector(RegisterLayout layout) : layout_(layout) {
  layout_.validate();
  amps_.assign(layout_.dim(), Amp{0.0, 0.0});
  amps_[0] = Amp{1.0, 0.0};
}

double StateVector::squared_norm() const {
  KahanSum s;
  for (const Amp& a : amps_) s.add(std::norm(a));
  return s.value();
}

void StateVector::check_norm(double tol) const {
  if (std::abs(squared_norm() - 1.0) > tol) {
    throw std::runtime_error("StateVector: norm drifted beyond tolerance");
  }
}

StateVector make_basis_state(const RegisterLayout& layout, std::uint64_t i1,
                             std::uint64_t i2, std::uint64_t i3) {
  layout.validate();
  const std::uint64_t anc_dim = std::uint64_t{1} << layout.ancilla_bits();
  if (i1 >= layout.index_dim() || i2 >= layout.value_dim() || i3 >= anc_dim) {
    throw std::out_of_range("make_basis_state: register index out of range");
  }
  StateVector state(layout);
  state.raw()[0] = Amp{0.0, 0.0};
  state.raw()[layout.composite(i1, i2, i3)] = Amp{1.0, 0.0};
  return state;
}

namespace detail {

void hadamard_in_place(std::vector<Amp>& a, int qubits,
                       const std::vector<int>& targets,
                       std::uint64_t ctrl_mask) {
  static const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  const std::uint64_t dim = a.size();
  for (int q : targets) {
    if (q < 0 || q >= qubits) {
      throw std::out_of_range("hadamard: qubit out of range");
    }
    const std::uint64_t bit = std::uint64_t{1} << (qubits - 1 - q);
    if (ctrl_mask & bit) {
      throw std::invalid_argument("hadamard: target overlaps control");
    }
    for (std::uint64_t x = 0; x < dim; ++x) {
      if (x & bit) continue;
      if ((x & ctrl_mask) != ctrl_mask) continue;
      const Amp lo = a[x];
      const Amp hi = a[x | bit];
      a[x] = (lo + hi) * inv_sqrt2;
      a[x | bit] = (lo - hi) * inv_sqrt2;
    }
  }
}

void permutation_in_place(std::vector<Amp>& a,
                          const std::function<std::uint64_t(std::uint64_t)>& perm,
                          std::uint64_t ctrl_mask, bool debug) {
  const std::uint64_t dim = a.size();
  std::vector<Amp> out(dim, Amp{0.0, 0.0});
  std::vector<char> seen;
  if (debug) seen.assign(dim, 0);
  for (std::uint64_t x = 0; x < dim; ++x) {
    std::uint64_t y = x;
    if ((x & ctrl_mask) == ctrl_mask) {
      y = perm(x);
      if (y >= dim) throw std::invalid_argument("permutation: image out of range");
      if (ctrl_mask && (y & ctrl_mask) != ctrl_mask) {
        throw std::invalid_argument("permutation: image leaves controlled subspace");
      }
    }
    if (debug) {
      if (seen[y]) throw std::invalid_argument("permutation: map is not a bijection");
      seen[y] = 1;
    }
    out[y] = a[x];
  }
  a = std::move(out);
}

void phase_flip_in_place(std::vector<Amp>& a,
                         const std::function<int(std::uint64_t)>& sign,
                         std::uint64_t ctrl_mask) {
  const std::uint64_t dim = a.size();
  for (std::uint64_t x = 0; x < dim; ++x) {
    if ((x & ctrl_mask) != ctrl_mask) continue;
    const int s = sign(x);
    if (s == -1) {
      a[x] = -a[x];
    } else if (s != 1) {
      throw std::invalid_argument("phase_flip: sign must be +1 or -1");
    }
  }
}

void fourier_in_place(std::vector<Amp>& a, int qubits, int first, int count,
                      bool inverse) {
  if (first < 0 || count < 1 || first + count > qubits) {
    throw std::out_of_range("fourier: register out of range");
  }
  const std::uint64_t dim = a.size();
  const std::uint64_t reg_dim = std::uint64_t{1} << count;
  const int shift = qubits - first - count;
  const std::uint64_t reg_mask = (reg_dim - 1) << shift;

  // Dense DFT matrix on the subregister; registers stay small (t <= ~10).
  const double sign = inverse ? -1.0 : 1.0;
  const double scale = 1.0 / std::sqrt(static_cast<double>(reg_dim));
  std::vector<Amp> twiddle(reg_dim);
  for (std::uint64_t k = 0; k < reg_dim; ++k) {
    const double angle =
        sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(reg_dim);
    twiddle[k] = Amp{std::cos(angle), std::sin(angle)};
  }

  std::vector<Amp> block(reg_dim);
  for (std::uint64_t base = 0; base < dim; ++base) {
    if (base & reg_mask) continue;  // enumerate states with register bits clear
    for (std::uint64_t w = 0; w < reg_dim; ++w) block[w] = a[base | (w << shift)];
    for (std::uint64_t out_w = 0; out_w < reg_dim; ++out_w) {
      Amp acc{0.0, 0.0};
      for (std::uint64_t w = 0; w < reg_dim; ++w) {
        acc += twiddle[(out_w * w) % reg_dim] * block[w];
      }
      a[base | (out_w << shift)] = acc * scale;
    }
  }
}

}  // namespace detail

StateVector apply_walsh_hadamard_index_register(StateVector state) {
  std::vector<int> targets(state.layout().index_bits);
  for (int q = 0; q < state.layout().index_bits; ++q) targets[q] = q;
  detail::hadamard_in_place(state.raw(), state.qubits(), targets);
  return state;
}

StateVector apply_hadamard_qubits(StateVector state,
                                  const std::vector<int>& qubits) {
  detail::hadamard_in_place(state.raw(), state.qubits(), qubits);
  return state;
}

StateVector apply_permutation(StateVector state,
                              const std::function<std::uint64_t(std::uint64_t)>& perm,
                              bool debug) {
  detail::permutation_in_place(state.raw(), perm, 0, debug);
  return state;
}

StateVector apply_phase_flip(StateVector state,
                             const std::function<int(std::uint64_t)>& sign) {
  detail::phase_flip_in_place(state.raw(), sign);
  return state;
}

OutcomeDistribution measure_distribution(const StateVector& state, double prune) {
  OutcomeDistribution dist(DistMode::exact);
  const auto amps = state.amplitudes();
  for (std::uint64_t x = 0; x < amps.size(); ++x) {
    const double p = std::norm(amps[x]);
    if (p >= prune && p > 0.0) dist.add(Outcome{x}, p);
  }
  dist.finalize();
  return dist;
}

std::uint64_t sample_outcome(const StateVector& state, std::mt19937_64& gen) {
  const auto amps = state.amplitudes();
  const double u = uniform01(gen) * state.squared_norm();
  double acc = 0.0;
  std::uint64_t last_nonzero = 0;
  for (std::uint64_t x = 0; x < amps.size(); ++x) {
    const double p = std::norm(amps[x]);
    if (p <= 0.0) continue;
    acc += p;
    last_nonzero = x;
    if (u < acc) return x;
  }
  return last_nonzero;
}

std::uint64_t sample_outcome(const StateVector& state, std::uint64_t rng_seed) {
  std::mt19937_64 gen(rng_seed);
  return sample_outcome(state, gen);
}

}  // namespace qsum
