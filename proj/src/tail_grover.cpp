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

#include "qsum/tail_grover.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace qsum {

namespace {

int index_bits_for(std::uint64_t n_length) {
  int bits = 0;
  while ((std::uint64_t{1} << bits) < n_length) ++bits;
  return std::max(bits, 1);  // registers are at least one qubit wide
}

constexpr double success_rate_constant = 2.0 / (9.0 * std::numbers::pi * std::numbers::pi);

}  // namespace

double TailParams::decode_step() const {
  return std::ldexp(1.0, -value_bits + index_bits + 1);
}

HeavySet heavy_set(const SequenceInstance& f, std::uint64_t threshold,
                   int index_bits) {
  HeavySet heavy;
  for (std::uint64_t i = 0; i < f.size(); ++i) {
    if (std::abs(f(i)) >= static_cast<double>(threshold)) heavy.indices.push_back(i);
  }
  heavy.count = heavy.indices.size();
  const double a =
      static_cast<double>(heavy.count) / std::ldexp(1.0, index_bits);
  heavy.theta = std::asin(std::sqrt(std::min(a, 1.0)));
  return heavy;
}

std::uint64_t beta_encode(double z, std::uint64_t threshold, int index_bits,
                          int value_bits) {
  const double m = static_cast<double>(threshold);
  const double top = std::ldexp(1.0, index_bits);  // 2^{m'}
  if (std::abs(z) < m) return std::uint64_t{1} << (value_bits - 1);
  if (std::abs(z) < top) {
    const double scaled = std::ldexp(z + top, value_bits - index_bits - 1);
    const std::uint64_t code = static_cast<std::uint64_t>(std::floor(scaled));
    return std::min(code, (std::uint64_t{1} << value_bits) - 1);
  }
  if (z >= top) return (std::uint64_t{1} << value_bits) - 1;
  return 0;  // z <= -2^{m'}
}

double phi_decode_value(std::uint64_t x, int index_bits, int value_bits) {
  return -std::ldexp(1.0, index_bits) +
         std::ldexp(static_cast<double>(x), -value_bits + index_bits + 1);
}

IndexValue phi_decode(std::uint64_t index, std::uint64_t x, int index_bits,
                      int value_bits) {
  return IndexValue{index, phi_decode_value(x, index_bits, value_bits)};
}

TailParams choose_tail_params(std::uint64_t n_length, std::uint64_t threshold,
                              double p, double epsilon_enc,
                              double lstar_multiplier) {
  if (n_length < 1 || threshold < 1) {
    throw std::invalid_argument("choose_tail_params: need N >= 1 and M >= 1");
  }
  if (!(p >= 1.0 && p < 2.0)) {
    throw std::invalid_argument("choose_tail_params: need 1 <= p < 2");
  }
  if (!(epsilon_enc > 0.0)) {
    throw std::invalid_argument("choose_tail_params: epsilon_enc must be positive");
  }
  TailParams params;
  params.n_length = n_length;
  params.threshold = threshold;
  params.p = p;
  params.index_bits = index_bits_for(n_length);
  const int precision_bits =
      std::max(1, static_cast<int>(std::ceil(std::log2(1.0 / epsilon_enc))));
  params.value_bits = params.index_bits + 1 + precision_bits;

  const double m = static_cast<double>(threshold);
  params.min_threshold =
      static_cast<std::uint64_t>(std::ceil(std::pow(6.0, 2.0 / p)));
  params.iterations =
      static_cast<std::uint64_t>(std::floor(std::pow(m, p / 2.0) / 3.0));
  const double weight = std::pow(m, -p) * static_cast<double>(n_length);
  const double log2e = 1.0 / std::numbers::ln2;
  const double reps = (3.0 / (success_rate_constant * log2e)) * weight *
                      std::max(std::log2(weight), 1.0);
  params.repetitions = static_cast<std::uint64_t>(
      std::max(1.0, std::ceil(lstar_multiplier * reps)));
  params.zero_tail = std::pow(m, p) > static_cast<double>(n_length);
  params.guaranteed = threshold >= params.min_threshold;
  return params;
}

UnitaryProgram build_grover_iterate(const TailParams& params) {
  const int m1 = params.index_bits;
  const int m2 = params.value_bits;
  const std::uint64_t value_dim = std::uint64_t{1} << m2;
  const std::uint64_t sentinel = value_dim >> 1;
  const std::uint64_t n_length = params.n_length;

  std::vector<int> index_targets(m1);
  for (int q = 0; q < m1; ++q) index_targets[q] = q;

  // Sign by probed-set membership and the below-threshold sentinel.
  auto t_sign = [value_dim, sentinel, n_length](std::uint64_t b) {
    const std::uint64_t i = b / value_dim;
    const std::uint64_t x = b % value_dim;
    return (i < n_length && x != sentinel) ? 1 : -1;
  };
  // Value-register negation x -> (2^{m''} - x) mod 2^{m''}.
  auto j_perm = [value_dim](std::uint64_t b) {
    const std::uint64_t i = b / value_dim;
    const std::uint64_t x = b % value_dim;
    return i * value_dim + ((value_dim - x) & (value_dim - 1));
  };
  auto zero_index_sign = [value_dim](std::uint64_t b) {
    return b / value_dim == 0 ? -1 : 1;
  };

  UnitaryProgram iterate;
  iterate.push_back(UnitaryOp::query());
  iterate.push_back(UnitaryOp::phase_flip(t_sign));
  iterate.push_back(UnitaryOp::permutation(j_perm));
  iterate.push_back(UnitaryOp::query());
  iterate.push_back(UnitaryOp::hadamard(index_targets));
  iterate.push_back(UnitaryOp::phase_flip(zero_index_sign));
  iterate.push_back(UnitaryOp::hadamard(index_targets));
  return iterate;
}

StagePtr build_tail_stage(const TailParams& params) {
  auto stage = std::make_shared<UnmeasuredAlgorithm>();
  stage->name = "tail-search";
  stage->query.qubits = params.index_bits + params.value_bits;
  stage->query.index_bits = params.index_bits;
  stage->query.value_bits = params.value_bits;
  stage->query.probed.resize(params.n_length);
  for (std::uint64_t i = 0; i < params.n_length; ++i) stage->query.probed[i] = i;
  stage->query.domain = [](std::uint64_t i) { return i; };
  const std::uint64_t threshold = params.threshold;
  const int m1 = params.index_bits;
  const int m2 = params.value_bits;
  stage->query.encode = [threshold, m1, m2](double z) {
    return beta_encode(z, threshold, m1, m2);
  };

  std::vector<int> index_targets(m1);
  for (int q = 0; q < m1; ++q) index_targets[q] = q;
  stage->program.push_back(UnitaryOp::hadamard(index_targets));
  const UnitaryProgram iterate = build_grover_iterate(params);
  for (std::uint64_t l = 0; l < params.iterations; ++l) {
    stage->program.insert(stage->program.end(), iterate.begin(), iterate.end());
  }
  stage->program.push_back(UnitaryOp::query());
  return stage;
}

OutcomeDistribution run_A0(const SequenceInstance& f, const TailParams& params,
                           const SimLimits& limits) {
  StagePtr stage = build_tail_stage(params);
  StateVector state = run_unmeasured(*stage, f, 0, limits);
  OutcomeDistribution raw = measure_distribution(state);
  raw.check_total(tolerances().distribution_sum);
  const int m1 = params.index_bits;
  const int m2 = params.value_bits;
  const std::uint64_t value_dim = std::uint64_t{1} << m2;
  return raw.transformed([m1, m2, value_dim](const Outcome& o) {
    const std::uint64_t b = std::get<std::uint64_t>(o);
    return Outcome{phi_decode(b / value_dim, b % value_dim, m1, m2)};
  });
}

double combine_psi(std::span<const IndexValue> outputs, std::uint64_t n_length,
                   bool debug) {
  std::map<std::uint64_t, double> kept;
  for (const IndexValue& out : outputs) {
    if (out.index >= n_length || out.value == 0.0) continue;
    auto [it, inserted] = kept.emplace(out.index, out.value);
    if (!inserted && debug && it->second != out.value) {
      throw std::runtime_error("combine_psi: repeated index with differing values");
    }
  }
  if (kept.empty()) return 0.0;
  KahanSum sum;
  for (const auto& [_, value] : kept) sum.add(value);
  return sum.value() / static_cast<double>(n_length);
}

namespace {

// Draws one run outcome from the closed-form single-run law; used past the
// dense-simulation cap.
IndexValue sample_run_analytic(const SequenceInstance& f, const TailParams& params,
                               const HeavySet& heavy, std::mt19937_64& gen) {
  const IndexValue miss{params.n_length >= (std::uint64_t{1} << params.index_bits)
                            ? 0
                            : params.n_length,
                        0.0};
  if (heavy.count == 0) return miss;
  const double amplified =
      std::sin(static_cast<double>(2 * params.iterations + 1) * heavy.theta);
  const double hit_mass = amplified * amplified;  // summed over the heavy set
  const double u = uniform01(gen);
  if (u >= hit_mass) return miss;
  const auto pick = static_cast<std::uint64_t>(
      u / hit_mass * static_cast<double>(heavy.count));
  const std::uint64_t i = heavy.indices[std::min(pick, heavy.count - 1)];
  const std::uint64_t code =
      beta_encode(f(i), params.threshold, params.index_bits, params.value_bits);
  return phi_decode(i, code, params.index_bits, params.value_bits);
}

}  // namespace

TailResult tail_algorithm(const SequenceInstance& f, std::uint64_t n_length,
                          std::uint64_t threshold, double p,
                          const TailOptions& options, std::uint64_t seed) {
  f.validate();
  if (f.size() != n_length) {
    throw std::invalid_argument("tail_algorithm: instance length differs from N");
  }
  TailResult result;
  result.params = choose_tail_params(n_length, threshold, p, options.epsilon_enc,
                                     options.lstar_multiplier);
  // Keep the whole circuit simulable when exact runs are requested.
  const int cap_value_bits = options.limits.exact_qubit_cap - result.params.index_bits;
  if (result.params.index_bits + result.params.value_bits >
          options.limits.exact_qubit_cap &&
      cap_value_bits >= result.params.index_bits + 2) {
    result.params.value_bits = cap_value_bits;
  }
  result.ball_violation = !in_ball(f, PNorm{p, false});

  if (result.params.zero_tail) {
    result.path = TailResult::Path::zero_tail;
    result.estimate = 0.0;
    return result;  // the tail vanishes on the unit ball; no queries needed
  }

  const bool quantum_fits =
      result.params.quantum_queries() < n_length && result.params.guaranteed;
  if (!quantum_fits && !options.force_quantum) {
    result.path = TailResult::Path::classical;
    result.estimate = tail_mean(f, static_cast<double>(threshold));
    result.report.classical_queries = n_length;
    result.report.classical_bit_ops = n_length * result.params.value_bits;
    return result;
  }

  result.path = TailResult::Path::quantum;
  const int qubits = result.params.index_bits + result.params.value_bits;
  std::mt19937_64 gen(seed);
  std::vector<IndexValue> outputs;
  outputs.reserve(result.params.repetitions);
  if (qubits <= options.limits.exact_qubit_cap) {
    const OutcomeDistribution runs = run_A0(f, result.params, options.limits);
    for (std::uint64_t r = 0; r < result.params.repetitions; ++r) {
      outputs.push_back(std::get<IndexValue>(runs.sample(gen)));
    }
  } else {
    const HeavySet heavy = heavy_set(f, threshold, result.params.index_bits);
    for (std::uint64_t r = 0; r < result.params.repetitions; ++r) {
      outputs.push_back(sample_run_analytic(f, result.params, heavy, gen));
    }
  }
  result.estimate = combine_psi(outputs, n_length, options.limits.debug_checks);
  result.report.quantum_queries = result.params.quantum_queries();
  result.report.measurements = result.params.repetitions;
  result.report.max_qubits = qubits;
  result.report.gate_estimate =
      result.report.quantum_queries * static_cast<std::uint64_t>(result.params.value_bits);
  result.report.classical_bit_ops =
      result.params.repetitions * static_cast<std::uint64_t>(result.params.value_bits);
  return result;
}

double tail_success_probability(const SequenceInstance& f,
                                const TailParams& params,
                                const SimLimits& limits) {
  const double target = tail_mean(f, static_cast<double>(params.threshold));
  const HeavySet heavy = heavy_set(f, params.threshold, params.index_bits);
  const double tol = params.decode_step() * static_cast<double>(heavy.count) /
                         static_cast<double>(params.n_length) +
                     1e-15;
  if (params.zero_tail || heavy.count == 0) {
    // The pipeline outputs 0; exact success iff the tail itself vanishes.
    return std::abs(target) <= tol ? 1.0 : 0.0;
  }
  if (heavy.count > 20) {
    throw BudgetExceeded("tail_success_probability: heavy set too large");
  }

  const OutcomeDistribution runs = run_A0(f, params, limits);
  std::vector<double> rho(heavy.count, 0.0);
  std::vector<double> decoded(heavy.count, 0.0);
  double miss_mass = 0.0;
  for (const auto& [outcome, p] : runs.support()) {
    const IndexValue& iv = std::get<IndexValue>(outcome);
    if (iv.index >= params.n_length || iv.value == 0.0) {
      miss_mass += p;
      continue;
    }
    const auto it =
        std::find(heavy.indices.begin(), heavy.indices.end(), iv.index);
    if (it == heavy.indices.end()) {
      miss_mass += p;  // numerically negligible off-heavy mass
      continue;
    }
    const std::size_t slot = static_cast<std::size_t>(it - heavy.indices.begin());
    rho[slot] += p;
    decoded[slot] = iv.value;
  }

  // P(surviving set == S) by inclusion-exclusion over sub-coverages, then
  // total mass of subsets whose combined estimate lands within tolerance.
  const std::uint64_t subsets = std::uint64_t{1} << heavy.count;
  std::vector<double> hit_mass(subsets, 0.0);
  for (std::uint64_t mask = 0; mask < subsets; ++mask) {
    double m = miss_mass;
    for (std::size_t j = 0; j < heavy.count; ++j) {
      if (mask & (std::uint64_t{1} << j)) m += rho[j];
    }
    hit_mass[mask] = m;
  }
  const double reps = static_cast<double>(params.repetitions);
  double success = 0.0;
  for (std::uint64_t mask = 0; mask < subsets; ++mask) {
    KahanSum estimate_sum;
    for (std::size_t j = 0; j < heavy.count; ++j) {
      if (mask & (std::uint64_t{1} << j)) estimate_sum.add(decoded[j]);
    }
    const double estimate =
        estimate_sum.value() / static_cast<double>(params.n_length);
    if (std::abs(estimate - target) > tol) continue;
    const int bits = std::popcount(mask);
    double prob = std::pow(hit_mass[mask], reps);  // R = S term
    for (std::uint64_t sub = (mask - 1) & mask;; sub = (sub - 1) & mask) {
      const int sign = ((bits - std::popcount(sub)) % 2 == 0) ? 1 : -1;
      prob += sign * std::pow(hit_mass[sub], reps);
      if (sub == 0) break;
    }
    if (mask == 0) prob = std::pow(hit_mass[0], reps);
    success += std::max(prob, 0.0);
  }
  return std::min(success, 1.0);
}

std::uint64_t choose_M(std::uint64_t n, std::uint64_t n_length, double p,
                       double c_cal) {
  if (n < 1 || n_length < 1) {
    throw std::invalid_argument("choose_M: need n >= 1 and N >= 1");
  }
  if (!(c_cal >= 1.0)) {
    throw std::invalid_argument("choose_M: calibration constant must be >= 1");
  }
  const double ratio = static_cast<double>(n_length) / static_cast<double>(n);
  const double logterm = std::max(
      std::log2(static_cast<double>(n) / std::sqrt(static_cast<double>(n_length))),
      1.0);
  const double bound = c_cal * std::pow(ratio * logterm, 2.0 / p);
  if (bound >= 9.0e18) throw RegimeError("choose_M: threshold overflows");
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(bound)));
}

}  // namespace qsum
