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

#include "qsum/counting_mean.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qsum {

namespace {

int index_bits_for(std::uint64_t n_length) {
  int bits = 0;
  while ((std::uint64_t{1} << bits) < n_length) ++bits;
  return std::max(bits, 1);
}

int phase_bits_for(std::uint64_t n_budget) {
  if (n_budget < 1) {
    throw std::invalid_argument("counting: query budget must be >= 1");
  }
  return std::bit_width(n_budget + 1) - 1;  // floor(log2(n+1))
}

}  // namespace

LevelSchedule LevelSchedule::make(int top_level, std::uint64_t n, double p) {
  if (top_level < 0 || n < 1) {
    throw std::invalid_argument("LevelSchedule: need k >= 0 and n >= 1");
  }
  LevelSchedule schedule;
  schedule.top_level = top_level;
  schedule.n_ell.resize(top_level + 1);
  schedule.nu_ell.resize(top_level + 1);
  schedule.phase_bits.resize(top_level + 1);
  for (int level = 0; level <= top_level; ++level) {
    const int gap = top_level - level;
    const double scale = std::exp2(-(0.5 - p / 4.0) * gap);
    schedule.n_ell[level] = static_cast<std::uint64_t>(
        std::max(1.0, std::ceil(scale * static_cast<double>(n))));
    schedule.nu_ell[level] =
        static_cast<int>(std::ceil(2.0 * std::log2(static_cast<double>(gap + 1)))) + 4;
    schedule.phase_bits[level] = phase_bits_for(schedule.n_ell[level]);
  }
  return schedule;
}

std::uint64_t LevelSchedule::schedule_weight() const {
  std::uint64_t total = 0;
  for (std::size_t level = 0; level < n_ell.size(); ++level) {
    total += 2 * static_cast<std::uint64_t>(nu_ell[level]) * n_ell[level];
  }
  return total;
}

StagePtr build_counting_stage(const QueryDescriptor& base, int t) {
  base.validate();
  if (base.value_bits != 1) {
    throw std::invalid_argument("build_counting_stage: base query must be binary");
  }
  if (t < 1) throw std::invalid_argument("build_counting_stage: need t >= 1");

  const int m1 = base.index_bits;
  const int system_bits = m1 + 1;
  const int qubits = t + system_bits;

  auto stage = std::make_shared<UnmeasuredAlgorithm>();
  stage->name = "counting";
  stage->query.qubits = qubits;
  stage->query.index_bits = t + m1;  // phase and index registers combined
  stage->query.value_bits = 1;
  // Probes fire only when the leading phase qubit is set: the query itself
  // carries the control of the phase-estimation ladder.
  stage->query.probed.reserve((std::size_t{1} << (t - 1)) * base.probed.size());
  for (std::uint64_t w = std::uint64_t{1} << (t - 1); w < (std::uint64_t{1} << t); ++w) {
    for (std::uint64_t i : base.probed) {
      stage->query.probed.push_back((w << m1) | i);
    }
  }
  std::sort(stage->query.probed.begin(), stage->query.probed.end());
  const std::uint64_t index_mask = (std::uint64_t{1} << m1) - 1;
  auto base_domain = base.domain;
  stage->query.domain = [base_domain, index_mask](std::uint64_t e) {
    return base_domain(e & index_mask);
  };
  auto base_encode = base.encode;
  stage->query.encode = [base_encode](double z) {
    const std::uint64_t bit = base_encode(z);
    if (bit > 1) {
      throw std::invalid_argument("counting: encoder must produce a single bit");
    }
    return bit;
  };

  // Reflection about the uniform index state, sign-flipped, controlled on
  // the leading phase qubit.
  std::vector<int> index_targets(m1);
  for (int q = 0; q < m1; ++q) index_targets[q] = t + q;
  auto zero_index_sign = [index_mask](std::uint64_t b) {
    return ((b >> 1) & index_mask) == 0 ? -1 : 1;
  };
  auto global_minus = [](std::uint64_t) { return -1; };
  std::vector<UnitaryOp> reflect;
  reflect.push_back(UnitaryOp::hadamard(index_targets));
  reflect.push_back(UnitaryOp::phase_flip(zero_index_sign));
  reflect.push_back(UnitaryOp::hadamard(index_targets));
  reflect.push_back(UnitaryOp::phase_flip(global_minus));
  const std::uint64_t msb_mask = std::uint64_t{1} << (qubits - 1);

  // One-step cyclic rotation of the phase register; re-aims the query's
  // control at the next readout bit.
  const std::uint64_t phase_dim = std::uint64_t{1} << t;
  const std::uint64_t low_mask = (std::uint64_t{1} << system_bits) - 1;
  auto rotate_phase = [t, phase_dim, low_mask, system_bits](std::uint64_t b) {
    const std::uint64_t w = b >> system_bits;
    const std::uint64_t rotated = ((w << 1) | (w >> (t - 1))) & (phase_dim - 1);
    return (rotated << system_bits) | (b & low_mask);
  };

  std::vector<int> all_targets(qubits);
  for (int q = 0; q < qubits; ++q) all_targets[q] = q;
  stage->program.push_back(UnitaryOp::hadamard(all_targets));
  for (int j = t - 1; j >= 0; --j) {
    const std::uint64_t power = std::uint64_t{1} << j;
    for (std::uint64_t rep = 0; rep < power; ++rep) {
      stage->program.push_back(UnitaryOp::query());
      stage->program.push_back(UnitaryOp::controlled(msb_mask, reflect));
    }
    stage->program.push_back(UnitaryOp::permutation(rotate_phase));
  }
  stage->program.push_back(UnitaryOp::fourier(0, t, /*inverse=*/true));
  return stage;
}

double decode_amplitude_estimate(std::uint64_t basis, int t, int system_bits) {
  const std::uint64_t omega = basis >> system_bits;
  const double s =
      std::sin(std::numbers::pi * static_cast<double>(omega) / std::exp2(t));
  return s * s;
}

OutcomeDistribution amplitude_estimation(const SequenceInstance& f,
                                         const QueryDescriptor& base, int t,
                                         const SimLimits& limits) {
  if (t + base.index_bits + 1 > limits.exact_qubit_cap) {
    throw BudgetExceeded("amplitude_estimation: circuit exceeds the qubit cap");
  }
  StagePtr stage = build_counting_stage(base, t);
  StateVector state = run_unmeasured(*stage, f, 1, limits);  // kickback qubit set
  OutcomeDistribution raw = measure_distribution(state);
  raw.check_total(tolerances().distribution_sum);
  const int system_bits = base.index_bits + 1;
  return raw.transformed([t, system_bits](const Outcome& o) {
    return Outcome{decode_amplitude_estimate(std::get<std::uint64_t>(o), t, system_bits)};
  });
}

OutcomeDistribution amplitude_estimation(
    const std::function<bool(std::uint64_t)>& marked, int index_bits, int t,
    const SimLimits& limits) {
  // Synthetic input: f(i) = 1 on marked indices, probed over the whole
  // index register.
  SequenceInstance f;
  f.values.assign(std::uint64_t{1} << index_bits, 0.0);
  for (std::uint64_t i = 0; i < f.size(); ++i) {
    if (marked(i)) f.values[i] = 1.0;
  }
  QueryDescriptor base;
  base.qubits = index_bits + 1;
  base.index_bits = index_bits;
  base.value_bits = 1;
  base.probed.resize(f.size());
  for (std::uint64_t i = 0; i < f.size(); ++i) base.probed[i] = i;
  base.domain = [](std::uint64_t i) { return i; };
  base.encode = [](double z) { return z > 0.5 ? std::uint64_t{1} : std::uint64_t{0}; };
  return amplitude_estimation(f, base, t, limits);
}

std::vector<double> counting_readout_law(double a, int t) {
  const std::uint64_t phase_dim = std::uint64_t{1} << t;
  const double theta = std::asin(std::sqrt(std::clamp(a, 0.0, 1.0)));
  auto kernel = [t](double delta) {
    const double wrapped = std::remainder(delta, 2.0 * std::numbers::pi);
    const double half = std::sin(0.5 * wrapped);
    if (std::abs(half) < 1e-14) return 1.0;
    const double top = std::sin(std::exp2(t - 1) * wrapped);
    return top * top / (std::exp2(2 * t) * half * half);
  };
  std::vector<double> law(phase_dim, 0.0);
  double total = 0.0;
  for (std::uint64_t omega = 0; omega < phase_dim; ++omega) {
    const double x =
        2.0 * std::numbers::pi * static_cast<double>(omega) / static_cast<double>(phase_dim);
    law[omega] = 0.5 * (kernel(2.0 * theta - x) + kernel(-2.0 * theta - x));
    total += law[omega];
  }
  for (double& v : law) v /= total;
  return law;
}

double count_estimate(const SequenceInstance& f,
                      const std::function<bool(double)>& window,
                      std::uint64_t n_budget, std::uint64_t seed, Mode mode,
                      const SimLimits& limits) {
  f.validate();
  const int t = phase_bits_for(n_budget);
  const int m1 = index_bits_for(f.size());
  std::mt19937_64 gen(seed);

  if (t + m1 + 1 > limits.exact_qubit_cap) {
    if (mode == Mode::exact) {
      throw BudgetExceeded("count_estimate: circuit exceeds the qubit cap");
    }
    std::uint64_t marked = 0;
    for (double v : f.values) marked += window(v) ? 1 : 0;
    const double a = static_cast<double>(marked) / std::exp2(m1);
    const std::vector<double> law = counting_readout_law(a, t);
    const double u = uniform01(gen);
    double acc = 0.0;
    std::uint64_t omega = law.size() - 1;
    for (std::uint64_t w = 0; w < law.size(); ++w) {
      acc += law[w];
      if (u < acc) {
        omega = w;
        break;
      }
    }
    const double s =
        std::sin(std::numbers::pi * static_cast<double>(omega) / std::exp2(t));
    return std::exp2(m1) * s * s;
  }

  QueryDescriptor base;
  base.qubits = m1 + 1;
  base.index_bits = m1;
  base.value_bits = 1;
  base.probed.resize(f.size());
  for (std::uint64_t i = 0; i < f.size(); ++i) base.probed[i] = i;
  base.domain = [](std::uint64_t i) { return i; };
  base.encode = [window](double z) {
    return window(z) ? std::uint64_t{1} : std::uint64_t{0};
  };
  const OutcomeDistribution dist = amplitude_estimation(f, base, t, limits);
  return std::exp2(m1) * std::get<double>(dist.sample(gen));
}

bool level_plane_bit(double z, int level, int sigma, int plane, int r_planes) {
  if (!in_level_window(z, level, sigma)) return false;
  const double signed_value = (sigma == 0) ? z : -z;
  const double scaled = std::ldexp(signed_value, -level);  // in [0, 1)
  const auto quantized =
      static_cast<std::uint64_t>(std::floor(std::ldexp(scaled, r_planes)));
  return ((quantized >> (r_planes - plane)) & 1) != 0;
}

double level_estimator(const SequenceInstance& f, int level, int sigma,
                       std::uint64_t n_ell, int r_planes, std::uint64_t seed,
                       Mode mode, const SimLimits& limits) {
  if (level < 0 || (sigma != 0 && sigma != 1) || r_planes < 1) {
    throw std::invalid_argument("level_estimator: bad parameters");
  }
  KahanSum plane_sum;
  for (int plane = 1; plane <= r_planes; ++plane) {
    auto window = [level, sigma, plane, r_planes](double z) {
      return level_plane_bit(z, level, sigma, plane, r_planes);
    };
    const double mu_hat = count_estimate(f, window, n_ell,
                                         derive_seed(seed, plane), mode, limits);
    plane_sum.add(std::ldexp(mu_hat, -plane));
  }
  const double sign = (sigma == 0) ? 1.0 : -1.0;
  return sign * plane_sum.value() / static_cast<double>(f.size());
}

double lower_median(std::vector<double> values) {
  if (values.empty()) {
    throw std::invalid_argument("lower_median: empty sample");
  }
  const std::size_t pos = (values.size() - 1) / 2;
  std::nth_element(values.begin(), values.begin() + pos, values.end());
  return values[pos];
}

double median_boost(const std::function<double(std::uint64_t)>& run,
                    int repetitions, std::uint64_t seed) {
  if (repetitions < 1) {
    throw std::invalid_argument("median_boost: repetitions must be >= 1");
  }
  std::vector<double> values;
  values.reserve(repetitions);
  for (int r = 0; r < repetitions; ++r) values.push_back(run(derive_seed(seed, r)));
  return lower_median(std::move(values));
}

double median_failure_bound(int repetitions, double q) {
  if (repetitions < 1 || q < 0.0 || q > 1.0) {
    throw std::invalid_argument("median_failure_bound: bad parameters");
  }
  const int threshold = (repetitions + 1) / 2;  // failures that can move the median
  double prob = 0.0;
  for (int j = threshold; j <= repetitions; ++j) {
    double term = 1.0;
    for (int i = 0; i < j; ++i) {
      term *= static_cast<double>(repetitions - i) / static_cast<double>(i + 1);
    }
    term *= std::pow(q, j) * std::pow(1.0 - q, repetitions - j);
    prob += term;
  }
  return std::min(prob, 1.0);
}

int resolve_r_planes(const TruncatedOptions& options) {
  if (options.r_planes > 0) return options.r_planes;
  return std::max(
      1, static_cast<int>(std::ceil(std::log2(1.0 / options.epsilon_enc))));
}

MeasuredAlgorithm build_truncated_algorithm(std::uint64_t n_length, int top_level,
                                            std::uint64_t n, double p,
                                            const TruncatedOptions& options) {
  const LevelSchedule schedule = LevelSchedule::make(top_level, n, p);
  const int r_planes = resolve_r_planes(options);
  const int m1 = index_bits_for(n_length);

  MeasuredAlgorithm algorithm;
  algorithm.name = "truncated-mean";
  algorithm.start_state = 1;  // kickback qubit set in every stage

  for (int level = 0; level <= top_level; ++level) {
    for (int sigma = 0; sigma <= 1; ++sigma) {
      // One circuit per plane, shared across the boosting repetitions.
      std::vector<StagePtr> plane_stages;
      plane_stages.reserve(r_planes);
      for (int plane = 1; plane <= r_planes; ++plane) {
        QueryDescriptor base;
        base.qubits = m1 + 1;
        base.index_bits = m1;
        base.value_bits = 1;
        base.probed.resize(n_length);
        for (std::uint64_t i = 0; i < n_length; ++i) base.probed[i] = i;
        base.domain = [](std::uint64_t i) { return i; };
        base.encode = [level, sigma, plane, r_planes](double z) {
          return level_plane_bit(z, level, sigma, plane, r_planes)
                     ? std::uint64_t{1}
                     : std::uint64_t{0};
        };
        plane_stages.push_back(
            build_counting_stage(base, schedule.phase_bits[level]));
      }
      for (int rep = 0; rep < schedule.nu_ell[level]; ++rep) {
        for (const StagePtr& stage : plane_stages) {
          algorithm.stages.push_back(stage);
        }
      }
    }
  }

  const std::vector<int> phase_bits = schedule.phase_bits;
  const std::vector<int> nu_ell = schedule.nu_ell;
  algorithm.output = [n_length, top_level, phase_bits, nu_ell, r_planes,
                      m1](std::span<const std::uint64_t> outcomes) {
    std::size_t cursor = 0;
    KahanSum total;
    for (int level = 0; level <= top_level; ++level) {
      const int t = phase_bits[level];
      for (int sigma = 0; sigma <= 1; ++sigma) {
        std::vector<double> reps;
        reps.reserve(nu_ell[level]);
        for (int rep = 0; rep < nu_ell[level]; ++rep) {
          KahanSum plane_sum;
          for (int plane = 1; plane <= r_planes; ++plane) {
            const double a_hat =
                decode_amplitude_estimate(outcomes[cursor++], t, m1 + 1);
            plane_sum.add(std::ldexp(std::exp2(m1) * a_hat, -plane));
          }
          const double sign = (sigma == 0) ? 1.0 : -1.0;
          reps.push_back(sign * plane_sum.value() /
                         static_cast<double>(n_length));
        }
        total.add(std::ldexp(lower_median(std::move(reps)), level));
      }
    }
    return Outcome{total.value()};
  };
  return algorithm;
}

TruncatedResult truncated_mean_algorithm(const SequenceInstance& f, int top_level,
                                         std::uint64_t n, double p,
                                         const TruncatedOptions& options,
                                         Mode mode, std::uint64_t seed) {
  f.validate();
  if (!(p >= 1.0 && p < 2.0)) {
    throw std::invalid_argument("truncated_mean_algorithm: need 1 <= p < 2");
  }
  TruncatedResult result;
  if (static_cast<double>(n) < std::exp2((1.0 - p / 2.0) * top_level)) {
    result.below_guarantee = true;  // under the scheduling threshold
    return result;
  }

  const LevelSchedule schedule = LevelSchedule::make(top_level, n, p);
  const int r_planes = resolve_r_planes(options);
  const int m1 = index_bits_for(f.size());
  const int max_qubits =
      *std::max_element(schedule.phase_bits.begin(), schedule.phase_bits.end()) +
      m1 + 1;

  if (max_qubits <= options.limits.exact_qubit_cap) {
    const MeasuredAlgorithm algorithm =
        build_truncated_algorithm(f.size(), top_level, n, p, options);
    MeasuredRunner runner(algorithm, f, options.limits);
    std::mt19937_64 gen(seed);
    result.estimate = std::get<double>(runner.sample_once(gen));
    result.report = resource_report(algorithm);
    return result;
  }
  if (mode == Mode::exact) {
    throw BudgetExceeded("truncated_mean_algorithm: circuit exceeds the qubit cap");
  }

  // Past the dense cap: per-level runs through the closed-form readout law.
  KahanSum total;
  std::uint64_t stages = 0;
  for (int level = 0; level <= top_level; ++level) {
    for (int sigma = 0; sigma <= 1; ++sigma) {
      std::vector<double> reps;
      reps.reserve(schedule.nu_ell[level]);
      for (int rep = 0; rep < schedule.nu_ell[level]; ++rep) {
        const std::uint64_t rep_seed =
            derive_seed(seed, (static_cast<std::uint64_t>(level) << 20) |
                                  (static_cast<std::uint64_t>(sigma) << 16) | rep);
        reps.push_back(level_estimator(f, level, sigma, schedule.n_ell[level],
                                       r_planes, rep_seed, Mode::sampled,
                                       options.limits));
        stages += r_planes;
      }
      total.add(std::ldexp(lower_median(std::move(reps)), level));
    }
  }
  result.estimate = total.value();
  for (int level = 0; level <= top_level; ++level) {
    const std::uint64_t per_run =
        (std::uint64_t{1} << schedule.phase_bits[level]) - 1;
    result.report.quantum_queries +=
        2ull * schedule.nu_ell[level] * r_planes * per_run;
  }
  result.report.measurements = stages;
  result.report.max_qubits = max_qubits;
  result.report.gate_estimate = result.report.quantum_queries;
  result.report.classical_bit_ops = stages;
  return result;
}

double combine_levels(int top_level,
                      const std::function<double(int, int)>& signed_level_value) {
  KahanSum total;
  for (int level = 0; level <= top_level; ++level) {
    for (int sigma = 0; sigma <= 1; ++sigma) {
      total.add(std::ldexp(signed_level_value(level, sigma), level));
    }
  }
  return total.value();
}

}  // namespace qsum
