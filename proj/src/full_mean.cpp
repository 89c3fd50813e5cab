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

#include "qsum/full_mean.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qsum {

int choose_k(std::uint64_t n, std::uint64_t n_length, double p, double c1_cal) {
  if (!(c1_cal >= 1.0)) {
    throw std::invalid_argument("choose_k: calibration constant must be >= 1");
  }
  const double nn = static_cast<double>(n);
  const double len = static_cast<double>(n_length);
  if (!(nn >= std::sqrt(len)) || !(nn < len)) {
    throw RegimeError("choose_k: requires sqrt(N) <= n < N");
  }
  const double logterm = std::max(std::log2(nn / std::sqrt(len)), 1.0);
  const double target = c1_cal * std::pow((len / nn) * logterm, 2.0 / p);
  int k = static_cast<int>(std::ceil(std::log2(target)));
  while (std::exp2(k) < target) ++k;
  while (k > 1 && std::exp2(k - 1) >= target) --k;
  return std::max(k, 1);
}

double median_compose(std::vector<double> component_sums) {
  return lower_median(std::move(component_sums));
}

double compose_success_lower_bound(int repetitions, double per_rep_success) {
  return 1.0 - median_failure_bound(repetitions, 1.0 - per_rep_success);
}

namespace {

struct ComposedPlan {
  int k = 0;
  std::uint64_t threshold = 0;      // M = 2^k
  std::uint64_t n_truncated = 1;    // budget share for the level schedule
  bool truncated_active = true;     // above the scheduling threshold
};

ComposedPlan make_plan(std::uint64_t n, std::uint64_t n_length, double p,
                       const MeanOptions& options) {
  ComposedPlan plan;
  plan.k = choose_k(n, n_length, p, options.c1_choose_k);
  if (plan.k > 40) throw RegimeError("mean_algorithm: truncation level overflows");
  plan.threshold = std::uint64_t{1} << plan.k;
  plan.n_truncated = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(options.split_ratio * static_cast<double>(n)));
  plan.truncated_active = static_cast<double>(plan.n_truncated) >=
                          std::exp2((1.0 - p / 2.0) * plan.k);
  return plan;
}

}  // namespace

MeanResult mean_algorithm(const SequenceInstance& f, std::uint64_t n, double p,
                          const MeanOptions& options, Mode mode,
                          std::uint64_t seed) {
  f.validate();
  if (n < 1) throw std::invalid_argument("mean_algorithm: n must be >= 1");
  if (!(p >= 1.0 && p < 2.0)) {
    throw std::invalid_argument("mean_algorithm: need 1 <= p < 2");
  }
  const std::uint64_t n_length = f.size();
  MeanResult result;

  if (n >= n_length) {
    result.path = MeanResult::Path::classical;
    result.estimate = mean(f);
    result.report.classical_queries = n_length;
    return result;
  }
  if (static_cast<double>(n) <
      options.c0_trivial * std::sqrt(static_cast<double>(n_length))) {
    result.path = MeanResult::Path::trivial_zero;
    result.estimate = 0.0;
    return result;
  }

  const ComposedPlan plan = make_plan(n, n_length, p, options);
  result.truncation_level = plan.k;
  std::vector<double> sums;
  sums.reserve(options.repetitions);
  for (int rep = 0; rep < options.repetitions; ++rep) {
    double sum = 0.0;
    if (plan.truncated_active) {
      TruncatedResult trunc = truncated_mean_algorithm(
          f, plan.k, plan.n_truncated, p, options.trunc, mode,
          derive_seed(seed, 2 * rep));
      sum += trunc.estimate;
      result.report += trunc.report;
    }
    TailResult tail = tail_algorithm(f, n_length, plan.threshold, p, options.tail,
                                     derive_seed(seed, 2 * rep + 1));
    sum += tail.estimate;
    result.report += tail.report;
    sums.push_back(sum);
  }
  result.estimate = median_compose(std::move(sums));
  return result;
}

MeanDistribution mean_distribution(const SequenceInstance& f, std::uint64_t n,
                                   double p, const MeanOptions& options,
                                   Mode mode, std::uint64_t trials,
                                   std::uint64_t seed) {
  f.validate();
  if (trials < 1) {
    throw std::invalid_argument("mean_distribution: trials must be >= 1");
  }
  MeanDistribution out;
  const std::uint64_t n_length = f.size();

  // Deterministic paths collapse to a point mass.
  if (n >= n_length ||
      static_cast<double>(n) <
          options.c0_trivial * std::sqrt(static_cast<double>(n_length))) {
    MeanResult one = mean_algorithm(f, n, p, options, mode, seed);
    out.report = one.report;
    out.path = one.path;
    OutcomeDistribution dist(DistMode::exact);
    dist.add(Outcome{one.estimate}, 1.0);
    dist.finalize();
    out.dist = dist;
    return out;
  }

  const ComposedPlan plan = make_plan(n, n_length, p, options);
  out.truncation_level = plan.k;
  out.path = MeanResult::Path::composed;

  // Tail path selection is input-independent; resolve it once. Zero and
  // classical tails contribute a deterministic summand.
  TailResult tail_probe =
      tail_algorithm(f, n_length, plan.threshold, p, options.tail, seed);
  const bool tail_quantum = tail_probe.path == TailResult::Path::quantum;

  const int m1_qubits = [&] {
    int bits = 0;
    while ((std::uint64_t{1} << bits) < n_length) ++bits;
    return std::max(bits, 1);
  }();
  const LevelSchedule schedule =
      plan.truncated_active ? LevelSchedule::make(plan.k, plan.n_truncated, p)
                            : LevelSchedule{};
  const int trunc_qubits =
      plan.truncated_active
          ? *std::max_element(schedule.phase_bits.begin(), schedule.phase_bits.end()) +
                m1_qubits + 1
          : 0;

  const bool fast_path =
      !tail_quantum && trunc_qubits <= options.limits.exact_qubit_cap;
  if (fast_path && plan.truncated_active) {
    // Composite program: `repetitions` copies of the truncated stages with a
    // shared per-stage distribution cache; the tail adds a constant.
    MeasuredAlgorithm trunc = build_truncated_algorithm(
        n_length, plan.k, plan.n_truncated, p, options.trunc);
    MeasuredAlgorithm composite;
    composite.name = "mean-composed";
    composite.start_state = trunc.start_state;
    const std::size_t stride = trunc.stages.size();
    for (int rep = 0; rep < options.repetitions; ++rep) {
      composite.stages.insert(composite.stages.end(), trunc.stages.begin(),
                              trunc.stages.end());
    }
    const auto trunc_output = trunc.output;
    const double tail_value = tail_probe.estimate;
    const int reps = options.repetitions;
    composite.output = [trunc_output, tail_value, stride,
                        reps](std::span<const std::uint64_t> outcomes) {
      std::vector<double> sums;
      sums.reserve(reps);
      for (int rep = 0; rep < reps; ++rep) {
        const auto slice = outcomes.subspan(rep * stride, stride);
        sums.push_back(std::get<double>(trunc_output(slice)) + tail_value);
      }
      return Outcome{lower_median(std::move(sums))};
    };

    MeasuredRunner runner(composite, f, options.limits);
    out.dist = runner.run_sampled(trials, seed);
    out.report = resource_report(composite);
    for (int rep = 0; rep < options.repetitions; ++rep) {
      out.report += tail_probe.report;
    }
    return out;
  }

  // General path: realize trials one by one.
  std::vector<Outcome> samples;
  samples.reserve(trials);
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    MeanResult one =
        mean_algorithm(f, n, p, options, mode, derive_seed(seed, trial));
    if (trial == 0) out.report = one.report;
    samples.push_back(Outcome{one.estimate});
  }
  out.dist = OutcomeDistribution::from_samples(samples);
  return out;
}

}  // namespace qsum
