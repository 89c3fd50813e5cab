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
//
// End-to-end acceptance suite. Each numbered check prints one PASS/FAIL
// line; the process exits nonzero if any check fails.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "qsum/counting_mean.hpp"
#include "qsum/full_mean.hpp"
#include "qsum/hard_instances.hpp"
#include "qsum/harness.hpp"
#include "qsum/tail_grover.hpp"

using namespace qsum;

namespace {

int failures = 0;

void report(const std::string& id, bool ok, const std::string& detail) {
  std::printf("%-4s %s: %s\n", ok ? "PASS" : "FAIL", id.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

// ---------------------------------------------------------------------
// 1. Amplified single-run law against the closed form.
// ---------------------------------------------------------------------
void check_amplified_law() {
  double worst = 0.0;
  for (int m1 = 1; m1 <= 4; ++m1) {
    const std::uint64_t dim = std::uint64_t{1} << m1;
    for (std::uint64_t mu = 1; mu <= dim; ++mu) {
      for (std::uint64_t iterations = 0; iterations <= 5; ++iterations) {
        SequenceInstance f;
        f.values.assign(dim, 0.0);
        for (std::uint64_t i = 0; i < mu; ++i) f.values[i] = 2.25;
        TailParams params;
        params.n_length = dim;
        params.threshold = 2;
        params.p = 1.0;
        params.index_bits = m1;
        params.value_bits = m1 + 3;
        params.iterations = iterations;
        params.repetitions = 1;
        const OutcomeDistribution dist = run_A0(f, params);
        const double theta = std::asin(std::sqrt(double(mu) / double(dim)));
        const double expect =
            std::pow(std::sin((2.0 * double(iterations) + 1.0) * theta), 2) /
            double(mu);
        const std::uint64_t code = beta_encode(2.25, 2, m1, m1 + 3);
        const double decoded = phi_decode_value(code, m1, m1 + 3);
        for (std::uint64_t i = 0; i < mu; ++i) {
          const double got = dist.probability_of(Outcome{IndexValue{i, decoded}});
          worst = std::max(worst, std::abs(got - expect));
        }
      }
    }
  }
  std::ostringstream detail;
  detail << "amplified outcome law, max deviation " << worst
         << " over m'<=4, all mu, L<=5 (tolerance 1e-9)";
  report("1", worst < 1e-9, detail.str());
}

// ---------------------------------------------------------------------
// 2. Tail-pipeline success probability at the formula parameters.
// ---------------------------------------------------------------------
void check_tail_success() {
  SimLimits limits;
  limits.exact_qubit_cap = 22;
  double min_success = 1.0;
  int points = 0;
  for (std::uint64_t n_length : {std::uint64_t{8}, std::uint64_t{16}}) {
    for (double p : {1.0, 1.5}) {
      const std::uint64_t m0 =
          static_cast<std::uint64_t>(std::ceil(std::pow(6.0, 2.0 / p)));
      for (std::uint64_t threshold : {m0, m0 + 7}) {
        // pool of 20 ball instances: uniform noise plus feasible spikes
        std::vector<SequenceInstance> pool;
        for (std::uint64_t s = 0; s < 10; ++s) {
          pool.push_back(random_ball_instance(n_length, PNorm{p, false},
                                              InstanceProfile{}, 100 + s));
        }
        InstanceProfile spiky;
        spiky.kind = InstanceProfile::Kind::spiky;
        spiky.spike_count = 1;
        spiky.spike_level = 0.9 * std::pow(double(n_length), 1.0 / p);
        for (std::uint64_t s = 0; s < 10; ++s) {
          pool.push_back(
              random_ball_instance(n_length, PNorm{p, false}, spiky, 200 + s));
        }
        const TailParams params =
            choose_tail_params(n_length, threshold, p, 0x1.0p-6);
        for (const SequenceInstance& f : pool) {
          min_success =
              std::min(min_success, tail_success_probability(f, params, limits));
          ++points;
        }
      }
    }
  }
  std::ostringstream detail;
  detail << "tail recovery within decode tolerance: min success " << min_success
         << " over " << points << " ball instances (target >= 0.75)";
  report("2", min_success >= 0.75, detail.str());

  // Supplementary: nonempty heavy sets through the amplification pipeline,
  // including a genuine guarantee-regime point at p = 1.5.
  double supp_min = 1.0;
  {
    SequenceInstance f;
    f.values.assign(64, 0.0);
    f.values[17] = 41.0;
    const TailParams params = choose_tail_params(64, 40, 1.0, 0x1.0p-6);
    supp_min = std::min(supp_min, tail_success_probability(f, params, limits));
  }
  {
    SequenceInstance f;
    f.values.assign(64, 0.0);
    f.values[5] = 15.0;  // 15^1.5 = 58.1 <= 64, inside the ball
    const TailParams params = choose_tail_params(64, 12, 1.5, 0x1.0p-6);
    if (!params.guaranteed || params.zero_tail) {
      supp_min = 0.0;  // regime selection broke; flag loudly
    } else {
      supp_min =
          std::min(supp_min, tail_success_probability(f, params, limits));
    }
  }
  std::ostringstream supp;
  supp << "amplification with nonempty heavy sets: min success " << supp_min
       << " (target >= 0.75)";
  report("2s", supp_min >= 0.75, supp.str());
}

// ---------------------------------------------------------------------
// 3. Unitarity, permutation structure, additivity, and total mass.
// ---------------------------------------------------------------------
void check_model_soundness() {
  bool ok = true;
  std::ostringstream detail;

  // (a) query unitaries are basis permutations
  {
    SequenceInstance f;
    f.values = {4.5, -3.0, 0.2, 7.9, -6.1, 0.0, 2.4, -0.7};
    const TailParams params = choose_tail_params(8, 3, 1.0, 0x1.0p-4);
    StagePtr stage = build_tail_stage(params);
    const QueryPermutation perm = build_query_unitary(stage->query, f);
    const std::uint64_t dim = std::uint64_t{1} << stage->qubits();
    std::vector<char> seen(dim, 0);
    for (std::uint64_t b = 0; b < dim; ++b) {
      const std::uint64_t image = perm(b);
      if (image >= dim || seen[image]) {
        ok = false;
        break;
      }
      seen[image] = 1;
    }
    if (!ok) detail << "query image not a bijection; ";
  }

  // (b) full unitarity of a counting circuit (column orthonormality)
  {
    QueryDescriptor base;
    base.qubits = 3;
    base.index_bits = 2;
    base.value_bits = 1;
    base.probed = {0, 1, 2, 3};
    base.domain = [](std::uint64_t i) { return i; };
    base.encode = [](double z) {
      return z > 0.5 ? std::uint64_t{1} : std::uint64_t{0};
    };
    SequenceInstance f;
    f.values = {1.0, 0.0, 1.0, 0.0};
    StagePtr stage = build_counting_stage(base, 3);
    const std::uint64_t dim = std::uint64_t{1} << stage->qubits();
    std::vector<StateVector> columns;
    columns.reserve(dim);
    for (std::uint64_t b = 0; b < dim; ++b) {
      columns.push_back(run_unmeasured(*stage, f, b));
    }
    double worst = 0.0;
    for (std::uint64_t i = 0; i < dim; ++i) {
      for (std::uint64_t j = i; j < dim; ++j) {
        Amp dot{0.0, 0.0};
        for (std::uint64_t r = 0; r < dim; ++r) {
          dot += std::conj(columns[i].amplitude(r)) * columns[j].amplitude(r);
        }
        const Amp expect = i == j ? Amp(1.0, 0.0) : Amp(0.0, 0.0);
        worst = std::max(worst, std::abs(dot - expect));
      }
    }
    if (worst > 1e-10) {
      ok = false;
      detail << "counting circuit not unitary (deviation " << worst << "); ";
    }
  }

  // (c) norm preservation through the tail program on many basis starts
  {
    SequenceInstance f;
    f.values = {4.5, -3.0, 0.2, 7.9, -6.1, 0.0, 2.4, -0.7};
    const TailParams params = choose_tail_params(8, 3, 1.0, 0x1.0p-4);
    StagePtr stage = build_tail_stage(params);
    const std::uint64_t dim = std::uint64_t{1} << stage->qubits();
    double worst = 0.0;
    for (std::uint64_t b = 0; b < dim; b += 7) {
      const StateVector out = run_unmeasured(*stage, f, b);
      worst = std::max(worst, std::abs(out.squared_norm() - 1.0));
    }
    if (worst > 1e-10) {
      ok = false;
      detail << "norm drift " << worst << "; ";
    }
  }

  // (d) additivity of the query counter and unit total mass
  {
    TruncatedOptions options;
    options.r_planes = 3;
    const MeasuredAlgorithm algorithm =
        build_truncated_algorithm(8, 1, 8, 1.0, options);
    std::uint64_t stage_sum = 0;
    for (const StagePtr& stage : algorithm.stages) stage_sum += stage->n_queries();
    if (algorithm.n_queries() != stage_sum) {
      ok = false;
      detail << "query additivity broken; ";
    }

    SequenceInstance f;
    f.values = {0.5, -1.5, 1.5, 0.0, 0.25, -0.25, 1.25, -1.75};
    const TailParams params = choose_tail_params(8, 2, 1.0, 0x1.0p-4);
    const OutcomeDistribution tail_dist = run_A0(f, params);
    const double mass = tail_dist.total_mass();
    if (std::abs(mass - 1.0) > 1e-9) {
      ok = false;
      detail << "tail outcome mass " << mass << "; ";
    }
    const OutcomeDistribution count_dist = amplitude_estimation(
        [](std::uint64_t i) { return i % 3 == 0; }, 3, 4);
    if (std::abs(count_dist.total_mass() - 1.0) > 1e-9) {
      ok = false;
      detail << "counting outcome mass off; ";
    }
  }

  if (ok) detail << "permutation, unitarity, additivity and mass checks clean";
  report("3", ok, detail.str());
}

// ---------------------------------------------------------------------
// 4. Decomposition identities over 1000 random instances.
// ---------------------------------------------------------------------
void check_decompositions() {
  std::mt19937_64 gen(404);
  double worst_split = 0.0;
  double worst_level = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 1 + trial % 5;
    const std::uint64_t n = 8 + (trial % 57);
    SequenceInstance f;
    f.values.resize(n);
    for (double& v : f.values) {
      v = std::ldexp(1.0, k) * (2.0 * uniform01(gen) - 1.0);
    }
    const double threshold = 0.25 + 4.0 * uniform01(gen);
    worst_split =
        std::max(worst_split, std::abs(mean(f) - truncated_mean(f, threshold) -
                                       tail_mean(f, threshold)));
    KahanSum total;
    for (int level = 0; level <= k; ++level) {
      for (int sigma = 0; sigma <= 1; ++sigma) {
        const double sign = sigma == 0 ? 1.0 : -1.0;
        total.add(sign * std::ldexp(level_mean(f, level, sigma), level));
      }
    }
    worst_level = std::max(
        worst_level,
        std::abs(total.value() - truncated_mean(f, std::ldexp(1.0, k))));
  }
  std::ostringstream detail;
  detail << "split identity max dev " << worst_split
         << ", level identity max dev " << worst_level
         << " over 1000 instances (tolerance 1e-10)";
  report("4", worst_split < 1e-10 && worst_level < 1e-10, detail.str());
}

// ---------------------------------------------------------------------
// 5. Counting readout vs the independent eigenphase oracle.
// ---------------------------------------------------------------------
std::map<double, double> oracle_estimate_law(std::uint64_t marked, int index_bits,
                                             int t) {
  const std::uint64_t dim = std::uint64_t{1} << index_bits;
  const std::uint64_t phase_dim = std::uint64_t{1} << t;
  std::vector<std::pair<double, double>> components;
  if (marked == 0) {
    components = {{1.0, 0.0}};
  } else if (marked == dim) {
    components = {{1.0, std::numbers::pi}};
  } else {
    const double theta = std::asin(std::sqrt(double(marked) / double(dim)));
    components = {{0.5, 2.0 * theta}, {0.5, -2.0 * theta}};
  }
  std::map<double, double> law;
  for (std::uint64_t omega = 0; omega < phase_dim; ++omega) {
    double probability = 0.0;
    for (const auto& [weight, phase] : components) {
      std::complex<double> amp{0.0, 0.0};
      for (std::uint64_t w = 0; w < phase_dim; ++w) {
        const double angle = phase * double(w) -
                             2.0 * std::numbers::pi * double(omega * w) /
                                 double(phase_dim);
        amp += std::complex<double>{std::cos(angle), std::sin(angle)};
      }
      probability += weight * std::norm(amp) / double(phase_dim * phase_dim);
    }
    const double s =
        std::sin(std::numbers::pi * double(omega) / double(phase_dim));
    law[std::round(s * s * 1e12) / 1e12] += probability;
  }
  return law;
}

void check_counting_oracle() {
  double worst = 0.0;
  bool extremes_exact = true;
  for (int index_bits = 1; index_bits <= 3; ++index_bits) {
    const std::uint64_t dim = std::uint64_t{1} << index_bits;
    for (int t = 1; t <= 6; ++t) {
      for (std::uint64_t marked = 0; marked <= dim; ++marked) {
        const OutcomeDistribution sim = amplitude_estimation(
            [marked](std::uint64_t i) { return i < marked; }, index_bits, t);
        const auto expected = oracle_estimate_law(marked, index_bits, t);
        for (const auto& [estimate, probability] : expected) {
          double got = 0.0;
          for (const auto& [outcome, p] : sim.support()) {
            if (std::abs(std::get<double>(outcome) - estimate) < 1e-10) got += p;
          }
          worst = std::max(worst, std::abs(got - probability));
        }
        if (marked == 0 || marked == dim) {
          if (sim.size() != 1 ||
              std::abs(sim.support()[0].second - 1.0) > 1e-12) {
            extremes_exact = false;
          }
        }
      }
    }
  }
  std::ostringstream detail;
  detail << "readout law max deviation " << worst
         << " for m'<=3, t<=6 (tolerance 1e-9); extreme marked sets "
         << (extremes_exact ? "are" : "are NOT") << " point masses";
  report("5", worst < 1e-9 && extremes_exact, detail.str());
}

// ---------------------------------------------------------------------
// 6. Adversarial family validity.
// ---------------------------------------------------------------------
void check_hard_family() {
  bool ok = true;
  std::ostringstream detail;
  struct Point {
    std::uint64_t n, n_length;
  };
  for (const Point point : {Point{4, 16}, Point{8, 64}, Point{16, 64}}) {
    const HardFamily family =
        choose_hard_params(point.n, point.n_length, 1.0, 1.0);
    auto builder = [&family](const std::vector<std::uint8_t>& u) {
      return make_f_u(family, u);
    };
    const ConditionIReport cond =
        condition_I_check(builder, point.n_length, 10'000, 7);
    if (!cond.ok) {
      ok = false;
      detail << "coordinate check failed at N=" << point.n_length << "; ";
    }
    for (std::uint64_t w : {family.level, family.level + 1}) {
      for (std::uint64_t s = 0; s < 5; ++s) {
        const SequenceInstance f =
            make_f_u(family, random_weight_vector(point.n_length, w, 31 + s));
        if (lp_norm(f, PNorm{1.0, false}) > 1.0 + 1e-12) {
          ok = false;
          detail << "ball violation at weight " << w << "; ";
        }
      }
    }
    const SequenceInstance heavy = make_f_u(
        family, random_weight_vector(point.n_length, family.level + 1, 3));
    const SequenceInstance light =
        make_f_u(family, random_weight_vector(point.n_length, family.level, 4));
    if (std::abs(mean(heavy) - mean(light) - family.gap) > 1e-12) {
      ok = false;
      detail << "gap mismatch at N=" << point.n_length << "; ";
    }
    const double mid =
        std::sqrt(double(family.level) * double(point.n_length) / 2.0);
    const double inner = std::min(
        std::sqrt(double(family.level) * double(point.n_length - family.level)),
        std::sqrt(double(family.level + 1) *
                  double(point.n_length - family.level - 1)));
    const double outer = rho(point.n_length, family.level, family.level + 1);
    if (!(double(point.n) <= mid + 1e-9 && mid <= inner + 1e-9 &&
          inner <= outer + 1e-9)) {
      ok = false;
      detail << "budget chain violated at N=" << point.n_length << "; ";
    }
  }
  if (ok) {
    detail << "coordinate condition, ball membership, gap and budget chain hold";
  }
  report("6", ok, detail.str());
}

// ---------------------------------------------------------------------
// 7. Scaling diagnostic at N = 64, p = 1.
// ---------------------------------------------------------------------
void check_scaling() {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig config;
  config.lengths = {64};
  config.ps = {1.0};
  config.n_grid = {8, 11, 16, 23, 32};
  config.mode = Mode::sampled;
  config.trials = 600;
  config.seed = 1;
  const auto rows = run_sweep(config);

  ScalingFilter filter;
  filter.n_length = 64;
  filter.p = 1.0;
  filter.algorithm = "quantum";
  filter.n_min = 8;   // sqrt(N)
  filter.n_max = 32;  // N / 2
  double slope = 0.0;
  bool fit_ok = true;
  try {
    slope = fit_scaling(rows, filter).slope;
  } catch (const std::exception&) {
    fit_ok = false;
  }

  // single-spike comparison at n = N/2 on identical budgets
  SequenceInstance spike;
  spike.values.assign(64, 0.0);
  spike.values[0] = 64.0;
  const MeanOptions options = config.mean_options();
  const MeanDistribution quantum =
      mean_distribution(spike, 32, 1.0, options, Mode::sampled, 600, 5);
  const double quantum_error =
      error_at_confidence(mean(spike), quantum.dist, 0.25);
  const double classical_error = monte_carlo_baseline_error(spike, 32, 600, 5);

  std::ostringstream detail;
  detail << "worst-instance slope " << slope << " (band [-2.6, -1.4]); spike at "
         << "n=N/2: quantum error " << quantum_error << " vs classical "
         << classical_error << "; " << seconds_since(start) << "s";
  report("7", fit_ok && slope >= -2.6 && slope <= -1.4 &&
                  quantum_error < classical_error,
         detail.str());
}

// ---------------------------------------------------------------------
// 8. Classical-regime exactness.
// ---------------------------------------------------------------------
void check_classical_regime() {
  bool ok = true;
  std::ostringstream detail;
  MeanOptions options;
  options.tail.epsilon_enc = 0x1.0p-6;
  options.trunc.r_planes = 4;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SequenceInstance f =
        random_ball_instance(32, PNorm{1.0, false}, InstanceProfile{}, seed);
    const MeanResult result =
        mean_algorithm(f, 32 + seed, 1.0, options, Mode::exact, seed);
    if (result.estimate != mean(f)) {
      ok = false;
      detail << "classical path not bit-exact at seed " << seed << "; ";
    }
  }
  SequenceInstance f;
  f.values.assign(16, 0.0);
  f.values[3] = 16.0;
  const TailResult tail = tail_algorithm(f, 16, 17, 1.0, TailOptions{}, 1);
  if (tail.estimate != 0.0 || tail.report.total_queries() != 0) {
    ok = false;
    detail << "vanishing-tail path not free; ";
  }
  if (ok) detail << "n >= N is bit-exact; M^p > N costs zero queries";
  report("8", ok, detail.str());
}

// ---------------------------------------------------------------------
// 9. Byte-identical sweep reproducibility.
// ---------------------------------------------------------------------
void check_reproducibility() {
  ExperimentConfig config;
  config.lengths = {16};
  config.ps = {1.0};
  config.n_grid = {4, 8, 12};
  config.trials = 200;
  config.seed = 31;
  config.r_planes = 6;
  config.epsilon_enc = 0x1.0p-6;
  const std::string csv_a = rows_to_csv(run_sweep(config));
  const std::string csv_b = rows_to_csv(run_sweep(config));
  std::ofstream("/tmp/qsum_acceptance_a.csv", std::ios::binary) << csv_a;
  std::ofstream("/tmp/qsum_acceptance_b.csv", std::ios::binary) << csv_b;
  report("9", csv_a == csv_b && !csv_a.empty(),
         csv_a == csv_b ? "two sweeps emit byte-identical CSV"
                        : "CSV outputs differ between identical runs");
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  check_amplified_law();
  check_tail_success();
  check_model_soundness();
  check_decompositions();
  check_counting_oracle();
  check_hard_family();
  check_scaling();
  check_classical_regime();
  check_reproducibility();
  std::printf("%s: %d failure(s), %.1fs total\n",
              failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
              failures, seconds_since(start));
  return failures == 0 ? 0 : 1;
}
