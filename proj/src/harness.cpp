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

#include "qsum/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace qsum {

namespace {

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

int worker_count() {
  if (const char* env = std::getenv("QSUM_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

PoolProfile::Kind profile_kind_from_string(const std::string& s) {
  if (s == "uniform") return PoolProfile::Kind::uniform;
  if (s == "spiky") return PoolProfile::Kind::spiky;
  if (s == "single_spike") return PoolProfile::Kind::single_spike;
  if (s == "hard_family") return PoolProfile::Kind::hard_family;
  throw std::invalid_argument("unknown instance profile: " + s);
}

}  // namespace

MeanOptions ExperimentConfig::mean_options() const {
  MeanOptions options;
  options.split_ratio = split_ratio;
  options.repetitions = repetitions;
  options.c1_choose_k = c1_choose_k;
  options.tail.epsilon_enc = epsilon_enc;
  options.tail.lstar_multiplier = lstar_multiplier;
  options.tail.limits.exact_qubit_cap = qubit_cap;
  options.tail.limits.tuple_budget = tuple_budget;
  options.trunc.r_planes = r_planes;
  options.trunc.epsilon_enc = epsilon_enc;
  options.trunc.limits.exact_qubit_cap = qubit_cap;
  options.trunc.limits.tuple_budget = tuple_budget;
  options.limits.exact_qubit_cap = qubit_cap;
  options.limits.tuple_budget = tuple_budget;
  return options;
}

void ExperimentConfig::validate() const {
  if (lengths.empty() || ps.empty() || n_grid.empty()) {
    throw std::invalid_argument("config: N, p and n grids must be nonempty");
  }
  if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  for (double p : ps) {
    if (!(p >= 1.0 && p < 2.0)) {
      throw std::invalid_argument("config: p must satisfy 1 <= p < 2");
    }
  }
  if (qubit_cap < 4) throw std::invalid_argument("config: qubit cap too small");
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ExperimentConfig config;
  config.lengths = j.value("N", config.lengths);
  config.ps = j.value("p", config.ps);
  config.n_grid = j.value("n_grid", config.n_grid);
  if (j.contains("mode")) {
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "exact") {
      config.mode = Mode::exact;
    } else if (mode == "sampled") {
      config.mode = Mode::sampled;
    } else {
      throw std::invalid_argument("config: mode must be exact or sampled");
    }
  }
  config.trials = j.value("trials", config.trials);
  config.seed = j.value("seed", config.seed);
  if (j.contains("instances")) {
    config.profiles.clear();
    for (const auto& entry : j.at("instances")) {
      PoolProfile profile;
      profile.kind = profile_kind_from_string(entry.at("kind").get<std::string>());
      profile.count = entry.value("count", std::uint64_t{1});
      profile.spikes = entry.value("spikes", std::uint64_t{2});
      profile.level_fraction = entry.value("level_fraction", 0.5);
      config.profiles.push_back(profile);
    }
  }
  if (j.contains("calibration")) {
    const auto& c = j.at("calibration");
    config.m_constant = c.value("m_constant", config.m_constant);
    config.c1_choose_k = c.value("c1_choose_k", config.c1_choose_k);
    config.c0_hard = c.value("c0_hard", config.c0_hard);
    config.repetitions = c.value("repetitions", config.repetitions);
    config.split_ratio = c.value("split_ratio", config.split_ratio);
    config.lstar_multiplier = c.value("lstar_multiplier", config.lstar_multiplier);
    config.success_bound_constant =
        c.value("success_bound_constant", config.success_bound_constant);
    config.r_planes = c.value("r_planes", config.r_planes);
    config.epsilon_enc = c.value("epsilon_enc", config.epsilon_enc);
  }
  config.qubit_cap = j.value("qubit_cap", config.qubit_cap);
  config.tuple_budget = j.value("tuple_budget", config.tuple_budget);
  config.timing = j.value("timing", config.timing);
  config.out = j.value("out", config.out);
  return config;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return from_json_text(text.str());
}

double rate_bound(std::uint64_t n_length, double p, std::uint64_t n) {
  const double len = static_cast<double>(n_length);
  const double nn = static_cast<double>(n);
  const double logterm = std::max(std::log2(nn / std::sqrt(len)), 1.0);
  return std::pow(nn, -2.0 / p) * std::pow(len, 2.0 / p - 1.0) *
         std::pow(logterm, 2.0 / p - 1.0);
}

std::vector<SequenceInstance> build_instance_pool(const ExperimentConfig& config,
                                                  std::uint64_t n_length,
                                                  double p) {
  std::vector<SequenceInstance> pool;
  const PNorm norm{p, false};
  std::uint64_t salt = 0;
  for (const PoolProfile& profile : config.profiles) {
    for (std::uint64_t c = 0; c < profile.count; ++c) {
      const std::uint64_t seed =
          derive_seed(config.seed, (n_length << 24) ^ (salt++ << 8) ^ c);
      switch (profile.kind) {
        case PoolProfile::Kind::uniform:
          pool.push_back(random_ball_instance(n_length, norm,
                                              InstanceProfile{}, seed));
          break;
        case PoolProfile::Kind::spiky: {
          InstanceProfile spiky;
          spiky.kind = InstanceProfile::Kind::spiky;
          spiky.spike_count = std::max<std::uint64_t>(1, profile.spikes);
          spiky.spike_level =
              profile.level_fraction *
              std::pow(static_cast<double>(n_length) /
                           static_cast<double>(spiky.spike_count),
                       1.0 / p);
          pool.push_back(random_ball_instance(n_length, norm, spiky, seed));
          break;
        }
        case PoolProfile::Kind::single_spike: {
          SequenceInstance f;
          f.values.assign(n_length, 0.0);
          f.values[0] = std::pow(static_cast<double>(n_length), 1.0 / p);
          pool.push_back(std::move(f));
          break;
        }
        case PoolProfile::Kind::hard_family: {
          // Families at fixed budgets spread across the admissible band, so
          // the same pool serves every point of the n grid.
          const double lo = config.c0_hard * std::sqrt(static_cast<double>(n_length));
          const double hi =
              config.c0_hard * static_cast<double>(n_length) / std::sqrt(12.0);
          if (lo > hi) break;  // family regime empty at this length
          const double step = profile.count > 1
                                  ? (hi - lo) / static_cast<double>(profile.count)
                                  : 0.0;
          const auto n_star = static_cast<std::uint64_t>(
              std::min(hi, std::ceil(lo + step * static_cast<double>(c))));
          const HardFamily family =
              choose_hard_params(n_star, n_length, p, config.c0_hard);
          pool.push_back(make_f_u(
              family, random_weight_vector(n_length, family.level + 1, seed)));
          break;
        }
      }
    }
  }
  return pool;
}

OutcomeDistribution monte_carlo_baseline(const SequenceInstance& f,
                                         std::uint64_t n, std::uint64_t trials,
                                         std::uint64_t seed) {
  f.validate();
  if (n < 1) throw std::invalid_argument("monte_carlo_baseline: n must be >= 1");
  const std::uint64_t len = f.size();
  const std::uint64_t draws = std::min(n, len);
  std::mt19937_64 gen(seed);
  std::vector<std::uint64_t> positions(len);
  std::vector<Outcome> samples;
  samples.reserve(trials);
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    std::iota(positions.begin(), positions.end(), 0);
    KahanSum sum;
    for (std::uint64_t i = 0; i < draws; ++i) {
      const auto j = i + static_cast<std::uint64_t>(
                             uniform01(gen) * static_cast<double>(len - i));
      std::swap(positions[i], positions[std::min(j, len - 1)]);
      sum.add(f(positions[i]));
    }
    samples.push_back(Outcome{sum.value() / static_cast<double>(draws)});
  }
  return OutcomeDistribution::from_samples(samples);
}

double monte_carlo_baseline_error(const SequenceInstance& f, std::uint64_t n,
                                  std::uint64_t trials, std::uint64_t seed,
                                  double theta) {
  return error_at_confidence(mean(f), monte_carlo_baseline(f, n, trials, seed),
                             theta);
}

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << "N,p,n_requested,n_actual,algorithm,error_at_quarter,"
         "success_probability,wall_time,seed\n";
  for (const ResultRow& row : rows) {
    out << row.n_length << ',' << format_double(row.p) << ',' << row.n_requested
        << ',' << row.n_actual << ',' << row.algorithm << ','
        << format_double(row.error_at_quarter) << ','
        << format_double(row.success_probability) << ','
        << format_double(row.wall_time) << ',' << row.seed << '\n';
  }
  return out.str();
}

std::string rows_to_json(const std::vector<ResultRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const ResultRow& row : rows) {
    out.push_back({{"N", row.n_length},
                   {"p", row.p},
                   {"n_requested", row.n_requested},
                   {"n_actual", row.n_actual},
                   {"algorithm", row.algorithm},
                   {"error_at_quarter", row.error_at_quarter},
                   {"success_probability", row.success_probability},
                   {"wall_time", row.wall_time},
                   {"seed", row.seed}});
  }
  return out.dump(2);
}

void write_rows(const std::vector<ResultRow>& rows, const std::string& csv_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + csv_path);
  out << rows_to_csv(rows);
  if (csv_path.size() > 4 && csv_path.substr(csv_path.size() - 4) == ".csv") {
    const std::string json_path = csv_path.substr(0, csv_path.size() - 4) + ".json";
    std::ofstream mirror(json_path, std::ios::binary);
    mirror << rows_to_json(rows) << "\n";
  }
}

std::vector<ResultRow> rows_from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<ResultRow> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) throw std::runtime_error("malformed CSV row: " + line);
    ResultRow row;
    row.n_length = std::stoull(cells[0]);
    row.p = std::stod(cells[1]);
    row.n_requested = std::stoull(cells[2]);
    row.n_actual = std::stoull(cells[3]);
    row.algorithm = cells[4];
    row.error_at_quarter = std::stod(cells[5]);
    row.success_probability = std::stod(cells[6]);
    row.wall_time = std::stod(cells[7]);
    row.seed = std::stoull(cells[8]);
    rows.push_back(row);
  }
  return rows;
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& config) {
  config.validate();

  struct Task {
    std::uint64_t n_length;
    double p;
    std::uint64_t n;
    std::size_t instance;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  std::map<std::pair<std::uint64_t, double>, std::vector<SequenceInstance>> pools;
  for (std::uint64_t n_length : config.lengths) {
    for (double p : config.ps) {
      auto& pool = pools[{n_length, p}];
      pool = build_instance_pool(config, n_length, p);
      for (std::uint64_t n : config.n_grid) {
        for (std::size_t i = 0; i < pool.size(); ++i) {
          const std::uint64_t task_seed = derive_seed(
              config.seed, (n_length << 40) ^ (n << 16) ^
                               (static_cast<std::uint64_t>(p * 64.0) << 8) ^ i);
          tasks.push_back(Task{n_length, p, n, i, task_seed});
        }
      }
    }
  }

  std::vector<std::vector<ResultRow>> slots(tasks.size());
  std::atomic<std::size_t> cursor{0};
  const MeanOptions base_options = config.mean_options();
  auto work = [&]() {
    for (;;) {
      const std::size_t at = cursor.fetch_add(1);
      if (at >= tasks.size()) return;
      const Task& task = tasks[at];
      const SequenceInstance& f = pools[{task.n_length, task.p}][task.instance];
      const auto started = std::chrono::steady_clock::now();

      MeanDistribution quantum;
      try {
        quantum = mean_distribution(f, task.n, task.p, base_options, config.mode,
                                    config.trials, task.seed);
      } catch (const std::exception& e) {
        // infeasible point (qubit cap, regime): skip it with a note
        std::fprintf(stderr, "skipping N=%llu p=%g n=%llu: %s\n",
                     static_cast<unsigned long long>(task.n_length), task.p,
                     static_cast<unsigned long long>(task.n), e.what());
        continue;
      }
      const double truth = mean(f);
      ResultRow q_row;
      q_row.n_length = task.n_length;
      q_row.p = task.p;
      q_row.n_requested = task.n;
      q_row.n_actual = std::max<std::uint64_t>(1, quantum.report.total_queries());
      q_row.algorithm = "quantum";
      q_row.error_at_quarter = error_at_confidence(truth, quantum.dist, 0.25);
      const double bound =
          config.success_bound_constant * rate_bound(task.n_length, task.p, task.n);
      double mass = 0.0;
      for (const auto& [outcome, prob] : quantum.dist.support()) {
        if (std::abs(std::get<double>(outcome) - truth) <= bound) mass += prob;
      }
      q_row.success_probability = std::min(mass, 1.0);
      q_row.seed = task.seed;

      ResultRow c_row = q_row;
      c_row.algorithm = "classical-mc";
      c_row.n_actual = std::min(task.n, task.n_length);
      const OutcomeDistribution baseline = monte_carlo_baseline(
          f, task.n, config.trials, derive_seed(task.seed, 0x4D43));
      c_row.error_at_quarter = error_at_confidence(truth, baseline, 0.25);
      double c_mass = 0.0;
      for (const auto& [outcome, prob] : baseline.support()) {
        if (std::abs(std::get<double>(outcome) - truth) <= bound) c_mass += prob;
      }
      c_row.success_probability = std::min(c_mass, 1.0);

      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
              .count();
      q_row.wall_time = config.timing ? elapsed : 0.0;
      c_row.wall_time = 0.0;
      slots[at] = {q_row, c_row};
    }
  };

  const int workers = std::min<int>(worker_count(), static_cast<int>(tasks.size()));
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w) threads.emplace_back(work);
  for (std::thread& t : threads) t.join();

  std::vector<ResultRow> rows;
  for (const auto& slot : slots) rows.insert(rows.end(), slot.begin(), slot.end());
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.n_length, a.p, a.n_requested, a.algorithm, a.seed) <
           std::tie(b.n_length, b.p, b.n_requested, b.algorithm, b.seed);
  });
  return rows;
}

ScalingFit fit_scaling(const std::vector<ResultRow>& rows,
                       const ScalingFilter& filter) {
  std::map<std::uint64_t, double> per_n;  // n -> error
  for (const ResultRow& row : rows) {
    if (row.n_length != filter.n_length || row.p != filter.p ||
        row.algorithm != filter.algorithm || row.n_requested < filter.n_min ||
        row.n_requested > filter.n_max) {
      continue;
    }
    auto [it, inserted] = per_n.emplace(row.n_requested, row.error_at_quarter);
    if (!inserted) {
      it->second = filter.worst_per_n ? std::max(it->second, row.error_at_quarter)
                                      : std::min(it->second, row.error_at_quarter);
    }
  }
  std::vector<std::pair<double, double>> points;  // (log n, log err)
  for (const auto& [n, err] : per_n) {
    if (err > 1e-12) {  // exact recoveries are degenerate for the fit
      points.emplace_back(std::log(static_cast<double>(n)), std::log(err));
    }
  }
  if (points.size() < 3) {
    throw std::invalid_argument("fit_scaling: need at least 3 usable points");
  }
  double sx = 0, sy = 0;
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
  }
  const double mx = sx / points.size();
  const double my = sy / points.size();
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  ScalingFit fit;
  fit.points = points.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (const auto& [x, y] : points) {
    const double r = y - (fit.intercept + fit.slope * x);
    fit.residual += r * r;
  }
  return fit;
}

std::string CalibrationRecord::to_json() const {
  nlohmann::json j;
  j["passed"] = passed;
  j["lstar_multiplier"] = lstar_multiplier;
  j["m_constant"] = m_constant;
  j["repetitions"] = repetitions;
  j["success_bound_constant"] = success_bound_constant;
  j["diagnostics"] = diagnostics;
  return j.dump(2);
}

CalibrationRecord calibrate(const ExperimentConfig& config) {
  CalibrationRecord record;
  std::ostringstream log;
  SimLimits limits;
  limits.exact_qubit_cap = config.qubit_cap;

  // Exact-success calibration points for the tail pipeline: amplification
  // runs forced on, thresholds on both sides of the guarantee cutoff.
  struct TailPoint {
    std::uint64_t n_length;
    double p;
    std::uint64_t threshold;
    double spike;
  };
  const std::vector<TailPoint> tail_points{
      {16, 1.0, 2, 16.0},
      {16, 1.5, 5, 6.3},
      {64, 1.0, 8, 60.0},
      {64, 1.5, 12, 15.0},
  };

  bool found = false;
  for (double multiplier : {0.05, 0.1, 0.2, 0.4, 0.7, 1.0}) {
    bool all_pass = true;
    for (const TailPoint& point : tail_points) {
      SequenceInstance f;
      f.values.assign(point.n_length, 0.0);
      f.values[point.n_length / 2] = point.spike;
      TailParams params =
          choose_tail_params(point.n_length, point.threshold, point.p,
                             0x1.0p-6, multiplier);
      const double success = tail_success_probability(f, params, limits);
      if (success < 0.75) {
        all_pass = false;
        break;
      }
    }
    if (all_pass) {
      record.lstar_multiplier = multiplier;
      found = true;
      break;
    }
  }
  if (!found) {
    record.diagnostics = "no repetition multiplier reached 3/4 success";
    return record;
  }
  log << "lstar_multiplier=" << record.lstar_multiplier << " passes tail grid; ";

  // Threshold constant: smallest c whose threshold choice keeps the tail
  // recoverable at 3/4 on the grid (zero tail and classical paths count as
  // exact recovery).
  found = false;
  for (double c : {1.0, 2.0, 4.0, 8.0}) {
    bool all_pass = true;
    for (const std::uint64_t n_length : {std::uint64_t{16}, std::uint64_t{64}}) {
      for (std::uint64_t n = static_cast<std::uint64_t>(
               std::sqrt(static_cast<double>(n_length)));
           n < n_length; n *= 2) {
        const std::uint64_t threshold = choose_M(n, n_length, 1.0, c);
        TailParams params = choose_tail_params(n_length, threshold, 1.0, 0x1.0p-6,
                                               record.lstar_multiplier);
        if (params.zero_tail) continue;  // exact by construction
        if (!params.guaranteed || params.quantum_queries() >= n_length) {
          continue;  // classical fallback, exact
        }
        SequenceInstance f;
        f.values.assign(n_length, 0.0);
        f.values[0] = static_cast<double>(n_length);
        if (tail_success_probability(f, params, limits) < 0.75) {
          all_pass = false;
          break;
        }
      }
      if (!all_pass) break;
    }
    if (all_pass) {
      record.m_constant = c;
      found = true;
      break;
    }
  }
  if (!found) {
    record.diagnostics = log.str() + "no threshold constant passed";
    return record;
  }
  log << "m_constant=" << record.m_constant << " passes; ";

  // Repetitions: smallest odd count whose exact-binomial composition bound
  // clears 3/4 when each repetition succeeds with probability 3/4.
  record.repetitions = 0;
  for (int reps : {1, 3, 5}) {
    if (compose_success_lower_bound(reps, 0.75) >= 0.75) {
      record.repetitions = reps;
      break;
    }
  }
  if (record.repetitions == 0) {
    record.diagnostics = log.str() + "no repetition count passed";
    return record;
  }
  log << "repetitions=" << record.repetitions << " passes; ";

  // Success-bound constant: smallest C with >= 3/4 of the output mass
  // within C * rate on a small sampled grid.
  found = false;
  ExperimentConfig probe = config;
  probe.lengths = {16};
  probe.ps = {1.0};
  probe.n_grid = {4, 6, 8, 12};
  probe.trials = std::min<std::uint64_t>(config.trials, 400);
  const MeanOptions options = probe.mean_options();
  for (double c : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
    bool all_pass = true;
    for (std::uint64_t n_length : probe.lengths) {
      const auto pool = build_instance_pool(probe, n_length, 1.0);
      for (std::uint64_t n : probe.n_grid) {
        for (std::size_t i = 0; i < pool.size() && all_pass; ++i) {
          MeanDistribution dist =
              mean_distribution(pool[i], n, 1.0, options, Mode::sampled,
                                probe.trials, derive_seed(probe.seed, n * 31 + i));
          const double truth = mean(pool[i]);
          const double bound = c * rate_bound(n_length, 1.0, n);
          double mass = 0.0;
          for (const auto& [outcome, prob] : dist.dist.support()) {
            if (std::abs(std::get<double>(outcome) - truth) <= bound) mass += prob;
          }
          if (mass < 0.75) all_pass = false;
        }
        if (!all_pass) break;
      }
      if (!all_pass) break;
    }
    if (all_pass) {
      record.success_bound_constant = c;
      found = true;
      break;
    }
  }
  if (!found) {
    record.diagnostics = log.str() + "no success-bound constant passed";
    return record;
  }
  log << "success_bound_constant=" << record.success_bound_constant << " passes";
  record.passed = true;
  record.diagnostics = log.str();
  return record;
}

}  // namespace qsum
