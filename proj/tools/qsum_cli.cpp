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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qsum/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRegime = 3;

qsum::ExperimentConfig load_config(const std::string& config_path) {
  if (config_path.empty()) return qsum::ExperimentConfig{};
  return qsum::ExperimentConfig::from_json_file(config_path);
}

void apply_overrides(qsum::ExperimentConfig& config,
                     const std::optional<std::string>& mode,
                     const std::optional<std::uint64_t>& seed,
                     const std::optional<int>& qubit_cap,
                     const std::optional<std::string>& out) {
  if (mode) {
    if (*mode == "exact") {
      config.mode = qsum::Mode::exact;
    } else if (*mode == "sampled") {
      config.mode = qsum::Mode::sampled;
    } else {
      throw std::invalid_argument("--mode must be exact or sampled");
    }
  }
  if (seed) config.seed = *seed;
  if (qubit_cap) config.qubit_cap = *qubit_cap;
  if (out) config.out = *out;
}

int run_sweep_cmd(const qsum::ExperimentConfig& config) {
  const auto rows = qsum::run_sweep(config);
  qsum::write_rows(rows, config.out);
  std::cout << "wrote " << rows.size() << " rows to " << config.out << "\n";
  return kExitOk;
}

int run_baseline_cmd(const qsum::ExperimentConfig& config) {
  std::cout << "N,p,n,algorithm,error_at_quarter\n";
  for (std::uint64_t n_length : config.lengths) {
    for (double p : config.ps) {
      const auto pool = qsum::build_instance_pool(config, n_length, p);
      for (std::uint64_t n : config.n_grid) {
        double worst = 0.0;
        for (std::size_t i = 0; i < pool.size(); ++i) {
          worst = std::max(worst, qsum::monte_carlo_baseline_error(
                                      pool[i], n, config.trials,
                                      qsum::derive_seed(config.seed, n + i)));
        }
        std::cout << n_length << "," << p << "," << n << ",classical-mc,"
                  << worst << "\n";
      }
    }
  }
  return kExitOk;
}

int run_calibrate_cmd(const qsum::ExperimentConfig& config,
                      const std::string& out) {
  const qsum::CalibrationRecord record = qsum::calibrate(config);
  const std::string text = record.to_json();
  if (out.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream file(out);
    file << text << "\n";
    std::cout << "wrote calibration record to " << out << "\n";
  }
  if (!record.passed) {
    std::cerr << "calibration failed: " << record.diagnostics << "\n";
    return kExitRegime;
  }
  return kExitOk;
}

int run_hard_family_cmd(const qsum::ExperimentConfig& config, std::uint64_t n,
                        std::uint64_t n_length, double p,
                        std::uint64_t per_weight, const std::string& out_dir) {
  const qsum::HardFamily family =
      qsum::choose_hard_params(n, n_length, p, config.c0_hard);
  auto builder = [&family](const std::vector<std::uint8_t>& u) {
    return qsum::make_f_u(family, u);
  };
  const auto check =
      qsum::condition_I_check(builder, family.n_length, 10'000, config.seed);
  if (!check.ok) {
    std::cerr << "family failed the one-coordinate check: " << check.detail << "\n";
    return kExitRegime;
  }
  const auto files =
      qsum::export_family(family, per_weight, out_dir, config.seed);
  std::cout << "level=" << family.level << " spike_height=" << family.spike_height
            << " gap=" << family.gap << "\n";
  std::cout << "wrote " << files.size() << " files under " << out_dir << "\n";
  return kExitOk;
}

int run_report_cmd(const std::string& csv_path, std::uint64_t n_min,
                   std::uint64_t n_max) {
  const auto rows = qsum::rows_from_csv_file(csv_path);
  std::map<std::pair<std::uint64_t, double>, bool> keys;
  for (const auto& row : rows) keys[{row.n_length, row.p}] = true;
  std::cout << "N,p,algorithm,slope,intercept,residual,points\n";
  for (const auto& [key, _] : keys) {
    for (const std::string algorithm : {"quantum", "classical-mc"}) {
      qsum::ScalingFilter filter;
      filter.n_length = key.first;
      filter.p = key.second;
      filter.algorithm = algorithm;
      filter.n_min = n_min;
      filter.n_max = n_max;
      try {
        const qsum::ScalingFit fit = qsum::fit_scaling(rows, filter);
        std::cout << key.first << "," << key.second << "," << algorithm << ","
                  << fit.slope << "," << fit.intercept << "," << fit.residual
                  << "," << fit.points << "\n";
      } catch (const std::invalid_argument&) {
        std::cout << key.first << "," << key.second << "," << algorithm
                  << ",nan,nan,nan,0\n";
      }
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mean-estimation query simulator and benchmark harness"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::string> mode_override;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> qubit_cap_override;
  std::optional<std::string> out_override;
  app.add_option("--config", config_path, "JSON experiment config");
  app.add_option("--mode", mode_override, "exact|sampled");
  app.add_option("--seed", seed_override, "top-level RNG seed");
  app.add_option("--qubit-cap", qubit_cap_override, "dense-simulation qubit cap");
  app.add_option("--out", out_override, "output path");

  auto* sweep = app.add_subcommand("sweep", "run the error-vs-n sweep");
  auto* baseline = app.add_subcommand("baseline", "classical baseline errors");
  auto* calibrate = app.add_subcommand("calibrate", "search the free constants");
  std::string calibrate_out;
  calibrate->add_option("--record", calibrate_out, "calibration record path");

  auto* hard = app.add_subcommand("hard-family", "emit adversarial instances");
  std::uint64_t hard_n = 8, hard_len = 64, hard_per_weight = 4;
  double hard_p = 1.0;
  std::string hard_dir = "hard_family";
  hard->add_option("--n", hard_n, "query budget for the family");
  hard->add_option("--N", hard_len, "sequence length");
  hard->add_option("--p", hard_p, "summability exponent");
  hard->add_option("--per-weight", hard_per_weight, "instances per weight class");
  hard->add_option("--dir", hard_dir, "output directory");

  auto* report = app.add_subcommand("report", "fit scaling slopes from a CSV");
  std::string report_csv = "results.csv";
  std::uint64_t report_n_min = 0, report_n_max = ~std::uint64_t{0};
  report->add_option("--csv", report_csv, "sweep CSV to analyze");
  report->add_option("--n-min", report_n_min, "regime lower bound");
  report->add_option("--n-max", report_n_max, "regime upper bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    qsum::ExperimentConfig config = load_config(config_path);
    apply_overrides(config, mode_override, seed_override, qubit_cap_override,
                    out_override);
    if (sweep->parsed()) return run_sweep_cmd(config);
    if (baseline->parsed()) return run_baseline_cmd(config);
    if (calibrate->parsed()) return run_calibrate_cmd(config, calibrate_out);
    if (hard->parsed()) {
      return run_hard_family_cmd(config, hard_n, hard_len, hard_p,
                                 hard_per_weight,
                                 out_override.value_or(hard_dir));
    }
    if (report->parsed()) return run_report_cmd(report_csv, report_n_min, report_n_max);
  } catch (const qsum::RegimeError& e) {
    std::cerr << "infeasible regime: " << e.what() << "\n";
    return kExitRegime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
