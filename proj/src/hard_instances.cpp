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

#include "qsum/hard_instances.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace qsum {

double rho(std::uint64_t total, std::uint64_t weight_a, std::uint64_t weight_b) {
  if (weight_a == weight_b || weight_a > total || weight_b > total) {
    throw std::invalid_argument("rho: weights must differ and stay within range");
  }
  const double len = static_cast<double>(total);
  const double a = static_cast<double>(weight_a);
  const double b = static_cast<double>(weight_b);
  const double sep = std::abs(a - b);
  const double inner = std::min(a * (len - a), b * (len - b));
  return std::sqrt(len / sep) + std::sqrt(inner) / sep;
}

HardFamily choose_hard_params(std::uint64_t n, std::uint64_t n_length, double p,
                              double c0_cal) {
  if (n_length < 1 || n < 1 || !(p >= 1.0 && p < 2.0) || !(c0_cal > 0.0)) {
    throw std::invalid_argument("choose_hard_params: bad parameters");
  }
  const double len = static_cast<double>(n_length);
  const double budget = static_cast<double>(n);
  const double c1 = c0_cal / std::sqrt(12.0);
  if (budget < c0_cal * std::sqrt(len)) {
    throw RegimeError("choose_hard_params: n < c0 sqrt(N)");
  }
  if (budget > c1 * len) {
    throw RegimeError("choose_hard_params: n > c0 N / sqrt(12)");
  }
  const double raw = 2.0 * budget * budget / (c0_cal * c0_cal * len);
  const auto level = static_cast<std::uint64_t>(std::ceil(raw));

  if (budget > c0_cal * std::sqrt(static_cast<double>(level) * len / 2.0) + 1e-9) {
    throw RegimeError("choose_hard_params: n > c0 sqrt(level N / 2)");
  }
  if (2 * (level + 1) > n_length) {
    throw RegimeError("choose_hard_params: level + 1 > N / 2");
  }

  HardFamily family;
  family.n_length = n_length;
  family.p = p;
  family.level = level;
  family.spike_height = std::pow(static_cast<double>(level + 1), -1.0 / p) *
                        std::pow(len, 1.0 / p);
  family.gap = family.spike_height / len;
  return family;
}

SequenceInstance make_f_u(const HardFamily& family,
                          const std::vector<std::uint8_t>& u) {
  if (u.size() != family.n_length) {
    throw std::invalid_argument("make_f_u: bit vector length differs from N");
  }
  SequenceInstance f;
  f.values.assign(family.n_length, 0.0);
  for (std::uint64_t j = 0; j < family.n_length; ++j) {
    if (u[j]) f.values[j] = family.spike_height;
  }
  return f;
}

std::vector<std::uint8_t> random_weight_vector(std::uint64_t n_length,
                                               std::uint64_t weight,
                                               std::uint64_t seed) {
  if (weight > n_length) {
    throw std::invalid_argument("random_weight_vector: weight exceeds length");
  }
  std::mt19937_64 gen(seed);
  std::vector<std::uint64_t> positions(n_length);
  std::iota(positions.begin(), positions.end(), 0);
  std::vector<std::uint8_t> u(n_length, 0);
  for (std::uint64_t i = 0; i < weight; ++i) {
    const auto j = i + static_cast<std::uint64_t>(
                           uniform01(gen) * static_cast<double>(n_length - i));
    std::swap(positions[i], positions[std::min(j, n_length - 1)]);
    u[positions[i]] = 1;
  }
  return u;
}

ConditionIReport condition_I_check(
    const std::function<SequenceInstance(const std::vector<std::uint8_t>&)>& family,
    std::uint64_t n_length, std::uint64_t sample_pairs, std::uint64_t seed,
    std::uint64_t exhaustive_limit) {
  ConditionIReport report;
  report.coordinate.assign(n_length, -1);

  // Identify the candidate coordinate per position from single-bit probes.
  const std::vector<std::uint8_t> zero(n_length, 0);
  const SequenceInstance base = family(zero);
  for (std::uint64_t j = 0; j < n_length; ++j) {
    std::vector<std::uint8_t> probe = zero;
    probe[j] = 1;
    const SequenceInstance flipped = family(probe);
    for (std::uint64_t t = 0; t < n_length; ++t) {
      if (flipped(t) == base(t)) continue;
      if (report.coordinate[t] == -1) {
        report.coordinate[t] = static_cast<std::int64_t>(j);
      } else {
        // Two coordinates already move this position: cannot satisfy the
        // one-coordinate condition. Emit a concrete witness against the
        // first candidate.
        report.ok = false;
        report.t_witness = t;
        report.u_a = zero;
        report.u_b = probe;  // agrees with zero at the first candidate
        report.detail = "position depends on more than one coordinate";
        return report;
      }
    }
  }

  auto check_pair = [&](const std::vector<std::uint8_t>& a,
                        const std::vector<std::uint8_t>& b,
                        const SequenceInstance& fa, const SequenceInstance& fb) {
    for (std::uint64_t t = 0; t < n_length; ++t) {
      const std::int64_t j = report.coordinate[t];
      const bool agree = (j == -1) || a[j] == b[j];
      if (agree && fa(t) != fb(t)) {
        report.ok = false;
        report.t_witness = t;
        report.u_a = a;
        report.u_b = b;
        report.detail = "value changed while the governing coordinate agreed";
        return false;
      }
    }
    return true;
  };

  if (n_length <= exhaustive_limit) {
    // All vectors, compared against per-(t, bit) reference values.
    const std::uint64_t count = std::uint64_t{1} << n_length;
    std::vector<std::vector<std::uint8_t>> ref_vector(2 * n_length);
    std::vector<double> ref_value(2 * n_length, 0.0);
    std::vector<char> have(2 * n_length, 0);
    for (std::uint64_t bits = 0; bits < count; ++bits) {
      std::vector<std::uint8_t> u(n_length, 0);
      for (std::uint64_t j = 0; j < n_length; ++j) u[j] = (bits >> j) & 1;
      const SequenceInstance fu = family(u);
      for (std::uint64_t t = 0; t < n_length; ++t) {
        const std::int64_t j = report.coordinate[t];
        const std::uint64_t key =
            2 * t + (j == -1 ? 0 : static_cast<std::uint64_t>(u[j]));
        if (!have[key]) {
          have[key] = 1;
          ref_value[key] = fu(t);
          ref_vector[key] = u;
          continue;
        }
        if (fu(t) != ref_value[key]) {
          report.ok = false;
          report.t_witness = t;
          report.u_a = ref_vector[key];
          report.u_b = u;
          report.detail = "value changed while the governing coordinate agreed";
          return report;
        }
      }
    }
    return report;
  }

  std::mt19937_64 gen(seed);
  for (std::uint64_t pair = 0; pair < sample_pairs; ++pair) {
    std::vector<std::uint8_t> a(n_length), b(n_length);
    for (std::uint64_t j = 0; j < n_length; ++j) {
      a[j] = uniform01(gen) < 0.5;
      b[j] = uniform01(gen) < 0.5;
    }
    if (!check_pair(a, b, family(a), family(b))) return report;
  }
  return report;
}

double lower_bound_value(std::uint64_t n, std::uint64_t n_length, double p,
                         double c0_cal) {
  const HardFamily family = choose_hard_params(n, n_length, p, c0_cal);
  return 0.5 * family.gap;
}

std::vector<std::string> export_family(const HardFamily& family,
                                       std::uint64_t per_weight,
                                       const std::string& directory,
                                       std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  std::vector<std::string> files;
  nlohmann::json manifest;
  manifest["N"] = family.n_length;
  manifest["p"] = family.p;
  manifest["level"] = family.level;
  manifest["spike_height"] = family.spike_height;
  manifest["gap"] = family.gap;
  nlohmann::json entries = nlohmann::json::array();
  for (std::uint64_t w : {family.level, family.level + 1}) {
    for (std::uint64_t idx = 0; idx < per_weight; ++idx) {
      const auto u = random_weight_vector(family.n_length, w,
                                          derive_seed(seed, 2 * idx + (w & 1)));
      const SequenceInstance f = make_f_u(family, u);
      const std::string name =
          "hard_w" + std::to_string(w) + "_" + std::to_string(idx) + ".json";
      const std::string path = (fs::path(directory) / name).string();
      save_instance_json(f, path);
      files.push_back(path);
      entries.push_back({{"file", name}, {"weight", w}});
    }
  }
  manifest["instances"] = entries;
  const std::string manifest_path =
      (fs::path(directory) / "manifest.json").string();
  std::ofstream out(manifest_path);
  out << manifest.dump(2) << "\n";
  files.push_back(manifest_path);
  return files;
}

}  // namespace qsum
