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

#include "qsum/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace qsum {

void SequenceInstance::validate() const {
  if (values.empty()) {
    throw std::invalid_argument("SequenceInstance: N must be >= 1");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("SequenceInstance: values must be finite");
    }
  }
}

void PNorm::validate() const {
  if (!infinite && !(p >= 1.0)) {
    throw std::invalid_argument("PNorm: p must be >= 1");
  }
}

double lp_norm(const SequenceInstance& f, const PNorm& norm) {
  f.validate();
  norm.validate();
  if (norm.infinite) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
  }
  KahanSum s;
  for (double v : f.values) s.add(std::pow(std::abs(v), norm.p));
  return std::pow(s.value() / static_cast<double>(f.size()), 1.0 / norm.p);
}

bool in_ball(const SequenceInstance& f, const PNorm& norm, double slack) {
  return lp_norm(f, norm) <= 1.0 + slack;
}

double mean(const SequenceInstance& f) {
  f.validate();
  KahanSum s;
  for (double v : f.values) s.add(v);
  return s.value() / static_cast<double>(f.size());
}

double truncated_mean(const SequenceInstance& f, double threshold) {
  f.validate();
  if (!(threshold > 0.0)) {
    throw std::invalid_argument("truncated_mean: threshold must be positive");
  }
  KahanSum s;
  for (double v : f.values) {
    if (std::abs(v) < threshold) s.add(v);
  }
  return s.value() / static_cast<double>(f.size());
}

double tail_mean(const SequenceInstance& f, double threshold) {
  f.validate();
  if (!(threshold > 0.0)) {
    throw std::invalid_argument("tail_mean: threshold must be positive");
  }
  KahanSum s;
  for (double v : f.values) {
    if (std::abs(v) >= threshold) s.add(v);
  }
  return s.value() / static_cast<double>(f.size());
}

bool in_level_window(double value, int level, int sigma) {
  const double signed_value = (sigma == 0) ? value : -value;
  if (level == 0) return signed_value >= 0.0 && signed_value < 1.0;
  const double lo = std::ldexp(1.0, level - 1);
  const double hi = std::ldexp(1.0, level);
  return signed_value >= lo && signed_value < hi;
}

double level_mean(const SequenceInstance& f, int level, int sigma) {
  f.validate();
  if (level < 0 || (sigma != 0 && sigma != 1)) {
    throw std::invalid_argument("level_mean: need level >= 0 and sigma in {0,1}");
  }
  KahanSum s;
  for (double v : f.values) {
    if (in_level_window(v, level, sigma)) s.add(v);
  }
  const double sign = (sigma == 0) ? 1.0 : -1.0;
  return sign * std::ldexp(1.0, -level) * s.value() / static_cast<double>(f.size());
}

SequenceInstance random_ball_instance(std::uint64_t n, const PNorm& norm,
                                      const InstanceProfile& profile,
                                      std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("random_ball_instance: N must be >= 1");
  norm.validate();
  std::mt19937_64 gen(seed);
  SequenceInstance f;
  f.values.assign(n, 0.0);

  if (profile.kind == InstanceProfile::Kind::uniform) {
    for (double& v : f.values) v = 2.0 * uniform01(gen) - 1.0;
    const double nrm = lp_norm(f, norm);
    if (nrm > 0.0) {
      // Land strictly inside the ball at a seed-dependent radius.
      const double radius = 0.5 + 0.45 * uniform01(gen);
      for (double& v : f.values) v *= radius / nrm;
    }
    return f;
  }

  // Spiky profile: `spike_count` entries of magnitude `spike_level`, the
  // remainder filled with small values inside the leftover norm budget.
  const std::uint64_t count = profile.spike_count;
  const double level = profile.spike_level;
  if (count == 0 || count > n || !(level > 0.0)) {
    throw std::invalid_argument("random_ball_instance: bad spiky profile");
  }
  const double p = norm.infinite ? 1.0 : norm.p;
  const double spike_budget =
      norm.infinite ? (level <= 1.0 ? 0.0 : 2.0)
                    : static_cast<double>(count) * std::pow(level, p);
  if (spike_budget > static_cast<double>(n)) {
    throw std::invalid_argument(
        "random_ball_instance: spike profile exceeds the unit ball");
  }

  std::vector<std::uint64_t> positions(n);
  std::iota(positions.begin(), positions.end(), 0);
  for (std::uint64_t i = 0; i < count; ++i) {  // partial Fisher-Yates
    const std::uint64_t j = i + static_cast<std::uint64_t>(
                                    uniform01(gen) * static_cast<double>(n - i));
    std::swap(positions[i], positions[std::min(j, n - 1)]);
  }
  for (std::uint64_t i = 0; i < count; ++i) {
    const double sign = uniform01(gen) < 0.5 ? -1.0 : 1.0;
    f.values[positions[i]] = sign * level;
  }
  if (count < n) {
    const double leftover = static_cast<double>(n) - spike_budget;
    const double filler_cap =
        0.5 * std::pow(leftover / static_cast<double>(n - count), 1.0 / p);
    for (std::uint64_t i = count; i < n; ++i) {
      f.values[positions[i]] = filler_cap * (2.0 * uniform01(gen) - 1.0);
    }
  }
  return f;
}

SequenceInstance load_instance_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  nlohmann::json j;
  in >> j;
  SequenceInstance f;
  f.values = j.at("values").get<std::vector<double>>();
  if (j.at("N").get<std::uint64_t>() != f.values.size()) {
    throw std::runtime_error("instance file: N does not match values length");
  }
  f.validate();
  return f;
}

void save_instance_json(const SequenceInstance& f, const std::string& path) {
  f.validate();
  nlohmann::json j;
  j["N"] = f.values.size();
  j["values"] = f.values;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write instance file: " + path);
  out << j.dump(2) << "\n";
}

SequenceInstance load_instance_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  SequenceInstance f;
  f.values.assign(n, 0.0);
  in.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error("truncated instance file: " + path);
  f.validate();
  return f;
}

void save_instance_binary(const SequenceInstance& f, const std::string& path) {
  f.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write instance file: " + path);
  const std::uint64_t n = f.values.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
}

SequenceInstance load_instance(const std::string& path) {
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    return load_instance_json(path);
  }
  return load_instance_binary(path);
}

}  // namespace qsum
