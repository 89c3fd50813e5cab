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

#include "qsum/outcome.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace qsum {

void OutcomeDistribution::add(const Outcome& outcome, double probability) {
  if (probability < 0.0) {
    throw std::invalid_argument("OutcomeDistribution: negative probability");
  }
  support_.emplace_back(outcome, probability);
  finalized_ = false;
}

void OutcomeDistribution::finalize(double prune) {
  std::sort(support_.begin(), support_.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  std::vector<Entry> merged;
  merged.reserve(support_.size());
  for (const Entry& e : support_) {
    if (!merged.empty() && merged.back().first == e.first) {
      merged.back().second += e.second;
    } else {
      merged.push_back(e);
    }
  }
  if (prune > 0.0) {
    std::erase_if(merged, [prune](const Entry& e) { return e.second < prune; });
  }
  support_ = std::move(merged);
  finalized_ = true;
}

double OutcomeDistribution::total_mass() const {
  KahanSum s;
  for (const Entry& e : support_) s.add(e.second);
  return s.value();
}

void OutcomeDistribution::check_total(double tol) const {
  if (mode_ == DistMode::exact && std::abs(total_mass() - 1.0) > tol) {
    throw std::runtime_error("OutcomeDistribution: exact mass deviates from 1");
  }
}

double OutcomeDistribution::probability_of(const Outcome& outcome) const {
  double p = 0.0;
  for (const Entry& e : support_) {
    if (e.first == outcome) p += e.second;
  }
  return p;
}

OutcomeDistribution OutcomeDistribution::transformed(
    const std::function<Outcome(const Outcome&)>& fn) const {
  OutcomeDistribution out(mode_);
  for (const Entry& e : support_) out.add(fn(e.first), e.second);
  out.finalize();
  return out;
}

double OutcomeDistribution::tv_distance(const OutcomeDistribution& other) const {
  std::map<Outcome, double> diff;
  for (const Entry& e : support_) diff[e.first] += e.second;
  for (const Entry& e : other.support_) diff[e.first] -= e.second;
  double tv = 0.0;
  for (const auto& [_, d] : diff) tv += std::abs(d);
  return 0.5 * tv;
}

Outcome OutcomeDistribution::sample(std::mt19937_64& gen) const {
  if (support_.empty()) {
    throw std::runtime_error("OutcomeDistribution: sampling empty support");
  }
  double u = uniform01(gen) * total_mass();
  double acc = 0.0;
  for (const Entry& e : support_) {
    acc += e.second;
    if (u < acc) return e.first;
  }
  return support_.back().first;
}

OutcomeDistribution OutcomeDistribution::from_samples(
    const std::vector<Outcome>& samples) {
  OutcomeDistribution out(DistMode::sampled);
  if (samples.empty()) return out;
  const double w = 1.0 / static_cast<double>(samples.size());
  for (const Outcome& s : samples) out.add(s, w);
  out.finalize();
  return out;
}

double error_at_confidence(double true_value, const OutcomeDistribution& dist,
                           double theta) {
  if (dist.empty()) {
    throw std::invalid_argument("error_at_confidence: empty distribution");
  }
  if (theta < 0.0 || theta >= 1.0) {
    throw std::invalid_argument("error_at_confidence: theta outside [0,1)");
  }
  // Candidate eps values are the distances present in the support (plus 0).
  std::vector<std::pair<double, double>> by_distance;  // (distance, mass)
  by_distance.reserve(dist.size());
  for (const auto& [outcome, p] : dist.support()) {
    const double* v = std::get_if<double>(&outcome);
    if (v == nullptr) {
      throw std::invalid_argument("error_at_confidence: non-real outcome");
    }
    by_distance.emplace_back(std::abs(*v - true_value), p);
  }
  std::sort(by_distance.begin(), by_distance.end());
  const double total = dist.total_mass();
  // Walk candidates from small to large; tail(eps) = mass strictly beyond eps.
  double within = 0.0;
  std::size_t i = 0;
  std::vector<double> candidates{0.0};
  for (const auto& [d, _] : by_distance) candidates.push_back(d);
  for (double eps : candidates) {
    while (i < by_distance.size() && by_distance[i].first <= eps) {
      within += by_distance[i].second;
      ++i;
    }
    if (total - within <= theta * total + 1e-15) return eps;
  }
  return candidates.back();
}

}  // namespace qsum
