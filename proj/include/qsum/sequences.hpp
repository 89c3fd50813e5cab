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

#ifndef QSUM_SEQUENCES_HPP
#define QSUM_SEQUENCES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "qsum/config.hpp"

namespace qsum {

// A finite real sequence f : {0, ..., N-1} -> R.
struct SequenceInstance {
  std::vector<double> values;

  std::uint64_t size() const { return values.size(); }
  double operator()(std::uint64_t i) const { return values[i]; }

  void validate() const;  // nonempty, all entries finite
};

// Exponent for the normalized l_p norm; p = infinity flagged explicitly.
struct PNorm {
  double p = 2.0;
  bool infinite = false;

  static PNorm inf() { return PNorm{0.0, true}; }
  void validate() const;  // p >= 1 unless infinite
};

// (N^{-1} sum |f(i)|^p)^{1/p}, or max |f(i)| for the infinity norm.
double lp_norm(const SequenceInstance& f, const PNorm& norm);

// Membership in the unit ball, with a small slack for rounding.
bool in_ball(const SequenceInstance& f, const PNorm& norm,
             double slack = tolerances().ball_slack);

// Arithmetic mean with compensated summation.
double mean(const SequenceInstance& f);

// Mean restricted to entries with |f(i)| < M.
double truncated_mean(const SequenceInstance& f, double threshold);

// Mean restricted to entries with |f(i)| >= M; mean == truncated + tail.
double tail_mean(const SequenceInstance& f, double threshold);

// Scaled partial mean over the dyadic window
//   2^{level-1} <= (-1)^sigma f(i) < 2^level   (level >= 1)
//   0 <= (-1)^sigma f(i) < 1                   (level == 0);
// the result carries the (-1)^sigma 2^{-level} N^{-1} normalization and is
// always nonnegative.
double level_mean(const SequenceInstance& f, int level, int sigma);

// True when f(i) falls in the level window above.
bool in_level_window(double value, int level, int sigma);

// Instance generators. "uniform" fills with scaled iid noise; "spiky"
// places `spike_count` entries of magnitude `spike_level` and fills the
// rest with small values, staying inside the unit ball.
struct InstanceProfile {
  enum class Kind { uniform, spiky } kind = Kind::uniform;
  std::uint64_t spike_count = 0;
  double spike_level = 0.0;
};

SequenceInstance random_ball_instance(std::uint64_t n, const PNorm& norm,
                                      const InstanceProfile& profile,
                                      std::uint64_t seed);

// Instance file formats: JSON {"N":, "values":[...]} and raw little-endian
// binary (8-byte length header, then 8-byte doubles).
SequenceInstance load_instance_json(const std::string& path);
void save_instance_json(const SequenceInstance& f, const std::string& path);
SequenceInstance load_instance_binary(const std::string& path);
void save_instance_binary(const SequenceInstance& f, const std::string& path);
SequenceInstance load_instance(const std::string& path);  // by extension

}  // namespace qsum

#endif  // QSUM_SEQUENCES_HPP
