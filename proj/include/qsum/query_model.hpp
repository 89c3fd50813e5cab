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

#ifndef QSUM_QUERY_MODEL_HPP
#define QSUM_QUERY_MODEL_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "qsum/outcome.hpp"
#include "qsum/sequences.hpp"
#include "qsum/state_vector.hpp"

namespace qsum {

// Black-box access descriptor: which index-register states probe the input,
// where they map in the input's domain, and how probed values are encoded
// into the value register.
struct QueryDescriptor {
  int qubits = 0;      // m
  int index_bits = 0;  // m'
  int value_bits = 0;  // m''
  std::vector<std::uint64_t> probed;                     // Z, sorted
  std::function<std::uint64_t(std::uint64_t)> domain;    // tau: Z -> domain
  std::function<std::uint64_t(double)> encode;           // beta: R -> [0, 2^m'')

  RegisterLayout layout() const {
    return RegisterLayout{qubits, index_bits, value_bits};
  }
  void validate() const;
};

// The query as a basis-state bijection |i>|x>|y> -> |i>|x (+) shift(i)>|y>
// with shift(i) = beta(f(tau(i))) for probed i and 0 otherwise; (+) is
// addition mod 2^{m''}.
struct QueryPermutation {
  int qubits = 0;
  int index_bits = 0;
  int value_bits = 0;
  std::vector<std::uint32_t> shift;  // per index-register state

  std::uint64_t operator()(std::uint64_t basis) const;
  void apply_in_place(std::vector<Amp>& amps, std::uint64_t ctrl_mask = 0) const;
};

QueryPermutation build_query_unitary(const QueryDescriptor& query,
                                     const SequenceInstance& f);

// One instruction of a unitary program. Programs are stored in application
// order (first instruction acts first).
struct UnitaryOp {
  enum class Kind { hadamard, permutation, phase_flip, fourier, query, controlled };

  Kind kind = Kind::hadamard;
  std::vector<int> qubits;  // hadamard targets / fourier register [first,count]
  bool inverse = false;     // fourier direction
  std::function<std::uint64_t(std::uint64_t)> perm;
  std::function<int(std::uint64_t)> sign;
  std::uint64_t control_mask = 0;  // controlled: all mask bits must be set
  std::vector<UnitaryOp> body;     // controlled sub-program (no query slots)

  static UnitaryOp hadamard(std::vector<int> targets);
  static UnitaryOp permutation(std::function<std::uint64_t(std::uint64_t)> map);
  static UnitaryOp phase_flip(std::function<int(std::uint64_t)> sign);
  static UnitaryOp fourier(int first, int count, bool inverse);
  static UnitaryOp query();
  static UnitaryOp controlled(std::uint64_t mask, std::vector<UnitaryOp> body);
};

using UnitaryProgram = std::vector<UnitaryOp>;

// Query-slot count of a program (controlled bodies may not contain slots).
std::uint64_t count_query_slots(const UnitaryProgram& program);

// A measurement-free algorithm: alternating fixed unitaries and query
// applications, encoded as a single program with query slots.
struct UnmeasuredAlgorithm {
  QueryDescriptor query;
  UnitaryProgram program;
  std::string name;

  std::uint64_t n_queries() const { return count_query_slots(program); }
  int qubits() const { return query.qubits; }
};

using StagePtr = std::shared_ptr<const UnmeasuredAlgorithm>;

// Multi-stage algorithm with measurements: each stage starts from a basis
// state chosen from earlier outcomes and ends in a full measurement; the
// output map turns the outcome tuple into a single result.
struct MeasuredAlgorithm {
  std::vector<StagePtr> stages;
  std::uint64_t start_state = 0;  // b_0
  // b_l for l >= 1; when empty, every stage starts from start_state.
  std::vector<std::function<std::uint64_t(std::span<const std::uint64_t>)>> next_start;
  std::function<Outcome(std::span<const std::uint64_t>)> output;
  std::string name;

  std::uint64_t n_queries() const;
  int max_qubits() const;
  std::uint64_t measurements() const { return stages.size(); }
};

// Runs a measurement-free algorithm from a basis state.
StateVector run_unmeasured(const UnmeasuredAlgorithm& algorithm,
                           const SequenceInstance& f, std::uint64_t start,
                           const SimLimits& limits = SimLimits{});

// Caches per-(stage, start) outcome distributions so repeated stages and
// repeated trials do not resimulate identical circuits.
class MeasuredRunner {
 public:
  MeasuredRunner(const MeasuredAlgorithm& algorithm, const SequenceInstance& f,
                 SimLimits limits = SimLimits{});

  // Exact output distribution by outcome-tuple enumeration. Branches below
  // the prune threshold are dropped; throws BudgetExceeded when the tuple
  // budget is hit.
  OutcomeDistribution run_exact();

  // Empirical distribution over independent trials.
  OutcomeDistribution run_sampled(std::uint64_t trials, std::uint64_t seed);

  // One realized output.
  Outcome sample_once(std::mt19937_64& gen);

  const OutcomeDistribution& stage_distribution(std::size_t stage,
                                                std::uint64_t start);

 private:
  const MeasuredAlgorithm& algorithm_;
  const SequenceInstance& f_;
  SimLimits limits_;
  // keyed by (stage circuit identity, start state)
  std::unordered_map<const UnmeasuredAlgorithm*,
                     std::unordered_map<std::uint64_t, OutcomeDistribution>>
      cache_;

  void enumerate(std::size_t stage, std::uint64_t start, double mass,
                 std::vector<std::uint64_t>& outcomes, OutcomeDistribution& out,
                 std::uint64_t& tuples);
};

OutcomeDistribution run_measured_exact(const MeasuredAlgorithm& algorithm,
                                       const SequenceInstance& f,
                                       const SimLimits& limits = SimLimits{});

OutcomeDistribution run_measured_sampled(const MeasuredAlgorithm& algorithm,
                                         const SequenceInstance& f,
                                         std::uint64_t trials,
                                         std::uint64_t seed,
                                         const SimLimits& limits = SimLimits{});

// Worst error over an explicit list of instances ("empirical worst case").
double worst_case_error(
    const std::function<double(const SequenceInstance&)>& target,
    const std::function<OutcomeDistribution(const SequenceInstance&)>& run,
    std::span<const SequenceInstance> instances, double theta = 0.25);

// Resource accounting: query count, qubit high-water mark, measurements,
// and coarse analytic estimates of gate and classical bit-operation cost.
struct ResourceReport {
  std::uint64_t quantum_queries = 0;
  std::uint64_t classical_queries = 0;
  int max_qubits = 0;
  std::uint64_t measurements = 0;
  std::uint64_t gate_estimate = 0;
  std::uint64_t classical_bit_ops = 0;

  std::uint64_t total_queries() const { return quantum_queries + classical_queries; }
  ResourceReport& operator+=(const ResourceReport& other);
};

ResourceReport resource_report(const MeasuredAlgorithm& algorithm);

}  // namespace qsum

#endif  // QSUM_QUERY_MODEL_HPP
