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

#include "qsum/query_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qsum {

void QueryDescriptor::validate() const {
  if (index_bits < 1 || value_bits < 1 || index_bits + value_bits > qubits) {
    throw std::invalid_argument("QueryDescriptor: invalid register sizes");
  }
  if (probed.empty()) {
    throw std::invalid_argument("QueryDescriptor: probed set must be nonempty");
  }
  const std::uint64_t index_dim = std::uint64_t{1} << index_bits;
  for (std::uint64_t i : probed) {
    if (i >= index_dim) {
      throw std::invalid_argument("QueryDescriptor: probed index out of range");
    }
  }
  if (!domain || !encode) {
    throw std::invalid_argument("QueryDescriptor: missing domain or encode map");
  }
}

std::uint64_t QueryPermutation::operator()(std::uint64_t basis) const {
  const int anc = qubits - index_bits - value_bits;
  const std::uint64_t value_dim = std::uint64_t{1} << value_bits;
  const std::uint64_t e = basis >> (value_bits + anc);
  const std::uint32_t s = shift[e];
  if (s == 0) return basis;
  const std::uint64_t x = (basis >> anc) & (value_dim - 1);
  const std::uint64_t x2 = (x + s) & (value_dim - 1);
  const std::uint64_t low = anc ? (basis & ((std::uint64_t{1} << anc) - 1)) : 0;
  return (e << (value_bits + anc)) | (x2 << anc) | low;
}

void QueryPermutation::apply_in_place(std::vector<Amp>& amps,
                                      std::uint64_t ctrl_mask) const {
  detail::permutation_in_place(
      amps, [this](std::uint64_t b) { return (*this)(b); }, ctrl_mask);
}

QueryPermutation build_query_unitary(const QueryDescriptor& query,
                                     const SequenceInstance& f) {
  query.validate();
  f.validate();
  QueryPermutation perm;
  perm.qubits = query.qubits;
  perm.index_bits = query.index_bits;
  perm.value_bits = query.value_bits;
  perm.shift.assign(std::uint64_t{1} << query.index_bits, 0);
  const std::uint64_t value_dim = std::uint64_t{1} << query.value_bits;
  for (std::uint64_t i : query.probed) {
    const std::uint64_t point = query.domain(i);
    if (point >= f.size()) {
      throw std::invalid_argument(
          "build_query_unitary: probed point outside the input domain");
    }
    const std::uint64_t code = query.encode(f(point));
    if (code >= value_dim) {
      throw std::invalid_argument("build_query_unitary: encoded value overflows");
    }
    perm.shift[i] = static_cast<std::uint32_t>(code);
  }
  return perm;
}

UnitaryOp UnitaryOp::hadamard(std::vector<int> targets) {
  UnitaryOp op;
  op.kind = Kind::hadamard;
  op.qubits = std::move(targets);
  return op;
}

UnitaryOp UnitaryOp::permutation(std::function<std::uint64_t(std::uint64_t)> map) {
  UnitaryOp op;
  op.kind = Kind::permutation;
  op.perm = std::move(map);
  return op;
}

UnitaryOp UnitaryOp::phase_flip(std::function<int(std::uint64_t)> sign) {
  UnitaryOp op;
  op.kind = Kind::phase_flip;
  op.sign = std::move(sign);
  return op;
}

UnitaryOp UnitaryOp::fourier(int first, int count, bool inverse) {
  UnitaryOp op;
  op.kind = Kind::fourier;
  op.qubits = {first, count};
  op.inverse = inverse;
  return op;
}

UnitaryOp UnitaryOp::query() {
  UnitaryOp op;
  op.kind = Kind::query;
  return op;
}

UnitaryOp UnitaryOp::controlled(std::uint64_t mask, std::vector<UnitaryOp> body) {
  UnitaryOp op;
  op.kind = Kind::controlled;
  op.control_mask = mask;
  op.body = std::move(body);
  return op;
}

std::uint64_t count_query_slots(const UnitaryProgram& program) {
  std::uint64_t n = 0;
  for (const UnitaryOp& op : program) {
    if (op.kind == UnitaryOp::Kind::query) {
      ++n;
    } else if (op.kind == UnitaryOp::Kind::controlled) {
      if (count_query_slots(op.body) != 0) {
        throw std::invalid_argument("controlled blocks may not contain query slots");
      }
    }
  }
  return n;
}

namespace {

void apply_op(std::vector<Amp>& amps, int qubits, const UnitaryOp& op,
              const QueryPermutation& query, std::uint64_t ctrl_mask,
              bool debug) {
  switch (op.kind) {
    case UnitaryOp::Kind::hadamard:
      detail::hadamard_in_place(amps, qubits, op.qubits, ctrl_mask);
      break;
    case UnitaryOp::Kind::permutation:
      detail::permutation_in_place(amps, op.perm, ctrl_mask, debug);
      break;
    case UnitaryOp::Kind::phase_flip:
      detail::phase_flip_in_place(amps, op.sign, ctrl_mask);
      break;
    case UnitaryOp::Kind::fourier:
      if (ctrl_mask != 0) {
        throw std::invalid_argument("controlled fourier blocks are unsupported");
      }
      detail::fourier_in_place(amps, qubits, op.qubits.at(0), op.qubits.at(1),
                               op.inverse);
      break;
    case UnitaryOp::Kind::query:
      query.apply_in_place(amps, ctrl_mask);
      break;
    case UnitaryOp::Kind::controlled:
      for (const UnitaryOp& inner : op.body) {
        apply_op(amps, qubits, inner, query, ctrl_mask | op.control_mask, debug);
      }
      break;
  }
}

}  // namespace

StateVector run_unmeasured(const UnmeasuredAlgorithm& algorithm,
                           const SequenceInstance& f, std::uint64_t start,
                           const SimLimits& limits) {
  algorithm.query.validate();
  if (algorithm.qubits() > limits.exact_qubit_cap) {
    throw BudgetExceeded("run_unmeasured: circuit exceeds the exact qubit cap");
  }
  const RegisterLayout layout = algorithm.query.layout();
  if (start >= layout.dim()) {
    throw std::out_of_range("run_unmeasured: start state out of range");
  }
  const QueryPermutation query = build_query_unitary(algorithm.query, f);
  StateVector state(layout);
  state.raw()[0] = Amp{0.0, 0.0};
  state.raw()[start] = Amp{1.0, 0.0};
  for (const UnitaryOp& op : algorithm.program) {
    apply_op(state.raw(), layout.qubits, op, query, 0, limits.debug_checks);
  }
  if (limits.debug_checks) state.check_norm(tolerances().norm);
  return state;
}

std::uint64_t MeasuredAlgorithm::n_queries() const {
  std::uint64_t n = 0;
  for (const StagePtr& stage : stages) n += stage->n_queries();
  return n;
}

int MeasuredAlgorithm::max_qubits() const {
  int m = 0;
  for (const StagePtr& stage : stages) m = std::max(m, stage->qubits());
  return m;
}

MeasuredRunner::MeasuredRunner(const MeasuredAlgorithm& algorithm,
                               const SequenceInstance& f, SimLimits limits)
    : algorithm_(algorithm), f_(f), limits_(limits) {
  if (algorithm_.stages.empty() || !algorithm_.output) {
    throw std::invalid_argument("MeasuredRunner: algorithm needs stages and an output map");
  }
}

const OutcomeDistribution& MeasuredRunner::stage_distribution(std::size_t stage,
                                                              std::uint64_t start) {
  const UnmeasuredAlgorithm* key = algorithm_.stages[stage].get();
  auto& per_start = cache_[key];
  auto it = per_start.find(start);
  if (it == per_start.end()) {
    StateVector state = run_unmeasured(*algorithm_.stages[stage], f_, start, limits_);
    OutcomeDistribution dist = measure_distribution(state, tolerances().prune);
    dist.check_total(tolerances().distribution_sum);
    it = per_start.emplace(start, std::move(dist)).first;
  }
  return it->second;
}

namespace {
std::uint64_t stage_start(const MeasuredAlgorithm& algorithm, std::size_t stage,
                          std::span<const std::uint64_t> outcomes) {
  if (stage == 0 || algorithm.next_start.empty()) return algorithm.start_state;
  const auto& fn = algorithm.next_start.at(stage - 1);
  return fn ? fn(outcomes) : algorithm.start_state;
}
}  // namespace

void MeasuredRunner::enumerate(std::size_t stage, std::uint64_t start, double mass,
                               std::vector<std::uint64_t>& outcomes,
                               OutcomeDistribution& out, std::uint64_t& tuples) {
  if (stage == algorithm_.stages.size()) {
    if (++tuples > limits_.tuple_budget) {
      throw BudgetExceeded("run_measured_exact: outcome tuple budget exceeded");
    }
    out.add(algorithm_.output(outcomes), mass);
    return;
  }
  const OutcomeDistribution& dist = stage_distribution(stage, start);
  for (const auto& [outcome, p] : dist.support()) {
    const double branch = mass * p;
    if (branch < tolerances().prune) continue;
    outcomes.push_back(std::get<std::uint64_t>(outcome));
    const std::uint64_t next =
        stage + 1 < algorithm_.stages.size()
            ? stage_start(algorithm_, stage + 1, outcomes)
            : 0;
    enumerate(stage + 1, next, branch, outcomes, out, tuples);
    outcomes.pop_back();
  }
}

OutcomeDistribution MeasuredRunner::run_exact() {
  OutcomeDistribution out(DistMode::exact);
  std::vector<std::uint64_t> outcomes;
  outcomes.reserve(algorithm_.stages.size());
  std::uint64_t tuples = 0;
  enumerate(0, algorithm_.start_state, 1.0, outcomes, out, tuples);
  out.finalize();
  return out;
}

Outcome MeasuredRunner::sample_once(std::mt19937_64& gen) {
  std::vector<std::uint64_t> outcomes;
  outcomes.reserve(algorithm_.stages.size());
  for (std::size_t stage = 0; stage < algorithm_.stages.size(); ++stage) {
    const std::uint64_t start = stage_start(algorithm_, stage, outcomes);
    const OutcomeDistribution& dist = stage_distribution(stage, start);
    outcomes.push_back(std::get<std::uint64_t>(dist.sample(gen)));
  }
  return algorithm_.output(outcomes);
}

OutcomeDistribution MeasuredRunner::run_sampled(std::uint64_t trials,
                                                std::uint64_t seed) {
  if (trials < 1) {
    throw std::invalid_argument("run_sampled: trials must be >= 1");
  }
  std::mt19937_64 gen(seed);
  std::vector<Outcome> samples;
  samples.reserve(trials);
  for (std::uint64_t t = 0; t < trials; ++t) samples.push_back(sample_once(gen));
  return OutcomeDistribution::from_samples(samples);
}

OutcomeDistribution run_measured_exact(const MeasuredAlgorithm& algorithm,
                                       const SequenceInstance& f,
                                       const SimLimits& limits) {
  MeasuredRunner runner(algorithm, f, limits);
  return runner.run_exact();
}

OutcomeDistribution run_measured_sampled(const MeasuredAlgorithm& algorithm,
                                         const SequenceInstance& f,
                                         std::uint64_t trials, std::uint64_t seed,
                                         const SimLimits& limits) {
  MeasuredRunner runner(algorithm, f, limits);
  return runner.run_sampled(trials, seed);
}

double worst_case_error(
    const std::function<double(const SequenceInstance&)>& target,
    const std::function<OutcomeDistribution(const SequenceInstance&)>& run,
    std::span<const SequenceInstance> instances, double theta) {
  if (instances.empty()) {
    throw std::invalid_argument("worst_case_error: empty instance list");
  }
  double worst = 0.0;
  for (const SequenceInstance& f : instances) {
    worst = std::max(worst, error_at_confidence(target(f), run(f), theta));
  }
  return worst;
}

ResourceReport& ResourceReport::operator+=(const ResourceReport& other) {
  quantum_queries += other.quantum_queries;
  classical_queries += other.classical_queries;
  max_qubits = std::max(max_qubits, other.max_qubits);
  measurements += other.measurements;
  gate_estimate += other.gate_estimate;
  classical_bit_ops += other.classical_bit_ops;
  return *this;
}

ResourceReport resource_report(const MeasuredAlgorithm& algorithm) {
  ResourceReport report;
  report.quantum_queries = algorithm.n_queries();
  report.max_qubits = algorithm.max_qubits();
  report.measurements = algorithm.measurements();
  int max_value_bits = 0;
  for (const StagePtr& stage : algorithm.stages) {
    // Gate cost scales with queries times the value-register width.
    report.gate_estimate +=
        stage->n_queries() * static_cast<std::uint64_t>(stage->query.value_bits);
    max_value_bits = std::max(max_value_bits, stage->query.value_bits);
  }
  // Classical postprocessing handles one measured word per stage.
  report.classical_bit_ops =
      report.measurements * static_cast<std::uint64_t>(std::max(max_value_bits, 1));
  return report;
}

}  // namespace qsum
