#pragma once

// The combined semantics: a program step is taken only together with the
// matching annotation DAG step, forward or backward.

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cril/adag.hpp"
#include "cril/machine.hpp"

namespace cril {

struct CombinedState {
  ProgramConfiguration config;
  AnnotationDag dag;
  friend bool operator==(const CombinedState&, const CombinedState&) = default;
};

/// A program transition paired with its DAG step; the block id makes the
/// step a function, independence only looks at the label.
using CombinedTransition = ProgTransition;

/// p1 and p2 unrelated by prefix and neither reads what the other writes.
bool independent_labels(const TransitionLabel& a, const TransitionLabel& b);

/// Canonical byte string of a state; equal states give equal keys.
std::string state_key(const CombinedState& s);
/// 64-bit FNV-1a of state_key, printed as 16 hex digits.
std::string state_hash(const CombinedState& s);

enum class StepVerdict { Ok, NotEnabledProg, NotEnabledDag };
std::string_view to_string(StepVerdict v);

class Lts {
 public:
  /// Throws NotWellFormed.
  explicit Lts(Program program);
  explicit Lts(std::shared_ptr<const Machine> machine);

  const Machine& machine() const { return *machine_; }
  const Program& program() const { return machine_->program(); }

  CombinedState initial_state() const;
  bool is_final(const CombinedState& s) const { return machine_->is_final(s.config); }
  bool is_initial(const CombinedState& s) const;

  /// Transitions whose program half and DAG half are both enabled, ordered
  /// by pid. Forward DAG steps are always enabled. Reversibility faults are
  /// only reported for reversals the DAG would allow.
  std::vector<CombinedTransition> enabled(const CombinedState& s, Direction dir,
                                          std::vector<Fault>* faults = nullptr) const;

  /// Why process p can or cannot move in direction dir.
  StepVerdict check(const CombinedState& s, const ProcessId& p, Direction dir,
                    std::optional<CombinedTransition>* transition = nullptr) const;

  /// Throws NotEnabled, or RuntimeFault from the machine.
  CombinedState step(const CombinedState& s, const CombinedTransition& t) const;

  /// DAG-removable nodes, excluding the newest node of any process that has
  /// active children (its last step is the pending fork).
  std::set<DagNode> removable_nodes(const CombinedState& s) const;

 private:
  std::shared_ptr<const Machine> machine_;
};

class Scheduler {
 public:
  virtual ~Scheduler() = default;
  /// Index into a nonempty list of enabled transitions.
  virtual std::size_t pick(const std::vector<CombinedTransition>& enabled) = 0;
};

/// Uniform choice from a seeded std::mt19937_64.
class RandomScheduler : public Scheduler {
 public:
  explicit RandomScheduler(std::uint64_t seed) : rng_(seed) {}
  std::size_t pick(const std::vector<CombinedTransition>& enabled) override;

 private:
  std::mt19937_64 rng_;
};

/// Cycles through pids in order: the next enabled pid after the last one
/// that moved.
class RoundRobinScheduler : public Scheduler {
 public:
  std::size_t pick(const std::vector<CombinedTransition>& enabled) override;

 private:
  std::optional<ProcessId> last_;
};

enum class RunOutcome { Terminated, Blocked, StepLimit, AssertFailed, Fault };
std::string_view to_string(RunOutcome o);

struct RunResult {
  std::vector<CombinedTransition> trace;
  CombinedState final;
  RunOutcome outcome = RunOutcome::Terminated;
  std::optional<Fault> fault;
};

/// Steps in one direction until nothing is enabled or max_steps is hit.
/// Forward runs terminate at the final configuration, backward runs at the
/// initial state; anything else with no enabled transition is Blocked.
RunResult run(const Lts& lts, const CombinedState& start, Scheduler& scheduler, Direction dir,
              std::size_t max_steps);

/// The same loop over the bare program semantics, with no DAG gating
/// reversal. Backward runs terminate at the initial configuration.
struct ProgRunResult {
  std::vector<ProgTransition> trace;
  ProgramConfiguration final;
  RunOutcome outcome = RunOutcome::Terminated;
  std::optional<Fault> fault;
};

ProgRunResult run_prog(const Machine& m, const ProgramConfiguration& start, Scheduler& scheduler,
                       Direction dir, std::size_t max_steps);

}  // namespace cril
