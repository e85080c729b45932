#pragma once

// Bidirectional small-step execution of program configurations, without
// any causality control.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cril/analysis.hpp"
#include "cril/syntax.hpp"

namespace cril {

/// A path of positive integers; the empty path is the root process.
class ProcessId {
 public:
  ProcessId() = default;
  explicit ProcessId(std::vector<std::uint32_t> path) : path_(std::move(path)) {}

  static ProcessId root() { return {}; }
  /// Accepts "", "e", "ε" or a dotted path such as "1.2".
  static ProcessId parse(std::string_view text);

  bool is_root() const { return path_.empty(); }
  ProcessId child(std::uint32_t i) const;
  ProcessId parent() const;
  const std::vector<std::uint32_t>& path() const { return path_; }

  /// this ⪯ other
  bool is_prefix_of(const ProcessId& other) const;

  /// Dotted form, "" for the root.
  std::string to_string() const;
  /// Dotted form, "ε" for the root.
  std::string display() const;

  friend auto operator<=>(const ProcessId&, const ProcessId&) = default;
  friend bool operator==(const ProcessId&, const ProcessId&) = default;

 private:
  std::vector<std::uint32_t> path_;
};

enum class Stage { Begin, Run, End };
std::string_view to_string(Stage s);

struct ProcessConfiguration {
  Label label;
  Stage stage = Stage::Begin;
  friend bool operator==(const ProcessConfiguration&, const ProcessConfiguration&) = default;
};

/// Active processes only; an absent pid is ⊥.
using ProcessMap = std::map<ProcessId, ProcessConfiguration>;
using Store = std::map<std::string, std::int64_t>;
/// Sparse heap; cells holding 0 are not stored.
using Heap = std::map<std::uint64_t, std::int64_t>;

struct ProgramConfiguration {
  Store rho;
  Heap sigma;
  ProcessMap procs;
  friend bool operator==(const ProgramConfiguration&, const ProgramConfiguration&) = default;
};

/// Prefix-closed and left-sibling-closed, containing the root.
bool is_process_set(const ProcessMap& procs);
bool is_leaf(const ProcessMap& procs, const ProcessId& p);

enum class Direction { Forward, Backward };
std::string_view to_string(Direction d);
Direction flip(Direction d);

enum class TransitionKind { Inst, CallFork, CallMerge };
std::string_view to_string(TransitionKind k);

/// (p, Rd, Wt) together with the direction it was taken in.
struct TransitionLabel {
  ProcessId pid;
  ResourceSet rd;
  ResourceSet wt;
  Direction dir = Direction::Forward;

  friend bool operator==(const TransitionLabel&, const TransitionLabel&) = default;
};

/// Equality of the underlying forward labels (direction dropped).
bool same_underlying(const TransitionLabel& a, const TransitionLabel& b);

struct ProgTransition {
  TransitionLabel label;
  TransitionKind kind = TransitionKind::Inst;
  BlockId block = 0;

  const ProcessId& pid() const { return label.pid; }
  Direction dir() const { return label.dir; }
  ProgTransition reversed() const;
  std::string describe() const;

  friend bool operator==(const ProgTransition&, const ProgTransition&) = default;
};

enum class FaultKind { Reversibility, AssertFailure, NegativeHeapAddress };
std::string_view to_string(FaultKind k);

/// Diagnostic for a step that cannot be taken for a reason other than
/// ordinary blocking.
struct Fault {
  FaultKind kind;
  ProcessId pid;
  BlockId block = 0;
  std::string message;
};

class RuntimeFault : public std::runtime_error {
 public:
  explicit RuntimeFault(Fault fault);
  const Fault& fault() const { return fault_; }

 private:
  Fault fault_;
};

/// Evaluates with C-like semantics: 0 is false, comparisons give 0/1,
/// arithmetic wraps modulo 2^64. Throws RuntimeFault on a negative heap
/// address.
std::int64_t eval_expr(const Expr& e, const Store& rho, const Heap& sigma);

/// A well-formed program together with the label lookup tables the rules
/// need. Stepping functions are const and thread-safe.
class Machine {
 public:
  /// Throws NotWellFormed.
  explicit Machine(Program program);

  const Program& program() const { return program_; }
  const ResourceSet& read_set(BlockId b) const { return reads_.at(b - 1); }
  const ResourceSet& write_set(BlockId b) const { return writes_.at(b - 1); }

  ProgramConfiguration initial_config() const;
  bool is_final(const ProgramConfiguration& c) const;
  bool is_initial(const ProgramConfiguration& c) const;

  /// At most one transition per process, ordered by pid. Entry/exit
  /// condition mismatches are reported through `faults` when given.
  std::vector<ProgTransition> enabled(const ProgramConfiguration& c, Direction dir,
                                      std::vector<Fault>* faults = nullptr) const;

  /// The transition of process `p` in direction `dir`, if enabled.
  std::optional<ProgTransition> enabled_for(const ProgramConfiguration& c, const ProcessId& p,
                                            Direction dir,
                                            std::vector<Fault>* faults = nullptr) const;

  /// Precondition: t is enabled in c. Throws RuntimeFault on assertion
  /// failure or a negative heap address.
  ProgramConfiguration apply(const ProgramConfiguration& c, const ProgTransition& t) const;

 private:
  const BasicBlock* find(const std::map<Label, BlockId>& index, const Label& l) const;
  std::optional<ProgTransition> forward_for(const ProgramConfiguration& c, const ProcessId& p,
                                            std::vector<Fault>* faults) const;
  std::optional<ProgTransition> backward_for(const ProgramConfiguration& c, const ProcessId& p,
                                             std::vector<Fault>* faults) const;
  ProgTransition make(const ProcessId& p, Direction d, TransitionKind k, BlockId b) const;
  bool instruction_ready(const InstructionBlock& ib, const Store& rho, Direction dir) const;

  Program program_;
  std::vector<ResourceSet> reads_;
  std::vector<ResourceSet> writes_;
  std::map<Label, BlockId> begin_block_;
  std::map<Label, BlockId> end_block_;
  std::map<Label, BlockId> in_block_;
  std::map<Label, BlockId> out_block_;
};

}  // namespace cril
