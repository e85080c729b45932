#pragma once

// Explicit-state exploration of the combined LTS and executable checks of
// the reversibility axioms on the explored graph.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cril/ltsi.hpp"

namespace cril {

struct LtsEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  CombinedTransition t;
};

/// Explored fragment of the combined LTS. States are hash-consed on
/// state_key. Hand-built fixtures may leave `states` empty and only fill
/// dag_nodes and edges.
struct LtsGraph {
  std::vector<CombinedState> states;
  /// |V| of each state's DAG.
  std::vector<std::size_t> dag_nodes;
  /// False for states left unexpanded because of a bound.
  std::vector<bool> expanded;
  std::vector<LtsEdge> edges;
  /// Edge ids leaving each state.
  std::vector<std::vector<std::size_t>> out;
  std::size_t initial = 0;
  bool truncated = false;
  /// Faults hit while expanding (assertion failures, reversibility faults).
  std::vector<std::pair<std::size_t, Fault>> faults;

  std::size_t size() const { return dag_nodes.size(); }
  std::optional<std::size_t> find(const CombinedState& s) const;

  /// Fixture builders.
  std::size_t add_abstract_state(std::size_t dag_nodes);
  std::size_t add_edge(std::size_t src, std::size_t dst, CombinedTransition t);

  /// Internal: key -> state index for explored graphs.
  std::unordered_map<std::string, std::size_t> index;
};

/// Breadth-first over forward and backward transitions. States at depth
/// max_depth are not expanded; once max_states states exist new ones are
/// dropped. Either bound hit marks the graph truncated.
LtsGraph explore(const Lts& lts, std::size_t max_states = 200000,
                 std::size_t max_depth = 1000);

/// Edge ids of a path from the initial state to `target` (shortest).
std::vector<std::size_t> path_to(const LtsGraph& g, std::size_t target);

struct Counterexample {
  std::string message;
  /// The state the violation is anchored at.
  std::size_t state = 0;
  /// Edges witnessing it; their meaning is given in the message.
  std::vector<std::size_t> edges;
};

struct PropertyReport {
  std::string property;
  bool ok = true;
  std::optional<Counterexample> counterexample;
  /// Number of instances examined (pairs, edges, paths...).
  std::uint64_t checked = 0;
  std::string note;
};

PropertyReport check_square_property(const LtsGraph& g);
PropertyReport check_bti(const LtsGraph& g);
PropertyReport check_wf(const LtsGraph& g);
PropertyReport check_cpi(const LtsGraph& g);

struct EventClass {
  std::vector<std::size_t> edges;
  TransitionLabel label;  // forward label of the representative
};

struct EventPartition {
  /// event_of[e] is the event of edge e; a backward edge belongs to the
  /// event of its forward reverse.
  std::vector<std::size_t> event_of;
  std::vector<EventClass> classes;
};

EventPartition compute_events(const LtsGraph& g);
/// Members of an event carry the same underlying label.
PropertyReport check_ire(const LtsGraph& g, const EventPartition& ev);

/// Every state is reachable from the initial state by forward edges alone.
PropertyReport check_causal_consistency(const LtsGraph& g);

/// For every forward a: P -> Q and every path s from Q of at most `bound`
/// steps with net count 0 for [a] that ends where an [a] transition ends,
/// a is independent of every transition whose event has positive net count
/// in s. With `liveness`, additionally: wherever [a] has net count 0 and all
/// positive events are independent of a, some [a] reversal is enabled.
PropertyReport check_causal_safety(const LtsGraph& g, const EventPartition& ev,
                                   std::size_t bound = 12, bool liveness = false);

/// Every edge has a reverse edge leading back to its source.
PropertyReport check_round_trip(const LtsGraph& g);

/// Every maximal backward path from every state ends at the initial state.
/// `checked` counts states; the note gives the number of maximal backward
/// schedules from terminal states.
PropertyReport check_backward_termination(const LtsGraph& g);

/// write(b) ⊆ read(b) for every block.
PropertyReport check_write_subset_read(const Program& p);

std::vector<std::size_t> terminal_states(const LtsGraph& g);

/// Distinct end states of all maximal backward schedules from `start`
/// (DAG-controlled), with the number of schedules (saturating).
struct BackwardSinks {
  std::vector<CombinedState> sinks;
  std::uint64_t schedules = 0;
};
BackwardSinks backward_sinks(const Lts& lts, const CombinedState& start);

}  // namespace cril
