#pragma once

// Annotation DAG: the read/write causality record that gates reversal.
//
// Every forward step of process p adds a node (p, n) with n one past the
// newest node of p. For each written resource r a write edge from the
// current last writer of r is added, and for each resource that is only
// read a read edge from the last writer. A backward step removes the
// newest node of p, and is allowed only when nothing depends on it.

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cril/analysis.hpp"
#include "cril/machine.hpp"

namespace cril {

struct DagNode {
  bool bottom = true;
  ProcessId pid;
  std::int64_t index = 0;

  static DagNode bot() { return {}; }
  static DagNode of(ProcessId p, std::int64_t n) { return {false, std::move(p), n}; }

  /// "⊥" or "(ε,0)" / "(1.2,3)".
  std::string to_string() const;

  /// ⊥ sorts first, then by (pid, index).
  friend std::strong_ordering operator<=>(const DagNode& a, const DagNode& b) {
    if (a.bottom || b.bottom) return b.bottom <=> a.bottom;
    if (auto c = a.pid <=> b.pid; c != 0) return c;
    return a.index <=> b.index;
  }
  friend bool operator==(const DagNode& a, const DagNode& b) { return (a <=> b) == 0; }
};

struct DagEdge {
  DagNode src;
  Resource label;
  DagNode dst;

  friend auto operator<=>(const DagEdge&, const DagEdge&) = default;
  friend bool operator==(const DagEdge&, const DagEdge&) = default;
};

class AnnotationDag {
 public:
  /// The initial DAG ({⊥}, ∅, ∅).
  AnnotationDag();

  const std::set<DagNode>& nodes() const { return nodes_; }
  const std::set<DagEdge>& read_edges() const { return read_edges_; }
  const std::set<DagEdge>& write_edges() const { return write_edges_; }

  /// Newest index of p, or -1 when p has no node.
  std::int64_t max_index(const ProcessId& p) const;
  /// End of the write chain of r; ⊥ when r was never written.
  DagNode last_write(const Resource& r) const;

  bool has_outgoing(const DagNode& v) const;
  std::vector<DagEdge> incoming_reads(const DagNode& v) const;
  std::vector<DagEdge> incoming_writes(const DagNode& v) const;

  friend bool operator==(const AnnotationDag& a, const AnnotationDag& b) {
    return a.nodes_ == b.nodes_ && a.read_edges_ == b.read_edges_ &&
           a.write_edges_ == b.write_edges_;
  }

 private:
  friend AnnotationDag apply_forward(const AnnotationDag&, const ProcessId&, const ResourceSet&,
                                     const ResourceSet&);
  friend AnnotationDag apply_backward(const AnnotationDag&, const ProcessId&, const ResourceSet&,
                                      const ResourceSet&);
  friend std::vector<std::string> validate(const AnnotationDag&);

  std::set<DagNode> nodes_;
  std::set<DagEdge> read_edges_;
  std::set<DagEdge> write_edges_;
  // Derived indexes; validate() recomputes them from the sets.
  std::map<Resource, DagNode> last_write_;
  std::map<ProcessId, std::int64_t> max_index_;
};

AnnotationDag empty_dag();

AnnotationDag apply_forward(const AnnotationDag& a, const ProcessId& p, const ResourceSet& rd,
                            const ResourceSet& wt);

/// True iff the newest node of p exists, has no outgoing edge, its incoming
/// edges carry exactly Wt (write) and Rd - Wt (read), and every read edge
/// starts at the current last writer of its resource.
bool backward_enabled(const AnnotationDag& a, const ProcessId& p, const ResourceSet& rd,
                      const ResourceSet& wt);

class NotEnabled : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Removes the newest node of p and its incoming edges. Throws NotEnabled.
AnnotationDag apply_backward(const AnnotationDag& a, const ProcessId& p, const ResourceSet& rd,
                             const ResourceSet& wt);

/// Newest per-process nodes with no outgoing edge whose read sources are
/// all current last writers.
std::set<DagNode> removable_nodes(const AnnotationDag& a);

/// Checks the five structural conditions and the derived indexes. Returns
/// one message per violation; empty means valid.
std::vector<std::string> validate(const AnnotationDag& a);

struct DagDelta {
  std::set<DagNode> nodes;
  std::set<DagEdge> read_edges;
  std::set<DagEdge> write_edges;

  bool empty() const { return nodes.empty() && read_edges.empty() && write_edges.empty(); }
  friend bool operator==(const DagDelta&, const DagDelta&) = default;
};

/// Elements of `to` missing from `from`.
DagDelta added(const AnnotationDag& from, const AnnotationDag& to);

/// Called with every DAG apply_forward/apply_backward produce. Test
/// instrumentation; nullptr (the default) disables it.
using DagObserver = void (*)(const AnnotationDag&);
void set_dag_observer(DagObserver observer);

/// Graphviz rendering: write edges solid, read edges dashed, one row per
/// process.
std::string to_dot(const AnnotationDag& a);

}  // namespace cril
