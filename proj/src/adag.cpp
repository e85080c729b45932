#include "cril/adag.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>

namespace cril {

namespace {
std::atomic<DagObserver> observer{nullptr};

void observe(const AnnotationDag& a) {
  if (auto f = observer.load(std::memory_order_relaxed)) f(a);
}
}  // namespace

void set_dag_observer(DagObserver f) { observer.store(f); }

std::string DagNode::to_string() const {
  if (bottom) return "⊥";
  return "(" + pid.display() + "," + std::to_string(index) + ")";
}

AnnotationDag::AnnotationDag() { nodes_.insert(DagNode::bot()); }

AnnotationDag empty_dag() { return AnnotationDag(); }

std::int64_t AnnotationDag::max_index(const ProcessId& p) const {
  auto it = max_index_.find(p);
  return it == max_index_.end() ? -1 : it->second;
}

DagNode AnnotationDag::last_write(const Resource& r) const {
  auto it = last_write_.find(r);
  return it == last_write_.end() ? DagNode::bot() : it->second;
}

namespace {

bool any_from(const std::set<DagEdge>& edges, const DagNode& v) {
  auto it = edges.lower_bound(DagEdge{v, Resource(), DagNode::bot()});
  return it != edges.end() && it->src == v;
}

std::vector<DagEdge> into(const std::set<DagEdge>& edges, const DagNode& v) {
  std::vector<DagEdge> out;
  for (const auto& e : edges)
    if (e.dst == v) out.push_back(e);
  return out;
}

}  // namespace

bool AnnotationDag::has_outgoing(const DagNode& v) const {
  return any_from(read_edges_, v) || any_from(write_edges_, v);
}

std::vector<DagEdge> AnnotationDag::incoming_reads(const DagNode& v) const {
  return into(read_edges_, v);
}

std::vector<DagEdge> AnnotationDag::incoming_writes(const DagNode& v) const {
  return into(write_edges_, v);
}

AnnotationDag apply_forward(const AnnotationDag& a, const ProcessId& p, const ResourceSet& rd,
                            const ResourceSet& wt) {
  AnnotationDag next = a;
  auto n = a.max_index(p) + 1;
  DagNode v = DagNode::of(p, n);
  next.nodes_.insert(v);
  next.max_index_[p] = n;
  for (const auto& r : rd)
    if (!wt.count(r)) next.read_edges_.insert({a.last_write(r), r, v});
  for (const auto& r : wt) {
    next.write_edges_.insert({a.last_write(r), r, v});
    next.last_write_[r] = v;
  }
  observe(next);
  return next;
}

bool backward_enabled(const AnnotationDag& a, const ProcessId& p, const ResourceSet& rd,
                      const ResourceSet& wt) {
  auto n = a.max_index(p);
  if (n < 0) return false;
  DagNode v = DagNode::of(p, n);
  if (a.has_outgoing(v)) return false;

  ResourceSet written;
  for (const auto& e : a.incoming_writes(v)) {
    if (a.last_write(e.label) != v) return false;
    written.insert(e.label);
  }
  if (written != wt) return false;

  ResourceSet read_only;
  for (const auto& e : a.incoming_reads(v)) {
    if (e.src != a.last_write(e.label)) return false;
    read_only.insert(e.label);
  }
  ResourceSet expected;
  std::set_difference(rd.begin(), rd.end(), wt.begin(), wt.end(),
                      std::inserter(expected, expected.end()));
  return read_only == expected;
}

AnnotationDag apply_backward(const AnnotationDag& a, const ProcessId& p, const ResourceSet& rd,
                             const ResourceSet& wt) {
  if (!backward_enabled(a, p, rd, wt))
    throw NotEnabled("annotation DAG does not allow process " + p.display() + " to reverse " +
                     to_string(rd) + "/" + to_string(wt));
  AnnotationDag next = a;
  auto n = a.max_index(p);
  DagNode v = DagNode::of(p, n);
  for (const auto& e : a.incoming_writes(v)) {
    next.write_edges_.erase(e);
    if (e.src.bottom)
      next.last_write_.erase(e.label);
    else
      next.last_write_[e.label] = e.src;
  }
  for (const auto& e : a.incoming_reads(v)) next.read_edges_.erase(e);
  next.nodes_.erase(v);
  if (n == 0)
    next.max_index_.erase(p);
  else
    next.max_index_[p] = n - 1;
  observe(next);
  return next;
}

std::set<DagNode> removable_nodes(const AnnotationDag& a) {
  std::set<DagNode> out;
  for (const auto& v : a.nodes()) {
    if (v.bottom || a.max_index(v.pid) != v.index) continue;
    if (a.has_outgoing(v)) continue;
    auto reads = a.incoming_reads(v);
    bool current = std::all_of(reads.begin(), reads.end(),
                               [&](const DagEdge& e) { return e.src == a.last_write(e.label); });
    if (current) out.insert(v);
  }
  return out;
}

std::vector<std::string> validate(const AnnotationDag& a) {
  std::vector<std::string> bad;
  const auto& V = a.nodes_;

  // 1. ⊥ present, per-process indexes downward closed.
  if (!V.count(DagNode::bot())) bad.push_back("cond 1: ⊥ is missing");
  std::map<ProcessId, std::int64_t> max_index;
  for (const auto& v : V) {
    if (v.bottom) continue;
    if (v.index < 0) bad.push_back("cond 1: negative index at " + v.to_string());
    auto& m = max_index.try_emplace(v.pid, -1).first->second;
    m = std::max(m, v.index);
  }
  for (const auto& [p, m] : max_index)
    for (std::int64_t i = 0; i <= m; ++i)
      if (!V.count(DagNode::of(p, i)))
        bad.push_back("cond 1: " + DagNode::of(p, m).to_string() + " present but " +
                      DagNode::of(p, i).to_string() + " missing");

  // 2. at most one incoming edge per (target, resource) across both sets.
  std::map<std::pair<DagNode, Resource>, int> incoming;
  for (const auto* edges : {&a.read_edges_, &a.write_edges_})
    for (const auto& e : *edges) {
      if (!V.count(e.src) || !V.count(e.dst))
        bad.push_back("cond 2: edge " + e.src.to_string() + "-" + e.label.name() + "->" +
                      e.dst.to_string() + " has an endpoint outside V");
      if (++incoming[{e.dst, e.label}] == 2)
        bad.push_back("cond 2: two incoming " + e.label.name() + " edges at " +
                      e.dst.to_string());
    }

  // 3. disjoint edge sets, acyclic union.
  for (const auto& e : a.read_edges_)
    if (a.write_edges_.count(e))
      bad.push_back("cond 3: edge in both E_R and E_W into " + e.dst.to_string());
  {
    std::map<DagNode, std::vector<DagNode>> succ;
    std::map<DagNode, int> indegree;
    for (const auto& v : V) indegree[v] = 0;
    for (const auto* edges : {&a.read_edges_, &a.write_edges_})
      for (const auto& e : *edges) {
        succ[e.src].push_back(e.dst);
        ++indegree[e.dst];
      }
    std::vector<DagNode> ready;
    for (const auto& [v, d] : indegree)
      if (d == 0) ready.push_back(v);
    std::size_t visited = 0;
    while (!ready.empty()) {
      DagNode v = ready.back();
      ready.pop_back();
      ++visited;
      for (const auto& w : succ[v])
        if (--indegree[w] == 0) ready.push_back(w);
    }
    if (visited != indegree.size()) bad.push_back("cond 3: edges form a cycle");
  }

  // 4. a write edge from a non-⊥ node continues a write chain of the same resource.
  for (const auto& e : a.write_edges_) {
    if (e.src.bottom) continue;
    bool fed = std::any_of(a.write_edges_.begin(), a.write_edges_.end(), [&](const DagEdge& f) {
      return f.dst == e.src && f.label == e.label;
    });
    if (!fed)
      bad.push_back("cond 4: write edge " + e.src.to_string() + "-" + e.label.name() + "->" +
                    e.dst.to_string() + " does not continue a write chain");
  }

  // 5. write out-degree at most one per resource.
  std::map<std::pair<DagNode, Resource>, int> outgoing;
  for (const auto& e : a.write_edges_)
    if (++outgoing[{e.src, e.label}] == 2)
      bad.push_back("cond 5: " + e.src.to_string() + " has two outgoing " + e.label.name() +
                    " write edges");

  // Derived indexes agree with the sets.
  if (max_index != a.max_index_) bad.push_back("index: max_index out of sync");
  std::map<Resource, DagNode> last;
  for (const auto& e : a.write_edges_) {
    bool continues = std::any_of(a.write_edges_.begin(), a.write_edges_.end(),
                                 [&](const DagEdge& f) { return f.src == e.dst && f.label == e.label; });
    if (!continues) last[e.label] = e.dst;
  }
  if (last != a.last_write_) bad.push_back("index: last_write out of sync");
  return bad;
}

DagDelta added(const AnnotationDag& from, const AnnotationDag& to) {
  DagDelta d;
  std::set_difference(to.nodes().begin(), to.nodes().end(), from.nodes().begin(),
                      from.nodes().end(), std::inserter(d.nodes, d.nodes.end()));
  std::set_difference(to.read_edges().begin(), to.read_edges().end(), from.read_edges().begin(),
                      from.read_edges().end(), std::inserter(d.read_edges, d.read_edges.end()));
  std::set_difference(to.write_edges().begin(), to.write_edges().end(),
                      from.write_edges().begin(), from.write_edges().end(),
                      std::inserter(d.write_edges, d.write_edges.end()));
  return d;
}

namespace {

std::string dot_id(const DagNode& v) {
  if (v.bottom) return "bot";
  std::string id = "n";
  for (auto i : v.pid.path()) id += "_" + std::to_string(i);
  return id + "__" + std::to_string(v.index);
}

}  // namespace

std::string to_dot(const AnnotationDag& a) {
  std::ostringstream os;
  os << "digraph adag {\n  rankdir=LR;\n  node [shape=ellipse, fontsize=10];\n";
  os << "  bot [label=\"⊥\", shape=point, width=0.15];\n";
  std::map<ProcessId, std::vector<DagNode>> lanes;
  for (const auto& v : a.nodes())
    if (!v.bottom) lanes[v.pid].push_back(v);
  std::size_t lane = 0;
  for (const auto& [pid, vs] : lanes) {
    os << "  subgraph cluster_" << lane++ << " {\n    label=\"" << pid.display()
       << "\"; style=dotted;\n";
    for (const auto& v : vs) os << "    " << dot_id(v) << " [label=\"" << v.to_string() << "\"];\n";
    os << "  }\n";
  }
  for (const auto& e : a.write_edges())
    os << "  " << dot_id(e.src) << " -> " << dot_id(e.dst) << " [label=\"" << e.label.name()
       << "\"];\n";
  for (const auto& e : a.read_edges())
    os << "  " << dot_id(e.src) << " -> " << dot_id(e.dst) << " [label=\"" << e.label.name()
       << "\", style=dashed];\n";
  os << "}\n";
  return os.str();
}

}  // namespace cril
