#include "cril/analysis.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace cril {

std::string to_string(const ResourceSet& rs) {
  std::string out = "{";
  bool first = true;
  for (const auto& r : rs) {
    if (!first) out += ",";
    out += r.name();
    first = false;
  }
  return out + "}";
}

ResourceSet resources(std::initializer_list<const char*> names) {
  ResourceSet out;
  for (const char* n : names) out.emplace(n);
  return out;
}

namespace {

void add_expr(const ExprPtr& e, ResourceSet& out) {
  if (!e) return;
  std::set<std::string> vars;
  collect_vars(*e, vars);
  for (auto& v : vars) out.emplace(v);
  if (mentions_heap(*e)) out.insert(Resource::heap());
}

void add_left(const LeftValue& lv, ResourceSet& out) {
  out.emplace(lv.name);
  if (lv.is_heap()) out.insert(Resource::heap());
}

}  // namespace

ResourceSet read_set(const BasicBlock& b) {
  ResourceSet out;
  if (b.is_call()) return out;
  const auto& ib = b.instruction_block();
  add_expr(ib.entry.cond, out);
  add_expr(ib.exit.cond, out);
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Instruction::Update>) {
          add_left(n.target, out);
          add_expr(n.value, out);
        } else if constexpr (std::is_same_v<T, Instruction::Exchange>) {
          add_left(n.lhs, out);
          add_left(n.rhs, out);
        } else if constexpr (std::is_same_v<T, Instruction::V> ||
                             std::is_same_v<T, Instruction::P>) {
          out.emplace(n.var);
        } else if constexpr (std::is_same_v<T, Instruction::Assert>) {
          add_expr(n.cond, out);
        }
      },
      ib.inst.node);
  return out;
}

ResourceSet write_set(const BasicBlock& b) {
  ResourceSet out;
  if (b.is_call()) return out;
  const auto& inst = b.instruction_block().inst;
  auto written = [](const LeftValue& lv) {
    return lv.is_heap() ? Resource::heap() : Resource(lv.name);
  };
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Instruction::Update>) {
          out.insert(written(n.target));
        } else if constexpr (std::is_same_v<T, Instruction::Exchange>) {
          out.insert(written(n.lhs));
          out.insert(written(n.rhs));
        } else if constexpr (std::is_same_v<T, Instruction::V> ||
                             std::is_same_v<T, Instruction::P>) {
          out.emplace(n.var);
        }
      },
      inst.node);
  return out;
}

std::set<Label> in_labels(const BasicBlock& b) {
  if (b.is_call()) return {b.call().entry};
  const auto& e = b.instruction_block().entry;
  switch (e.kind) {
    case EntryPoint::Kind::Uncond: return {e.first};
    case EntryPoint::Kind::Cond: return {e.first, e.second};
    case EntryPoint::Kind::Begin: return {};
  }
  return {};
}

std::set<Label> out_labels(const BasicBlock& b) {
  if (b.is_call()) return {b.call().exit};
  const auto& e = b.instruction_block().exit;
  switch (e.kind) {
    case ExitPoint::Kind::Uncond: return {e.first};
    case ExitPoint::Kind::Cond: return {e.first, e.second};
    case ExitPoint::Kind::End: return {};
  }
  return {};
}

namespace {

std::optional<Label> begin_label(const BasicBlock& b) {
  if (b.is_call()) return std::nullopt;
  const auto& e = b.instruction_block().entry;
  if (e.kind == EntryPoint::Kind::Begin) return e.first;
  return std::nullopt;
}

std::optional<Label> end_label(const BasicBlock& b) {
  if (b.is_call()) return std::nullopt;
  const auto& e = b.instruction_block().exit;
  if (e.kind == ExitPoint::Kind::End) return e.first;
  return std::nullopt;
}

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

ProcessBlockPartition process_blocks(const Program& p) {
  const std::size_t n = p.blocks.size();
  std::map<Label, std::vector<std::size_t>> ins, outs;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& l : in_labels(p.blocks[i])) ins[l].push_back(i);
    for (const auto& l : out_labels(p.blocks[i])) outs[l].push_back(i);
  }
  DisjointSets ds(n);
  for (const auto& [label, producers] : outs) {
    auto it = ins.find(label);
    if (it == ins.end()) continue;
    for (auto a : producers)
      for (auto b : it->second) ds.unite(a, b);
  }

  ProcessBlockPartition part;
  part.class_of.resize(n);
  std::map<std::size_t, std::size_t> root_to_class;
  for (std::size_t i = 0; i < n; ++i) {
    auto root = ds.find(i);
    auto [it, fresh] = root_to_class.emplace(root, part.classes.size());
    if (fresh) part.classes.emplace_back();
    part.class_of[i] = it->second;
    auto& cls = part.classes[it->second];
    cls.blocks.push_back(p.blocks[i].id);
    if (auto l = begin_label(p.blocks[i])) cls.labels.insert(*l);
    if (auto l = end_label(p.blocks[i])) cls.labels.insert(*l);
  }
  for (auto& cls : part.classes) {
    std::set<Label> begins;
    for (auto id : cls.blocks)
      if (auto l = begin_label(p.block(id))) begins.insert(*l);
    if (begins.size() == 1) cls.label = *begins.begin();
  }
  return part;
}

std::string WellFormednessReport::to_text() const {
  std::ostringstream os;
  if (ok) os << "well-formed\n";
  for (const auto& v : violations) {
    os << "error [" << (v.rule.size() == 1 ? "condition " + v.rule : v.rule) << "]: " << v.message;
    if (!v.blocks.empty()) {
      os << " (blocks";
      for (auto b : v.blocks) os << " b" << b;
      os << ")";
    }
    os << "\n";
  }
  for (const auto& w : warnings) os << "warning: " << w << "\n";
  return os.str();
}

NotWellFormed::NotWellFormed(WellFormednessReport report)
    : std::runtime_error("program is not well-formed:\n" + report.to_text()),
      report_(std::move(report)) {}

WellFormednessReport check_well_formed(const Program& p) {
  WellFormednessReport report;
  auto violate = [&](std::string rule, std::vector<BlockId> blocks, std::vector<Label> labels,
                     std::string msg) {
    report.violations.push_back(
        {std::move(rule), std::move(blocks), std::move(labels), std::move(msg)});
  };

  std::map<Label, std::vector<BlockId>> ins, outs, begins, ends;
  std::set<Label> l1, l2;
  for (const auto& b : p.blocks) {
    for (const auto& l : in_labels(b)) {
      ins[l].push_back(b.id);
      l1.insert(l);
    }
    for (const auto& l : out_labels(b)) {
      outs[l].push_back(b.id);
      l1.insert(l);
    }
    if (auto l = begin_label(b)) {
      begins[*l].push_back(b.id);
      l2.insert(*l);
    }
    if (auto l = end_label(b)) {
      ends[*l].push_back(b.id);
      l2.insert(*l);
    }
  }

  // (1) each control label joins exactly one producer to exactly one consumer
  for (const auto& l : l1) {
    const auto& consumers = ins[l];
    const auto& producers = outs[l];
    if (consumers.size() != 1 || producers.size() != 1) {
      std::vector<BlockId> involved = consumers;
      involved.insert(involved.end(), producers.begin(), producers.end());
      violate("1", involved, {l},
              "label '" + l + "' is entered by " + std::to_string(consumers.size()) +
                  " block(s) and left by " + std::to_string(producers.size()) +
                  " block(s); exactly one of each is required");
      continue;
    }
    auto in_set = in_labels(p.block(consumers.front()));
    auto out_set = out_labels(p.block(producers.front()));
    std::vector<Label> common;
    std::set_intersection(in_set.begin(), in_set.end(), out_set.begin(), out_set.end(),
                          std::back_inserter(common));
    if (common.size() != 1)
      violate("1", {consumers.front(), producers.front()}, common,
              "blocks b" + std::to_string(producers.front()) + " and b" +
                  std::to_string(consumers.front()) + " share more than the label '" + l + "'");
  }

  // (2) one begin and one end per process label
  for (const auto& l : l2) {
    if (begins[l].size() != 1 || ends[l].size() != 1) {
      std::vector<BlockId> involved = begins[l];
      involved.insert(involved.end(), ends[l].begin(), ends[l].end());
      violate("2", involved, {l},
              "process label '" + l + "' has " + std::to_string(begins[l].size()) +
                  " begin and " + std::to_string(ends[l].size()) + " end point(s)");
    }
  }

  // (3) control labels and process labels are disjoint
  for (const auto& l : l1)
    if (l2.count(l)) violate("3", {}, {l}, "label '" + l + "' is used both as a control label and a process label");

  // (4) each process block carries exactly one process label
  auto part = process_blocks(p);
  for (const auto& cls : part.classes) {
    if (cls.labels.size() != 1) {
      std::string names;
      for (const auto& l : cls.labels) names += (names.empty() ? "" : ",") + l;
      violate("4", cls.blocks, {cls.labels.begin(), cls.labels.end()},
              "process block has " + std::to_string(cls.labels.size()) + " process labels {" +
                  names + "}");
    }
  }

  // (5) there is a main process
  if (!l2.count("main")) violate("5", {}, {"main"}, "no process is labeled 'main'");

  std::size_t main_classes = 0;
  for (const auto& cls : part.classes)
    if (cls.label == "main") ++main_classes;
  if (l2.count("main") && main_classes != 1)
    violate("main-unique", {}, {"main"}, "exactly one process block must be labeled 'main'");

  // Calls: targets are process labels, no duplicates, main does not call itself.
  std::set<Label> called;
  for (const auto& b : p.blocks) {
    if (!b.is_call()) continue;
    const auto& c = b.call();
    std::set<Label> seen;
    for (const auto& t : c.targets) {
      if (!begins.count(t))
        violate("call-target", {b.id}, {t}, "call target '" + t + "' is not a process label");
      if (!seen.insert(t).second)
        violate("call-duplicate", {b.id}, {t}, "call target '" + t + "' is listed twice");
      called.insert(t);
      if (t == "main" && part.of(b.id).label == "main")
        violate("main-recursion", {b.id}, {t}, "the main process calls itself");
    }
  }

  // Conditional join/branch points need two distinct labels.
  for (const auto& b : p.blocks) {
    if (b.is_call()) continue;
    const auto& ib = b.instruction_block();
    if (ib.entry.kind == EntryPoint::Kind::Cond && ib.entry.first == ib.entry.second)
      violate("cond-labels", {b.id}, {ib.entry.first},
              "conditional entry uses label '" + ib.entry.first + "' twice");
    if (ib.exit.kind == ExitPoint::Kind::Cond && ib.exit.first == ib.exit.second)
      violate("cond-labels", {b.id}, {ib.exit.first},
              "conditional exit uses label '" + ib.exit.first + "' twice");
  }

  // Semaphore variables occur only as P/V operands.
  std::set<std::string> semaphores;
  for (const auto& b : p.blocks) {
    if (b.is_call()) continue;
    const auto& inst = b.instruction_block().inst.node;
    if (auto v = std::get_if<Instruction::V>(&inst)) semaphores.insert(v->var);
    if (auto v = std::get_if<Instruction::P>(&inst)) semaphores.insert(v->var);
  }
  for (const auto& b : p.blocks) {
    if (b.is_call()) continue;
    const auto& ib = b.instruction_block();
    bool is_pv = std::holds_alternative<Instruction::V>(ib.inst.node) ||
                 std::holds_alternative<Instruction::P>(ib.inst.node);
    ResourceSet outside_pv;
    add_expr(ib.entry.cond, outside_pv);
    add_expr(ib.exit.cond, outside_pv);
    if (!is_pv) outside_pv.merge(read_set(b));
    for (const auto& s : semaphores)
      if (outside_pv.count(Resource(s)))
        violate("semaphore", {b.id}, {}, "semaphore variable '" + s + "' is used outside P/V");
  }

  for (const auto& cls : part.classes) {
    if (cls.label && *cls.label != "main" && !called.count(*cls.label))
      report.warnings.push_back("process '" + *cls.label + "' is never called");
  }

  report.ok = report.violations.empty();
  return report;
}

}  // namespace cril
