#include "cril/serialize.hpp"

#include <stdexcept>

namespace cril {

json to_json(const ResourceSet& rs) {
  json out = json::array();
  for (const auto& r : rs) out.push_back(r.name());
  return out;
}

ResourceSet resource_set_from_json(const json& j) {
  ResourceSet out;
  for (const auto& s : j) out.insert(Resource(s.get<std::string>()));
  return out;
}

json to_json(const ProgramConfiguration& c) {
  json rho = json::object();
  for (const auto& [x, v] : c.rho) rho[x] = v;
  json sigma = json::object();
  for (const auto& [a, v] : c.sigma) sigma[std::to_string(a)] = v;
  json procs = json::array();
  for (const auto& [p, pc] : c.procs)
    procs.push_back({{"pid", p.to_string()}, {"label", pc.label}, {"stage", to_string(pc.stage)}});
  return {{"rho", rho}, {"sigma", sigma}, {"processes", procs}};
}

json to_json(const DagNode& v) {
  if (v.bottom) return {{"bottom", true}};
  return {{"pid", v.pid.to_string()}, {"index", v.index}};
}

namespace {

json edges(const std::set<DagEdge>& es) {
  json out = json::array();
  for (const auto& e : es)
    out.push_back({{"src", to_json(e.src)}, {"label", e.label.name()}, {"dst", to_json(e.dst)}});
  return out;
}

json nodes(const std::set<DagNode>& vs) {
  json out = json::array();
  for (const auto& v : vs) out.push_back(to_json(v));
  return out;
}

}  // namespace

json to_json(const AnnotationDag& a) {
  return {{"nodes", nodes(a.nodes())},
          {"write_edges", edges(a.write_edges())},
          {"read_edges", edges(a.read_edges())}};
}

json to_json(const DagDelta& d) {
  return {{"nodes", nodes(d.nodes)},
          {"write_edges", edges(d.write_edges)},
          {"read_edges", edges(d.read_edges)}};
}

json to_json(const CombinedTransition& t) {
  return {{"pid", t.pid().to_string()}, {"dir", to_string(t.dir())},
          {"block", t.block},           {"kind", to_string(t.kind)},
          {"rd", to_json(t.label.rd)},  {"wt", to_json(t.label.wt)}};
}

Direction direction_from_string(std::string_view s) {
  if (s == "forward" || s == "fwd") return Direction::Forward;
  if (s == "backward" || s == "bwd") return Direction::Backward;
  throw std::invalid_argument("direction must be forward or backward, got " + std::string(s));
}

MoveRequest move_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("move must be a JSON object");
  MoveRequest m;
  try {
    m.pid = ProcessId::parse(j.at("pid").get<std::string>());
    m.dir = direction_from_string(j.value("dir", std::string("forward")));
    if (j.contains("block")) m.block = j["block"].get<BlockId>();
    if (j.contains("kind")) {
      auto k = j["kind"].get<std::string>();
      if (k == "inst")
        m.kind = TransitionKind::Inst;
      else if (k == "fork")
        m.kind = TransitionKind::CallFork;
      else if (k == "merge")
        m.kind = TransitionKind::CallMerge;
      else
        throw std::invalid_argument("unknown transition kind " + k);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed move: ") + e.what());
  }
  return m;
}

std::optional<CombinedTransition> resolve(const Lts& lts, const CombinedState& s,
                                          const MoveRequest& m) {
  auto t = lts.machine().enabled_for(s.config, m.pid, m.dir);
  if (!t) return std::nullopt;
  if (m.block && *m.block != t->block) return std::nullopt;
  if (m.kind && *m.kind != t->kind) return std::nullopt;
  return t;
}

json trace_to_json(const std::vector<CombinedTransition>& trace) {
  json out = json::array();
  for (const auto& t : trace) out.push_back(to_json(t));
  return out;
}

std::vector<MoveRequest> trace_from_json(const json& j) {
  const json& list = j.is_object() && j.contains("trace") ? j["trace"] : j;
  if (!list.is_array()) throw std::invalid_argument("trace must be a JSON array");
  std::vector<MoveRequest> out;
  for (const auto& item : list) out.push_back(move_from_json(item));
  return out;
}

ReplayResult replay(const Lts& lts, const CombinedState& start,
                    const std::vector<MoveRequest>& moves) {
  ReplayResult r{start, {}, std::nullopt};
  for (std::size_t i = 0; i < moves.size(); ++i) {
    const auto& m = moves[i];
    auto where = "move " + std::to_string(i) + " (pid " + m.pid.display() + " " +
                 std::string(to_string(m.dir)) + ")";
    auto t = resolve(lts, r.state, m);
    if (!t) {
      r.error = where + ": not enabled by the program semantics";
      return r;
    }
    try {
      r.state = lts.step(r.state, *t);
    } catch (const NotEnabled&) {
      r.error = where + ": blocked by the annotation DAG";
      return r;
    } catch (const RuntimeFault& f) {
      r.error = where + ": " + f.what();
      return r;
    }
    r.applied.push_back(*t);
  }
  return r;
}

ProgReplayResult replay_prog(const Machine& m, const ProgramConfiguration& start,
                             const std::vector<MoveRequest>& moves) {
  ProgReplayResult r{start, {}, std::nullopt};
  for (std::size_t i = 0; i < moves.size(); ++i) {
    const auto& mv = moves[i];
    auto t = m.enabled_for(r.config, mv.pid, mv.dir);
    if (!t || (mv.block && *mv.block != t->block) || (mv.kind && *mv.kind != t->kind)) {
      r.error = "move " + std::to_string(i) + " (pid " + mv.pid.display() + " " +
                std::string(to_string(mv.dir)) + "): not enabled by the program semantics";
      return r;
    }
    try {
      r.config = m.apply(r.config, *t);
    } catch (const RuntimeFault& f) {
      r.error = "move " + std::to_string(i) + ": " + f.what();
      return r;
    }
    r.applied.push_back(*t);
  }
  return r;
}

namespace {

json labels(const std::set<Label>& ls) { return json(std::vector<Label>(ls.begin(), ls.end())); }

json entry_json(const EntryPoint& e) {
  switch (e.kind) {
    case EntryPoint::Kind::Begin: return {{"kind", "begin"}, {"label", e.first}};
    case EntryPoint::Kind::Uncond: return {{"kind", "uncond"}, {"label", e.first}};
    case EntryPoint::Kind::Cond:
      return {{"kind", "cond"}, {"labels", {e.first, e.second}}, {"cond", render_expr(*e.cond)}};
  }
  return {};
}

json exit_json(const ExitPoint& e) {
  switch (e.kind) {
    case ExitPoint::Kind::End: return {{"kind", "end"}, {"label", e.first}};
    case ExitPoint::Kind::Uncond: return {{"kind", "uncond"}, {"label", e.first}};
    case ExitPoint::Kind::Cond:
      return {{"kind", "cond"}, {"labels", {e.first, e.second}}, {"cond", render_expr(*e.cond)}};
  }
  return {};
}

}  // namespace

json program_to_json(const Program& p) {
  auto pbs = process_blocks(p);
  json blocks = json::array();
  for (const auto& b : p.blocks) {
    json jb = {{"id", b.id},
               {"line", b.line},
               {"text", render_block(b)},
               {"read", to_json(read_set(b))},
               {"write", to_json(write_set(b))},
               {"in", labels(in_labels(b))},
               {"out", labels(out_labels(b))},
               {"process_block", pbs.class_of.at(b.id - 1)}};
    if (b.is_call()) {
      const auto& c = b.call();
      jb["kind"] = "call";
      jb["entry"] = {{"kind", "uncond"}, {"label", c.entry}};
      jb["targets"] = c.targets;
      jb["exit"] = {{"kind", "uncond"}, {"label", c.exit}};
    } else {
      const auto& ib = b.instruction_block();
      jb["kind"] = "inst";
      jb["entry"] = entry_json(ib.entry);
      jb["exit"] = exit_json(ib.exit);
    }
    blocks.push_back(std::move(jb));
  }
  json classes = json::array();
  for (const auto& c : pbs.classes) {
    json jc = {{"blocks", c.blocks}, {"labels", labels(c.labels)}};
    jc["label"] = c.label ? json(*c.label) : json(nullptr);
    classes.push_back(std::move(jc));
  }
  return {{"blocks", blocks},
          {"vars", std::vector<std::string>(p.vars.begin(), p.vars.end())},
          {"process_blocks", classes}};
}

json to_json(const WellFormednessReport& r) {
  json vs = json::array();
  for (const auto& v : r.violations)
    vs.push_back({{"rule", v.rule}, {"blocks", v.blocks}, {"labels", v.labels}, {"message", v.message}});
  return {{"ok", r.ok}, {"violations", vs}, {"warnings", r.warnings}};
}

}  // namespace cril
