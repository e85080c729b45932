#include "cril/ltsi.hpp"

#include <cstdio>

namespace cril {

bool independent_labels(const TransitionLabel& a, const TransitionLabel& b) {
  if (a.pid.is_prefix_of(b.pid) || b.pid.is_prefix_of(a.pid)) return false;
  auto disjoint = [](const ResourceSet& x, const ResourceSet& y) {
    for (const auto& r : x)
      if (y.count(r)) return false;
    return true;
  };
  return disjoint(a.rd, b.wt) && disjoint(b.rd, a.wt);
}

namespace {

void put(std::string& out, std::string_view s) {
  out += std::to_string(s.size());
  out += ':';
  out += s;
}

void put(std::string& out, const ProcessId& p) { put(out, p.to_string()); }

void put(std::string& out, const DagNode& v) {
  if (v.bottom) {
    out += '_';
    return;
  }
  put(out, v.pid);
  out += std::to_string(v.index);
  out += ',';
}

}  // namespace

std::string state_key(const CombinedState& s) {
  std::string out;
  out.reserve(256);
  for (const auto& [x, v] : s.config.rho) {
    put(out, x);
    out += std::to_string(v);
    out += ';';
  }
  out += '|';
  for (const auto& [a, v] : s.config.sigma) {
    out += std::to_string(a) + "=" + std::to_string(v) + ";";
  }
  out += '|';
  for (const auto& [p, pc] : s.config.procs) {
    put(out, p);
    put(out, pc.label);
    out += static_cast<char>('0' + static_cast<int>(pc.stage));
  }
  out += '|';
  for (const auto& v : s.dag.nodes()) put(out, v);
  for (const auto* edges : {&s.dag.read_edges(), &s.dag.write_edges()}) {
    out += '|';
    for (const auto& e : *edges) {
      put(out, e.src);
      put(out, e.label.name());
      put(out, e.dst);
    }
  }
  return out;
}

std::string state_hash(const CombinedState& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : state_key(s)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string_view to_string(StepVerdict v) {
  switch (v) {
    case StepVerdict::Ok: return "ok";
    case StepVerdict::NotEnabledProg: return "not-enabled-prog";
    case StepVerdict::NotEnabledDag: return "not-enabled-dag";
  }
  return "?";
}

Lts::Lts(Program program) : machine_(std::make_shared<const Machine>(std::move(program))) {}

Lts::Lts(std::shared_ptr<const Machine> machine) : machine_(std::move(machine)) {}

CombinedState Lts::initial_state() const { return {machine_->initial_config(), empty_dag()}; }

bool Lts::is_initial(const CombinedState& s) const {
  return machine_->is_initial(s.config) && s.dag == AnnotationDag();
}

std::vector<CombinedTransition> Lts::enabled(const CombinedState& s, Direction dir,
                                             std::vector<Fault>* faults) const {
  std::vector<Fault> prog_faults;
  auto prog = machine_->enabled(s.config, dir, faults ? &prog_faults : nullptr);
  if (faults) {
    // A reversal the DAG forbids anyway is not a fault of the combined system.
    for (auto& f : prog_faults) {
      bool reachable = dir == Direction::Forward || f.block == 0 ||
                       backward_enabled(s.dag, f.pid, machine_->read_set(f.block),
                                        machine_->write_set(f.block));
      if (reachable) faults->push_back(std::move(f));
    }
  }
  if (dir == Direction::Forward) return prog;
  std::vector<CombinedTransition> out;
  for (auto& t : prog)
    if (backward_enabled(s.dag, t.pid(), t.label.rd, t.label.wt)) out.push_back(std::move(t));
  return out;
}

StepVerdict Lts::check(const CombinedState& s, const ProcessId& p, Direction dir,
                       std::optional<CombinedTransition>* transition) const {
  auto t = machine_->enabled_for(s.config, p, dir);
  if (!t) return StepVerdict::NotEnabledProg;
  if (transition) *transition = t;
  if (dir == Direction::Backward && !backward_enabled(s.dag, p, t->label.rd, t->label.wt))
    return StepVerdict::NotEnabledDag;
  return StepVerdict::Ok;
}

CombinedState Lts::step(const CombinedState& s, const CombinedTransition& t) const {
  auto expected = machine_->enabled_for(s.config, t.pid(), t.dir());
  if (!expected || !(*expected == t))
    throw NotEnabled("transition " + t.describe() + " is not enabled by the program semantics");
  CombinedState next;
  if (t.dir() == Direction::Forward) {
    next.dag = apply_forward(s.dag, t.pid(), t.label.rd, t.label.wt);
  } else {
    next.dag = apply_backward(s.dag, t.pid(), t.label.rd, t.label.wt);
  }
  next.config = machine_->apply(s.config, t);
  return next;
}

std::set<DagNode> Lts::removable_nodes(const CombinedState& s) const {
  std::set<DagNode> out;
  for (const auto& v : cril::removable_nodes(s.dag)) {
    auto it = s.config.procs.find(v.pid);
    if (it != s.config.procs.end() && !is_leaf(s.config.procs, v.pid)) continue;
    out.insert(v);
  }
  return out;
}

std::size_t RandomScheduler::pick(const std::vector<CombinedTransition>& enabled) {
  std::uniform_int_distribution<std::size_t> dist(0, enabled.size() - 1);
  return dist(rng_);
}

std::size_t RoundRobinScheduler::pick(const std::vector<CombinedTransition>& enabled) {
  std::size_t choice = 0;
  if (last_) {
    for (std::size_t i = 0; i < enabled.size(); ++i)
      if (*last_ < enabled[i].pid()) {
        choice = i;
        break;
      }
  }
  last_ = enabled[choice].pid();
  return choice;
}

std::string_view to_string(RunOutcome o) {
  switch (o) {
    case RunOutcome::Terminated: return "terminated";
    case RunOutcome::Blocked: return "blocked";
    case RunOutcome::StepLimit: return "step-limit";
    case RunOutcome::AssertFailed: return "assert-failed";
    case RunOutcome::Fault: return "fault";
  }
  return "?";
}

RunResult run(const Lts& lts, const CombinedState& start, Scheduler& scheduler, Direction dir,
              std::size_t max_steps) {
  RunResult result;
  result.final = start;
  for (;;) {
    auto enabled = lts.enabled(result.final, dir);
    if (enabled.empty()) {
      bool done = dir == Direction::Forward ? lts.is_final(result.final)
                                            : lts.is_initial(result.final);
      result.outcome = done ? RunOutcome::Terminated : RunOutcome::Blocked;
      return result;
    }
    if (result.trace.size() >= max_steps) {
      result.outcome = RunOutcome::StepLimit;
      return result;
    }
    const auto& t = enabled.at(scheduler.pick(enabled));
    try {
      result.final = lts.step(result.final, t);
    } catch (const RuntimeFault& rf) {
      result.fault = rf.fault();
      result.outcome = rf.fault().kind == FaultKind::AssertFailure ? RunOutcome::AssertFailed
                                                                   : RunOutcome::Fault;
      return result;
    }
    result.trace.push_back(t);
  }
}

ProgRunResult run_prog(const Machine& m, const ProgramConfiguration& start, Scheduler& scheduler,
                       Direction dir, std::size_t max_steps) {
  ProgRunResult result;
  result.final = start;
  for (;;) {
    auto enabled = m.enabled(result.final, dir);
    if (enabled.empty()) {
      bool done = dir == Direction::Forward ? m.is_final(result.final) : m.is_initial(result.final);
      result.outcome = done ? RunOutcome::Terminated : RunOutcome::Blocked;
      return result;
    }
    if (result.trace.size() >= max_steps) {
      result.outcome = RunOutcome::StepLimit;
      return result;
    }
    const auto& t = enabled.at(scheduler.pick(enabled));
    try {
      result.final = m.apply(result.final, t);
    } catch (const RuntimeFault& rf) {
      result.fault = rf.fault();
      result.outcome = rf.fault().kind == FaultKind::AssertFailure ? RunOutcome::AssertFailed
                                                                   : RunOutcome::Fault;
      return result;
    }
    result.trace.push_back(t);
  }
}

}  // namespace cril
