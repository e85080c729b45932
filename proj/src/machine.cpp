#include "cril/machine.hpp"

#include <algorithm>
#include <charconv>

namespace cril {

// ---------------------------------------------------------------------------
// Process identifiers

ProcessId ProcessId::parse(std::string_view text) {
  if (text.empty() || text == "e" || text == "ε") return root();
  std::vector<std::uint32_t> path;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto dot = text.find('.', start);
    auto part = text.substr(start, dot == std::string_view::npos ? text.size() - start : dot - start);
    std::uint32_t v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size() || v == 0)
      throw std::invalid_argument("invalid process id '" + std::string(text) + "'");
    path.push_back(v);
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return ProcessId(std::move(path));
}

ProcessId ProcessId::child(std::uint32_t i) const {
  auto path = path_;
  path.push_back(i);
  return ProcessId(std::move(path));
}

ProcessId ProcessId::parent() const {
  auto path = path_;
  if (!path.empty()) path.pop_back();
  return ProcessId(std::move(path));
}

bool ProcessId::is_prefix_of(const ProcessId& other) const {
  return path_.size() <= other.path_.size() &&
         std::equal(path_.begin(), path_.end(), other.path_.begin());
}

std::string ProcessId::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < path_.size(); ++i) {
    if (i) out += ".";
    out += std::to_string(path_[i]);
  }
  return out;
}

std::string ProcessId::display() const { return is_root() ? "ε" : to_string(); }

bool is_process_set(const ProcessMap& procs) {
  if (!procs.count(ProcessId::root())) return false;
  for (const auto& [pid, pc] : procs) {
    if (pid.is_root()) continue;
    if (!procs.count(pid.parent())) return false;
    auto last = pid.path().back();
    if (last > 1) {
      auto sibling = pid.path();
      sibling.back() = last - 1;
      if (!procs.count(ProcessId(sibling))) return false;
    }
  }
  return true;
}

bool is_leaf(const ProcessMap& procs, const ProcessId& p) {
  // Children of p sort immediately after p.
  auto it = procs.upper_bound(p);
  return it == procs.end() || !p.is_prefix_of(it->first);
}

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Begin: return "begin";
    case Stage::Run: return "run";
    case Stage::End: return "end";
  }
  return "?";
}

std::string_view to_string(Direction d) { return d == Direction::Forward ? "forward" : "backward"; }
Direction flip(Direction d) {
  return d == Direction::Forward ? Direction::Backward : Direction::Forward;
}

std::string_view to_string(TransitionKind k) {
  switch (k) {
    case TransitionKind::Inst: return "inst";
    case TransitionKind::CallFork: return "fork";
    case TransitionKind::CallMerge: return "merge";
  }
  return "?";
}

std::string_view to_string(FaultKind k) {
  switch (k) {
    case FaultKind::Reversibility: return "reversibility";
    case FaultKind::AssertFailure: return "assert-failure";
    case FaultKind::NegativeHeapAddress: return "negative-heap-address";
  }
  return "?";
}

bool same_underlying(const TransitionLabel& a, const TransitionLabel& b) {
  return a.pid == b.pid && a.rd == b.rd && a.wt == b.wt;
}

ProgTransition ProgTransition::reversed() const {
  ProgTransition t = *this;
  t.label.dir = flip(t.label.dir);
  return t;
}

std::string ProgTransition::describe() const {
  std::string out = "(" + label.pid.display() + "," + to_string(label.rd) + "," +
                    to_string(label.wt) + ")";
  if (label.dir == Direction::Backward) out = "~" + out;
  return out + " b" + std::to_string(block) + " " + std::string(to_string(kind));
}

RuntimeFault::RuntimeFault(Fault fault)
    : std::runtime_error(std::string(to_string(fault.kind)) + ": " + fault.message),
      fault_(std::move(fault)) {}

// ---------------------------------------------------------------------------
// Expressions

namespace {

std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}

std::int64_t lookup(const Store& rho, const std::string& x) {
  auto it = rho.find(x);
  return it == rho.end() ? 0 : it->second;
}

std::uint64_t heap_address(const Store& rho, const std::string& index) {
  auto v = lookup(rho, index);
  if (v < 0)
    throw RuntimeFault({FaultKind::NegativeHeapAddress, {}, 0,
                        "M[" + index + "] with " + index + " = " + std::to_string(v)});
  return static_cast<std::uint64_t>(v);
}

std::int64_t heap_get(const Heap& sigma, std::uint64_t addr) {
  auto it = sigma.find(addr);
  return it == sigma.end() ? 0 : it->second;
}

void heap_set(Heap& sigma, std::uint64_t addr, std::int64_t v) {
  if (v == 0)
    sigma.erase(addr);
  else
    sigma[addr] = v;
}

}  // namespace

std::int64_t eval_expr(const Expr& e, const Store& rho, const Heap& sigma) {
  return std::visit(
      [&](const auto& n) -> std::int64_t {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Expr::Const>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, Expr::Var>) {
          return lookup(rho, n.name);
        } else if constexpr (std::is_same_v<T, Expr::HeapRef>) {
          return heap_get(sigma, heap_address(rho, n.index));
        } else if constexpr (std::is_same_v<T, Expr::Not>) {
          return eval_expr(*n.operand, rho, sigma) == 0 ? 1 : 0;
        } else {
          auto a = eval_expr(*n.lhs, rho, sigma);
          auto b = eval_expr(*n.rhs, rho, sigma);
          switch (n.op) {
            case BinaryOp::Add: return wrap_add(a, b);
            case BinaryOp::Sub: return wrap_sub(a, b);
            case BinaryOp::Xor: return a ^ b;
            case BinaryOp::Eq: return a == b;
            case BinaryOp::Ne: return a != b;
            case BinaryOp::Lt: return a < b;
            case BinaryOp::Le: return a <= b;
            case BinaryOp::Gt: return a > b;
            case BinaryOp::Ge: return a >= b;
            case BinaryOp::And: return (a != 0) && (b != 0);
            case BinaryOp::Or: return (a != 0) || (b != 0);
          }
          return 0;
        }
      },
      e.node);
}

// ---------------------------------------------------------------------------
// Machine

Machine::Machine(Program program) : program_(std::move(program)) {
  auto report = check_well_formed(program_);
  if (!report.ok) throw NotWellFormed(std::move(report));
  for (const auto& b : program_.blocks) {
    reads_.push_back(cril::read_set(b));
    writes_.push_back(cril::write_set(b));
    for (const auto& l : in_labels(b)) in_block_[l] = b.id;
    for (const auto& l : out_labels(b)) out_block_[l] = b.id;
    if (b.is_call()) continue;
    const auto& ib = b.instruction_block();
    if (ib.entry.kind == EntryPoint::Kind::Begin) begin_block_[ib.entry.first] = b.id;
    if (ib.exit.kind == ExitPoint::Kind::End) end_block_[ib.exit.first] = b.id;
  }
}

ProgramConfiguration Machine::initial_config() const {
  ProgramConfiguration c;
  for (const auto& v : program_.vars) c.rho[v] = 0;
  c.procs[ProcessId::root()] = {"main", Stage::Begin};
  return c;
}

bool Machine::is_final(const ProgramConfiguration& c) const {
  return c.procs.size() == 1 &&
         c.procs.begin()->first.is_root() &&
         c.procs.begin()->second == ProcessConfiguration{"main", Stage::End};
}

bool Machine::is_initial(const ProgramConfiguration& c) const { return c == initial_config(); }

const BasicBlock* Machine::find(const std::map<Label, BlockId>& index, const Label& l) const {
  auto it = index.find(l);
  return it == index.end() ? nullptr : &program_.block(it->second);
}

ProgTransition Machine::make(const ProcessId& p, Direction d, TransitionKind k, BlockId b) const {
  ProgTransition t;
  t.label.pid = p;
  t.label.dir = d;
  t.kind = k;
  t.block = b;
  if (k == TransitionKind::Inst) {
    t.label.rd = read_set(b);
    t.label.wt = write_set(b);
  }
  return t;
}

bool Machine::instruction_ready(const InstructionBlock& ib, const Store& rho,
                                Direction dir) const {
  // V takes 0 to 1 forwards, P takes 1 to 0; backwards they swap roles.
  if (auto v = std::get_if<Instruction::V>(&ib.inst.node))
    return lookup(rho, v->var) == (dir == Direction::Forward ? 0 : 1);
  if (auto p = std::get_if<Instruction::P>(&ib.inst.node))
    return lookup(rho, p->var) == (dir == Direction::Forward ? 1 : 0);
  return true;
}

namespace {

// The children p.1 .. p.n of a process that executed `call`, if exactly
// those are active below p and each is at the given stage of its target.
bool children_at(const ProcessMap& procs, const ProcessId& p, const CallStatement& call,
                 Stage stage) {
  std::size_t seen = 0;
  for (auto it = procs.upper_bound(p); it != procs.end() && p.is_prefix_of(it->first); ++it) {
    const auto& path = it->first.path();
    if (path.size() != p.path().size() + 1) return false;
    auto i = path.back();
    if (i < 1 || i > call.targets.size()) return false;
    if (!(it->second == ProcessConfiguration{call.targets[i - 1], stage})) return false;
    ++seen;
  }
  return seen == call.targets.size();
}

}  // namespace

std::optional<ProgTransition> Machine::forward_for(const ProgramConfiguration& c,
                                                   const ProcessId& p,
                                                   std::vector<Fault>* faults) const {
  auto it = c.procs.find(p);
  if (it == c.procs.end()) return std::nullopt;
  const auto& pc = it->second;

  if (!is_leaf(c.procs, p)) {
    // Waiting on a call: merge once every child has ended.
    const BasicBlock* b = find(out_block_, pc.label);
    if (pc.stage != Stage::Run || !b || !b->is_call()) return std::nullopt;
    if (!children_at(c.procs, p, b->call(), Stage::End)) return std::nullopt;
    return make(p, Direction::Forward, TransitionKind::CallMerge, b->id);
  }

  const BasicBlock* b = nullptr;
  if (pc.stage == Stage::Begin)
    b = find(begin_block_, pc.label);
  else if (pc.stage == Stage::Run)
    b = find(in_block_, pc.label);
  if (!b) return std::nullopt;

  if (b->is_call()) return make(p, Direction::Forward, TransitionKind::CallFork, b->id);

  const auto& ib = b->instruction_block();
  if (ib.entry.kind == EntryPoint::Kind::Cond) {
    bool truth = eval_expr(*ib.entry.cond, c.rho, c.sigma) != 0;
    bool via_first = pc.label == ib.entry.first;
    if (truth != via_first) {
      if (faults)
        faults->push_back({FaultKind::Reversibility, p, b->id,
                           "entry condition of b" + std::to_string(b->id) + " is " +
                               (truth ? "true" : "false") + " but control arrived at '" +
                               pc.label + "'"});
      return std::nullopt;
    }
  }
  if (!instruction_ready(ib, c.rho, Direction::Forward)) return std::nullopt;
  return make(p, Direction::Forward, TransitionKind::Inst, b->id);
}

std::optional<ProgTransition> Machine::backward_for(const ProgramConfiguration& c,
                                                    const ProcessId& p,
                                                    std::vector<Fault>* faults) const {
  auto it = c.procs.find(p);
  if (it == c.procs.end()) return std::nullopt;
  const auto& pc = it->second;

  if (!is_leaf(c.procs, p)) {
    // Undo a fork once every child is back at its begin point.
    const BasicBlock* b = find(out_block_, pc.label);
    if (pc.stage != Stage::Run || !b || !b->is_call()) return std::nullopt;
    if (!children_at(c.procs, p, b->call(), Stage::Begin)) return std::nullopt;
    return make(p, Direction::Backward, TransitionKind::CallFork, b->id);
  }

  const BasicBlock* b = nullptr;
  if (pc.stage == Stage::End)
    b = find(end_block_, pc.label);
  else if (pc.stage == Stage::Run)
    b = find(out_block_, pc.label);
  if (!b) return std::nullopt;

  if (b->is_call()) return make(p, Direction::Backward, TransitionKind::CallMerge, b->id);

  const auto& ib = b->instruction_block();
  if (ib.exit.kind == ExitPoint::Kind::Cond) {
    bool truth = eval_expr(*ib.exit.cond, c.rho, c.sigma) != 0;
    bool via_first = pc.label == ib.exit.first;
    if (truth != via_first) {
      if (faults)
        faults->push_back({FaultKind::Reversibility, p, b->id,
                           "exit condition of b" + std::to_string(b->id) + " is " +
                               (truth ? "true" : "false") + " but control left through '" +
                               pc.label + "'"});
      return std::nullopt;
    }
  }
  if (!instruction_ready(ib, c.rho, Direction::Backward)) return std::nullopt;
  return make(p, Direction::Backward, TransitionKind::Inst, b->id);
}

std::optional<ProgTransition> Machine::enabled_for(const ProgramConfiguration& c,
                                                   const ProcessId& p, Direction dir,
                                                   std::vector<Fault>* faults) const {
  try {
    return dir == Direction::Forward ? forward_for(c, p, faults) : backward_for(c, p, faults);
  } catch (const RuntimeFault& rf) {
    // A guard that cannot be evaluated blocks the step.
    if (faults) {
      Fault f = rf.fault();
      f.pid = p;
      faults->push_back(std::move(f));
    }
    return std::nullopt;
  }
}

std::vector<ProgTransition> Machine::enabled(const ProgramConfiguration& c, Direction dir,
                                             std::vector<Fault>* faults) const {
  std::vector<ProgTransition> out;
  for (const auto& [pid, pc] : c.procs)
    if (auto t = enabled_for(c, pid, dir, faults)) out.push_back(std::move(*t));
  return out;
}

namespace {

struct Cell {
  bool heap;
  std::string var;
  std::uint64_t addr;
};

Cell resolve(const LeftValue& lv, const Store& rho) {
  if (lv.is_heap()) return {true, {}, heap_address(rho, lv.name)};
  return {false, lv.name, 0};
}

std::int64_t read_cell(const Cell& c, const ProgramConfiguration& cfg) {
  return c.heap ? heap_get(cfg.sigma, c.addr) : lookup(cfg.rho, c.var);
}

void write_cell(const Cell& c, ProgramConfiguration& cfg, std::int64_t v) {
  if (c.heap)
    heap_set(cfg.sigma, c.addr, v);
  else
    cfg.rho[c.var] = v;
}

void run_instruction(const Instruction& inst, ProgramConfiguration& cfg, Direction dir,
                     const ProcessId& p, BlockId b) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Instruction::Update>) {
          Cell cell = resolve(n.target, cfg.rho);
          auto delta = eval_expr(*n.value, cfg.rho, cfg.sigma);
          auto old = read_cell(cell, cfg);
          UpdateOp op = n.op;
          if (dir == Direction::Backward && op != UpdateOp::Xor)
            op = op == UpdateOp::Add ? UpdateOp::Sub : UpdateOp::Add;
          std::int64_t next = op == UpdateOp::Add   ? wrap_add(old, delta)
                              : op == UpdateOp::Sub ? wrap_sub(old, delta)
                                                    : old ^ delta;
          write_cell(cell, cfg, next);
        } else if constexpr (std::is_same_v<T, Instruction::Exchange>) {
          // Both addresses are resolved before either cell is written.
          Cell a = resolve(n.lhs, cfg.rho);
          Cell c = resolve(n.rhs, cfg.rho);
          auto va = read_cell(a, cfg);
          auto vc = read_cell(c, cfg);
          write_cell(a, cfg, vc);
          write_cell(c, cfg, va);
        } else if constexpr (std::is_same_v<T, Instruction::V>) {
          cfg.rho[n.var] = dir == Direction::Forward ? 1 : 0;
        } else if constexpr (std::is_same_v<T, Instruction::P>) {
          cfg.rho[n.var] = dir == Direction::Forward ? 0 : 1;
        } else if constexpr (std::is_same_v<T, Instruction::Assert>) {
          if (eval_expr(*n.cond, cfg.rho, cfg.sigma) == 0)
            throw RuntimeFault({FaultKind::AssertFailure, p, b,
                                "assert " + render_expr(*n.cond) + " failed in b" +
                                    std::to_string(b)});
        }
      },
      inst.node);
}

}  // namespace

ProgramConfiguration Machine::apply(const ProgramConfiguration& c, const ProgTransition& t) const {
  ProgramConfiguration next = c;
  const ProcessId& p = t.pid();
  const BasicBlock& b = program_.block(t.block);

  if (t.kind != TransitionKind::Inst) {
    const auto& call = b.call();
    bool fork_forward = t.kind == TransitionKind::CallFork && t.dir() == Direction::Forward;
    bool merge_backward = t.kind == TransitionKind::CallMerge && t.dir() == Direction::Backward;
    if (fork_forward || merge_backward) {
      Stage stage = fork_forward ? Stage::Begin : Stage::End;
      for (std::uint32_t i = 1; i <= call.targets.size(); ++i)
        next.procs[p.child(i)] = {call.targets[i - 1], stage};
      next.procs[p] = {call.exit, Stage::Run};
    } else {
      for (std::uint32_t i = 1; i <= call.targets.size(); ++i) next.procs.erase(p.child(i));
      next.procs[p] = {t.kind == TransitionKind::CallFork ? call.entry : call.exit, Stage::Run};
    }
    return next;
  }

  const auto& ib = b.instruction_block();
  try {
    run_instruction(ib.inst, next, t.dir(), p, b.id);
    if (t.dir() == Direction::Forward) {
      switch (ib.exit.kind) {
        case ExitPoint::Kind::Uncond: next.procs[p] = {ib.exit.first, Stage::Run}; break;
        case ExitPoint::Kind::End: next.procs[p] = {ib.exit.first, Stage::End}; break;
        case ExitPoint::Kind::Cond: {
          bool truth = eval_expr(*ib.exit.cond, next.rho, next.sigma) != 0;
          next.procs[p] = {truth ? ib.exit.first : ib.exit.second, Stage::Run};
          break;
        }
      }
    } else {
      switch (ib.entry.kind) {
        case EntryPoint::Kind::Uncond: next.procs[p] = {ib.entry.first, Stage::Run}; break;
        case EntryPoint::Kind::Begin: next.procs[p] = {ib.entry.first, Stage::Begin}; break;
        case EntryPoint::Kind::Cond: {
          bool truth = eval_expr(*ib.entry.cond, next.rho, next.sigma) != 0;
          next.procs[p] = {truth ? ib.entry.first : ib.entry.second, Stage::Run};
          break;
        }
      }
    }
  } catch (const RuntimeFault& rf) {
    Fault f = rf.fault();
    f.pid = p;
    f.block = b.id;
    throw RuntimeFault(std::move(f));
  }
  return next;
}

}  // namespace cril
