// cril: command-line front end.
//
//   cril check FILE            well-formedness report
//   cril run FILE              run or replay, printing the store after each step
//   cril explore FILE          explore the state space and check the axioms
//   cril dag FILE              annotation DAG after a schedule, as DOT or JSON
//   cril serve FILE            HTTP debug service
//   cril render FILE           pretty-print
//
// Exit codes: 0 ok, 1 parse/well-formedness/usage error or failed check,
// 2 deadlock, 3 assertion failure or runtime fault, 4 replay move rejected.

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "cril/server.hpp"
#include "cril/verify.hpp"

using namespace cril;

namespace {

enum Exit { Ok = 0, Invalid = 1, Deadlock = 2, Crash = 3, ReplayRejected = 4 };

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

/// Loads and checks FILE; prints diagnostics and returns nullopt on failure.
std::optional<Program> load_checked(const std::string& path) {
  try {
    Program p = load_program(path);
    auto report = check_well_formed(p);
    for (const auto& w : report.warnings) std::cerr << path << ": warning: " << w << "\n";
    if (!report.ok) {
      std::cerr << path << ": not well-formed\n" << report.to_text();
      return std::nullopt;
    }
    return p;
  } catch (const ParseError& e) {
    std::cerr << path << ":" << e.line() << ": " << e.detail() << "\n";
  } catch (const std::exception& e) {
    std::cerr << path << ": " << e.what() << "\n";
  }
  return std::nullopt;
}

/// Left-justifies by code points so "ε" takes one column.
std::string pad(const std::string& s, std::size_t width) {
  std::size_t cols = 0;
  for (unsigned char ch : s)
    if ((ch & 0xC0) != 0x80) ++cols;
  return s + std::string(width > cols ? width - cols : 1, ' ');
}

/// Store table: the initial
/// store, then one row per step with the DAG node the step adds (or, going
/// backward, removes).
class StoreTable {
 public:
  StoreTable(std::ostream& os, const Program& p) : os_(os), vars_(p.vars.begin(), p.vars.end()) {
    os_ << std::left << std::setw(6) << "step" << std::setw(10) << "node" << std::setw(8) << "block";
    for (const auto& v : vars_) os_ << std::right << std::setw(8) << v;
    os_ << "  heap\n";
  }

  void initial(const ProgramConfiguration& c) { row("-", "-", "-", c); }

  void step(const ProgTransition& t, const ProgramConfiguration& after) {
    auto& n = next_index_[t.pid()];
    std::int64_t index = t.dir() == Direction::Forward ? n++ : --n;
    std::string node = "(" + t.pid().display() + "," + std::to_string(index) + ")";
    std::string block = (t.dir() == Direction::Backward ? "~b" : "b") + std::to_string(t.block);
    row(std::to_string(++steps_), node, block, after);
  }

 private:
  void row(const std::string& step, const std::string& node, const std::string& block,
           const ProgramConfiguration& c) {
    os_ << pad(step, 6) << pad(node, 10) << pad(block, 8);
    for (const auto& v : vars_) os_ << std::right << std::setw(8) << c.rho.at(v);
    os_ << "  ";
    if (c.sigma.empty()) os_ << "-";
    for (const auto& [a, v] : c.sigma) os_ << "M[" << a << "]=" << v << " ";
    os_ << "\n";
  }

  std::ostream& os_;
  std::vector<std::string> vars_;
  std::map<ProcessId, std::int64_t> next_index_;
  std::size_t steps_ = 0;
};

std::unique_ptr<Scheduler> make_scheduler(const std::string& name, std::uint64_t seed) {
  if (name == "round-robin") return std::make_unique<RoundRobinScheduler>();
  return std::make_unique<RandomScheduler>(seed);
}

int exit_for(RunOutcome o) {
  switch (o) {
    case RunOutcome::Terminated:
    case RunOutcome::StepLimit: return Ok;
    case RunOutcome::Blocked: return Deadlock;
    case RunOutcome::AssertFailed:
    case RunOutcome::Fault: return Crash;
  }
  return Invalid;
}

struct RunOptions {
  std::string file;
  std::uint64_t seed = 0;
  std::string schedule = "random";
  std::vector<std::string> replay;
  std::string dir = "forward";
  bool dir_given = false;
  std::size_t max_steps = 10000;
  bool no_dag = false;
  std::string trace_out;
  bool json_out = false;
};

int cmd_check(const std::string& file, bool as_json) {
  try {
    Program p = load_program(file);
    auto report = check_well_formed(p);
    if (as_json) {
      std::cout << to_json(report).dump(2) << "\n";
    } else {
      std::cout << (report.ok ? "ok" : "not well-formed") << ": " << p.blocks.size() << " blocks, "
                << process_blocks(p).classes.size() << " process blocks\n"
                << report.to_text();
    }
    return report.ok ? Ok : Invalid;
  } catch (const ParseError& e) {
    std::cerr << file << ":" << e.line() << ": " << e.detail() << "\n";
  } catch (const std::exception& e) {
    std::cerr << file << ": " << e.what() << "\n";
  }
  return Invalid;
}

int cmd_run(const RunOptions& o) {
  auto program = load_checked(o.file);
  if (!program) return Invalid;
  Lts lts(*program);
  Direction dir = direction_from_string(o.dir);
  bool schedule_run = o.replay.empty() || o.dir_given;
  std::vector<MoveRequest> moves;
  for (const auto& path : o.replay) {
    auto more = trace_from_json(read_json_file(path));
    moves.insert(moves.end(), more.begin(), more.end());
  }
  auto sched = make_scheduler(o.schedule, o.seed);

  std::ostream& table_out = o.json_out ? std::cerr : std::cout;
  StoreTable table(table_out, *program);
  std::vector<ProgTransition> trace;
  ProgramConfiguration final_config;
  std::string outcome = "terminated";
  int code = Ok;

  if (o.no_dag) {
    const Machine& m = lts.machine();
    ProgramConfiguration c = m.initial_config();
    table.initial(c);
    auto rep = replay_prog(m, c, moves);
    for (const auto& t : rep.applied) table.step(t, c = m.apply(c, t));
    trace = rep.applied;
    if (rep.error) {
      std::cerr << "replay stopped at " << *rep.error << "\n";
      outcome = "replay-rejected";
      code = ReplayRejected;
    } else if (schedule_run) {
      auto r = run_prog(m, c, *sched, dir, o.max_steps);
      for (const auto& t : r.trace) table.step(t, c = m.apply(c, t));
      trace.insert(trace.end(), r.trace.begin(), r.trace.end());
      outcome = to_string(r.outcome);
      if (r.fault) std::cerr << "fault: " << r.fault->message << "\n";
      code = exit_for(r.outcome);
    }
    final_config = c;
  } else {
    CombinedState s = lts.initial_state();
    table.initial(s.config);
    auto rep = replay(lts, s, moves);
    for (const auto& t : rep.applied) table.step(t, (s = lts.step(s, t)).config);
    trace = rep.applied;
    if (rep.error) {
      std::cerr << "replay stopped at " << *rep.error << "\n";
      outcome = "replay-rejected";
      code = ReplayRejected;
    } else if (schedule_run) {
      auto r = run(lts, s, *sched, dir, o.max_steps);
      for (const auto& t : r.trace) table.step(t, (s = lts.step(s, t)).config);
      trace.insert(trace.end(), r.trace.begin(), r.trace.end());
      outcome = to_string(r.outcome);
      if (r.fault) std::cerr << "fault: " << r.fault->message << "\n";
      code = exit_for(r.outcome);
    }
    final_config = s.config;
  }

  table_out << "outcome: " << outcome << " after " << trace.size() << " steps\n";
  if (!o.trace_out.empty()) write_text_file(o.trace_out, trace_to_json(trace).dump(1) + "\n");
  if (o.json_out)
    std::cout << json{{"outcome", outcome}, {"trace", trace_to_json(trace)}, {"final", to_json(final_config)}}.dump(2)
              << "\n";
  return code;
}

struct ExploreOptions {
  std::string file;
  std::size_t max_states = 200000;
  std::size_t max_depth = 1000;
  std::string checks = "sp,bti,wf,cpi,ire,cc,cs,rt,bt";
  std::size_t cs_bound = 12;
  std::string json_path;
};

json counterexample_json(const LtsGraph& g, const Counterexample& c) {
  std::vector<CombinedTransition> witness, prefix;
  for (auto e : c.edges) witness.push_back(g.edges[e].t);
  for (auto e : path_to(g, c.state)) prefix.push_back(g.edges[e].t);
  return {{"message", c.message},
          {"state", c.state},
          {"witness", trace_to_json(witness)},
          {"replay_to_state", trace_to_json(prefix)}};
}

int cmd_explore(const ExploreOptions& o) {
  auto program = load_checked(o.file);
  if (!program) return Invalid;
  Lts lts(*program);
  auto g = explore(lts, o.max_states, o.max_depth);
  std::set<std::string> want;
  std::stringstream ss(o.checks);
  for (std::string item; std::getline(ss, item, ',');) want.insert(item);

  std::cout << o.file << ": " << g.size() << " states, " << g.edges.size() << " transitions, "
            << terminal_states(g).size() << " terminal" << (g.truncated ? " (truncated)" : "") << "\n";
  for (const auto& [s, f] : g.faults)
    std::cout << "fault at s" << s << ": pid " << f.pid.display() << " b" << f.block << ": " << f.message << "\n";

  std::vector<PropertyReport> reports;
  std::optional<EventPartition> events;
  auto need_events = [&]() -> const EventPartition& {
    if (!events) events = compute_events(g);
    return *events;
  };
  if (want.count("sp")) reports.push_back(check_square_property(g));
  if (want.count("bti")) reports.push_back(check_bti(g));
  if (want.count("wf")) reports.push_back(check_wf(g));
  if (want.count("cpi")) reports.push_back(check_cpi(g));
  if (want.count("ire")) reports.push_back(check_ire(g, need_events()));
  if (want.count("cc")) reports.push_back(check_causal_consistency(g));
  if (want.count("cs") || want.count("cl"))
    reports.push_back(check_causal_safety(g, need_events(), o.cs_bound, want.count("cl") > 0));
  if (want.count("rt")) reports.push_back(check_round_trip(g));
  if (want.count("bt")) reports.push_back(check_backward_termination(g));
  if (want.count("wsr")) reports.push_back(check_write_subset_read(*program));

  bool all_ok = true;
  json props = json::array();
  for (const auto& r : reports) {
    all_ok = all_ok && r.ok;
    std::cout << std::left << std::setw(22) << r.property << (r.ok ? "ok" : "FAILED") << "  (" << r.checked
              << " checked" << (r.note.empty() ? "" : "; " + r.note) << ")\n";
    if (r.counterexample) std::cout << "  counterexample: " << r.counterexample->message << "\n";
    json jr = {{"property", r.property}, {"ok", r.ok}, {"checked", r.checked}, {"note", r.note}};
    jr["counterexample"] = r.counterexample ? counterexample_json(g, *r.counterexample) : json(nullptr);
    props.push_back(std::move(jr));
  }
  if (g.truncated) std::cout << "warning: bounds hit, checks cover the explored fragment only\n";
  if (!o.json_path.empty()) {
    json faults = json::array();
    for (const auto& [s, f] : g.faults)
      faults.push_back({{"state", s}, {"pid", f.pid.to_string()}, {"block", f.block}, {"message", f.message}});
    json report = {{"file", o.file},
                   {"states", g.size()},
                   {"transitions", g.edges.size()},
                   {"terminal_states", terminal_states(g).size()},
                   {"truncated", g.truncated},
                   {"faults", faults},
                   {"properties", props}};
    write_text_file(o.json_path, report.dump(2) + "\n");
  }
  return all_ok ? Ok : Invalid;
}

int cmd_dag(const std::string& file, const std::string& replay_path, std::uint64_t seed,
            const std::string& schedule, const std::string& format) {
  auto program = load_checked(file);
  if (!program) return Invalid;
  Lts lts(*program);
  CombinedState s = lts.initial_state();
  if (!replay_path.empty()) {
    auto rep = replay(lts, s, trace_from_json(read_json_file(replay_path)));
    if (rep.error) {
      std::cerr << "replay stopped at " << *rep.error << "\n";
      return ReplayRejected;
    }
    s = rep.state;
  } else {
    auto sched = make_scheduler(schedule, seed);
    s = run(lts, s, *sched, Direction::Forward, 100000).final;
  }
  if (format == "json")
    std::cout << to_json(s.dag).dump(2) << "\n";
  else
    std::cout << to_dot(s.dag);
  return Ok;
}

DebugServer* running_server = nullptr;

int cmd_serve(const std::string& file, const std::string& host, int port, std::uint64_t seed) {
  auto program = load_checked(file);
  if (!program) return Invalid;
  if (port < 0) {
    const char* env = std::getenv("CRIL_PORT");
    port = env ? std::atoi(env) : 8080;
  }
  DebugSession session(*program, seed);
  DebugServer server(session);
  int bound = server.bind(host, port);
  if (bound < 0) {
    std::cerr << "cannot bind " << host << ":" << port << "\n";
    return Invalid;
  }
  std::cout << "serving " << file << " on http://" << host << ":" << bound << "/api/state" << std::endl;
  running_server = &server;
  std::signal(SIGINT, [](int) {
    if (running_server) running_server->stop();
  });
  server.listen();
  running_server = nullptr;
  return Ok;
}

int cmd_render(const std::string& file) {
  try {
    std::cout << render_program(load_program(file));
    return Ok;
  } catch (const ParseError& e) {
    std::cerr << file << ":" << e.line() << ": " << e.detail() << "\n";
  } catch (const std::exception& e) {
    std::cerr << file << ": " << e.what() << "\n";
  }
  return Invalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CRIL toolchain: check, run, explore and debug reversible concurrent programs"};
  app.require_subcommand(1);

  std::string file;
  bool check_json = false;
  auto* check = app.add_subcommand("check", "Report well-formedness");
  check->add_option("file", file, "CRIL source")->required();
  check->add_flag("--json", check_json, "Print the report as JSON");

  RunOptions ro;
  auto* runc = app.add_subcommand("run", "Run or replay, printing the store after each step");
  runc->add_option("file", ro.file, "CRIL source")->required();
  runc->add_option("--seed", ro.seed, "Seed for the random scheduler");
  runc->add_option("--schedule", ro.schedule, "random or round-robin")
      ->check(CLI::IsMember({"random", "round-robin"}));
  runc->add_option("--replay", ro.replay, "Trace JSON to replay first; repeat to chain files");
  auto* dir_opt = runc->add_option("--dir", ro.dir, "forward or backward")
                      ->check(CLI::IsMember({"forward", "backward"}));
  runc->add_option("--max-steps", ro.max_steps, "Step limit for the scheduled part");
  runc->add_flag("--no-dag", ro.no_dag, "Use the bare program semantics, without causality control");
  runc->add_option("--trace-out", ro.trace_out, "Write the executed trace as JSON");
  runc->add_flag("--json", ro.json_out, "Print the trace and final configuration as JSON");

  ExploreOptions eo;
  auto* exp = app.add_subcommand("explore", "Explore the state space and check the axioms");
  exp->add_option("file", eo.file, "CRIL source")->required();
  exp->add_option("--max-states", eo.max_states, "State bound");
  exp->add_option("--max-depth", eo.max_depth, "Depth bound");
  exp->add_option("--check", eo.checks, "Comma list of sp,bti,wf,cpi,ire,cc,cs,cl,rt,bt,wsr");
  exp->add_option("--cs-bound", eo.cs_bound, "Path length bound for causal safety");
  exp->add_option("--json", eo.json_path, "Write the report as JSON to this file");

  std::string dag_replay, dag_format = "dot", dag_schedule = "random";
  std::uint64_t dag_seed = 0;
  auto* dag = app.add_subcommand("dag", "Print the annotation DAG after a schedule");
  dag->add_option("file", file, "CRIL source")->required();
  dag->add_option("--replay", dag_replay, "Trace JSON giving the schedule");
  dag->add_option("--seed", dag_seed, "Seed when no replay is given");
  dag->add_option("--schedule", dag_schedule, "random or round-robin")
      ->check(CLI::IsMember({"random", "round-robin"}));
  dag->add_option("--format", dag_format, "dot or json")->check(CLI::IsMember({"dot", "json"}));

  std::string host = "127.0.0.1";
  int port = -1;
  std::uint64_t serve_seed = 0;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP debug API");
  serve->add_option("file", file, "CRIL source")->required();
  serve->add_option("--host", host, "Address to bind");
  serve->add_option("--port", port, "Port (default $CRIL_PORT or 8080)");
  serve->add_option("--seed", serve_seed, "Default seed for /api/run");

  auto* render = app.add_subcommand("render", "Pretty-print a program");
  render->add_option("file", file, "CRIL source")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*check) return cmd_check(file, check_json);
    if (*runc) {
      ro.dir_given = dir_opt->count() > 0;
      return cmd_run(ro);
    }
    if (*exp) return cmd_explore(eo);
    if (*dag) return cmd_dag(file, dag_replay, dag_seed, dag_schedule, dag_format);
    if (*serve) return cmd_serve(file, host, port, serve_seed);
    if (*render) return cmd_render(file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Invalid;
  }
  return Invalid;
}
