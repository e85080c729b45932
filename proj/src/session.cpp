#include "cril/session.hpp"

#include <cassert>
#include <cstdio>
#include <mutex>
#include <random>

namespace cril {

namespace {

ApiResponse ok(json body) { return {200, std::move(body), std::nullopt, "application/json"}; }

ApiResponse error(int status, std::string reason, std::string message, json extra = json::object()) {
  extra["error"] = std::move(message);
  extra["reason"] = std::move(reason);
  return {status, std::move(extra), std::nullopt, "application/json"};
}

/// Nodes that have to be reversed before the newest node of p can go:
/// everything hanging off it, and the current writers its reads no longer
/// point at.
std::string fresh_id() {
  std::random_device rd;
  std::uint64_t v = (std::uint64_t{rd()} << 32) ^ rd();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::set<DagNode> blockers(const AnnotationDag& a, const ProcessId& p) {
  std::set<DagNode> out;
  auto n = a.max_index(p);
  if (n < 0) return out;
  auto v = DagNode::of(p, n);
  for (const auto* edges : {&a.read_edges(), &a.write_edges()})
    for (const auto& e : *edges)
      if (e.src == v) out.insert(e.dst);
  for (const auto& e : a.incoming_reads(v))
    if (a.last_write(e.label) != e.src) out.insert(a.last_write(e.label));
  return out;
}

json node_list(const std::set<DagNode>& vs) {
  json out = json::array();
  for (const auto& v : vs) out.push_back(to_json(v));
  return out;
}

}  // namespace

DebugSession::DebugSession(Program program, std::uint64_t seed)
    : id_(fresh_id()), lts_(std::make_shared<const Lts>(std::move(program))), seed_(seed) {
  current_ = lts_->initial_state();
}

ApiResponse DebugSession::handle(const ApiRequest& r) {
  try {
    if (r.method == "GET") {
      std::shared_lock lock(mutex_);
      if (r.path == "/api/program") return get_program();
      if (r.path == "/api/state") return get_state();
      if (r.path == "/api/dag") return get_dag(r);
      if (r.path == "/api/transitions") return get_transitions(r);
      if (r.path == "/api/history") return get_history();
      return error(404, "not-found", "no such endpoint: GET " + r.path);
    }
    if (r.method != "POST") return error(405, "method", "unsupported method " + r.method);

    json body = r.body.empty() ? json::object() : json::parse(r.body, nullptr, false);
    if (body.is_discarded() || !body.is_object())
      return error(400, "bad-request", "request body must be a JSON object");

    std::unique_lock lock(mutex_);
    if (body.contains("version") && body["version"].get<std::uint64_t>() != version_)
      return error(409, "conflict", "session changed since version " + body["version"].dump(),
                   {{"version", version_}});
    if (r.path == "/api/step") return post_step(body);
    if (r.path == "/api/run") return post_run(body);
    if (r.path == "/api/reset") return post_reset();
    if (r.path == "/api/scrub") return post_scrub(body);
    return error(404, "not-found", "no such endpoint: POST " + r.path);
  } catch (const json::exception& e) {
    return error(400, "bad-request", e.what());
  } catch (const std::invalid_argument& e) {
    return error(400, "bad-request", e.what());
  }
}

json DebugSession::state_summary() const {
  return {{"session", id_},
          {"version", version_},
          {"hash", state_hash(current_)},
          {"cursor", cursor_},
          {"history_length", history_.size()},
          {"final", lts_->is_final(current_)},
          {"initial", lts_->is_initial(current_)},
          {"config", to_json(current_.config)},
          {"removable", node_list(lts_->removable_nodes(current_))},
          {"seed", seed_}};
}

json DebugSession::enabled_json(Direction dir) const {
  json out = json::array();
  auto ts = lts_->enabled(current_, dir);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    json t = to_json(ts[i]);
    t["index"] = i;
    out.push_back(std::move(t));
  }
  return out;
}

json DebugSession::blocked_json() const {
  json out = json::array();
  for (const auto& [p, pc] : current_.config.procs) {
    std::optional<CombinedTransition> t;
    if (lts_->check(current_, p, Direction::Backward, &t) != StepVerdict::NotEnabledDag) continue;
    out.push_back({{"pid", p.to_string()},
                   {"block", t->block},
                   {"reason", to_string(StepVerdict::NotEnabledDag)},
                   {"must_reverse_first", node_list(blockers(current_.dag, p))}});
  }
  return out;
}

ApiResponse DebugSession::get_program() const {
  json j = program_to_json(lts_->program());
  j["well_formed"] = to_json(check_well_formed(lts_->program()));
  return ok(std::move(j));
}

ApiResponse DebugSession::get_state() const { return ok(state_summary()); }

ApiResponse DebugSession::get_dag(const ApiRequest& r) const {
  auto it = r.query.find("format");
  std::string format = it == r.query.end() ? "json" : it->second;
  if (format == "dot") return {200, json(), to_dot(current_.dag), "text/vnd.graphviz"};
  if (format != "json") return error(400, "bad-request", "format must be json or dot");
  json j = to_json(current_.dag);
  j["version"] = version_;
  return ok(std::move(j));
}

ApiResponse DebugSession::get_transitions(const ApiRequest& r) const {
  auto it = r.query.find("dir");
  std::string dir = it == r.query.end() ? "both" : it->second;
  if (dir != "forward" && dir != "backward" && dir != "both")
    return error(400, "bad-request", "dir must be forward, backward or both");
  json j = {{"version", version_}};
  if (dir != "backward") j["forward"] = enabled_json(Direction::Forward);
  if (dir != "forward") {
    j["backward"] = enabled_json(Direction::Backward);
    j["blocked"] = blocked_json();
  }
  return ok(std::move(j));
}

ApiResponse DebugSession::get_history() const {
  return ok({{"trace", trace_to_json(history_)}, {"cursor", cursor_}, {"version", version_}});
}

void DebugSession::commit(CombinedState next, std::vector<CombinedTransition> moves) {
  history_.resize(cursor_);
  history_.insert(history_.end(), moves.begin(), moves.end());
  cursor_ = history_.size();
  current_ = std::move(next);
  ++version_;
  assert(replay_matches_locked());
}

ApiResponse DebugSession::post_step(const json& body) {
  std::optional<CombinedTransition> t;
  if (body.contains("index")) {
    auto dir = direction_from_string(body.value("dir", std::string("forward")));
    auto ts = lts_->enabled(current_, dir);
    auto i = body["index"].get<std::size_t>();
    if (i >= ts.size())
      return error(400, "bad-index",
                   "index " + std::to_string(i) + " out of range; " + std::to_string(ts.size()) +
                       " " + std::string(to_string(dir)) + " transitions are enabled");
    t = ts[i];
  } else {
    auto move = move_from_json(body);
    auto verdict = lts_->check(current_, move.pid, move.dir, &t);
    if (verdict == StepVerdict::NotEnabledProg || !resolve(*lts_, current_, move))
      return error(400, std::string(to_string(StepVerdict::NotEnabledProg)),
                   "process " + move.pid.display() + " cannot move " +
                       std::string(to_string(move.dir)) + " in the program semantics");
    if (verdict == StepVerdict::NotEnabledDag)
      return error(400, std::string(to_string(verdict)),
                   "the annotation DAG forbids reversing process " + move.pid.display() + " now",
                   {{"must_reverse_first", node_list(blockers(current_.dag, move.pid))}});
  }

  CombinedState next;
  try {
    next = lts_->step(current_, *t);
  } catch (const RuntimeFault& f) {
    return error(400, std::string(to_string(f.fault().kind)), f.what());
  }
  DagDelta add = added(current_.dag, next.dag);
  DagDelta removed = added(next.dag, current_.dag);
  commit(std::move(next), {*t});
  return ok({{"transition", to_json(*t)},
             {"delta", {{"added", to_json(add)}, {"removed", to_json(removed)}}},
             {"state", state_summary()},
             {"enabled",
              {{"forward", enabled_json(Direction::Forward)},
               {"backward", enabled_json(Direction::Backward)}}}});
}

ApiResponse DebugSession::post_run(const json& body) {
  auto dir = direction_from_string(body.value("dir", std::string("forward")));
  auto steps = body.value("steps", std::size_t{1000});
  auto seed = body.value("seed", seed_);
  auto schedule = body.value("schedule", std::string("random"));
  std::unique_ptr<Scheduler> sched;
  if (schedule == "random")
    sched = std::make_unique<RandomScheduler>(seed);
  else if (schedule == "round-robin")
    sched = std::make_unique<RoundRobinScheduler>();
  else
    return error(400, "bad-request", "schedule must be random or round-robin");

  auto result = run(*lts_, current_, *sched, dir, steps);
  json applied = trace_to_json(result.trace);
  json j = {{"outcome", to_string(result.outcome)}, {"applied", applied}};
  if (result.fault) j["fault"] = result.fault->message;
  commit(std::move(result.final), std::move(result.trace));
  j["state"] = state_summary();
  return ok(std::move(j));
}

ApiResponse DebugSession::post_reset() {
  current_ = lts_->initial_state();
  history_.clear();
  cursor_ = 0;
  ++version_;
  return ok(state_summary());
}

ApiResponse DebugSession::post_scrub(const json& body) {
  auto position = body.at("position").get<std::size_t>();
  if (position > history_.size())
    return error(400, "bad-position",
                 "position " + std::to_string(position) + " is past the history length " +
                     std::to_string(history_.size()));
  CombinedState s = lts_->initial_state();
  for (std::size_t i = 0; i < position; ++i) s = lts_->step(s, history_[i]);
  current_ = std::move(s);
  cursor_ = position;
  ++version_;
  assert(replay_matches_locked());
  return ok(state_summary());
}

bool DebugSession::replay_matches() const {
  std::shared_lock lock(mutex_);
  return replay_matches_locked();
}

bool DebugSession::replay_matches_locked() const {
  CombinedState s = lts_->initial_state();
  try {
    for (std::size_t i = 0; i < cursor_; ++i) s = lts_->step(s, history_[i]);
  } catch (const std::exception&) {
    return false;
  }
  return s == current_;
}

}  // namespace cril
