#include <doctest.h>

#include "support.hpp"

using namespace cril;
using testing::drive;

namespace {

std::set<std::string> movers(const Lts& lts, const CombinedState& s, Direction dir) {
  std::set<std::string> out;
  for (const auto& t : lts.enabled(s, dir)) out.insert(t.pid().to_string());
  return out;
}

const Lts& shared() {
  static const Lts lts(testing::load("shared.cril"));
  return lts;
}

}  // namespace

TEST_CASE("independence of labels") {
  using testing::label;
  CHECK(independent_labels(label("1", {"x"}, {"x"}), label("2", {"y"}, {"y"})));
  CHECK(independent_labels(label("2", {"x", "y"}, {"y"}), label("3", {"x", "z"}, {"z"})));
  CHECK_FALSE(independent_labels(label("1", {"x"}, {"x"}), label("2", {"x", "y"}, {"y"})));
  CHECK_FALSE(independent_labels(label("", {}, {}), label("1", {}, {})));
  CHECK_FALSE(independent_labels(label("1", {}, {}), label("1.2", {}, {})));
  CHECK_FALSE(independent_labels(label("1", {"M"}, {"M"}), label("2", {"M"}, {})));
  CHECK(independent_labels(label("1", {"M"}, {}), label("2", {"M"}, {})));
}

TEST_CASE("initial and final states of the shared corpus") {
  const auto& lts = shared();
  auto s = lts.initial_state();
  CHECK(lts.is_initial(s));
  CHECK(movers(lts, s, Direction::Forward) == std::set<std::string>{""});
  CHECK(lts.enabled(s, Direction::Backward).empty());

  auto fin = drive(lts, s, {{"", 1}, {"", 2}, {"1", 4}, {"2", 6}, {"3", 7}, {"1", 5}, {"", 2}, {"", 3}});
  CHECK(lts.is_final(fin));
  CHECK(fin.config.rho == Store{{"x", 2}, {"y", 1}, {"z", 1}});
  auto back = lts.enabled(fin, Direction::Backward);
  REQUIRE(back.size() == 1);
  CHECK(back[0].block == 3);
}

TEST_CASE("enabled reversals follow the DAG") {
  const auto& lts = shared();
  auto c5 = drive(lts, lts.initial_state(), {{"", 1}, {"", 2}, {"1", 4}, {"2", 6}, {"3", 7}});
  CHECK(movers(lts, c5, Direction::Backward) == std::set<std::string>{"2", "3"});
  CHECK(lts.removable_nodes(c5) ==
        std::set<DagNode>{DagNode::of(ProcessId::parse("2"), 0), DagNode::of(ProcessId::parse("3"), 0)});

  auto c6 = drive(lts, c5, {{"1", 5}});
  CHECK(movers(lts, c6, Direction::Backward) == std::set<std::string>{"1"});
  CHECK(lts.check(c6, ProcessId::parse("2"), Direction::Backward) == StepVerdict::NotEnabledDag);
  CHECK(lts.check(c6, ProcessId::parse("1"), Direction::Backward) == StepVerdict::Ok);
  CHECK(lts.check(c6, ProcessId::root(), Direction::Backward) == StepVerdict::NotEnabledProg);

  std::optional<CombinedTransition> t;
  lts.check(c6, ProcessId::parse("2"), Direction::Backward, &t);
  REQUIRE(t);
  CHECK_THROWS_AS(lts.step(c6, *t), NotEnabled);
}

TEST_CASE("step rejects transitions that do not match the program") {
  const auto& lts = shared();
  auto s = lts.initial_state();
  auto t = lts.enabled(s, Direction::Forward).at(0);
  auto wrong = t;
  wrong.block = 2;
  CHECK_THROWS_AS(lts.step(s, wrong), NotEnabled);
  auto other = t;
  other.label.pid = ProcessId::parse("1");
  CHECK_THROWS_AS(lts.step(s, other), NotEnabled);
}

TEST_CASE("forward then backward returns to the same state") {
  for (const char* name : {"shared.cril", "airline_racy.cril", "airline_sem.cril"}) {
    Lts lts(testing::load(name));
    RandomScheduler sched(42);
    auto s = lts.initial_state();
    for (int i = 0; i < 30; ++i) {
      auto ts = lts.enabled(s, Direction::Forward);
      if (ts.empty()) break;
      const auto& t = ts[sched.pick(ts)];
      auto next = lts.step(s, t);
      CHECK(lts.step(next, t.reversed()) == s);
      s = next;
    }
  }
}

TEST_CASE("state keys identify states") {
  const auto& lts = shared();
  auto a = drive(lts, lts.initial_state(), {{"", 1}, {"", 2}, {"2", 6}, {"3", 7}});
  auto b = drive(lts, lts.initial_state(), {{"", 1}, {"", 2}, {"3", 7}, {"2", 6}});
  CHECK(a == b);
  CHECK(state_key(a) == state_key(b));
  CHECK(state_hash(a) == state_hash(b));
  CHECK(state_hash(a).size() == 16);
  auto c = drive(lts, lts.initial_state(), {{"", 1}, {"", 2}, {"1", 4}, {"2", 6}});
  CHECK(state_key(a) != state_key(c));
}

TEST_CASE("schedulers") {
  std::vector<CombinedTransition> ts(3);
  ts[0].label.pid = ProcessId::parse("1");
  ts[1].label.pid = ProcessId::parse("2");
  ts[2].label.pid = ProcessId::parse("3");
  RoundRobinScheduler rr;
  CHECK(rr.pick(ts) == 0);
  CHECK(rr.pick(ts) == 1);
  CHECK(rr.pick(ts) == 2);
  CHECK(rr.pick(ts) == 0);

  RandomScheduler a(9), b(9);
  for (int i = 0; i < 20; ++i) {
    auto x = a.pick(ts);
    CHECK(x < 3);
    CHECK(x == b.pick(ts));
  }
}

TEST_CASE("run forward then backward") {
  const auto& lts = shared();
  RandomScheduler sched(1);
  auto fwd = run(lts, lts.initial_state(), sched, Direction::Forward, 1000);
  CHECK(fwd.outcome == RunOutcome::Terminated);
  CHECK(fwd.trace.size() == 8);
  CHECK(lts.is_final(fwd.final));
  auto bwd = run(lts, fwd.final, sched, Direction::Backward, 1000);
  CHECK(bwd.outcome == RunOutcome::Terminated);
  CHECK(lts.is_initial(bwd.final));

  auto limited = run(lts, lts.initial_state(), sched, Direction::Forward, 3);
  CHECK(limited.outcome == RunOutcome::StepLimit);
  CHECK(limited.trace.size() == 3);
}

TEST_CASE("run reports deadlock and assertion failure") {
  Lts stuck(parse_program("begin main\nP s\nend main"));
  RandomScheduler sched(1);
  CHECK(run(stuck, stuck.initial_state(), sched, Direction::Forward, 10).outcome ==
        RunOutcome::Blocked);
  Lts bad(parse_program("begin main\nassert 0\nend main"));
  auto r = run(bad, bad.initial_state(), sched, Direction::Forward, 10);
  CHECK(r.outcome == RunOutcome::AssertFailed);
  REQUIRE(r.fault);
  CHECK(r.fault->kind == FaultKind::AssertFailure);
}

TEST_CASE("the bare semantics can reverse into a state the DAG never reaches") {
  const auto& lts = shared();
  const auto& m = lts.machine();
  auto fin = drive(lts, lts.initial_state(),
                   {{"", 1}, {"", 2}, {"1", 4}, {"2", 6}, {"3", 7}, {"1", 5}, {"", 2}, {"", 3}});
  auto c = fin.config;
  for (const char* p : {"", "", "3", "2", "1", "1", "", ""}) {
    auto t = m.enabled_for(c, ProcessId::parse(p), Direction::Backward);
    REQUIRE(t);
    c = m.apply(c, *t);
  }
  CHECK(m.is_initial(c) == false);
  CHECK(c.procs == m.initial_config().procs);
  CHECK(c.rho == Store{{"x", 0}, {"y", -1}, {"z", -1}});

  auto sinks = backward_sinks(lts, fin);
  REQUIRE(sinks.sinks.size() == 1);
  CHECK(lts.is_initial(sinks.sinks.front()));
}
