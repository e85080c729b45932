#include <doctest.h>

#include "support.hpp"

using namespace cril;

namespace {

ProcessId pid(const char* s) { return ProcessId::parse(s); }

ProgramConfiguration step_prog(const Machine& m, const ProgramConfiguration& c, const char* p,
                               Direction dir = Direction::Forward) {
  auto t = m.enabled_for(c, pid(p), dir);
  REQUIRE_MESSAGE(t.has_value(), "pid '" << p << "' cannot move");
  return m.apply(c, *t);
}

ProcessMap procs(std::initializer_list<std::tuple<const char*, const char*, Stage>> entries) {
  ProcessMap out;
  for (const auto& [p, l, s] : entries) out[pid(p)] = {l, s};
  return out;
}

}  // namespace

TEST_CASE("process ids") {
  CHECK(ProcessId::parse("") == ProcessId::root());
  CHECK(ProcessId::parse("ε") == ProcessId::root());
  CHECK(ProcessId::parse("e") == ProcessId::root());
  CHECK(pid("1.2").to_string() == "1.2");
  CHECK(ProcessId::root().display() == "ε");
  CHECK(pid("1").child(3) == pid("1.3"));
  CHECK(pid("1.3").parent() == pid("1"));
  CHECK(ProcessId::root().is_prefix_of(pid("2.1")));
  CHECK(pid("2").is_prefix_of(pid("2.1")));
  CHECK_FALSE(pid("2.1").is_prefix_of(pid("2")));
  CHECK_FALSE(pid("1").is_prefix_of(pid("2")));
  CHECK(pid("1") < pid("1.1"));
  CHECK(pid("1.1") < pid("2"));
  CHECK_THROWS(ProcessId::parse("1..2"));
  CHECK_THROWS(ProcessId::parse("0"));
}

TEST_CASE("leaf and process-set predicates") {
  auto pm = procs({{"", "l2", Stage::Run}, {"1", "a", Stage::Run}, {"2", "b", Stage::Begin}});
  CHECK(is_process_set(pm));
  CHECK_FALSE(is_leaf(pm, pid("")));
  CHECK(is_leaf(pm, pid("1")));
  auto gap = procs({{"", "l2", Stage::Run}, {"2", "b", Stage::Begin}});
  CHECK_FALSE(is_process_set(gap));
}

TEST_CASE("initial configuration") {
  Machine m(testing::load("shared.cril"));
  auto c = m.initial_config();
  CHECK(c.rho == Store{{"x", 0}, {"y", 0}, {"z", 0}});
  CHECK(c.sigma.empty());
  CHECK(c.procs == procs({{"", "main", Stage::Begin}}));
  CHECK(m.is_initial(c));
  CHECK_FALSE(m.is_final(c));
  CHECK(m.enabled(c, Direction::Backward).empty());
}

TEST_CASE("not well-formed programs are refused") {
  CHECK_THROWS_AS(Machine(parse_program("begin sub\nskip\nend sub")), NotWellFormed);
}

TEST_CASE("the worked forward trace of the shared corpus") {
  Machine m(testing::load("shared.cril"));
  auto c = m.initial_config();
  c = step_prog(m, c, "");
  CHECK(c.procs == procs({{"", "l1", Stage::Run}}));

  auto fork = m.enabled_for(c, pid(""), Direction::Forward);
  REQUIRE(fork);
  CHECK(fork->kind == TransitionKind::CallFork);
  CHECK(fork->label.rd.empty());
  CHECK(fork->label.wt.empty());
  c = m.apply(c, *fork);
  CHECK(c.procs == procs({{"", "l2", Stage::Run},
                          {"1", "sub0", Stage::Begin},
                          {"2", "sub1", Stage::Begin},
                          {"3", "sub2", Stage::Begin}}));
  // ε is no longer a leaf and its children have not ended.
  CHECK_FALSE(m.enabled_for(c, pid(""), Direction::Forward));

  c = step_prog(m, c, "1");
  CHECK(c.rho.at("x") == 1);
  CHECK(c.procs.at(pid("1")) == ProcessConfiguration{"l3", Stage::Run});
  c = step_prog(m, c, "2");
  CHECK(c.procs.at(pid("2")) == ProcessConfiguration{"sub1", Stage::End});
  c = step_prog(m, c, "3");
  c = step_prog(m, c, "1");
  CHECK(c.procs.at(pid("1")) == ProcessConfiguration{"sub0", Stage::End});

  auto merge = m.enabled_for(c, pid(""), Direction::Forward);
  REQUIRE(merge);
  CHECK(merge->kind == TransitionKind::CallMerge);
  c = m.apply(c, *merge);
  CHECK(c.procs == procs({{"", "l2", Stage::Run}}));
  c = step_prog(m, c, "");
  CHECK(m.is_final(c));
  CHECK(c.rho == Store{{"x", 2}, {"y", 1}, {"z", 1}});
  CHECK(m.enabled(c, Direction::Forward).empty());
}

TEST_CASE("backward b7 after the forward run decrements z by the current x") {
  Machine m(testing::load("shared.cril"));
  auto c = m.initial_config();
  for (const char* p : {"", "", "1", "2", "3", "1", "", ""}) c = step_prog(m, c, p);
  c = step_prog(m, c, "", Direction::Backward);
  c = step_prog(m, c, "", Direction::Backward);
  CHECK(c.procs.size() == 4);
  c = step_prog(m, c, "3", Direction::Backward);
  CHECK(c.rho == Store{{"x", 2}, {"y", 1}, {"z", -1}});
  CHECK(c.procs.at(pid("3")) == ProcessConfiguration{"sub2", Stage::Begin});
}

TEST_CASE("local reversibility: every forward step has an inverse") {
  Machine m(testing::load("airline_racy.cril"));
  auto c = m.initial_config();
  RandomScheduler sched(7);
  for (int i = 0; i < 40; ++i) {
    auto ts = m.enabled(c, Direction::Forward);
    if (ts.empty()) break;
    const auto& t = ts[sched.pick(ts)];
    auto next = m.apply(c, t);
    auto back = m.enabled_for(next, t.pid(), Direction::Backward);
    REQUIRE(back.has_value());
    CHECK(*back == t.reversed());
    CHECK(m.apply(next, *back) == c);
    c = next;
  }
}

TEST_CASE("at most one transition per process and direction") {
  Machine m(testing::load("airline_sem.cril"));
  auto c = m.initial_config();
  RandomScheduler sched(3);
  for (int i = 0; i < 60; ++i) {
    for (auto dir : {Direction::Forward, Direction::Backward}) {
      auto ts = m.enabled(c, dir);
      for (std::size_t k = 1; k < ts.size(); ++k) CHECK(ts[k - 1].pid() < ts[k].pid());
    }
    auto ts = m.enabled(c, Direction::Forward);
    if (ts.empty()) break;
    c = m.apply(c, ts[sched.pick(ts)]);
  }
}

TEST_CASE("arithmetic wraps modulo 2^64") {
  Store rho{{"x", INT64_MAX}, {"y", INT64_MIN}};
  Heap sigma;
  auto e = [](const char* text) {
    auto p = parse_program(std::string("l <-\nassert ") + text + "\n-> m");
    return std::get<Instruction::Assert>(p.blocks[0].instruction_block().inst.node).cond;
  };
  CHECK(eval_expr(*e("x + 1"), rho, sigma) == INT64_MIN);
  CHECK(eval_expr(*e("y - 1"), rho, sigma) == INT64_MAX);
  CHECK(eval_expr(*e("x ^ y"), rho, sigma) == -1);
  CHECK(eval_expr(*e("x > y && !(x == y)"), rho, sigma) == 1);
  CHECK(eval_expr(*e("0 || y < 0"), rho, sigma) == 1);

  Machine m(parse_program("begin main\nx -= 1\nend main"));
  auto c = m.apply(m.initial_config(), *m.enabled_for(m.initial_config(), pid(""), Direction::Forward));
  CHECK(c.rho.at("x") == -1);
  Machine big(parse_program("begin main\nx += 9223372036854775807 + 2\nend main"));
  auto c2 = big.apply(big.initial_config(), *big.enabled_for(big.initial_config(), pid(""), Direction::Forward));
  CHECK(c2.rho.at("x") == INT64_MIN + 1);
}

TEST_CASE("heap cells") {
  Machine m(parse_program("begin main\ni += 5\n-> a\n\na <-\nM[i] += 7\n-> b\n\nb <-\nx <-> M[i]\nend main"));
  auto c = m.initial_config();
  c = step_prog(m, c, "");
  c = step_prog(m, c, "");
  CHECK(c.sigma == Heap{{5, 7}});
  c = step_prog(m, c, "");
  CHECK(c.rho.at("x") == 7);
  CHECK(c.sigma.empty());
  c = step_prog(m, c, "", Direction::Backward);
  CHECK(c.sigma == Heap{{5, 7}});
  CHECK(c.rho.at("x") == 0);

  Machine neg(parse_program("begin main\ni -= 1\n-> a\n\na <-\nM[i] += 1\nend main"));
  auto d = step_prog(neg, neg.initial_config(), "");
  auto t = neg.enabled_for(d, pid(""), Direction::Forward);
  REQUIRE(t);
  CHECK_THROWS_AS(neg.apply(d, *t), RuntimeFault);
}

TEST_CASE("P and V guards") {
  Machine p_first(parse_program("begin main\nP x\nend main"));
  CHECK(p_first.enabled(p_first.initial_config(), Direction::Forward).empty());

  Machine vp(parse_program("begin main\nV s\n-> a\n\na <-\nP s\nend main"));
  auto c = step_prog(vp, vp.initial_config(), "");
  CHECK(c.rho.at("s") == 1);
  c = step_prog(vp, c, "");
  CHECK(c.rho.at("s") == 0);
  CHECK(vp.is_final(c));
  // Backward: undoing P needs s = 0, undoing V needs s = 1.
  c = step_prog(vp, c, "", Direction::Backward);
  CHECK(c.rho.at("s") == 1);
  c = step_prog(vp, c, "", Direction::Backward);
  CHECK(c.rho.at("s") == 0);

  Machine vv(parse_program("begin main\nV s\n-> a\n\na <-\nV s\nend main"));
  auto d = step_prog(vv, vv.initial_config(), "");
  CHECK(vv.enabled(d, Direction::Forward).empty());
}

TEST_CASE("assertion failure is a fault in either direction") {
  Machine m(parse_program("begin main\nx += 1\n-> a\n\na <-\nassert x == 2\nend main"));
  auto c = step_prog(m, m.initial_config(), "");
  auto t = m.enabled_for(c, pid(""), Direction::Forward);
  REQUIRE(t);
  try {
    m.apply(c, *t);
    FAIL("assertion should fail");
  } catch (const RuntimeFault& f) {
    CHECK(f.fault().kind == FaultKind::AssertFailure);
    CHECK(f.fault().block == 2);
  }
}

TEST_CASE("conditional exit picks the branch and backward entry checks it") {
  Machine m(parse_program(
      "begin main\nx += 1\nx > 0 -> p;n\n\np <-\ny += 1\n-> j1\n\nn <-\ny -= 1\n-> j2\n\n"
      "j1;j2 <- y > 0\nskip\nend main"));
  auto c = m.initial_config();
  c = step_prog(m, c, "");
  CHECK(c.procs.at(pid("")).label == "p");
  c = step_prog(m, c, "");
  c = step_prog(m, c, "");
  CHECK(m.is_final(c));
  for (int i = 0; i < 3; ++i) c = step_prog(m, c, "", Direction::Backward);
  CHECK(m.is_initial(c));
}

TEST_CASE("reversibility fault when a racing write flips an exit condition") {
  // Process 1 leaves b through 'a' because x > 0; process 2 then zeroes x,
  // so the bare semantics cannot take process 1 back through b.
  Machine m(parse_program(
      "begin main\nx += 1\n-> l\n\nl <- call f,g -> r\n\nr <-\nskip\nend main\n\n"
      "begin f\nskip\nx > 0 -> a;b\n\na <-\nskip\n-> c\n\nb <-\nskip\n-> d\n\nc;d <- y == 0\nskip\nend f\n\n"
      "begin g\nx -= 1\nend g"));
  auto c = m.initial_config();
  for (const char* p : {"", "", "1", "2"}) c = step_prog(m, c, p);
  std::vector<Fault> faults;
  CHECK_FALSE(m.enabled_for(c, pid("1"), Direction::Backward, &faults));
  REQUIRE(faults.size() == 1);
  CHECK(faults[0].kind == FaultKind::Reversibility);
}
