#include <doctest.h>

#include "support.hpp"

using namespace cril;

namespace {

int parse_error_line(std::string_view text) {
  try {
    parse_program(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("instruction block with begin entry") {
  auto p = parse_program("begin main\nskip\n-> l1\n");
  REQUIRE(p.blocks.size() == 1);
  const auto& ib = p.blocks[0].instruction_block();
  CHECK(ib.entry.kind == EntryPoint::Kind::Begin);
  CHECK(ib.entry.first == "main");
  CHECK(std::holds_alternative<Instruction::Skip>(ib.inst.node));
  CHECK(ib.exit.kind == ExitPoint::Kind::Uncond);
  CHECK(ib.exit.first == "l1");
}

TEST_CASE("call statement") {
  auto p = parse_program("l1 <- call sub0,sub1,sub2 -> l2");
  REQUIRE(p.blocks.size() == 1);
  REQUIRE(p.blocks[0].is_call());
  const auto& c = p.blocks[0].call();
  CHECK(c.entry == "l1");
  CHECK(c.targets == std::vector<Label>{"sub0", "sub1", "sub2"});
  CHECK(c.exit == "l2");
}

TEST_CASE("conditional entry and exit") {
  auto p = parse_program("a1;a4 <- agent1 == 0\nskip\nseats > 0 -> a2;a5");
  const auto& ib = p.blocks[0].instruction_block();
  CHECK(ib.entry.kind == EntryPoint::Kind::Cond);
  CHECK(ib.entry.first == "a1");
  CHECK(ib.entry.second == "a4");
  CHECK(render_expr(*ib.entry.cond) == "agent1 == 0");
  CHECK(ib.exit.kind == ExitPoint::Kind::Cond);
  CHECK(ib.exit.second == "a5");
}

TEST_CASE("variable occurring in its own update is rejected") {
  CHECK_THROWS_AS(parse_program("l <-\nx += x\n-> l2"), ParseError);
  CHECK(parse_error_line("l <-\nx += x\n-> l2") == 2);
  CHECK_THROWS_AS(parse_program("l <-\nx -= 1 + (y ^ x)\n-> l2"), ParseError);
}

TEST_CASE("heap restrictions") {
  CHECK_THROWS_AS(parse_program("l <-\nM[i] += M[j]\n-> l2"), ParseError);
  CHECK_NOTHROW(parse_program("l <-\nM[i] += x + i\n-> l2"));
  CHECK_THROWS_AS(parse_program("l <-\nx <-> x\n-> l2"), ParseError);
  CHECK_NOTHROW(parse_program("l <-\nx <-> M[y]\n-> l2"));
}

TEST_CASE("empty input") {
  CHECK_THROWS_AS(parse_program(""), ParseError);
  CHECK_THROWS_AS(parse_program("# only a comment\n\n"), ParseError);
}

TEST_CASE("malformed input is reported with a line") {
  CHECK(parse_error_line("begin main\nx = 1\nend main") == 2);
  CHECK(parse_error_line("begin main\nskip\nend main\n\nl <-\nassert x & 1\n-> l") == 6);
  CHECK(parse_error_line("begin main\nx += 99999999999999999999\nend main") == 2);
  CHECK(parse_error_line("begin main\nskip") == 1);
  CHECK(parse_error_line("begin 1x\nskip\nend main") == 1);
  CHECK(parse_error_line("begin main\nskip\nend main\n\nl <- call -> m") == 5);
}

TEST_CASE("operator precedence follows C") {
  auto e = [](const char* text) {
    auto p = parse_program(std::string("l <-\nassert ") + text + "\n-> m");
    return std::get<Instruction::Assert>(p.blocks[0].instruction_block().inst.node).cond;
  };
  // ^ binds looser than ==, so this is a ^ (b == c).
  auto x = e("a ^ b == c");
  const auto& top = std::get<Expr::Binary>(x->node);
  CHECK(top.op == BinaryOp::Xor);
  CHECK(std::get<Expr::Binary>(top.rhs->node).op == BinaryOp::Eq);

  auto y = e("a || b && !c < d + 1");
  const auto& ytop = std::get<Expr::Binary>(y->node);
  CHECK(ytop.op == BinaryOp::Or);
  CHECK(std::get<Expr::Binary>(ytop.rhs->node).op == BinaryOp::And);

  CHECK(render_expr(*e("(a + b) - (c - d)")) == "a + b - (c - d)");
  CHECK(render_expr(*e("(a ^ b) == c")) == "(a ^ b) == c");
}

TEST_CASE("CRLF and comments") {
  auto p = parse_program("# header\r\nbegin main   # entry\r\nskip\r\nend main\r\n");
  CHECK(p.blocks.size() == 1);
  CHECK(p.blocks[0].line == 2);
}

TEST_CASE("render of a single skip block is three lines") {
  auto p = parse_program("begin main\nskip\nend main");
  CHECK(render_program(p) == "begin main\nskip\nend main\n");
}

TEST_CASE("corpus programs survive parse-render-parse") {
  for (const char* name : {"shared.cril", "airline_racy.cril", "airline_sem.cril"}) {
    CAPTURE(name);
    auto p = testing::load(name);
    auto again = parse_program(render_program(p));
    CHECK(again == p);
    CHECK(render_program(again) == render_program(p));
  }
}

TEST_CASE("vars collects every variable") {
  auto p = testing::load("airline_racy.cril");
  CHECK(p.vars == std::set<std::string>{"agent1", "agent2", "seats"});
}
