#include <doctest.h>

#include <algorithm>

#include "support.hpp"

using namespace cril;

namespace {

const BasicBlock& only_block(const Program& p) { return p.blocks.at(0); }

bool has_rule(const WellFormednessReport& r, const std::string& rule) {
  return std::any_of(r.violations.begin(), r.violations.end(),
                     [&](const Violation& v) { return v.rule == rule; });
}

}  // namespace

TEST_CASE("read set of z -= M[x] + y") {
  auto p = parse_program("l <-\nz -= M[x] + y\n-> m");
  CHECK(read_set(only_block(p)) == resources({"M", "x", "y", "z"}));
  CHECK(write_set(only_block(p)) == resources({"z"}));
}

TEST_CASE("write sets by instruction shape") {
  auto w = [](const char* inst) {
    return write_set(only_block(parse_program(std::string("l <-\n") + inst + "\n-> m")));
  };
  CHECK(w("y += x") == resources({"y"}));
  CHECK(w("skip") == ResourceSet{});
  CHECK(w("x <-> M[y]") == resources({"x", "M"}));
  CHECK(w("x <-> y") == resources({"x", "y"}));
  CHECK(w("M[x] <-> M[y]") == resources({"M"}));
  CHECK(w("M[i] ^= 3") == resources({"M"}));
  CHECK(w("V s") == resources({"s"}));
  CHECK(w("P s") == resources({"s"}));
  CHECK(w("assert x > 0") == ResourceSet{});
}

TEST_CASE("read and write sets of the shared corpus") {
  auto p = testing::load("shared.cril");
  std::vector<std::pair<ResourceSet, ResourceSet>> expected = {
      {{}, {}},
      {{}, {}},
      {{}, {}},
      {resources({"x"}), resources({"x"})},
      {resources({"x"}), resources({"x"})},
      {resources({"x", "y"}), resources({"y"})},
      {resources({"x", "z"}), resources({"z"})},
  };
  REQUIRE(p.blocks.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CAPTURE(i + 1);
    CHECK(read_set(p.blocks[i]) == expected[i].first);
    CHECK(write_set(p.blocks[i]) == expected[i].second);
  }
}

TEST_CASE("in and out labels") {
  auto cond = parse_program("l1;l2 <- x > 0\nskip\nx == 0 -> l3;l4");
  CHECK(in_labels(only_block(cond)) == std::set<Label>{"l1", "l2"});
  CHECK(out_labels(only_block(cond)) == std::set<Label>{"l3", "l4"});
  auto begin = parse_program("begin main\nskip\nend main");
  CHECK(in_labels(only_block(begin)).empty());
  CHECK(out_labels(only_block(begin)).empty());
  auto call = parse_program("l <- call a,b -> m");
  CHECK(in_labels(only_block(call)) == std::set<Label>{"l"});
  CHECK(out_labels(only_block(call)) == std::set<Label>{"m"});
}

TEST_CASE("process blocks of the shared corpus") {
  auto pbs = process_blocks(testing::load("shared.cril"));
  std::set<std::vector<BlockId>> classes;
  for (const auto& c : pbs.classes) classes.insert(c.blocks);
  CHECK(classes == std::set<std::vector<BlockId>>{{1, 2, 3}, {4, 5}, {6}, {7}});
  CHECK(pbs.of(1).label == "main");
  CHECK(pbs.of(5).label == "sub0");
  CHECK(pbs.of(7).label == "sub2");
}

TEST_CASE("process blocks of the airline corpora") {
  for (const char* name : {"airline_racy.cril", "airline_sem.cril"}) {
    CAPTURE(name);
    auto p = testing::load(name);
    auto pbs = process_blocks(p);
    std::set<Label> labels;
    for (const auto& c : pbs.classes) labels.insert(*c.label);
    CHECK(labels == std::set<Label>{"main", "sub1", "sub2"});
    // Partition: every block in exactly one class.
    std::vector<BlockId> all;
    for (const auto& c : pbs.classes) all.insert(all.end(), c.blocks.begin(), c.blocks.end());
    std::sort(all.begin(), all.end());
    CHECK(all.size() == p.blocks.size());
    CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
  }
}

TEST_CASE("single-block program has one process block") {
  CHECK(process_blocks(parse_program("begin main\nskip\nend main")).classes.size() == 1);
}

TEST_CASE("corpus programs are well-formed") {
  for (const char* name : {"shared.cril", "airline_racy.cril", "airline_sem.cril"}) {
    CAPTURE(name);
    auto r = check_well_formed(testing::load(name));
    CHECK_MESSAGE(r.ok, r.to_text());
    CHECK(r.violations.empty());
  }
}

TEST_CASE("label joined twice violates condition 1") {
  auto r = check_well_formed(parse_program(
      "begin main\nskip\n-> l\n\nl <-\nskip\n-> m\n\nl <-\nskip\n-> m\n\nm <-\nskip\nend main"));
  CHECK_FALSE(r.ok);
  CHECK(has_rule(r, "1"));
}

TEST_CASE("begin without end violates condition 2") {
  auto r = check_well_formed(parse_program("begin main\nskip\n-> l\n\nl <-\nskip\n-> m"));
  CHECK_FALSE(r.ok);
  CHECK(has_rule(r, "2"));
}

TEST_CASE("missing main violates condition 5") {
  auto r = check_well_formed(parse_program("begin sub\nskip\nend sub"));
  CHECK(has_rule(r, "5"));
}

TEST_CASE("label used as both control and process label violates condition 3") {
  auto r = check_well_formed(parse_program("begin main\nskip\n-> main\n\nmain <-\nskip\nend main"));
  CHECK(has_rule(r, "3"));
}

TEST_CASE("semaphore variable updated outside P/V") {
  auto r = check_well_formed(parse_program("begin main\ns += 1\n-> l\n\nl <-\nV s\nend main"));
  CHECK_FALSE(r.ok);
  CHECK(has_rule(r, "semaphore"));
  auto cond = check_well_formed(parse_program("begin main\nV s\ns == 1 -> a;b\n\na <-\nskip\n-> c\n\nb <-\nskip\n-> d\n\nc;d <- s == 1\nP s\nend main"));
  CHECK(has_rule(cond, "semaphore"));
}

TEST_CASE("call rules") {
  auto unknown = check_well_formed(parse_program(
      "begin main\nskip\n-> l\n\nl <- call nowhere -> m\n\nm <-\nskip\nend main"));
  CHECK(has_rule(unknown, "call-target"));
  auto dup = check_well_formed(parse_program(
      "begin main\nskip\n-> l\n\nl <- call s,s -> m\n\nm <-\nskip\nend main\n\nbegin s\nskip\nend s"));
  CHECK(has_rule(dup, "call-duplicate"));
  auto self = check_well_formed(parse_program(
      "begin main\nskip\n-> l\n\nl <- call main -> m\n\nm <-\nskip\nend main"));
  CHECK(has_rule(self, "main-recursion"));
}

TEST_CASE("conditional entry with equal labels") {
  auto r = check_well_formed(parse_program(
      "begin main\nskip\n-> l\n\nl;l <- x == 0\nskip\nend main"));
  CHECK(has_rule(r, "cond-labels"));
}

TEST_CASE("uncalled process is a warning") {
  auto r = check_well_formed(parse_program("begin main\nskip\nend main\n\nbegin idle\nskip\nend idle"));
  CHECK(r.ok);
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("recursion below main is allowed") {
  auto r = check_well_formed(parse_program(
      "begin main\nskip\n-> l\n\nl <- call f -> m\n\nm <-\nskip\nend main\n\n"
      "begin f\nskip\nn > 0 -> f1;f2\n\nf1 <-\nn -= 1\n-> f3\n\nf3 <- call f -> f4\n\n"
      "f4 <-\nn += 1\n-> f5\n\nf2;f5 <- n == 0\nskip\nend f"));
  CHECK_MESSAGE(r.ok, r.to_text());
}

TEST_CASE("write set is contained in read set on the corpus") {
  for (const char* name : {"shared.cril", "airline_racy.cril", "airline_sem.cril"}) {
    auto p = testing::load(name);
    for (const auto& b : p.blocks) {
      auto rd = read_set(b), wt = write_set(b);
      CHECK(std::includes(rd.begin(), rd.end(), wt.begin(), wt.end()));
    }
  }
}
