#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <iostream>

#include "support.hpp"

namespace testing {

DagAudit& dag_audit() {
  static DagAudit audit;
  return audit;
}

void install_dag_audit() {
  cril::set_dag_observer([](const cril::AnnotationDag& a) {
    auto& audit = dag_audit();
    ++audit.mutations;
    auto bad = cril::validate(a);
    if (!bad.empty() && audit.violations++ == 0) audit.first_violation = bad.front();
  });
}

cril::TransitionLabel label(const std::string& pid, std::initializer_list<const char*> rd,
                            std::initializer_list<const char*> wt, cril::Direction dir) {
  return {cril::ProcessId::parse(pid), cril::resources(rd), cril::resources(wt), dir};
}

cril::CombinedState drive(const cril::Lts& lts, cril::CombinedState s,
                          std::initializer_list<std::pair<const char*, cril::BlockId>> moves,
                          cril::Direction dir) {
  for (const auto& [pid, block] : moves) {
    cril::MoveRequest m{cril::ProcessId::parse(pid), dir, block, std::nullopt};
    auto t = cril::resolve(lts, s, m);
    REQUIRE_MESSAGE(t.has_value(), "pid " << pid << " cannot take b" << block);
    s = lts.step(s, *t);
  }
  return s;
}

}  // namespace testing

int main(int argc, char** argv) {
  testing::install_dag_audit();
  doctest::Context context(argc, argv);
  int rc = context.run();
  if (context.shouldExit()) return rc;
  const auto& audit = testing::dag_audit();
  std::cout << "annotation DAG audit: " << audit.mutations << " mutations, " << audit.violations
            << " validator violations\n";
  if (audit.violations) {
    std::cout << "first violation: " << audit.first_violation << "\n";
    return rc ? rc : 1;
  }
  return rc;
}
