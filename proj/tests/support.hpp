#pragma once

#include <cstdint>
#include <string>

#include "cril/serialize.hpp"
#include "cril/verify.hpp"

namespace testing {

inline std::string corpus(const std::string& name) { return std::string(CRIL_CORPUS_DIR) + "/" + name; }

inline cril::Program load(const std::string& name) { return cril::load_program(corpus(name)); }

/// Every DAG the library builds while tests run is validated; these count
/// what was seen.
struct DagAudit {
  std::uint64_t mutations = 0;
  std::uint64_t violations = 0;
  std::string first_violation;
};
DagAudit& dag_audit();
void install_dag_audit();

cril::TransitionLabel label(const std::string& pid, std::initializer_list<const char*> rd,
                            std::initializer_list<const char*> wt,
                            cril::Direction dir = cril::Direction::Forward);

/// Applies `moves` (pid, block) in one direction; fails the test on a
/// rejected move.
cril::CombinedState drive(const cril::Lts& lts, cril::CombinedState s,
                          std::initializer_list<std::pair<const char*, cril::BlockId>> moves,
                          cril::Direction dir = cril::Direction::Forward);

}  // namespace testing
