#pragma once

// JSON forms shared by the CLI, the debug service and replay files.
// Pids are dotted strings with "" for the root; resources are names.

#include <json.hpp>

#include "cril/ltsi.hpp"

namespace cril {

using json = nlohmann::json;

json to_json(const ResourceSet& rs);
ResourceSet resource_set_from_json(const json& j);

json to_json(const ProgramConfiguration& c);
json to_json(const AnnotationDag& a);
json to_json(const DagNode& v);
json to_json(const DagDelta& d);

/// {pid, dir, block, kind, rd, wt}
json to_json(const CombinedTransition& t);
/// A move named by pid and direction, optionally pinned to a block and
/// kind. Which transition it denotes depends on the state it is applied in.
struct MoveRequest {
  ProcessId pid;
  Direction dir = Direction::Forward;
  std::optional<BlockId> block;
  std::optional<TransitionKind> kind;
};

/// Accepts {pid, dir[, block, kind, rd, wt]}; rd/wt are ignored since the
/// block determines them. Throws std::invalid_argument.
MoveRequest move_from_json(const json& j);
Direction direction_from_string(std::string_view s);

/// The transition `m` denotes in `s`, or nullopt when pid cannot move that
/// way or the pinned block/kind differ from the enabled one.
std::optional<CombinedTransition> resolve(const Lts& lts, const CombinedState& s,
                                          const MoveRequest& m);

json trace_to_json(const std::vector<CombinedTransition>& trace);
/// A bare array, or an object with a "trace" array.
std::vector<MoveRequest> trace_from_json(const json& j);

struct ReplayResult {
  CombinedState state;
  std::vector<CombinedTransition> applied;
  /// Set when a move could not be applied; replay stops there.
  std::optional<std::string> error;
};

ReplayResult replay(const Lts& lts, const CombinedState& start,
                    const std::vector<MoveRequest>& moves);

/// Blocks with their text, read/write sets, in/out labels and process
/// block, followed by the process-block classes.
json program_to_json(const Program& p);

json to_json(const WellFormednessReport& r);

/// Replay against the bare program semantics (no annotation DAG).
struct ProgReplayResult {
  ProgramConfiguration config;
  std::vector<ProgTransition> applied;
  std::optional<std::string> error;
};

ProgReplayResult replay_prog(const Machine& m, const ProgramConfiguration& start,
                             const std::vector<MoveRequest>& moves);

}  // namespace cril
