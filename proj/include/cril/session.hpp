#pragma once

// The debug session behind `cril serve`: one program, one current state,
// and the move history that reproduces it.

#include <cstdint>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "cril/serialize.hpp"

namespace cril {

struct ApiResponse {
  int status = 200;
  json body;
  /// Overrides JSON when set (DOT export).
  std::optional<std::string> text;
  std::string content_type = "application/json";
};

/// A request as the dispatcher sees it, independent of the HTTP library.
struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

class DebugSession {
 public:
  DebugSession(Program program, std::uint64_t seed);

  /// Random hex string, fixed for the lifetime of the session.
  const std::string& id() const { return id_; }
  const Lts& lts() const { return *lts_; }
  const CombinedState& current() const { return current_; }
  /// Moves up to the cursor are applied; later ones are kept until the
  /// next step overwrites them.
  const std::vector<CombinedTransition>& history() const { return history_; }
  std::size_t cursor() const { return cursor_; }
  std::uint64_t version() const { return version_; }
  std::uint64_t seed() const { return seed_; }

  /// Thread-safe entry point for every endpoint.
  ApiResponse handle(const ApiRequest& request);

  /// Replays history[0, cursor) from the initial state and compares.
  bool replay_matches() const;

 private:
  ApiResponse get_program() const;
  ApiResponse get_state() const;
  ApiResponse get_dag(const ApiRequest& r) const;
  ApiResponse get_transitions(const ApiRequest& r) const;
  ApiResponse get_history() const;
  ApiResponse post_step(const json& body);
  ApiResponse post_run(const json& body);
  ApiResponse post_reset();
  ApiResponse post_scrub(const json& body);

  json state_summary() const;
  json enabled_json(Direction dir) const;
  json blocked_json() const;
  void commit(CombinedState next, std::vector<CombinedTransition> moves);
  bool replay_matches_locked() const;

  std::string id_;
  std::shared_ptr<const Lts> lts_;
  std::uint64_t seed_;
  CombinedState current_;
  std::vector<CombinedTransition> history_;
  std::size_t cursor_ = 0;
  std::uint64_t version_ = 0;
  mutable std::shared_mutex mutex_;
};

}  // namespace cril
