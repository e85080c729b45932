#include "cril/verify.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <unordered_set>

namespace cril {

std::optional<std::size_t> LtsGraph::find(const CombinedState& s) const {
  auto it = index.find(state_key(s));
  if (it == index.end()) return std::nullopt;
  return it->second;
}

std::size_t LtsGraph::add_abstract_state(std::size_t nodes) {
  dag_nodes.push_back(nodes);
  expanded.push_back(true);
  out.emplace_back();
  return dag_nodes.size() - 1;
}

std::size_t LtsGraph::add_edge(std::size_t src, std::size_t dst, CombinedTransition t) {
  edges.push_back({src, dst, std::move(t)});
  out.at(src).push_back(edges.size() - 1);
  return edges.size() - 1;
}

LtsGraph explore(const Lts& lts, std::size_t max_states, std::size_t max_depth) {
  LtsGraph g;
  std::vector<std::size_t> depth;
  auto intern = [&](CombinedState s, std::size_t d) -> std::optional<std::size_t> {
    auto key = state_key(s);
    if (auto it = g.index.find(key); it != g.index.end()) return it->second;
    if (g.size() >= max_states) {
      g.truncated = true;
      return std::nullopt;
    }
    std::size_t id = g.add_abstract_state(s.dag.nodes().size());
    g.expanded[id] = false;
    g.states.push_back(std::move(s));
    g.index.emplace(std::move(key), id);
    depth.push_back(d);
    return id;
  };

  g.initial = *intern(lts.initial_state(), 0);
  std::deque<std::size_t> queue{g.initial};
  while (!queue.empty()) {
    std::size_t id = queue.front();
    queue.pop_front();
    if (depth[id] >= max_depth) {
      g.truncated = true;
      continue;
    }
    g.expanded[id] = true;
    for (auto dir : {Direction::Forward, Direction::Backward}) {
      std::vector<Fault> faults;
      // Copy: interning may reallocate g.states.
      CombinedState here = g.states[id];
      auto enabled = lts.enabled(here, dir, &faults);
      for (auto& f : faults) g.faults.emplace_back(id, std::move(f));
      for (const auto& t : enabled) {
        CombinedState next;
        try {
          next = lts.step(here, t);
        } catch (const RuntimeFault& rf) {
          g.faults.emplace_back(id, rf.fault());
          continue;
        }
        std::size_t before = g.size();
        auto dst = intern(std::move(next), depth[id] + 1);
        if (!dst) continue;
        if (g.size() > before) queue.push_back(*dst);
        g.add_edge(id, *dst, t);
      }
    }
  }
  return g;
}

std::vector<std::size_t> path_to(const LtsGraph& g, std::size_t target) {
  constexpr auto none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> via(g.size(), none);
  std::vector<bool> seen(g.size(), false);
  std::deque<std::size_t> queue{g.initial};
  seen[g.initial] = true;
  while (!queue.empty() && !seen[target]) {
    auto s = queue.front();
    queue.pop_front();
    for (auto e : g.out[s]) {
      auto d = g.edges[e].dst;
      if (seen[d]) continue;
      seen[d] = true;
      via[d] = e;
      queue.push_back(d);
    }
  }
  std::vector<std::size_t> path;
  if (!seen[target]) return path;
  for (auto s = target; s != g.initial; s = g.edges[via[s]].src) path.push_back(via[s]);
  std::reverse(path.begin(), path.end());
  return path;
}

namespace {

/// The edge leaving `s` with exactly this label, if any.
std::optional<std::size_t> edge_with_label(const LtsGraph& g, std::size_t s,
                                           const TransitionLabel& l) {
  for (auto e : g.out[s])
    if (g.edges[e].t.label == l) return e;
  return std::nullopt;
}

struct Square {
  std::size_t t, u, u2, t2;  // t: P->Q, u: P->R, u2: Q->S, t2: R->S
};

/// Walks every coinitial independent pair. `on_square` gets completed
/// squares; `on_missing` gets pairs whose corner is absent. Pairs touching
/// unexpanded states are skipped and counted in `skipped`.
void for_each_square(const LtsGraph& g, const std::function<bool(const Square&)>& on_square,
                     const std::function<bool(std::size_t, std::size_t, const std::string&)>& on_missing,
                     std::uint64_t* pairs = nullptr, std::uint64_t* skipped = nullptr) {
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (!g.expanded[p]) continue;
    const auto& outs = g.out[p];
    for (std::size_t i = 0; i < outs.size(); ++i)
      for (std::size_t j = i + 1; j < outs.size(); ++j) {
        const auto& t = g.edges[outs[i]];
        const auto& u = g.edges[outs[j]];
        if (!independent_labels(t.t.label, u.t.label)) continue;
        if (!g.expanded[t.dst] || !g.expanded[u.dst]) {
          if (skipped) ++*skipped;
          continue;
        }
        if (pairs) ++*pairs;
        auto u2 = edge_with_label(g, t.dst, u.t.label);
        auto t2 = edge_with_label(g, u.dst, t.t.label);
        if (!u2 || !t2) {
          if (!on_missing(outs[i], outs[j], !u2 ? "no matching transition after the first" : "no matching transition after the second"))
            return;
          continue;
        }
        if (g.edges[*u2].dst != g.edges[*t2].dst) {
          if (!on_missing(outs[i], outs[j], "completions are not cofinal")) return;
          continue;
        }
        if (!on_square({outs[i], outs[j], *u2, *t2})) return;
      }
  }
}

std::string describe_edge(const LtsGraph& g, std::size_t e) {
  const auto& edge = g.edges[e];
  return "s" + std::to_string(edge.src) + " -" + edge.t.describe() + "-> s" +
         std::to_string(edge.dst);
}

PropertyReport fail(PropertyReport r, std::string message, std::size_t state,
                    std::vector<std::size_t> edges) {
  r.ok = false;
  r.counterexample = Counterexample{std::move(message), state, std::move(edges)};
  return r;
}

std::vector<std::vector<std::size_t>> incoming(const LtsGraph& g) {
  std::vector<std::vector<std::size_t>> in(g.size());
  for (std::size_t e = 0; e < g.edges.size(); ++e) in[g.edges[e].dst].push_back(e);
  return in;
}

/// rev[e]: the edge undoing e, or npos.
std::vector<std::size_t> reverse_edges(const LtsGraph& g) {
  std::vector<std::size_t> rev(g.edges.size(), std::numeric_limits<std::size_t>::max());
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& edge = g.edges[e];
    auto back = edge.t.reversed();
    for (auto f : g.out[edge.dst])
      if (g.edges[f].dst == edge.src && g.edges[f].t == back) {
        rev[e] = f;
        break;
      }
  }
  return rev;
}

}  // namespace

PropertyReport check_square_property(const LtsGraph& g) {
  PropertyReport r{"SP", true, std::nullopt, 0, ""};
  std::uint64_t skipped = 0;
  for_each_square(
      g, [](const Square&) { return true; },
      [&](std::size_t t, std::size_t u, const std::string& why) {
        r = fail(r, why + ": " + describe_edge(g, t) + " and " + describe_edge(g, u),
                 g.edges[t].src, {t, u});
        return false;
      },
      &r.checked, &skipped);
  if (skipped) r.note = std::to_string(skipped) + " pairs skipped at unexpanded states";
  return r;
}

PropertyReport check_bti(const LtsGraph& g) {
  PropertyReport r{"BTI", true, std::nullopt, 0, ""};
  for (std::size_t p = 0; p < g.size(); ++p) {
    std::vector<std::size_t> back;
    for (auto e : g.out[p])
      if (g.edges[e].t.dir() == Direction::Backward) back.push_back(e);
    for (std::size_t i = 0; i < back.size(); ++i)
      for (std::size_t j = i + 1; j < back.size(); ++j) {
        ++r.checked;
        if (!independent_labels(g.edges[back[i]].t.label, g.edges[back[j]].t.label))
          return fail(r,
                      "dependent backward transitions " + describe_edge(g, back[i]) + " and " +
                          describe_edge(g, back[j]),
                      p, {back[i], back[j]});
      }
  }
  return r;
}

PropertyReport check_wf(const LtsGraph& g) {
  PropertyReport r{"WF", true, std::nullopt, 0, ""};
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& edge = g.edges[e];
    ++r.checked;
    auto before = g.dag_nodes[edge.src], after = g.dag_nodes[edge.dst];
    bool fine = edge.t.dir() == Direction::Backward ? after + 1 == before : after == before + 1;
    if (!fine)
      return fail(r,
                  "|V| goes from " + std::to_string(before) + " to " + std::to_string(after) +
                      " along " + describe_edge(g, e),
                  edge.src, {e});
  }
  return r;
}

PropertyReport check_cpi(const LtsGraph& g) {
  PropertyReport r{"CPI", true, std::nullopt, 0, ""};
  for_each_square(
      g,
      [&](const Square& sq) {
        ++r.checked;
        const auto& u2 = g.edges[sq.u2].t.label;
        auto t_back = g.edges[sq.t].t.reversed().label;
        if (independent_labels(u2, t_back)) return true;
        r = fail(r, "square closes but " + describe_edge(g, sq.u2) + " is not independent of the reverse of " + describe_edge(g, sq.t),
                 g.edges[sq.t].dst, {sq.t, sq.u, sq.u2, sq.t2});
        return false;
      },
      [](std::size_t, std::size_t, const std::string&) { return true; });
  return r;
}

EventPartition compute_events(const LtsGraph& g) {
  std::vector<std::size_t> parent(g.edges.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> root = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](std::size_t a, std::size_t b) { parent[root(a)] = root(b); };
  for_each_square(
      g,
      [&](const Square& sq) {
        unite(sq.t, sq.t2);
        unite(sq.u, sq.u2);
        return true;
      },
      [](std::size_t, std::size_t, const std::string&) { return true; });

  auto rev = reverse_edges(g);
  EventPartition ev;
  ev.event_of.assign(g.edges.size(), 0);
  std::unordered_map<std::size_t, std::size_t> class_of_root;
  auto class_for = [&](std::size_t e) {
    auto [it, fresh] = class_of_root.try_emplace(root(e), ev.classes.size());
    if (fresh) ev.classes.push_back({{}, g.edges[e].t.label});
    return it->second;
  };
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    if (g.edges[e].t.dir() == Direction::Forward) {
      auto c = class_for(e);
      ev.event_of[e] = c;
      ev.classes[c].edges.push_back(e);
    }
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (g.edges[e].t.dir() == Direction::Forward) continue;
    // A backward edge without a recorded forward reverse forms its own event.
    auto c = rev[e] != std::numeric_limits<std::size_t>::max() ? class_for(rev[e]) : class_for(e);
    ev.event_of[e] = c;
    if (rev[e] == std::numeric_limits<std::size_t>::max()) ev.classes[c].edges.push_back(e);
  }
  return ev;
}

PropertyReport check_ire(const LtsGraph& g, const EventPartition& ev) {
  PropertyReport r{"IRE", true, std::nullopt, 0, ""};
  for (const auto& c : ev.classes)
    for (auto e : c.edges) {
      ++r.checked;
      if (!same_underlying(g.edges[e].t.label, c.label))
        return fail(r,
                    "event mixes labels: " + describe_edge(g, e) + " vs " +
                        describe_edge(g, c.edges.front()),
                    g.edges[e].src, {c.edges.front(), e});
    }
  r.note = std::to_string(ev.classes.size()) + " events";
  return r;
}

PropertyReport check_causal_consistency(const LtsGraph& g) {
  PropertyReport r{"CC", true, std::nullopt, 0, ""};
  std::vector<bool> fwd(g.size(), false);
  std::deque<std::size_t> queue{g.initial};
  fwd[g.initial] = true;
  while (!queue.empty()) {
    auto s = queue.front();
    queue.pop_front();
    for (auto e : g.out[s]) {
      const auto& edge = g.edges[e];
      if (edge.t.dir() != Direction::Forward || fwd[edge.dst]) continue;
      fwd[edge.dst] = true;
      queue.push_back(edge.dst);
    }
  }
  for (std::size_t s = 0; s < g.size(); ++s) {
    ++r.checked;
    if (!fwd[s])
      return fail(r, "state s" + std::to_string(s) + " is reachable but has no forward-only witness",
                  s, path_to(g, s));
  }
  return r;
}

namespace {

/// Net counts of the events a step sequence touched, sorted by event.
using Counts = std::vector<std::pair<std::size_t, int>>;

void bump(Counts& c, std::size_t event, int delta) {
  auto it = std::lower_bound(c.begin(), c.end(), std::make_pair(event, std::numeric_limits<int>::min()));
  if (it != c.end() && it->first == event) {
    it->second += delta;
    if (it->second == 0) c.erase(it);
  } else {
    c.insert(it, {event, delta});
  }
}

int count_of(const Counts& c, std::size_t event) {
  auto it = std::lower_bound(c.begin(), c.end(), std::make_pair(event, std::numeric_limits<int>::min()));
  return it != c.end() && it->first == event ? it->second : 0;
}

}  // namespace

PropertyReport check_causal_safety(const LtsGraph& g, const EventPartition& ev, std::size_t bound,
                                   bool liveness) {
  PropertyReport r{liveness ? "CS+CL" : "CS", true, std::nullopt, 0, ""};
  auto in = incoming(g);
  struct Node {
    std::size_t state;
    Counts counts;
    std::size_t parent;  // index into nodes, npos for the root
    std::size_t via;     // edge
    std::size_t depth;
  };
  constexpr auto npos = std::numeric_limits<std::size_t>::max();
  std::uint64_t truncated_paths = 0;

  for (std::size_t ea = 0; ea < g.edges.size(); ++ea) {
    const auto& a = g.edges[ea];
    if (a.t.dir() != Direction::Forward) continue;
    const std::size_t A = ev.event_of[ea];
    const auto& la = a.t.label;

    std::vector<Node> nodes{{a.dst, {}, npos, npos, 0}};
    std::unordered_set<std::string> seen;
    auto key_of = [](std::size_t s, const Counts& c) {
      std::string k = std::to_string(s);
      for (auto [e, n] : c) k += "," + std::to_string(e) + ":" + std::to_string(n);
      return k;
    };
    seen.insert(key_of(a.dst, {}));

    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Node node = nodes[i];
      ++r.checked;
      auto path = [&]() {
        std::vector<std::size_t> p;
        for (auto k = i; nodes[k].parent != npos; k = nodes[k].parent) p.push_back(nodes[k].via);
        p.push_back(ea);
        std::reverse(p.begin(), p.end());
        return p;
      };
      if (count_of(node.counts, A) == 0) {
        bool dependent_positive = std::any_of(node.counts.begin(), node.counts.end(),
                                              [&](auto c) { return c.first != A && c.second > 0; });
        if (dependent_positive) {
          for (auto e : in[node.state])
            if (g.edges[e].t.dir() == Direction::Forward && ev.event_of[e] == A)
              return fail(r,
                          "event of " + describe_edge(g, ea) + " recurs into s" +
                              std::to_string(node.state) + " via " + describe_edge(g, e) +
                              " after a dependent event",
                          a.src, path());
        } else if (liveness && g.expanded[node.state]) {
          bool reversible = std::any_of(g.out[node.state].begin(), g.out[node.state].end(), [&](auto e) {
            return g.edges[e].t.dir() == Direction::Backward && ev.event_of[e] == A;
          });
          if (!reversible)
            return fail(r,
                        "event of " + describe_edge(g, ea) + " cannot be reversed at s" +
                            std::to_string(node.state) + " although nothing depends on it",
                        a.src, path());
        }
      }
      if (node.depth == bound || !g.expanded[node.state]) {
        if (!g.out[node.state].empty()) ++truncated_paths;
        continue;
      }
      for (auto e : g.out[node.state]) {
        const auto& edge = g.edges[e];
        Counts c = node.counts;
        if (!independent_labels(la, edge.t.label))
          bump(c, ev.event_of[e], edge.t.dir() == Direction::Forward ? 1 : -1);
        if (!seen.insert(key_of(edge.dst, c)).second) continue;
        nodes.push_back({edge.dst, std::move(c), i, e, node.depth + 1});
      }
    }
  }
  r.note = "path bound " + std::to_string(bound) + "; " + std::to_string(truncated_paths) +
           " search frontiers cut at the bound";
  return r;
}

PropertyReport check_round_trip(const LtsGraph& g) {
  PropertyReport r{"round-trip", true, std::nullopt, 0, ""};
  auto rev = reverse_edges(g);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (!g.expanded[g.edges[e].dst]) continue;
    ++r.checked;
    if (rev[e] == std::numeric_limits<std::size_t>::max())
      return fail(r, "no reverse for " + describe_edge(g, e), g.edges[e].src, {e});
  }
  return r;
}

std::vector<std::size_t> terminal_states(const LtsGraph& g) {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < g.size(); ++s) {
    if (!g.expanded[s]) continue;
    bool moves = std::any_of(g.out[s].begin(), g.out[s].end(),
                             [&](auto e) { return g.edges[e].t.dir() == Direction::Forward; });
    if (!moves) out.push_back(s);
  }
  return out;
}

namespace {

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return a > std::numeric_limits<std::uint64_t>::max() - b ? std::numeric_limits<std::uint64_t>::max()
                                                           : a + b;
}

}  // namespace

PropertyReport check_backward_termination(const LtsGraph& g) {
  PropertyReport r{"backward-termination", true, std::nullopt, 0, ""};
  enum Mark : char { Unseen, Active, Good, Bad };
  std::vector<Mark> mark(g.size(), Unseen);
  std::vector<std::uint64_t> schedules(g.size(), 0);
  std::optional<std::size_t> bad_sink;

  // Iterative post-order over backward edges.
  for (std::size_t s0 = 0; s0 < g.size(); ++s0) {
    if (mark[s0] != Unseen) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{s0, 0}};
    mark[s0] = Active;
    while (!stack.empty()) {
      auto& [s, next] = stack.back();
      const auto& outs = g.out[s];
      while (next < outs.size() && g.edges[outs[next]].t.dir() != Direction::Backward) ++next;
      if (next < outs.size()) {
        auto d = g.edges[outs[next++]].dst;
        if (mark[d] == Active) return fail(r, "backward cycle through s" + std::to_string(d), d, {});
        if (mark[d] == Unseen) {
          mark[d] = Active;
          stack.emplace_back(d, 0);
        }
        continue;
      }
      bool any = false, good = true;
      std::uint64_t count = 0;
      for (auto e : outs) {
        if (g.edges[e].t.dir() != Direction::Backward) continue;
        any = true;
        auto d = g.edges[e].dst;
        good = good && mark[d] == Good;
        count = saturating_add(count, schedules[d]);
      }
      if (!any) {
        // A backward sink; unexpanded states are not known to be sinks.
        good = s == g.initial || !g.expanded[s];
        count = 1;
        if (!good && !bad_sink) bad_sink = s;
      }
      mark[s] = good ? Good : Bad;
      schedules[s] = count;
      stack.pop_back();
    }
  }
  r.checked = g.size();
  std::uint64_t total = 0;
  for (auto s : terminal_states(g)) total = saturating_add(total, schedules[s]);
  r.note = std::to_string(total) + " maximal backward schedules from terminal states";
  if (bad_sink)
    return fail(r, "backward execution gets stuck at s" + std::to_string(*bad_sink), *bad_sink,
                path_to(g, *bad_sink));
  return r;
}

PropertyReport check_write_subset_read(const Program& p) {
  PropertyReport r{"write-subset-read", true, std::nullopt, 0, ""};
  for (const auto& b : p.blocks) {
    ++r.checked;
    auto rd = read_set(b), wt = write_set(b);
    if (!std::includes(rd.begin(), rd.end(), wt.begin(), wt.end()))
      return fail(r, "b" + std::to_string(b.id) + " writes " + to_string(wt) + " but reads " + to_string(rd),
                  0, {});
  }
  return r;
}

BackwardSinks backward_sinks(const Lts& lts, const CombinedState& start) {
  struct Memo {
    std::uint64_t schedules;
    std::vector<std::size_t> sinks;
  };
  std::unordered_map<std::string, Memo> memo;
  std::unordered_map<std::string, std::size_t> sink_ids;
  BackwardSinks out;

  std::function<const Memo&(const CombinedState&)> visit = [&](const CombinedState& s) -> const Memo& {
    auto key = state_key(s);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    Memo m{0, {}};
    auto enabled = lts.enabled(s, Direction::Backward);
    if (enabled.empty()) {
      auto [it, fresh] = sink_ids.try_emplace(key, out.sinks.size());
      if (fresh) out.sinks.push_back(s);
      m.schedules = 1;
      m.sinks.push_back(it->second);
    }
    for (const auto& t : enabled) {
      const Memo& sub = visit(lts.step(s, t));
      m.schedules = saturating_add(m.schedules, sub.schedules);
      m.sinks.insert(m.sinks.end(), sub.sinks.begin(), sub.sinks.end());
    }
    std::sort(m.sinks.begin(), m.sinks.end());
    m.sinks.erase(std::unique(m.sinks.begin(), m.sinks.end()), m.sinks.end());
    return memo.emplace(std::move(key), std::move(m)).first->second;
  };
  out.schedules = visit(start).schedules;
  return out;
}

}  // namespace cril
