#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "stc/builtins.hpp"
#include "stc/error.hpp"
#include "stc/types.hpp"
#include "stc/value.hpp"

namespace stc {

/// Index of a fundamental state thread. Doubles as the edge label in the
/// multigraph and as the key of its private state slot.
struct ThreadId {
  std::uint64_t n = 0;

  friend auto operator<=>(const ThreadId&, const ThreadId&) = default;
};

inline std::string to_string(ThreadId id) { return std::to_string(id.n); }

/// One fundamental state thread: a transfer function (input, state) ->
/// (output, state) that owns exactly one private state slot.
struct ThreadSpec {
  ThreadId id;
  PortType src;
  PortType tgt;
  PortType state_type;
  Value init_state;
  std::string fn_name;
  BuiltinParams params;
  Hint hint = Hint::None;
  std::shared_ptr<const BuiltinEntry> impl;

  /// Applies the transfer function with type checks on both sides.
  std::pair<Value, Value> apply(const Value& x, const Value& state) const {
    require_type(x, src.desc, "thread " + to_string(id) + " input");
    require_type(state, state_type.desc, "thread " + to_string(id) + " state");
    auto out = impl->fn(x, state);
    require_type(out.first, tgt.desc, "thread " + to_string(id) + " output");
    require_type(out.second, state_type.desc, "thread " + to_string(id) + " new state");
    return out;
  }

  /// Equality of the declared parts; the resolved implementation is derived.
  friend bool operator==(const ThreadSpec& a, const ThreadSpec& b) {
    return a.id == b.id && a.src == b.src && a.tgt == b.tgt && a.state_type == b.state_type &&
           a.init_state == b.init_state && a.fn_name == b.fn_name && a.params == b.params && a.hint == b.hint;
  }
};

/// Builds a thread from the builtin registry. `src_name`/`tgt_name` rename the
/// endpoint vertices; the structural types always come from the builtin.
inline ThreadSpec make_thread(std::uint64_t id, const std::string& fn_name, std::optional<Value> init = std::nullopt,
                              BuiltinParams params = {}, std::optional<std::string> src_name = std::nullopt,
                              std::optional<std::string> tgt_name = std::nullopt) {
  auto impl = builtin(fn_name, params);
  ThreadSpec spec;
  spec.id = ThreadId{id};
  spec.src = PortType::of(impl->src);
  spec.tgt = PortType::of(impl->tgt);
  if (src_name) spec.src.name = *src_name;
  if (tgt_name) spec.tgt.name = *tgt_name;
  spec.state_type = PortType::of(impl->state);
  spec.init_state = init.value_or(impl->default_state);
  require_type(spec.init_state, impl->state, "init_state of thread " + std::to_string(id));
  spec.fn_name = fn_name;
  spec.params = std::move(params);
  spec.hint = impl->hint;
  spec.impl = std::move(impl);
  return spec;
}

/// Directed multigraph of fundamental state threads. Vertices are port types
/// keyed by name, edges are thread ids.
class Multigraph {
 public:
  const std::map<std::string, PortType>& vertices() const noexcept { return vertices_; }
  const std::map<ThreadId, ThreadSpec>& edges() const noexcept { return edges_; }

  friend bool operator==(const Multigraph&, const Multigraph&) = default;

  bool contains(ThreadId id) const { return edges_.count(id) != 0; }

  const ThreadSpec& thread(ThreadId id) const {
    auto it = edges_.find(id);
    if (it == edges_.end()) throw Error(ErrorKind::UnknownThreadId, "thread " + to_string(id) + " is not in the graph");
    return it->second;
  }

  const PortType& src(ThreadId id) const { return thread(id).src; }
  const PortType& tgt(ThreadId id) const { return thread(id).tgt; }

  /// Registers a vertex without an incident edge, e.g. the anchor of an
  /// empty word.
  void add_vertex(const PortType& v) {
    auto [it, inserted] = vertices_.emplace(v.name, v);
    if (!inserted && !(it->second.desc == v.desc))
      throw Error(ErrorKind::ConflictingVertex, "vertex \"" + v.name + "\" declared as " + to_string(it->second.desc) +
                                                    " and " + to_string(v.desc));
  }

 private:
  friend Multigraph register_thread(ThreadSpec spec, Multigraph graph);

  std::map<std::string, PortType> vertices_;
  std::map<ThreadId, ThreadSpec> edges_;
};

/// Adds a thread to the graph, extending the vertex set with its endpoints.
inline Multigraph register_thread(ThreadSpec spec, Multigraph graph) {
  if (graph.contains(spec.id)) throw Error(ErrorKind::DuplicateThreadId, "thread id " + to_string(spec.id));
  if (!spec.impl) spec.impl = builtin(spec.fn_name, spec.params);
  graph.add_vertex(spec.src);
  graph.add_vertex(spec.tgt);
  ThreadId id = spec.id;
  graph.edges_.emplace(id, std::move(spec));
  return graph;
}

/// The global state: one slot per thread of the governing graph.
class StateStore {
 public:
  StateStore() = default;
  explicit StateStore(std::map<ThreadId, Value> slots) : slots_(std::move(slots)) {}

  const Value& at(ThreadId id) const {
    auto it = slots_.find(id);
    if (it == slots_.end()) throw Error(ErrorKind::UnknownThreadId, "no state slot for thread " + to_string(id));
    return it->second;
  }

  /// Overwrites an existing slot. The domain never grows or shrinks.
  void set(ThreadId id, Value v) {
    auto it = slots_.find(id);
    if (it == slots_.end()) throw Error(ErrorKind::UnknownThreadId, "no state slot for thread " + to_string(id));
    it->second = std::move(v);
  }

  const std::map<ThreadId, Value>& slots() const noexcept { return slots_; }
  std::size_t size() const noexcept { return slots_.size(); }
  bool empty() const noexcept { return slots_.empty(); }

  friend bool operator==(const StateStore&, const StateStore&) = default;

 private:
  std::map<ThreadId, Value> slots_;
};

inline StateStore init_state(const Multigraph& graph) {
  std::map<ThreadId, Value> slots;
  for (const auto& [id, spec] : graph.edges()) slots.emplace(id, spec.init_state);
  return StateStore(std::move(slots));
}

/// True iff the multigraph has no directed cycle. A self-loop is a cycle;
/// parallel edges are not.
inline bool is_acyclic(const Multigraph& graph) {
  std::map<std::string, std::vector<std::string>> succ;
  for (const auto& [id, spec] : graph.edges()) succ[spec.src.name].push_back(spec.tgt.name);

  enum class Mark { White, Grey, Black };
  std::map<std::string, Mark> mark;
  for (const auto& [name, _] : graph.vertices()) mark[name] = Mark::White;

  // Iterative DFS; a grey successor closes a cycle.
  for (const auto& [root, _] : graph.vertices()) {
    if (mark[root] != Mark::White) continue;
    std::vector<std::pair<std::string, std::size_t>> stack{{root, 0}};
    mark[root] = Mark::Grey;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      const auto& out = succ[v];
      if (next == out.size()) {
        mark[v] = Mark::Black;
        stack.pop_back();
        continue;
      }
      const std::string w = out[next++];
      if (mark[w] == Mark::Grey) return false;
      if (mark[w] == Mark::White) {
        mark[w] = Mark::Grey;
        stack.emplace_back(w, 0);
      }
    }
  }
  return true;
}

}  // namespace stc
