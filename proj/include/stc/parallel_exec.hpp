#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "stc/channel.hpp"
#include "stc/composition.hpp"
#include "stc/core_model.hpp"
#include "stc/error.hpp"
#include "stc/value.hpp"

namespace stc {

/// Deliberate executor faults used to show that the equivalence checks have
/// teeth. Never set outside of mutation testing.
enum class Mutation {
  None,
  DropStateUpdate,        // stages keep their initial state
  SwapStageOrder,         // first two pipeline stages exchanged
  IgnoreJoinFlags,        // join concatenates left results before right ones
  DropStageStateForward,  // final per-stage states never reach the store
  RemoveSegmentBarrier,   // segments start from the pre-run state snapshot
};

inline const char* to_string(Mutation m) {
  switch (m) {
    case Mutation::None: return "none";
    case Mutation::DropStateUpdate: return "drop-state-update";
    case Mutation::SwapStageOrder: return "swap-stage-order";
    case Mutation::IgnoreJoinFlags: return "ignore-join-flags";
    case Mutation::DropStageStateForward: return "drop-stage-state-forward";
    case Mutation::RemoveSegmentBarrier: return "remove-segment-barrier";
  }
  return "?";
}

inline std::optional<Mutation> parse_mutation(const std::string& s) {
  for (Mutation m : {Mutation::None, Mutation::DropStateUpdate, Mutation::SwapStageOrder, Mutation::IgnoreJoinFlags,
                     Mutation::DropStageStateForward, Mutation::RemoveSegmentBarrier})
    if (s == to_string(m)) return m;
  return std::nullopt;
}

struct ExecOptions {
  std::size_t workers = 4;
  std::size_t channel_capacity = 16;
  Mutation mutation = Mutation::None;
};

// ---------------------------------------------------------------------------
// Classification and data-parallel fast paths

enum class StageKind { General, ReadOnly, Product };

inline const char* to_string(StageKind k) {
  switch (k) {
    case StageKind::General: return "General";
    case StageKind::ReadOnly: return "ReadOnly";
    case StageKind::Product: return "Product";
  }
  return "?";
}

struct StageClassification {
  StageKind kind = StageKind::General;
  // Set for Product: the value part g and the state part h.
  UnaryFn pure_part;
  UnaryFn state_part;
};

/// Classification comes from the registry hint only; black-box sampling can
/// never prove a thread read-only, so nothing is inferred.
inline StageClassification classify_thread(const ThreadSpec& spec) {
  switch (spec.hint) {
    case Hint::ReadOnly: return {StageKind::ReadOnly, {}, {}};
    case Hint::Product:
      if (spec.impl && spec.impl->pure_part && spec.impl->state_part)
        return {StageKind::Product, spec.impl->pure_part, spec.impl->state_part};
      return {};
    case Hint::None: break;
  }
  return {};
}

namespace detail {

/// Runs `body(begin, end)` over `n` indices split into at most `workers`
/// contiguous chunks, one thread per chunk. Rethrows the first exception.
inline void parallel_chunks(std::size_t n, std::size_t workers, const std::function<void(std::size_t, std::size_t)>& body) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers <= 1) {
    if (n) body(0, n);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mu;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      std::size_t begin = n * w / workers, end = n * (w + 1) / workers;
      pool.emplace_back([&, begin, end] {
        try {
          body(begin, end);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

inline void require_positive_workers(std::size_t workers) {
  if (workers == 0) throw Error(ErrorKind::ValidationError, "worker count must be positive");
}

}  // namespace detail

/// Lifting of a read-only thread: a plain parallel map with the state held
/// fixed.
inline std::pair<std::vector<Value>, Value> run_data_parallel_readonly(const ThreadSpec& spec,
                                                                       const std::vector<Value>& xs,
                                                                       const Value& sigma,
                                                                       const ExecOptions& opts = {}) {
  detail::require_positive_workers(opts.workers);
  if (classify_thread(spec).kind != StageKind::ReadOnly)
    throw Error(ErrorKind::ValidationError, "thread " + to_string(spec.id) + " is not classified ReadOnly");
  std::vector<Value> ys(xs.size());
  detail::parallel_chunks(xs.size(), opts.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) ys[i] = spec.apply(xs[i], sigma).first;
  });
  return {std::move(ys), sigma};
}

/// Lifting of a product thread g x h: `map g xs` in parallel, while a separate
/// task iterates h once per element.
inline std::pair<std::vector<Value>, Value> run_data_parallel_product(const ThreadSpec& spec,
                                                                      const std::vector<Value>& xs,
                                                                      const Value& sigma,
                                                                      const ExecOptions& opts = {}) {
  detail::require_positive_workers(opts.workers);
  auto cls = classify_thread(spec);
  if (cls.kind != StageKind::Product)
    throw Error(ErrorKind::ValidationError, "thread " + to_string(spec.id) + " is not classified Product");
  require_type(sigma, spec.state_type.desc, "thread " + to_string(spec.id) + " state");

  Value final_state = sigma;
  std::exception_ptr state_error;
  std::vector<Value> ys(xs.size());
  {
    std::jthread state_task([&] {
      try {
        if (opts.mutation == Mutation::DropStateUpdate) return;
        for (std::size_t i = 0; i < xs.size(); ++i) final_state = cls.state_part(final_state);
        require_type(final_state, spec.state_type.desc, "thread " + to_string(spec.id) + " new state");
      } catch (...) {
        state_error = std::current_exception();
      }
    });
    detail::parallel_chunks(xs.size(), opts.workers, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        require_type(xs[i], spec.src.desc, "thread " + to_string(spec.id) + " input");
        ys[i] = cls.pure_part(xs[i]);
        require_type(ys[i], spec.tgt.desc, "thread " + to_string(spec.id) + " output");
      }
    });
  }
  if (state_error) std::rethrow_exception(state_error);
  return {std::move(ys), std::move(final_state)};
}

// ---------------------------------------------------------------------------
// Pipeline executor

namespace detail {

struct StageMessage {
  enum class Kind { Item, State, End };
  Kind kind = Kind::Item;
  ThreadId id;
  Value value;
};

/// Pipelines one segment whose letters are pairwise distinct. Stages are
/// split into at most `workers` contiguous groups; each group runs on its own
/// thread and owns the private states of its stages until end of stream.
inline std::pair<std::vector<Value>, StateStore> pipeline_segment(const Multigraph& graph, std::vector<ThreadId> stages,
                                                                  const std::vector<Value>& xs, StateStore state,
                                                                  const ExecOptions& opts) {
  if (!repeated_letters(Word{stages, std::nullopt}).empty())
    throw Error(ErrorKind::RepeatedLetter, "RepeatedLetterInSegment: pipeline segment has a repeated letter");
  if (opts.mutation == Mutation::SwapStageOrder && stages.size() >= 2) std::swap(stages[0], stages[1]);

  const std::size_t k = stages.size();
  const std::size_t groups = std::min(opts.workers, k);
  using Channel = BoundedChannel<StageMessage>;
  // channels[g] carries the output of group g; the last one feeds the caller.
  std::vector<std::unique_ptr<Channel>> channels;
  for (std::size_t g = 0; g < groups; ++g) channels.push_back(std::make_unique<Channel>(opts.channel_capacity));

  std::exception_ptr error;
  std::mutex error_mu;
  auto abort_all = [&](std::exception_ptr e) {
    {
      std::lock_guard lock(error_mu);
      if (!error) error = e;
    }
    for (auto& c : channels) c->close();
  };

  std::vector<Value> ys;
  ys.reserve(xs.size());
  {
    std::vector<std::jthread> workers;
    workers.reserve(groups);
    for (std::size_t g = 0; g < groups; ++g) {
      std::size_t begin = k * g / groups, end = k * (g + 1) / groups;
      std::vector<const ThreadSpec*> owned;
      std::vector<Value> local;
      for (std::size_t i = begin; i < end; ++i) {
        owned.push_back(&graph.thread(stages[i]));
        local.push_back(state.at(stages[i]));
      }
      workers.emplace_back([&, g, owned = std::move(owned), local = std::move(local)]() mutable {
        Channel* in = g == 0 ? nullptr : channels[g - 1].get();
        Channel& out = *channels[g];
        auto send = [&](StageMessage m) {
          if (!out.push(std::move(m))) throw Error(ErrorKind::ChannelClosed, "downstream channel closed");
        };
        auto process = [&](Value x) {
          for (std::size_t i = 0; i < owned.size(); ++i) {
            auto [y, s] = owned[i]->apply(x, local[i]);
            x = std::move(y);
            if (opts.mutation != Mutation::DropStateUpdate) local[i] = std::move(s);
          }
          send({StageMessage::Kind::Item, {}, std::move(x)});
        };
        auto finish = [&] {
          if (opts.mutation != Mutation::DropStageStateForward)
            for (std::size_t i = 0; i < owned.size(); ++i)
              send({StageMessage::Kind::State, owned[i]->id, std::move(local[i])});
          send({StageMessage::Kind::End, {}, {}});
        };
        try {
          if (in == nullptr) {
            for (const Value& x : xs) process(x);
            finish();
            return;
          }
          while (true) {
            auto msg = in->pop();
            if (!msg) throw Error(ErrorKind::ChannelClosed, "upstream channel closed");
            switch (msg->kind) {
              case StageMessage::Kind::Item: process(std::move(msg->value)); break;
              case StageMessage::Kind::State: send(std::move(*msg)); break;
              case StageMessage::Kind::End: finish(); return;
            }
          }
        } catch (...) {
          abort_all(std::current_exception());
        }
      });
    }

    // Sink: collect outputs in order and reassemble the per-stage states.
    Channel& last = *channels.back();
    while (true) {
      auto msg = last.pop();
      if (!msg) break;
      if (msg->kind == StageMessage::Kind::Item) {
        ys.push_back(std::move(msg->value));
      } else if (msg->kind == StageMessage::Kind::State) {
        state.set(msg->id, std::move(msg->value));
      } else {
        break;
      }
    }
  }
  if (error) std::rethrow_exception(error);
  if (ys.size() != xs.size()) throw Error(ErrorKind::ChannelClosed, "pipeline ended early");
  return {std::move(ys), std::move(state)};
}

}  // namespace detail

/// Pipelined list lifting of a word. The word is cut into repeated-letter-free
/// segments which run back to back; within a segment every letter is one
/// stage and elements stream through bounded FIFOs. Bit-exactly equal to
/// `eval_psi_ref`.
inline std::pair<std::vector<Value>, StateStore> run_pipeline(const Multigraph& graph, const Word& word,
                                                              std::vector<Value> xs, StateStore state,
                                                              const ExecOptions& opts = {}) {
  detail::require_positive_workers(opts.workers);
  auto vw = validate_word(graph, word);
  for (const Value& x : xs) require_type(x, vw.src.desc, "list input");
  if (word.empty() || xs.empty()) return {std::move(xs), std::move(state)};

  const StateStore before = state;
  for (const Word& seg : segment_word(word).segments) {
    StateStore seg_in = opts.mutation == Mutation::RemoveSegmentBarrier ? before : state;
    StateStore seg_out;
    if (seg.size() == 1) {
      const ThreadSpec& spec = graph.thread(seg.letters[0]);
      auto [ys, s] = lift_thread(spec, xs, seg_in.at(spec.id));
      if (opts.mutation != Mutation::DropStateUpdate) seg_in.set(spec.id, std::move(s));
      xs = std::move(ys);
      seg_out = std::move(seg_in);
    } else {
      std::tie(xs, seg_out) = detail::pipeline_segment(graph, seg.letters, xs, std::move(seg_in), opts);
    }
    for (ThreadId id : seg.letters) state.set(id, seg_out.at(id));
  }
  return {std::move(xs), std::move(state)};
}

/// Stage-wise evaluation that uses the data-parallel fast path for every
/// ReadOnly or Product letter and pipelines maximal runs of General letters.
inline std::pair<std::vector<Value>, StateStore> run_auto(const Multigraph& graph, const Word& word,
                                                          std::vector<Value> xs, StateStore state,
                                                          const ExecOptions& opts = {}) {
  detail::require_positive_workers(opts.workers);
  auto vw = validate_word(graph, word);
  for (const Value& x : xs) require_type(x, vw.src.desc, "list input");

  Word run;
  auto flush = [&] {
    if (run.empty()) return;
    std::tie(xs, state) = run_pipeline(graph, run, std::move(xs), std::move(state), opts);
    run = Word{};
  };
  for (ThreadId id : word.letters) {
    const ThreadSpec& spec = graph.thread(id);
    auto kind = classify_thread(spec).kind;
    if (kind == StageKind::General) {
      run.letters.push_back(id);
      continue;
    }
    flush();
    auto [ys, s] = kind == StageKind::ReadOnly ? run_data_parallel_readonly(spec, xs, state.at(id), opts)
                                               : run_data_parallel_product(spec, xs, state.at(id), opts);
    xs = std::move(ys);
    state.set(id, std::move(s));
  }
  flush();
  return {std::move(xs), std::move(state)};
}

// ---------------------------------------------------------------------------
// Coproduct branching

/// Order of inl (true) and inr (false) elements in a split sum list.
struct FlagList {
  std::vector<bool> flags;

  friend bool operator==(const FlagList&, const FlagList&) = default;
};

struct SplitResult {
  std::vector<Value> left;
  std::vector<Value> right;
  FlagList flags;

  friend bool operator==(const SplitResult&, const SplitResult&) = default;
};

inline SplitResult split(const std::vector<Value>& xs) {
  SplitResult r;
  r.flags.flags.reserve(xs.size());
  for (const Value& x : xs) {
    if (!x.is_sum()) throw Error(ErrorKind::TypeError, "split expects sum values, got " + x.to_string());
    bool is_left = x.tag() == Value::Tag::SumL;
    (is_left ? r.left : r.right).push_back(x.injected());
    r.flags.flags.push_back(is_left);
  }
  return r;
}

/// Inverse of `split`: re-interleaves the two lists in the order the flags
/// record. Throws FlagMismatch if the flags and list lengths disagree.
inline std::vector<Value> join(const std::vector<Value>& left, const std::vector<Value>& right, const FlagList& flags) {
  std::vector<Value> out;
  out.reserve(flags.flags.size());
  std::size_t li = 0, ri = 0;
  for (std::size_t i = 0; i < flags.flags.size(); ++i) {
    if (flags.flags[i]) {
      if (li == left.size())
        throw Error(ErrorKind::FlagMismatch, "flag " + std::to_string(i) + " wants a left element but none remain");
      out.push_back(Value::inl(left[li++]));
    } else {
      if (ri == right.size())
        throw Error(ErrorKind::FlagMismatch, "flag " + std::to_string(i) + " wants a right element but none remain");
      out.push_back(Value::inr(right[ri++]));
    }
  }
  if (li != left.size() || ri != right.size())
    throw Error(ErrorKind::FlagMismatch, "flags exhausted with " + std::to_string(left.size() - li) + " left and " +
                                             std::to_string(right.size() - ri) + " right elements unused");
  return out;
}

/// producer : a -> b + c, left : b -> b', right : c -> c',
/// consumer : b' + c' -> d. The four words use disjoint letters.
struct BranchProgram {
  Word producer;
  Word left;
  Word right;
  Word consumer;

  friend bool operator==(const BranchProgram&, const BranchProgram&) = default;
};

struct ValidatedBranch {
  PortType src;
  PortType tgt;
};

inline ValidatedBranch validate_branch(const Multigraph& graph, const BranchProgram& prog) {
  std::set<ThreadId> seen;
  for (const Word* w : {&prog.producer, &prog.left, &prog.right, &prog.consumer})
    for (ThreadId id : std::set<ThreadId>(w->letters.begin(), w->letters.end()))
      if (!seen.insert(id).second)
        throw Error(ErrorKind::ValidationError, "branch words share thread " + to_string(id));

  auto p = validate_word(graph, prog.producer);
  if (p.tgt.desc.kind != TypeDesc::Kind::Sum)
    throw Error(ErrorKind::ValidationError, "branch producer must end in a sum type, got " + p.tgt.name);
  auto l = validate_word(graph, prog.left);
  auto r = validate_word(graph, prog.right);
  auto c = validate_word(graph, prog.consumer);
  if (!(l.src.desc == p.tgt.desc.left()))
    throw Error(ErrorKind::ValidationError, "left branch expects " + l.src.name + " but producer yields " + p.tgt.name);
  if (!(r.src.desc == p.tgt.desc.right()))
    throw Error(ErrorKind::ValidationError, "right branch expects " + r.src.name + " but producer yields " + p.tgt.name);
  if (!(c.src.desc == TypeDesc::sum(l.tgt.desc, r.tgt.desc)))
    throw Error(ErrorKind::ValidationError, "consumer expects " + c.src.name + " but branches yield sum(" +
                                                l.tgt.name + "," + r.tgt.name + ")");
  return {p.src, c.tgt};
}

/// Sequential reference for a branch program: smap of each word in turn,
/// with split and join around the two branches.
inline std::pair<std::vector<Value>, StateStore> eval_branch_ref(const Multigraph& graph, const BranchProgram& prog,
                                                                 std::vector<Value> xs, StateStore state) {
  validate_branch(graph, prog);
  std::tie(xs, state) = eval_psi_ref(graph, prog.producer, std::move(xs), std::move(state));
  auto parts = split(xs);
  auto [bs, s2] = eval_psi_ref(graph, prog.left, std::move(parts.left), std::move(state));
  auto [cs, s3] = eval_psi_ref(graph, prog.right, std::move(parts.right), std::move(s2));
  auto ds = join(bs, cs, parts.flags);
  return eval_psi_ref(graph, prog.consumer, std::move(ds), std::move(s3));
}

/// Task-parallel branch execution: both branches run concurrently on their
/// own copy of the store and only write back the slots they own.
inline std::pair<std::vector<Value>, StateStore> run_task_parallel_branch(const Multigraph& graph,
                                                                          const BranchProgram& prog,
                                                                          std::vector<Value> xs, StateStore state,
                                                                          const ExecOptions& opts = {}) {
  detail::require_positive_workers(opts.workers);
  validate_branch(graph, prog);
  std::tie(xs, state) = run_pipeline(graph, prog.producer, std::move(xs), std::move(state), opts);
  auto parts = split(xs);

  std::pair<std::vector<Value>, StateStore> left_result, right_result;
  std::exception_ptr left_error;
  {
    std::jthread left_task([&] {
      try {
        left_result = run_pipeline(graph, prog.left, std::move(parts.left), state, opts);
      } catch (...) {
        left_error = std::current_exception();
      }
    });
    right_result = run_pipeline(graph, prog.right, std::move(parts.right), state, opts);
  }
  if (left_error) std::rethrow_exception(left_error);

  for (ThreadId id : prog.left.letters) state.set(id, left_result.second.at(id));
  for (ThreadId id : prog.right.letters) state.set(id, right_result.second.at(id));

  std::vector<Value> ds;
  if (opts.mutation == Mutation::IgnoreJoinFlags) {
    for (auto& b : left_result.first) ds.push_back(Value::inl(std::move(b)));
    for (auto& c : right_result.first) ds.push_back(Value::inr(std::move(c)));
  } else {
    ds = join(left_result.first, right_result.first, parts.flags);
  }
  return run_pipeline(graph, prog.consumer, std::move(ds), std::move(state), opts);
}

}  // namespace stc
