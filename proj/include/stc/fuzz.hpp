#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "stc/composition.hpp"
#include "stc/core_model.hpp"
#include "stc/parallel_exec.hpp"
#include "stc/program_io.hpp"

namespace stc {

/// xorshift64* (Vigna 2016): shifts 12, 25, 27 and output multiplier
/// 0x2545F4914F6CDD1D. The state is seeded with `seed ^ 0x9E3779B97F4A7C15`
/// (a zero state is replaced by that constant). `below(n)` is `next() % n`.
/// Any implementation following these rules generates the same corpus.
class XorShift64Star {
 public:
  static constexpr std::uint64_t kSeedMix = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kMultiplier = 0x2545F4914F6CDD1DULL;

  explicit XorShift64Star(std::uint64_t seed) : state_(seed ^ kSeedMix) {
    if (state_ == 0) state_ = kSeedMix;
  }

  std::uint64_t next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * kMultiplier;
  }

  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

  /// Uniform in [lo, hi].
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + below(span));
  }

  bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

  template <typename T>
  const T& pick(const std::vector<T>& xs) {
    return xs[below(xs.size())];
  }

 private:
  std::uint64_t state_;
};

struct FuzzConfig {
  std::uint64_t seed = 7;
  std::size_t trials = 500;
  std::size_t max_edges = 8;
  std::size_t max_word_len = 5;
  std::size_t max_list_len = 20;
  std::int64_t int_min = -1000;
  std::int64_t int_max = 1000;
};

/// Seed-deterministic stream of well-typed programs over the builtin
/// registry. One in five is a branch program, one in five a word with a
/// repeated letter, the rest plain words with distinct letters.
class ProgramGenerator {
 public:
  explicit ProgramGenerator(FuzzConfig cfg) : cfg_(cfg), rng_(cfg.seed) {
    if (cfg_.max_edges == 0 || cfg_.max_word_len == 0)
      throw Error(ErrorKind::ValidationError, "fuzz limits must be positive");
  }

  Program next() {
    ids_.clear();
    graph_ = Multigraph{};
    switch (rng_.below(5)) {
      case 0: return branch_program();
      case 1:
        if (cfg_.max_word_len >= 2) return repeated_program();
        [[fallthrough]];
      default: return word_program();
    }
  }

  XorShift64Star& rng() { return rng_; }

 private:
  static const std::vector<std::string>& walkers(const TypeDesc& src) {
    static const std::vector<std::string> ints{"counter_add", "scale_by_state", "add1_tick", "running_sum",
                                               "int_to_str", "int_to_float"};
    static const std::vector<std::string> strs{"append_tag", "str_len"};
    static const std::vector<std::string> floats{"float_accum", "float_floor"};
    switch (src.kind) {
      case TypeDesc::Kind::Str: return strs;
      case TypeDesc::Kind::Float: return floats;
      default: return ints;
    }
  }

  static const std::vector<std::string>& int_endos() {
    static const std::vector<std::string> names{"counter_add", "scale_by_state", "add1_tick", "running_sum"};
    return names;
  }

  std::uint64_t fresh_id() {
    while (true) {
      std::uint64_t id = rng_.below(4 * cfg_.max_edges + 8);
      if (ids_.insert(id).second) return id;
    }
  }

  Value random_value(const TypeDesc& t) {
    switch (t.kind) {
      case TypeDesc::Kind::Int: return Value::integer(rng_.range(cfg_.int_min, cfg_.int_max));
      case TypeDesc::Kind::Float: return Value::floating(static_cast<double>(rng_.range(-400, 400)) / 4.0);
      case TypeDesc::Kind::Str: {
        std::string s;
        for (auto n = rng_.below(5); n > 0; --n) s += static_cast<char>('a' + rng_.below(26));
        return Value::str(s);
      }
      case TypeDesc::Kind::Bool: return Value::boolean(rng_.chance(1, 2));
      default: return Value::unit();
    }
  }

  Value random_state(const TypeDesc& t) {
    if (t.kind == TypeDesc::Kind::Int) return Value::integer(rng_.range(-5, 5));
    if (t.kind == TypeDesc::Kind::Float) return Value::floating(static_cast<double>(rng_.range(-8, 8)) * 0.5);
    return random_value(t);
  }

  ThreadId add_thread(const std::string& fn, BuiltinParams params = {}) {
    auto impl = builtin(fn, params);
    std::uint64_t id = fresh_id();
    graph_ = register_thread(make_thread(id, fn, random_state(impl->state), params), std::move(graph_));
    return ThreadId{id};
  }

  /// Appends `len` random letters whose types chain from `at`.
  TypeDesc walk(Word& w, TypeDesc at, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) {
      ThreadId id = add_thread(rng_.pick(walkers(at)));
      w.letters.push_back(id);
      at = graph_.tgt(id).desc;
    }
    return at;
  }

  Word int_chain(std::size_t len) {
    Word w;
    for (std::size_t i = 0; i < len; ++i) w.letters.push_back(add_thread(rng_.pick(int_endos())));
    return w;
  }

  void add_distractors(std::size_t used) {
    std::size_t target = used + rng_.below(cfg_.max_edges > used ? cfg_.max_edges - used + 1 : 1);
    static const std::vector<TypeDesc> kinds{TypeDesc::integer(), TypeDesc::str(), TypeDesc::floating()};
    while (graph_.edges().size() < target) add_thread(rng_.pick(walkers(rng_.pick(kinds))));
  }

  std::vector<Value> random_input(const TypeDesc& t) {
    std::vector<Value> xs;
    for (auto n = rng_.below(cfg_.max_list_len + 1); n > 0; --n) xs.push_back(random_value(t));
    return xs;
  }

  Program finish(Word w, TypeDesc src) {
    Program p;
    p.input_type = PortType::of(src);
    if (w.empty()) w.anchor = p.input_type;
    add_distractors(w.size());
    p.graph = std::move(graph_);
    p.body = std::move(w);
    p.input = random_input(src);
    return p;
  }

  Program word_program() {
    std::size_t cap = std::min(cfg_.max_word_len, cfg_.max_edges);
    std::size_t len = rng_.chance(1, 20) ? 0 : 1 + rng_.below(cap);
    TypeDesc src = rng_.chance(3, 4) ? TypeDesc::integer() : rng_.chance(1, 2) ? TypeDesc::str() : TypeDesc::floating();
    Word w;
    walk(w, src, len);
    return finish(std::move(w), src);
  }

  Program repeated_program() {
    std::size_t cap = std::min(cfg_.max_word_len, cfg_.max_edges + 1);
    std::size_t len = 2 + rng_.below(cap - 1);  // total length including the repeat
    Word w;
    w.letters.push_back(add_thread(rng_.pick(int_endos())));
    walk(w, TypeDesc::integer(), len - 2);

    // Re-insert an int -> int letter wherever the running type is int.
    std::vector<ThreadId> endos;
    for (ThreadId id : w.letters)
      if (graph_.src(id).desc == TypeDesc::integer() && graph_.tgt(id).desc == TypeDesc::integer()) endos.push_back(id);
    std::vector<std::size_t> slots;
    for (std::size_t pos = 0; pos <= w.letters.size(); ++pos) {
      const TypeDesc& at = pos == 0 ? graph_.src(w.letters[0]).desc : graph_.tgt(w.letters[pos - 1]).desc;
      if (at == TypeDesc::integer()) slots.push_back(pos);
    }
    ThreadId dup = rng_.pick(endos);
    std::size_t pos = rng_.pick(slots);
    w.letters.insert(w.letters.begin() + static_cast<std::ptrdiff_t>(pos), dup);
    return finish(std::move(w), TypeDesc::integer());
  }

  Program branch_program() {
    BranchProgram b;
    b.producer = int_chain(rng_.below(2));
    b.producer.letters.push_back(add_thread("branch_even"));
    b.left = int_chain(rng_.below(3));
    b.right = int_chain(rng_.below(3));
    b.consumer.letters.push_back(add_thread("merge_sum"));
    Word tail = int_chain(rng_.below(2));
    b.consumer.letters.insert(b.consumer.letters.end(), tail.letters.begin(), tail.letters.end());

    Program p;
    p.input_type = PortType::of(TypeDesc::integer());
    detail::anchor_branch(graph_, b, p.input_type);
    p.graph = std::move(graph_);
    p.body = std::move(b);
    p.input = random_input(TypeDesc::integer());
    return p;
  }

  FuzzConfig cfg_;
  XorShift64Star rng_;
  std::set<std::uint64_t> ids_;
  Multigraph graph_;
};

inline Program gen_random_program(const FuzzConfig& cfg) { return ProgramGenerator(cfg).next(); }

// ---------------------------------------------------------------------------
// Equivalence checking

struct Divergence {
  std::string mode;
  std::string detail;
};

struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t digest = 0;
  std::vector<std::string> modes;
  bool equal = true;
  std::optional<Divergence> first;
  std::string program;  // replayable serialization; set on failure
};

struct EquivReport {
  std::vector<TrialRecord> trials;

  std::size_t passed() const {
    return static_cast<std::size_t>(std::count_if(trials.begin(), trials.end(), [](const auto& t) { return t.equal; }));
  }
  bool all_equal() const { return passed() == trials.size(); }

  Json to_json(bool include_passing = false) const {
    Json failures = Json::array();
    Json records = Json::array();
    for (const auto& t : trials) {
      Json r{{"trial", t.trial}, {"digest", digest_hex(t.digest)}, {"modes", t.modes}, {"equal", t.equal}};
      if (t.first) r["first_divergence"] = Json{{"mode", t.first->mode}, {"detail", t.first->detail}};
      if (!t.equal) {
        r["program"] = Json::parse(t.program);
        failures.push_back(r);
      }
      if (include_passing) records.push_back(std::move(r));
    }
    Json out{{"trials", trials.size()}, {"passed", passed()}, {"failures", std::move(failures)}};
    if (include_passing) out["records"] = std::move(records);
    return out;
  }

  static std::string digest_hex(std::uint64_t d) {
    static const char* hex = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, d >>= 4) s[static_cast<std::size_t>(i)] = hex[d & 0xf];
    return s;
  }
};

struct CheckOptions {
  std::vector<std::size_t> worker_counts{1, 2, 4, 8};
  Mutation mutation = Mutation::None;
};

namespace detail {

using RunResult = std::pair<std::vector<Value>, StateStore>;

/// Empty string when equal, otherwise where the two results first differ.
inline std::string first_difference(const RunResult& expected, const RunResult& actual) {
  const auto& [ex, es] = expected;
  const auto& [ax, as] = actual;
  for (std::size_t i = 0; i < std::min(ex.size(), ax.size()); ++i)
    if (!(ex[i] == ax[i]))
      return "output[" + std::to_string(i) + "]: expected " + ex[i].to_string() + ", got " + ax[i].to_string();
  if (ex.size() != ax.size())
    return "output length: expected " + std::to_string(ex.size()) + ", got " + std::to_string(ax.size());
  for (const auto& [id, v] : es.slots()) {
    auto it = as.slots().find(id);
    if (it == as.slots().end()) return "state slot " + to_string(id) + " missing";
    if (!(it->second == v))
      return "state slot " + to_string(id) + ": expected " + v.to_string() + ", got " + it->second.to_string();
  }
  if (es.size() != as.size()) return "state domain differs";
  return {};
}

/// Spot-checks a declared hint on concrete (input, state) pairs.
inline std::string verify_hint(const ThreadSpec& spec, const std::vector<Value>& xs, const Value& sigma) {
  auto cls = classify_thread(spec);
  for (const Value& x : xs) {
    auto [y, s] = spec.apply(x, sigma);
    if (cls.kind == StageKind::ReadOnly && !(s == sigma))
      return "thread " + to_string(spec.id) + " declared ReadOnly but changed its state";
    if (cls.kind == StageKind::Product && !(y == cls.pure_part(x) && s == cls.state_part(sigma)))
      return "thread " + to_string(spec.id) + " declared Product but is not g x h";
  }
  return {};
}

class TrialChecker {
 public:
  TrialChecker(const Program& prog, const CheckOptions& opts, XorShift64Star& rng)
      : prog_(prog), opts_(opts), rng_(rng) {}

  TrialRecord run() {
    record_.digest = program_digest(prog_);
    StateStore init = init_state(prog_.graph);
    RunResult ref;
    try {
      ref = prog_.is_branch() ? eval_branch_ref(prog_.graph, prog_.branch(), prog_.input, init)
                              : eval_psi_ref(prog_.graph, prog_.word(), prog_.input, init);
    } catch (const std::exception& e) {
      fail("reference", e.what());
      return finish();
    }
    if (prog_.is_branch())
      check_branch(ref, init);
    else
      check_word(ref, init);
    return finish();
  }

 private:
  ExecOptions exec(std::size_t workers) const { return {workers, 16, opts_.mutation}; }

  template <typename F>
  void compare(const std::string& mode, const RunResult& expected, F&& run) {
    record_.modes.push_back(mode);
    try {
      std::string diff = first_difference(expected, run());
      if (!diff.empty()) fail(mode, diff);
    } catch (const std::exception& e) {
      fail(mode, std::string("raised ") + e.what());
    }
  }

  void fail(const std::string& mode, const std::string& detail) {
    if (record_.equal) record_.first = Divergence{mode, detail};
    record_.equal = false;
  }

  TrialRecord finish() {
    if (!record_.equal) record_.program = program_json(prog_).dump();
    return std::move(record_);
  }

  void check_word(const RunResult& ref, const StateStore& init) {
    const auto& g = prog_.graph;
    const Word& w = prog_.word();
    const auto& xs = prog_.input;

    if (smap_check(w).ok()) compare("interleaved", ref, [&] { return eval_interleaved(g, w, xs, init); });
    for (std::size_t workers : opts_.worker_counts)
      compare("pipeline/w" + std::to_string(workers), ref, [&] { return run_pipeline(g, w, xs, init, exec(workers)); });
    compare("pipeline/w4/rerun", ref, [&] { return run_pipeline(g, w, xs, init, exec(4)); });
    compare("auto/w4", ref, [&] { return run_auto(g, w, xs, init, exec(4)); });

    // Functor law on a random factorization w = w2 . w1.
    std::size_t cut = rng_.below(w.size() + 1);
    Word w1{{w.letters.begin(), w.letters.begin() + static_cast<std::ptrdiff_t>(cut)}, std::nullopt};
    Word w2{{w.letters.begin() + static_cast<std::ptrdiff_t>(cut), w.letters.end()}, std::nullopt};
    auto vw = validate_word(g, w);
    if (w1.empty()) w1.anchor = vw.src;
    if (w2.empty()) w2.anchor = w1.empty() ? vw.src : validate_word(g, w1).tgt;
    compare("functor/cut" + std::to_string(cut), ref, [&] {
      auto [ys, s] = eval_psi_ref(g, w1, xs, init);
      return eval_psi_ref(g, w2, std::move(ys), std::move(s));
    });

    // Composition law of the single-element semantics on the head element.
    if (!xs.empty()) {
      auto whole = eval_phi(g, w, xs[0], init);
      RunResult expected{{whole.first}, whole.second};
      compare("phi-compose/cut" + std::to_string(cut), expected, [&] {
        auto [y, s] = eval_phi(g, w1, xs[0], init);
        auto [z, s2] = eval_phi(g, w2, std::move(y), std::move(s));
        return RunResult{{std::move(z)}, std::move(s2)};
      });
    }

    // Fast paths on every ReadOnly / Product letter, fed the list and state
    // that reach it in the stage-wise evaluation.
    std::vector<Value> stage_in = xs;
    StateStore stage_state = init;
    for (ThreadId id : w.letters) {
      const ThreadSpec& spec = g.thread(id);
      auto [ys, s] = lift_thread(spec, stage_in, stage_state.at(id));
      auto kind = classify_thread(spec).kind;
      if (kind != StageKind::General) {
        std::string mode = std::string("fastpath/") + to_string(kind) + "/" + to_string(id);
        if (std::string bad = verify_hint(spec, stage_in, stage_state.at(id)); !bad.empty()) {
          record_.modes.push_back(mode);
          fail(mode, bad);
        }
        StateStore single = stage_state;
        single.set(id, s);
        compare(mode, RunResult{ys, single}, [&] {
          auto r = kind == StageKind::ReadOnly ? run_data_parallel_readonly(spec, stage_in, stage_state.at(id), exec(4))
                                               : run_data_parallel_product(spec, stage_in, stage_state.at(id), exec(4));
          StateStore out = stage_state;
          out.set(id, std::move(r.second));
          return RunResult{std::move(r.first), std::move(out)};
        });
      }
      stage_in = std::move(ys);
      stage_state.set(id, std::move(s));
    }
  }

  void check_branch(const RunResult& ref, const StateStore& init) {
    const auto& g = prog_.graph;
    const auto& b = prog_.branch();
    for (std::size_t workers : opts_.worker_counts)
      compare("branch/w" + std::to_string(workers), ref,
              [&] { return run_task_parallel_branch(g, b, prog_.input, init, exec(workers)); });
    compare("branch/w4/rerun", ref, [&] { return run_task_parallel_branch(g, b, prog_.input, init, exec(4)); });

    // split/join round trip on the producer's output.
    auto produced = eval_psi_ref(g, b.producer, prog_.input, init).first;
    record_.modes.push_back("split-join");
    try {
      auto parts = split(produced);
      if (!(join(parts.left, parts.right, parts.flags) == produced)) fail("split-join", "join(split(xs)) != xs");
      if (!(split(join(parts.left, parts.right, parts.flags)) == parts)) fail("split-join", "split(join(..)) differs");
    } catch (const std::exception& e) {
      fail("split-join", e.what());
    }
  }

  const Program& prog_;
  const CheckOptions& opts_;
  XorShift64Star& rng_;
  TrialRecord record_;
};

}  // namespace detail

/// Runs every executor on one program and compares against the sequential
/// reference. `seed` drives the random factorization used for the functor
/// law, so a failing program replays identically.
inline TrialRecord check_program(const Program& prog, const CheckOptions& opts = {}, std::uint64_t seed = 0) {
  XorShift64Star rng(seed ^ program_digest(prog));
  return detail::TrialChecker(prog, opts, rng).run();
}

/// Generates `cfg.trials` programs and checks each. Stops after the first
/// failing trial when `fail_fast` is set.
inline EquivReport check_fuzz(const FuzzConfig& cfg, const CheckOptions& opts = {}, bool fail_fast = false) {
  EquivReport report;
  ProgramGenerator gen(cfg);
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    Program prog = gen.next();
    TrialRecord rec = check_program(prog, opts, cfg.seed);
    rec.trial = t;
    bool ok = rec.equal;
    report.trials.push_back(std::move(rec));
    if (!ok && fail_fast) break;
  }
  return report;
}

}  // namespace stc
