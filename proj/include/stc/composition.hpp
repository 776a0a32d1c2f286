#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "stc/core_model.hpp"
#include "stc/error.hpp"
#include "stc/value.hpp"

namespace stc {

/// A path in the thread multigraph.
///
/// Letters are stored in application order: `letters[0]` runs first. The
/// conventional right-to-left rendering n_k ... n_1 is produced by `render()`.
/// An empty word is the identity path at `anchor`.
struct Word {
  std::vector<ThreadId> letters;
  std::optional<PortType> anchor;

  static Word of(std::initializer_list<std::uint64_t> ids) {
    Word w;
    for (auto n : ids) w.letters.push_back(ThreadId{n});
    return w;
  }
  static Word identity(PortType at) { return Word{{}, std::move(at)}; }

  bool empty() const noexcept { return letters.empty(); }
  std::size_t size() const noexcept { return letters.size(); }

  /// `w2.after(w1)` is the word that runs w1 then w2.
  Word after(const Word& first) const {
    Word w{first.letters, first.anchor};
    w.letters.insert(w.letters.end(), letters.begin(), letters.end());
    if (w.letters.empty()) w.anchor = anchor ? anchor : first.anchor;
    return w;
  }

  std::string render() const {
    if (letters.empty()) return "eps[" + (anchor ? anchor->name : std::string("?")) + "]";
    std::string out;
    for (auto it = letters.rbegin(); it != letters.rend(); ++it) {
      if (!out.empty()) out += ' ';
      out += to_string(*it);
    }
    return out;
  }

  friend bool operator==(const Word&, const Word&) = default;
};

/// A word that has been checked against a graph, with its endpoints.
struct ValidatedWord {
  Word word;
  PortType src;
  PortType tgt;
};

inline ValidatedWord validate_word(const Multigraph& graph, const Word& word) {
  if (word.empty()) {
    if (!word.anchor) throw Error(ErrorKind::ValidationError, "empty word needs an anchor vertex");
    return {word, *word.anchor, *word.anchor};
  }
  for (ThreadId id : word.letters)
    if (!graph.contains(id)) throw Error(ErrorKind::UnknownThreadId, "word letter " + to_string(id) + " is not a thread");
  for (std::size_t i = 0; i + 1 < word.letters.size(); ++i) {
    const PortType& out = graph.tgt(word.letters[i]);
    const PortType& in = graph.src(word.letters[i + 1]);
    if (out.name != in.name)
      throw Error(ErrorKind::PathMismatch, "position " + std::to_string(i + 1) + ": tgt(" + to_string(word.letters[i]) +
                                               ")=" + out.name + " but src(" + to_string(word.letters[i + 1]) +
                                               ")=" + in.name);
  }
  return {word, graph.src(word.letters.front()), graph.tgt(word.letters.back())};
}

/// Letters occurring more than once, in ascending id order.
inline std::set<ThreadId> repeated_letters(const Word& word) {
  std::set<ThreadId> seen, repeated;
  for (ThreadId id : word.letters)
    if (!seen.insert(id).second) repeated.insert(id);
  return repeated;
}

struct SmapCheck {
  std::set<ThreadId> repeated;

  bool ok() const noexcept { return repeated.empty(); }
};

/// Whether the list lifting of the word may be pipelined as a whole.
inline SmapCheck smap_check(const Word& word) { return {repeated_letters(word)}; }

struct WordSegmentation {
  std::vector<Word> segments;  // in application order
};

/// Splits a word into consecutive segments with pairwise-distinct letters.
/// Greedy from the first-applied end: each segment is as long as possible.
inline WordSegmentation segment_word(const Word& word) {
  WordSegmentation seg;
  if (word.empty()) {
    seg.segments.push_back(word);
    return seg;
  }
  Word current;
  std::set<ThreadId> in_current;
  for (ThreadId id : word.letters) {
    if (in_current.count(id)) {
      seg.segments.push_back(std::move(current));
      current = Word{};
      in_current.clear();
    }
    current.letters.push_back(id);
    in_current.insert(id);
  }
  seg.segments.push_back(std::move(current));
  return seg;
}

/// Single-element semantics: extended threads composed in word order. Only
/// slots of letters in the word are written.
inline std::pair<Value, StateStore> eval_phi(const Multigraph& graph, const Word& word, Value x, StateStore state) {
  auto vw = validate_word(graph, word);
  require_type(x, vw.src.desc, "word input");
  for (ThreadId id : word.letters) {
    auto [y, s] = graph.thread(id).apply(x, state.at(id));
    x = std::move(y);
    state.set(id, std::move(s));
  }
  return {std::move(x), std::move(state)};
}

/// List lifting of a single thread on its own slot value.
inline std::pair<std::vector<Value>, Value> lift_thread(const ThreadSpec& spec, const std::vector<Value>& xs,
                                                        Value sigma) {
  std::vector<Value> ys;
  ys.reserve(xs.size());
  for (const Value& x : xs) {
    auto [y, s] = spec.apply(x, sigma);
    ys.push_back(std::move(y));
    sigma = std::move(s);
  }
  return {std::move(ys), std::move(sigma)};
}

/// Stage-wise reference semantics: the first letter consumes the whole list
/// before the next letter starts. This is the canonical result every other
/// executor is compared against.
inline std::pair<std::vector<Value>, StateStore> eval_psi_ref(const Multigraph& graph, const Word& word,
                                                              std::vector<Value> xs, StateStore state) {
  auto vw = validate_word(graph, word);
  for (const Value& x : xs) require_type(x, vw.src.desc, "list input");
  for (ThreadId id : word.letters) {
    auto [ys, s] = lift_thread(graph.thread(id), xs, state.at(id));
    xs = std::move(ys);
    state.set(id, std::move(s));
  }
  return {std::move(xs), std::move(state)};
}

/// Element-at-a-time semantics: the whole word runs on the head element, then
/// on the next one with the updated state. Defined only for words without
/// repeated letters, where it agrees with `eval_psi_ref`.
inline std::pair<std::vector<Value>, StateStore> eval_interleaved(const Multigraph& graph, const Word& word,
                                                                  const std::vector<Value>& xs, StateStore state) {
  validate_word(graph, word);
  if (auto rep = repeated_letters(word); !rep.empty())
    throw Error(ErrorKind::RepeatedLetter, "letter " + to_string(*rep.begin()) + " occurs more than once in " +
                                               word.render());
  std::vector<Value> ys;
  ys.reserve(xs.size());
  for (const Value& x : xs) {
    auto [y, s] = eval_phi(graph, word, x, std::move(state));
    ys.push_back(std::move(y));
    state = std::move(s);
  }
  return {std::move(ys), std::move(state)};
}

}  // namespace stc
