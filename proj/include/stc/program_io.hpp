#pragma once

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "stc/composition.hpp"
#include "stc/core_model.hpp"
#include "stc/error.hpp"
#include "stc/parallel_exec.hpp"
#include "stc/value.hpp"

namespace stc {

using Json = nlohmann::ordered_json;

/// A runnable unit: graph, word (or branch program) and typed input list.
///
/// File format (UTF-8 JSON):
///
///   {
///     "threads": [{"id": 1, "fn": "counter_add", "init_state": 0, "params": {}}],
///     "word": [1, 2],            // application order: first-applied first
///     "anchor": "int",           // required iff "word" is []
///     "input": [10, 20, 30],
///     "input_type": "int"
///   }
///
/// "word" may instead be {"branch": {"producer": [...], "left": [...],
/// "right": [...], "consumer": [...]}}.
struct Program {
  Multigraph graph;
  std::variant<Word, BranchProgram> body;
  std::vector<Value> input;
  PortType input_type;

  bool is_branch() const noexcept { return std::holds_alternative<BranchProgram>(body); }
  const Word& word() const { return std::get<Word>(body); }
  const BranchProgram& branch() const { return std::get<BranchProgram>(body); }

  friend bool operator==(const Program&, const Program&) = default;
};

// ---------------------------------------------------------------------------
// Typed value codec: null, bool, integer, number, string, array for lists,
// [a, b] for pairs, {"inl": v} / {"inr": v} for sums.

inline Json encode_value(const Value& v) {
  using T = Value::Tag;
  switch (v.tag()) {
    case T::Unit: return nullptr;
    case T::Bool: return v.as_bool();
    case T::Int: return v.as_int();
    case T::Float: return v.as_float();
    case T::Str: return v.as_str();
    case T::List: {
      Json arr = Json::array();
      for (const auto& x : v.items()) arr.push_back(encode_value(x));
      return arr;
    }
    case T::Pair: return Json::array({encode_value(v.first()), encode_value(v.second())});
    case T::SumL: return Json{{"inl", encode_value(v.injected())}};
    case T::SumR: return Json{{"inr", encode_value(v.injected())}};
  }
  return nullptr;
}

inline Value decode_value(const Json& j, const TypeDesc& t, const std::string& path) {
  using K = TypeDesc::Kind;
  auto bad = [&]() -> Error {
    return Error(ErrorKind::SchemaError, path + ": expected " + to_string(t) + ", got " + j.dump());
  };
  switch (t.kind) {
    case K::Unit:
      if (!j.is_null()) throw bad();
      return Value::unit();
    case K::Bool:
      if (!j.is_boolean()) throw bad();
      return Value::boolean(j.get<bool>());
    case K::Int:
      if (j.is_number_integer()) return Value::integer(j.get<std::int64_t>());
      throw bad();
    case K::Float:
      if (!j.is_number()) throw bad();
      return Value::floating(j.get<double>());
    case K::Str:
      if (!j.is_string()) throw bad();
      return Value::str(j.get<std::string>());
    case K::List: {
      if (!j.is_array()) throw bad();
      std::vector<Value> items;
      for (std::size_t i = 0; i < j.size(); ++i)
        items.push_back(decode_value(j[i], t.args[0], path + "[" + std::to_string(i) + "]"));
      return Value::list(t.args[0], std::move(items));
    }
    case K::Pair:
      if (!j.is_array() || j.size() != 2) throw bad();
      return Value::pair(decode_value(j[0], t.args[0], path + "[0]"), decode_value(j[1], t.args[1], path + "[1]"));
    case K::Sum:
      if (!j.is_object() || j.size() != 1) throw bad();
      if (j.contains("inl")) return Value::inl(decode_value(j["inl"], t.args[0], path + ".inl"));
      if (j.contains("inr")) return Value::inr(decode_value(j["inr"], t.args[1], path + ".inr"));
      throw bad();
  }
  throw bad();
}

// ---------------------------------------------------------------------------
// Program files

namespace detail {

inline std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

inline const Json& field(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw Error(ErrorKind::SchemaError, path + "." + key + ": missing");
  return obj[key];
}

inline Word parse_letters(const Json& j, const std::string& path) {
  if (!j.is_array()) throw Error(ErrorKind::SchemaError, path + ": expected an array of thread ids");
  Word w;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_unsigned() && !(j[i].is_number_integer() && j[i].get<std::int64_t>() >= 0))
      throw Error(ErrorKind::SchemaError, path + "[" + std::to_string(i) + "]: expected a non-negative integer");
    w.letters.push_back(ThreadId{j[i].get<std::uint64_t>()});
  }
  return w;
}

inline Json letters_json(const Word& w) {
  Json arr = Json::array();
  for (ThreadId id : w.letters) arr.push_back(id.n);
  return arr;
}

inline BuiltinParams parse_params(const Json& j, const std::string& path) {
  BuiltinParams p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw Error(ErrorKind::SchemaError, path + ": expected an object");
  for (const auto& [key, val] : j.items()) {
    if (key == "ms") {
      if (!val.is_number_integer() || val.get<std::int64_t>() < 0)
        throw Error(ErrorKind::SchemaError, path + ".ms: expected a non-negative integer");
      p.delay_ms = val.get<std::int64_t>();
    } else if (key == "type") {
      if (!val.is_string()) throw Error(ErrorKind::SchemaError, path + ".type: expected a type string");
      p.type = parse_type(val.get<std::string>());
    } else {
      throw Error(ErrorKind::SchemaError, path + "." + key + ": unknown parameter");
    }
  }
  return p;
}

inline Json params_json(const BuiltinParams& p) {
  Json j = Json::object();
  if (p.delay_ms) j["ms"] = *p.delay_ms;
  if (p.type) j["type"] = to_string(*p.type);
  return j;
}

/// Empty branch sub-words take their anchor from the neighbouring types.
inline void anchor_branch(const Multigraph& graph, BranchProgram& b, const PortType& input_type) {
  if (b.producer.empty()) b.producer.anchor = input_type;
  PortType sum = validate_word(graph, b.producer).tgt;
  if (sum.desc.kind != TypeDesc::Kind::Sum)
    throw Error(ErrorKind::ValidationError, "branch producer must end in a sum type, got " + sum.name);
  if (b.left.empty()) b.left.anchor = PortType::of(sum.desc.left());
  if (b.right.empty()) b.right.anchor = PortType::of(sum.desc.right());
  if (b.consumer.empty())
    b.consumer.anchor = PortType::of(TypeDesc::sum(validate_word(graph, b.left).tgt.desc,
                                                   validate_word(graph, b.right).tgt.desc));
}

}  // namespace detail

/// Parses and fully validates a program file.
inline Program parse_program(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, "line " + std::to_string(detail::line_of(text, e.byte)) + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::SchemaError, "$: expected an object");

  Program prog;
  const Json& threads = detail::field(doc, "threads", "$");
  if (!threads.is_array()) throw Error(ErrorKind::SchemaError, "$.threads: expected an array");
  for (std::size_t i = 0; i < threads.size(); ++i) {
    std::string path = "$.threads[" + std::to_string(i) + "]";
    const Json& t = threads[i];
    const Json& id = detail::field(t, "id", path);
    if (!id.is_number_integer() || id.get<std::int64_t>() < 0)
      throw Error(ErrorKind::SchemaError, path + ".id: expected a non-negative integer");
    const Json& fn = detail::field(t, "fn", path);
    if (!fn.is_string()) throw Error(ErrorKind::SchemaError, path + ".fn: expected a string");
    BuiltinParams params = t.contains("params") ? detail::parse_params(t["params"], path + ".params") : BuiltinParams{};
    auto impl = builtin(fn.get<std::string>(), params);
    std::optional<Value> init;
    if (t.contains("init_state")) init = decode_value(t["init_state"], impl->state, path + ".init_state");
    prog.graph = register_thread(make_thread(id.get<std::uint64_t>(), fn.get<std::string>(), init, params),
                                 std::move(prog.graph));
  }

  const Json& type = detail::field(doc, "input_type", "$");
  if (!type.is_string()) throw Error(ErrorKind::SchemaError, "$.input_type: expected a type string");
  prog.input_type = PortType::of(parse_type(type.get<std::string>()));

  const Json& word = detail::field(doc, "word", "$");
  PortType src;
  if (word.is_object()) {
    const Json& b = detail::field(word, "branch", "$.word");
    BranchProgram bp{detail::parse_letters(detail::field(b, "producer", "$.word.branch"), "$.word.branch.producer"),
                     detail::parse_letters(detail::field(b, "left", "$.word.branch"), "$.word.branch.left"),
                     detail::parse_letters(detail::field(b, "right", "$.word.branch"), "$.word.branch.right"),
                     detail::parse_letters(detail::field(b, "consumer", "$.word.branch"), "$.word.branch.consumer")};
    detail::anchor_branch(prog.graph, bp, prog.input_type);
    src = validate_branch(prog.graph, bp).src;
    prog.body = std::move(bp);
  } else {
    Word w = detail::parse_letters(word, "$.word");
    if (w.empty()) {
      const Json& anchor = detail::field(doc, "anchor", "$");
      if (!anchor.is_string()) throw Error(ErrorKind::SchemaError, "$.anchor: expected a type string");
      w.anchor = PortType::of(parse_type(anchor.get<std::string>()));
    } else if (doc.contains("anchor")) {
      throw Error(ErrorKind::SchemaError, "$.anchor: only allowed when the word is empty");
    }
    src = validate_word(prog.graph, w).src;
    prog.body = std::move(w);
  }
  if (!src.compatible_with(prog.input_type))
    throw Error(ErrorKind::ValidationError, "input_type " + prog.input_type.name + " does not match word source " + src.name);

  const Json& input = detail::field(doc, "input", "$");
  if (!input.is_array()) throw Error(ErrorKind::SchemaError, "$.input: expected an array");
  for (std::size_t i = 0; i < input.size(); ++i)
    prog.input.push_back(decode_value(input[i], prog.input_type.desc, "input[" + std::to_string(i) + "]"));
  return prog;
}

inline Json program_json(const Program& prog) {
  Json doc;
  Json threads = Json::array();
  for (const auto& [id, spec] : prog.graph.edges()) {
    Json t;
    t["id"] = id.n;
    t["fn"] = spec.fn_name;
    t["init_state"] = encode_value(spec.init_state);
    if (Json p = detail::params_json(spec.params); !p.empty()) t["params"] = p;
    threads.push_back(std::move(t));
  }
  doc["threads"] = std::move(threads);
  if (prog.is_branch()) {
    const auto& b = prog.branch();
    doc["word"] = Json{{"branch",
                        {{"producer", detail::letters_json(b.producer)},
                         {"left", detail::letters_json(b.left)},
                         {"right", detail::letters_json(b.right)},
                         {"consumer", detail::letters_json(b.consumer)}}}};
  } else {
    doc["word"] = detail::letters_json(prog.word());
    if (prog.word().empty()) doc["anchor"] = to_string(prog.word().anchor->desc);
  }
  Json input = Json::array();
  for (const auto& x : prog.input) input.push_back(encode_value(x));
  doc["input"] = std::move(input);
  doc["input_type"] = to_string(prog.input_type.desc);
  return doc;
}

inline std::string serialize_program(const Program& prog) { return program_json(prog).dump(2) + "\n"; }

/// 64-bit FNV-1a over the compact serialization; identifies a program in
/// reports.
inline std::uint64_t program_digest(const Program& prog) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : program_json(prog).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// {"output": [...], "final_state": {"<id>": value, ...}} with slots in id order.
inline Json result_json(const std::vector<Value>& output, const StateStore& state) {
  Json out = Json::array();
  for (const auto& v : output) out.push_back(encode_value(v));
  Json slots = Json::object();
  for (const auto& [id, v] : state.slots()) slots[to_string(id)] = encode_value(v);
  return Json{{"output", std::move(out)}, {"final_state", std::move(slots)}};
}

// ---------------------------------------------------------------------------
// DOT export

namespace detail {

inline std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

/// Graphviz rendering of the multigraph: one node per vertex, one edge per
/// thread labelled by its id, all in sorted order. `extended` labels nodes and
/// edges with their global-state forms instead.
inline std::string export_dot(const Multigraph& graph, bool extended = false) {
  std::ostringstream os;
  os << "digraph {\n";
  for (const auto& [name, _] : graph.vertices()) {
    os << "  " << detail::dot_quote(name);
    if (extended) os << " [label=" << detail::dot_quote(name + " × s_N") << "]";
    os << ";\n";
  }
  for (const auto& [id, spec] : graph.edges()) {
    std::string label = extended ? "Φ*(" + to_string(id) + ")" : to_string(id);
    os << "  " << detail::dot_quote(spec.src.name) << " -> " << detail::dot_quote(spec.tgt.name)
       << " [label=" << detail::dot_quote(label) << "];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace stc
