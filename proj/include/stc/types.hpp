#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "stc/error.hpp"

namespace stc {

/// Structural shape of a port type. Compound kinds keep their components in
/// `args`: one for List, two for Pair and Sum.
struct TypeDesc {
  enum class Kind { Unit, Bool, Int, Float, Str, List, Pair, Sum };

  Kind kind = Kind::Unit;
  std::vector<TypeDesc> args;

  static TypeDesc unit() { return {Kind::Unit, {}}; }
  static TypeDesc boolean() { return {Kind::Bool, {}}; }
  static TypeDesc integer() { return {Kind::Int, {}}; }
  static TypeDesc floating() { return {Kind::Float, {}}; }
  static TypeDesc str() { return {Kind::Str, {}}; }
  static TypeDesc list(TypeDesc elem) { return {Kind::List, {std::move(elem)}}; }
  static TypeDesc pair(TypeDesc a, TypeDesc b) { return {Kind::Pair, {std::move(a), std::move(b)}}; }
  static TypeDesc sum(TypeDesc a, TypeDesc b) { return {Kind::Sum, {std::move(a), std::move(b)}}; }

  const TypeDesc& left() const { return args.at(0); }
  const TypeDesc& right() const { return args.at(1); }

  friend bool operator==(const TypeDesc&, const TypeDesc&) = default;
};

inline std::string to_string(const TypeDesc& t) {
  switch (t.kind) {
    case TypeDesc::Kind::Unit: return "unit";
    case TypeDesc::Kind::Bool: return "bool";
    case TypeDesc::Kind::Int: return "int";
    case TypeDesc::Kind::Float: return "float";
    case TypeDesc::Kind::Str: return "str";
    case TypeDesc::Kind::List: return "list(" + to_string(t.args[0]) + ")";
    case TypeDesc::Kind::Pair: return "pair(" + to_string(t.args[0]) + "," + to_string(t.args[1]) + ")";
    case TypeDesc::Kind::Sum: return "sum(" + to_string(t.args[0]) + "," + to_string(t.args[1]) + ")";
  }
  return "?";
}

namespace detail {

class TypeParser {
 public:
  explicit TypeParser(std::string_view text) : text_(text) {}

  TypeDesc parse_all() {
    TypeDesc t = parse();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters");
    return t;
  }

 private:
  TypeDesc parse() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    std::string_view word = text_.substr(start, pos_ - start);
    if (word == "unit") return TypeDesc::unit();
    if (word == "bool") return TypeDesc::boolean();
    if (word == "int") return TypeDesc::integer();
    if (word == "float") return TypeDesc::floating();
    if (word == "str") return TypeDesc::str();
    if (word == "list") {
      expect('(');
      TypeDesc elem = parse();
      expect(')');
      return TypeDesc::list(std::move(elem));
    }
    if (word == "pair" || word == "sum") {
      expect('(');
      TypeDesc a = parse();
      expect(',');
      TypeDesc b = parse();
      expect(')');
      return word == "pair" ? TypeDesc::pair(std::move(a), std::move(b))
                            : TypeDesc::sum(std::move(a), std::move(b));
    }
    fail("unknown type '" + std::string(word) + "'");
    return {};
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw Error(ErrorKind::SchemaError,
                "bad port type \"" + std::string(text_) + "\" at offset " + std::to_string(pos_) + ": " + msg);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses the textual form used in program files, e.g. "sum(int,int)".
inline TypeDesc parse_type(std::string_view text) { return detail::TypeParser(text).parse_all(); }

/// A vertex of the thread multigraph: a named port type. Vertices are
/// identified by name; two port types are compatible iff their descriptors
/// are equal.
struct PortType {
  std::string name;
  TypeDesc desc;

  /// The canonical vertex for a descriptor is named by its textual form.
  static PortType of(TypeDesc desc) {
    std::string name = to_string(desc);
    return {std::move(name), std::move(desc)};
  }

  bool compatible_with(const PortType& other) const { return desc == other.desc; }

  friend bool operator==(const PortType&, const PortType&) = default;
};

}  // namespace stc
