#pragma once

#include <bit>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "stc/error.hpp"
#include "stc/types.hpp"

namespace stc {

/// Dynamic value carried along multigraph edges and held in private states.
///
/// Values are immutable once built. Compound payloads (list items, pair
/// components, sum injections) live in one child vector so a Value is a plain
/// regular type that can be copied freely between threads of control.
class Value {
 public:
  enum class Tag { Unit, Bool, Int, Float, Str, List, Pair, SumL, SumR };

  Value() = default;

  static Value unit() { return Value(); }
  static Value boolean(bool b) { return Value(Tag::Bool, b); }
  static Value integer(std::int64_t i) { return Value(Tag::Int, i); }
  static Value floating(double f) { return Value(Tag::Float, f); }
  static Value str(std::string s) { return Value(Tag::Str, std::move(s)); }
  static Value list(TypeDesc elem, std::vector<Value> items) {
    Value v(Tag::List, std::move(items));
    v.elem_ = std::move(elem);
    return v;
  }
  static Value pair(Value a, Value b) {
    std::vector<Value> both;
    both.reserve(2);
    both.push_back(std::move(a));
    both.push_back(std::move(b));
    return Value(Tag::Pair, std::move(both));
  }
  static Value inl(Value x) { return Value(Tag::SumL, std::vector<Value>{std::move(x)}); }
  static Value inr(Value x) { return Value(Tag::SumR, std::vector<Value>{std::move(x)}); }

  Tag tag() const noexcept { return tag_; }
  bool is_sum() const noexcept { return tag_ == Tag::SumL || tag_ == Tag::SumR; }

  bool as_bool() const { return get<bool>(Tag::Bool); }
  std::int64_t as_int() const { return get<std::int64_t>(Tag::Int); }
  double as_float() const { return get<double>(Tag::Float); }
  const std::string& as_str() const { return get<std::string>(Tag::Str); }
  const std::vector<Value>& items() const { return get<std::vector<Value>>(Tag::List); }
  const TypeDesc& elem_type() const {
    expect(Tag::List);
    return elem_;
  }
  const Value& first() const { return get<std::vector<Value>>(Tag::Pair)[0]; }
  const Value& second() const { return get<std::vector<Value>>(Tag::Pair)[1]; }
  /// Payload of an inl/inr value.
  const Value& injected() const {
    if (!is_sum()) throw Error(ErrorKind::TypeError, "expected a sum value, got " + to_string());
    return std::get<std::vector<Value>>(payload_)[0];
  }

  std::string to_string() const {
    std::ostringstream os;
    os << *this;
    return os.str();
  }

  /// Structural equality. Floats compare by bit pattern so equality is total
  /// (NaN equals itself, +0 and -0 differ): executors must agree bit-exactly.
  friend bool operator==(const Value& a, const Value& b) {
    if (a.tag_ != b.tag_) return false;
    if (a.tag_ == Tag::Float) {
      return std::bit_cast<std::uint64_t>(std::get<double>(a.payload_)) ==
             std::bit_cast<std::uint64_t>(std::get<double>(b.payload_));
    }
    if (a.tag_ == Tag::List && !(a.elem_ == b.elem_)) return false;
    return a.payload_ == b.payload_;
  }

  friend std::ostream& operator<<(std::ostream& os, const Value& v) {
    switch (v.tag_) {
      case Tag::Unit: return os << "()";
      case Tag::Bool: return os << (v.as_bool() ? "true" : "false");
      case Tag::Int: return os << v.as_int();
      case Tag::Float: {
        std::ostringstream tmp;
        tmp.precision(17);
        tmp << v.as_float();
        return os << tmp.str();
      }
      case Tag::Str: return os << '"' << v.as_str() << '"';
      case Tag::List: {
        os << '[';
        const auto& xs = v.items();
        for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? "," : "") << xs[i];
        return os << ']';
      }
      case Tag::Pair: return os << '(' << v.first() << ',' << v.second() << ')';
      case Tag::SumL: return os << "inl " << v.injected();
      case Tag::SumR: return os << "inr " << v.injected();
    }
    return os;
  }

 private:
  using Payload = std::variant<std::monostate, bool, std::int64_t, double, std::string, std::vector<Value>>;

  template <typename P>
  Value(Tag tag, P&& payload) : tag_(tag), payload_(std::forward<P>(payload)) {}

  void expect(Tag t) const {
    if (tag_ != t) throw Error(ErrorKind::TypeError, "value " + to_string() + " has the wrong tag");
  }

  template <typename T>
  const T& get(Tag t) const {
    expect(t);
    return std::get<T>(payload_);
  }

  Tag tag_ = Tag::Unit;
  Payload payload_;
  TypeDesc elem_;
};

/// True iff `v` inhabits the structural type `t`. Lists must also carry the
/// same declared element type.
inline bool has_type(const Value& v, const TypeDesc& t) {
  using K = TypeDesc::Kind;
  using T = Value::Tag;
  switch (t.kind) {
    case K::Unit: return v.tag() == T::Unit;
    case K::Bool: return v.tag() == T::Bool;
    case K::Int: return v.tag() == T::Int;
    case K::Float: return v.tag() == T::Float;
    case K::Str: return v.tag() == T::Str;
    case K::List:
      if (v.tag() != T::List || !(v.elem_type() == t.args[0])) return false;
      for (const auto& x : v.items())
        if (!has_type(x, t.args[0])) return false;
      return true;
    case K::Pair:
      return v.tag() == T::Pair && has_type(v.first(), t.args[0]) && has_type(v.second(), t.args[1]);
    case K::Sum:
      if (v.tag() == T::SumL) return has_type(v.injected(), t.args[0]);
      if (v.tag() == T::SumR) return has_type(v.injected(), t.args[1]);
      return false;
  }
  return false;
}

inline void require_type(const Value& v, const TypeDesc& t, const std::string& where) {
  if (!has_type(v, t))
    throw Error(ErrorKind::TypeError, where + ": value " + v.to_string() + " is not of type " + to_string(t));
}

}  // namespace stc
