#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "stc/error.hpp"
#include "stc/types.hpp"
#include "stc/value.hpp"

namespace stc {

/// Declared structure of a transfer function that licenses a data-parallel
/// evaluation of its list lifting.
enum class Hint {
  None,
  ReadOnly,  // state is consulted, never modified
  Product,   // (x, s) -> (g(x), h(s))
};

inline const char* to_string(Hint h) {
  switch (h) {
    case Hint::None: return "General";
    case Hint::ReadOnly: return "ReadOnly";
    case Hint::Product: return "Product";
  }
  return "?";
}

using TransferFn = std::function<std::pair<Value, Value>(const Value& input, const Value& state)>;
using UnaryFn = std::function<Value(const Value&)>;

/// Optional construction parameters of the polymorphic builtins.
struct BuiltinParams {
  std::optional<std::int64_t> delay_ms;
  std::optional<TypeDesc> type;

  friend bool operator==(const BuiltinParams&, const BuiltinParams&) = default;
};

struct BuiltinEntry {
  std::string name;
  TypeDesc src;
  TypeDesc tgt;
  TypeDesc state;
  Hint hint = Hint::None;
  TransferFn fn;
  // Present only for Product entries.
  UnaryFn pure_part;
  UnaryFn state_part;
  // Value used for init_state when a program does not give one.
  Value default_state;
};

namespace detail {

inline std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}

inline std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

using Factory = std::function<BuiltinEntry(const BuiltinParams&)>;

inline BuiltinEntry product_entry(std::string name, TypeDesc src, TypeDesc tgt, TypeDesc state, UnaryFn g,
                                  UnaryFn h, Value init) {
  BuiltinEntry e{std::move(name), std::move(src), std::move(tgt), std::move(state), Hint::Product, {}, g, h,
                 std::move(init)};
  e.fn = [g, h](const Value& x, const Value& s) { return std::pair{g(x), h(s)}; };
  return e;
}

inline const std::map<std::string, Factory>& registry() {
  static const std::map<std::string, Factory> table = [] {
    using T = TypeDesc;
    std::map<std::string, Factory> r;

    r["counter_add"] = [](const BuiltinParams&) {
      return BuiltinEntry{"counter_add", T::integer(), T::integer(), T::integer(), Hint::None,
                          [](const Value& x, const Value& s) {
                            return std::pair{Value::integer(wrap_add(x.as_int(), s.as_int())),
                                             Value::integer(wrap_add(s.as_int(), 1))};
                          },
                          {}, {}, Value::integer(0)};
    };

    r["scale_by_state"] = [](const BuiltinParams&) {
      return BuiltinEntry{"scale_by_state", T::integer(), T::integer(), T::integer(), Hint::ReadOnly,
                          [](const Value& x, const Value& s) {
                            return std::pair{Value::integer(wrap_mul(x.as_int(), s.as_int())), s};
                          },
                          {}, {}, Value::integer(1)};
    };

    r["add1_tick"] = [](const BuiltinParams&) {
      return product_entry(
          "add1_tick", T::integer(), T::integer(), T::integer(),
          [](const Value& x) { return Value::integer(wrap_add(x.as_int(), 1)); },
          [](const Value& s) { return Value::integer(wrap_add(s.as_int(), 1)); }, Value::integer(0));
    };

    r["branch_even"] = [](const BuiltinParams&) {
      return BuiltinEntry{"branch_even", T::integer(), T::sum(T::integer(), T::integer()), T::unit(),
                          Hint::ReadOnly,
                          [](const Value& x, const Value& s) {
                            return std::pair{x.as_int() % 2 == 0 ? Value::inl(x) : Value::inr(x), s};
                          },
                          {}, {}, Value::unit()};
    };

    r["merge_sum"] = [](const BuiltinParams& p) {
      TypeDesc d = p.type.value_or(T::integer());
      return BuiltinEntry{"merge_sum", T::sum(d, d), d, T::unit(), Hint::ReadOnly,
                          [](const Value& x, const Value& s) { return std::pair{x.injected(), s}; },
                          {}, {}, Value::unit()};
    };

    r["delay_identity_ms"] = [](const BuiltinParams& p) {
      TypeDesc d = p.type.value_or(T::integer());
      auto ms = std::chrono::milliseconds(p.delay_ms.value_or(0));
      return BuiltinEntry{"delay_identity_ms", d, d, T::unit(), Hint::ReadOnly,
                          [ms](const Value& x, const Value& s) {
                            if (ms.count() > 0) std::this_thread::sleep_for(ms);
                            return std::pair{x, s};
                          },
                          {}, {}, Value::unit()};
    };

    r["append_tag"] = [](const BuiltinParams&) {
      return BuiltinEntry{"append_tag", T::str(), T::str(), T::str(), Hint::ReadOnly,
                          [](const Value& x, const Value& s) { return std::pair{Value::str(x.as_str() + s.as_str()), s}; },
                          {}, {}, Value::str("")};
    };

    // Extra instances that give generated programs more than one port type.
    r["running_sum"] = [](const BuiltinParams&) {
      return BuiltinEntry{"running_sum", T::integer(), T::integer(), T::integer(), Hint::None,
                          [](const Value& x, const Value& s) {
                            Value next = Value::integer(wrap_add(s.as_int(), x.as_int()));
                            return std::pair{next, next};
                          },
                          {}, {}, Value::integer(0)};
    };

    r["int_to_str"] = [](const BuiltinParams&) {
      return BuiltinEntry{"int_to_str", T::integer(), T::str(), T::integer(), Hint::None,
                          [](const Value& x, const Value& s) {
                            return std::pair{Value::str(std::to_string(x.as_int()) + "#" + std::to_string(s.as_int())),
                                             Value::integer(wrap_add(s.as_int(), 1))};
                          },
                          {}, {}, Value::integer(0)};
    };

    r["str_len"] = [](const BuiltinParams&) {
      return BuiltinEntry{"str_len", T::str(), T::integer(), T::integer(), Hint::ReadOnly,
                          [](const Value& x, const Value& s) {
                            return std::pair{
                                Value::integer(wrap_add(static_cast<std::int64_t>(x.as_str().size()), s.as_int())), s};
                          },
                          {}, {}, Value::integer(0)};
    };

    r["int_to_float"] = [](const BuiltinParams&) {
      return product_entry(
          "int_to_float", T::integer(), T::floating(), T::floating(),
          [](const Value& x) { return Value::floating(static_cast<double>(x.as_int()) * 0.5); },
          [](const Value& s) { return Value::floating(s.as_float() * 0.75 + 1.0); }, Value::floating(0.0));
    };

    r["float_accum"] = [](const BuiltinParams&) {
      return BuiltinEntry{"float_accum", T::floating(), T::floating(), T::floating(), Hint::None,
                          [](const Value& x, const Value& s) {
                            double y = x.as_float() + s.as_float();
                            return std::pair{Value::floating(y), Value::floating(s.as_float() * 0.5 + x.as_float())};
                          },
                          {}, {}, Value::floating(0.0)};
    };

    r["float_floor"] = [](const BuiltinParams&) {
      return BuiltinEntry{"float_floor", T::floating(), T::integer(), T::integer(), Hint::ReadOnly,
                          [](const Value& x, const Value& s) {
                            double f = x.as_float();
                            // Saturate so the cast stays defined on any input.
                            std::int64_t i = std::isnan(f) ? 0 : f >= 9.0e18 ? INT64_MAX : f <= -9.0e18 ? INT64_MIN
                                                                                   : static_cast<std::int64_t>(std::floor(f));
                            return std::pair{Value::integer(wrap_add(i, s.as_int())), s};
                          },
                          {}, {}, Value::integer(0)};
    };
    return r;
  }();
  return table;
}

}  // namespace detail

/// Looks up a builtin transfer function. Throws UnknownFunction.
inline std::shared_ptr<const BuiltinEntry> builtin(const std::string& name, const BuiltinParams& params = {}) {
  const auto& table = detail::registry();
  auto it = table.find(name);
  if (it == table.end()) throw Error(ErrorKind::UnknownFunction, "no builtin named \"" + name + "\"");
  return std::make_shared<const BuiltinEntry>(it->second(params));
}

inline std::vector<std::string> builtin_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : detail::registry()) names.push_back(name);
  return names;
}

}  // namespace stc
