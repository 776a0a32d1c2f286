#include <gtest/gtest.h>

#include "test_support.hpp"

namespace stc {
namespace {

using testing::five_vertex_graph;

TEST(Value, StructuralEquality) {
  EXPECT_EQ(Value::integer(3), Value::integer(3));
  EXPECT_NE(Value::integer(3), Value::floating(3.0));
  EXPECT_EQ(Value::pair(Value::str("a"), Value::inl(Value::unit())), Value::pair(Value::str("a"), Value::inl(Value::unit())));
  EXPECT_NE(Value::inl(Value::integer(1)), Value::inr(Value::integer(1)));
  EXPECT_NE(Value::list(TypeDesc::integer(), {}), Value::list(TypeDesc::str(), {}));
}

TEST(Value, FloatEqualityIsBitwise) {
  double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(Value::floating(nan), Value::floating(nan));
  EXPECT_NE(Value::floating(0.0), Value::floating(-0.0));
}

TEST(Value, HasType) {
  auto sum = TypeDesc::sum(TypeDesc::integer(), TypeDesc::str());
  EXPECT_TRUE(has_type(Value::inl(Value::integer(1)), sum));
  EXPECT_TRUE(has_type(Value::inr(Value::str("x")), sum));
  EXPECT_FALSE(has_type(Value::inr(Value::integer(1)), sum));
  auto lst = Value::list(TypeDesc::integer(), {Value::integer(1), Value::str("x")});
  EXPECT_FALSE(has_type(lst, TypeDesc::list(TypeDesc::integer())));
  EXPECT_THROW(Value::integer(1).as_str(), Error);
}

TEST(PortType, ParseAndPrint) {
  for (const char* s : {"int", "unit", "sum(int,int)", "list(int)", "pair(int,str)", "list(sum(float,pair(bool,str)))"})
    EXPECT_EQ(to_string(parse_type(s)), s);
  EXPECT_EQ(parse_type(" sum( int , int ) "), TypeDesc::sum(TypeDesc::integer(), TypeDesc::integer()));
  EXPECT_THROW(parse_type("sum(int)"), Error);
  EXPECT_THROW(parse_type("integer"), Error);
  EXPECT_THROW(parse_type("int)"), Error);
}

TEST(PortType, CompatibilityIsStructural) {
  PortType a{"a", TypeDesc::integer()}, b{"b", TypeDesc::integer()}, s{"s", TypeDesc::str()};
  EXPECT_TRUE(a.compatible_with(b));
  EXPECT_FALSE(a.compatible_with(s));
}

TEST(RegisterThread, SingleCounterIntoEmptyGraph) {
  Multigraph g = register_thread(make_thread(1, "counter_add", Value::integer(0)), {});
  EXPECT_EQ(g.edges().size(), 1u);
  ASSERT_EQ(g.vertices().size(), 1u);
  EXPECT_EQ(g.vertices().begin()->first, "int");
}

TEST(RegisterThread, DuplicateIdRejected) {
  Multigraph g = register_thread(make_thread(1, "counter_add"), {});
  try {
    register_thread(make_thread(1, "add1_tick"), g);
    FAIL() << "expected DuplicateThreadId";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DuplicateThreadId);
  }
}

TEST(RegisterThread, UnknownFunctionRejected) {
  try {
    make_thread(1, "nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownFunction);
  }
}

TEST(RegisterThread, ConflictingVertexRejected) {
  Multigraph g = register_thread(make_thread(1, "counter_add", {}, {}, "a", "b"), {});
  EXPECT_THROW(register_thread(make_thread(2, "append_tag", {}, {}, "a", "c"), g), Error);
}

TEST(RegisterThread, FiveVertexGraph) {
  Multigraph g = five_vertex_graph();
  EXPECT_EQ(g.edges().size(), 7u);
  EXPECT_EQ(g.vertices().size(), 5u);
  EXPECT_EQ(g.src(ThreadId{3}).name, "c");
  EXPECT_EQ(g.tgt(ThreadId{7}).name, "e");
}

TEST(InitState, EmptyGraph) { EXPECT_TRUE(init_state(Multigraph{}).empty()); }

TEST(InitState, CopiesInitialValues) {
  Multigraph g = register_thread(make_thread(1, "counter_add", Value::integer(0)), {});
  EXPECT_EQ(init_state(g), testing::store({{1, Value::integer(0)}}));

  Multigraph h = register_thread(make_thread(3, "counter_add", Value::integer(10)), {});
  h = register_thread(make_thread(5, "append_tag", Value::str("x")), std::move(h));
  EXPECT_EQ(init_state(h), testing::store({{3, Value::integer(10)}, {5, Value::str("x")}}));
}

TEST(InitState, RejectsIllTypedInit) { EXPECT_THROW(make_thread(1, "counter_add", Value::str("0")), Error); }

TEST(StateStore, DomainIsFixed) {
  StateStore s = testing::store({{1, Value::integer(0)}});
  EXPECT_THROW(s.set(ThreadId{2}, Value::integer(1)), Error);
  EXPECT_THROW(s.at(ThreadId{2}), Error);
}

TEST(IsAcyclic, FiveVertexGraphHasCycle) { EXPECT_FALSE(is_acyclic(five_vertex_graph())); }

TEST(IsAcyclic, SingleEdge) {
  EXPECT_TRUE(is_acyclic(register_thread(make_thread(1, "counter_add", {}, {}, "a", "b"), {})));
}

TEST(IsAcyclic, ChainWithParallelEdge) {
  Multigraph g = register_thread(make_thread(1, "counter_add", {}, {}, "a", "b"), {});
  g = register_thread(make_thread(2, "counter_add", {}, {}, "b", "c"), std::move(g));
  g = register_thread(make_thread(3, "counter_add", {}, {}, "a", "b"), std::move(g));
  EXPECT_TRUE(is_acyclic(g));
}

TEST(IsAcyclic, SelfLoopIsCycle) { EXPECT_FALSE(is_acyclic(register_thread(make_thread(1, "counter_add"), {}))); }

TEST(ThreadSpec, ApplyTypeChecks) {
  ThreadSpec t = make_thread(1, "counter_add");
  EXPECT_EQ(t.apply(Value::integer(10), Value::integer(2)), std::pair(Value::integer(12), Value::integer(3)));
  try {
    t.apply(Value::str("x"), Value::integer(0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TypeError);
  }
}

TEST(Builtins, WrappingArithmetic) {
  ThreadSpec t = make_thread(1, "counter_add");
  auto [y, s] = t.apply(Value::integer(INT64_MAX), Value::integer(1));
  EXPECT_EQ(y, Value::integer(INT64_MIN));
  EXPECT_EQ(s, Value::integer(2));
}

TEST(Builtins, FloatFloorRoundsDownAndSaturates) {
  ThreadSpec t = make_thread(1, "float_floor");
  auto y = [&](double x) { return t.apply(Value::floating(x), Value::integer(0)).first.as_int(); };
  EXPECT_EQ(y(2.75), 2);
  EXPECT_EQ(y(-2.25), -3);
  EXPECT_EQ(y(std::numeric_limits<double>::quiet_NaN()), 0);
  EXPECT_EQ(y(1e300), INT64_MAX);
  EXPECT_EQ(y(-1e300), INT64_MIN);
}

}  // namespace
}  // namespace stc
