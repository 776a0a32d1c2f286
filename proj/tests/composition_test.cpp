#include <gtest/gtest.h>

#include "test_support.hpp"

namespace stc {
namespace {

using testing::ints;
using testing::store;

std::vector<std::int64_t> raw(const std::vector<Value>& xs) {
  std::vector<std::int64_t> out;
  for (const auto& x : xs) out.push_back(x.as_int());
  return out;
}

const testing::IntStep kCounterAdd = [](std::int64_t x, std::int64_t s) { return std::pair{x + s, s + 1}; };
const testing::IntStep kScaleByState = [](std::int64_t x, std::int64_t s) { return std::pair{x * s, s}; };

TEST(ValidateWord, ComposablePath) {
  auto vw = validate_word(testing::five_vertex_graph(), Word::of({1, 4}));
  EXPECT_EQ(vw.src.name, "a");
  EXPECT_EQ(vw.tgt.name, "e");
}

TEST(ValidateWord, EmptyWordIsIdentityAtAnchor) {
  auto g = testing::five_vertex_graph();
  auto vw = validate_word(g, Word::identity(g.vertices().at("b")));
  EXPECT_EQ(vw.src.name, "b");
  EXPECT_EQ(vw.tgt.name, "b");
  EXPECT_THROW(validate_word(g, Word{}), Error);
}

TEST(ValidateWord, BrokenPath) {
  try {
    validate_word(testing::five_vertex_graph(), Word::of({1, 5}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PathMismatch);
    EXPECT_NE(std::string(e.what()).find("position 1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("=b"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("=c"), std::string::npos);
  }
}

TEST(ValidateWord, UnknownLetter) {
  try {
    validate_word(testing::five_vertex_graph(), Word::of({99}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownThreadId);
  }
}

TEST(Word, RendersRightToLeft) {
  EXPECT_EQ(Word::of({1, 4}).render(), "4 1");
  EXPECT_EQ(Word::of({4}).after(Word::of({1})), Word::of({1, 4}));
}

TEST(EvalPhi, IdentityLeavesEverythingUnchanged) {
  auto g = testing::counter_then_scale();
  StateStore s = init_state(g);
  auto [y, s2] = eval_phi(g, Word::identity(PortType::of(TypeDesc::integer())), Value::integer(7), s);
  EXPECT_EQ(y, Value::integer(7));
  EXPECT_EQ(s2, s);
}

TEST(EvalPhi, SingleCounter) {
  auto g = register_thread(make_thread(1, "counter_add", Value::integer(0)), {});
  auto [y, s] = eval_phi(g, Word::of({1}), Value::integer(10), init_state(g));
  EXPECT_EQ(y, Value::integer(10));
  EXPECT_EQ(s, store({{1, Value::integer(1)}}));
}

TEST(EvalPhi, CounterThenScale) {
  auto g = testing::counter_then_scale();
  auto [y, s] = eval_phi(g, Word::of({1, 2}), Value::integer(10), init_state(g));
  EXPECT_EQ(y, Value::integer(30));
  EXPECT_EQ(s, store({{1, Value::integer(1)}, {2, Value::integer(3)}}));
}

TEST(EvalPhi, InputTypeChecked) {
  auto g = testing::counter_then_scale();
  EXPECT_THROW(eval_phi(g, Word::of({1}), Value::str("x"), init_state(g)), Error);
}

TEST(EvalPsiRef, EmptyList) {
  auto g = testing::counter_then_scale();
  auto [ys, s] = eval_psi_ref(g, Word::of({1, 2}), {}, init_state(g));
  EXPECT_TRUE(ys.empty());
  EXPECT_EQ(s, init_state(g));
}

TEST(EvalPsiRef, CounterMatchesRecursiveOracle) {
  auto [oracle_ys, oracle_s] = testing::psi_oracle(kCounterAdd, {10, 20, 30}, 0);
  ASSERT_EQ(oracle_ys, (std::vector<std::int64_t>{10, 21, 32}));
  ASSERT_EQ(oracle_s, 3);

  auto g = register_thread(make_thread(1, "counter_add", Value::integer(0)), {});
  auto [ys, s] = eval_psi_ref(g, Word::of({1}), ints({10, 20, 30}), init_state(g));
  EXPECT_EQ(raw(ys), oracle_ys);
  EXPECT_EQ(s, store({{1, Value::integer(oracle_s)}}));
}

TEST(EvalPsiRef, TwoStagesMatchOracle) {
  auto [stage1, s1] = testing::psi_oracle(kCounterAdd, {10, 20}, 0);
  auto [stage2, s2] = testing::psi_oracle(kScaleByState, stage1, 3);
  ASSERT_EQ(stage2, (std::vector<std::int64_t>{30, 63}));
  ASSERT_EQ(s1, 2);
  ASSERT_EQ(s2, 3);

  auto g = testing::counter_then_scale();
  auto [ys, s] = eval_psi_ref(g, Word::of({1, 2}), ints({10, 20}), init_state(g));
  EXPECT_EQ(ys, ints({30, 63}));
  EXPECT_EQ(s, store({{1, Value::integer(2)}, {2, Value::integer(3)}}));
}

TEST(EvalInterleaved, EmptyList) {
  auto g = testing::counter_then_scale();
  auto [ys, s] = eval_interleaved(g, Word::of({1, 2}), {}, init_state(g));
  EXPECT_TRUE(ys.empty());
  EXPECT_EQ(s, init_state(g));
}

TEST(EvalInterleaved, AgreesWithStageWise) {
  auto g = register_thread(make_thread(1, "counter_add", Value::integer(0)), {});
  auto inter = eval_interleaved(g, Word::of({1}), ints({10, 20, 30}), init_state(g));
  EXPECT_EQ(inter.first, ints({10, 21, 32}));
  EXPECT_EQ(inter, eval_psi_ref(g, Word::of({1}), ints({10, 20, 30}), init_state(g)));
}

TEST(EvalInterleaved, RejectsRepeatedLetter) {
  auto g = register_thread(make_thread(1, "counter_add"), {});
  try {
    eval_interleaved(g, Word::of({1, 1}), ints({1}), init_state(g));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RepeatedLetter);
  }
}

TEST(EvalInterleaved, RepeatedLetterIsWhereOrdersDiverge) {
  // Stage-wise and element-wise orders really differ once a letter repeats,
  // which is why the interleaved form is restricted to distinct letters.
  auto g = register_thread(make_thread(1, "counter_add", Value::integer(0)), {});
  auto [ys, s] = eval_psi_ref(g, Word::of({1, 1}), ints({0, 0}), init_state(g));
  // stage 1: [0, 1] with state 2; stage 2: [2, 4] with state 4
  EXPECT_EQ(ys, ints({2, 4}));
  // element-wise would give x0: 0 -> 0 -> 1, x1: 0 -> 2 -> 5
  EXPECT_EQ(s, store({{1, Value::integer(4)}}));
}

TEST(SmapCheck, Classification) {
  EXPECT_TRUE(smap_check(Word::of({4, 1})).ok());
  EXPECT_TRUE(smap_check(Word{}).ok());
  auto r = smap_check(Word::of({6, 7, 6}));
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.repeated, (std::set<ThreadId>{ThreadId{6}}));
}

TEST(SegmentWord, AlreadyDistinct) {
  auto seg = segment_word(Word::of({1, 4}));
  ASSERT_EQ(seg.segments.size(), 1u);
  EXPECT_EQ(seg.segments[0], Word::of({1, 4}));
}

TEST(SegmentWord, GreedyFromFirstApplied) {
  // Application order 6, 7, 6: the first segment takes 6 then 7.
  auto seg = segment_word(Word::of({6, 7, 6}));
  ASSERT_EQ(seg.segments.size(), 2u);
  EXPECT_EQ(seg.segments[0], Word::of({6, 7}));
  EXPECT_EQ(seg.segments[1], Word::of({6}));
}

TEST(SegmentWord, EmptyWord) {
  auto seg = segment_word(Word{});
  ASSERT_EQ(seg.segments.size(), 1u);
  EXPECT_TRUE(seg.segments[0].empty());
}

TEST(SegmentWord, ConcatenationAndDistinctnessProperty) {
  XorShift64Star rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    Word w;
    for (auto n = rng.below(12); n > 0; --n) w.letters.push_back(ThreadId{rng.below(5)});
    auto seg = segment_word(w);
    Word joined;
    for (const auto& s : seg.segments) {
      EXPECT_TRUE(smap_check(s).ok());
      joined.letters.insert(joined.letters.end(), s.letters.begin(), s.letters.end());
    }
    EXPECT_EQ(joined.letters, w.letters);
  }
}

// Laws checked over generated programs.

class CompositionLaws : public ::testing::Test {
 protected:
  template <typename F>
  void for_each_word_program(std::size_t n, F&& body) {
    FuzzConfig cfg;
    cfg.seed = 2024;
    ProgramGenerator gen(cfg);
    std::size_t seen = 0;
    while (seen < n) {
      Program p = gen.next();
      if (p.is_branch()) continue;
      body(p, gen.rng());
      ++seen;
    }
  }
};

TEST_F(CompositionLaws, LetFloatingEquivalence) {
  for_each_word_program(300, [](const Program& p, XorShift64Star&) {
    if (!smap_check(p.word()).ok()) return;
    auto init = init_state(p.graph);
    EXPECT_EQ(eval_interleaved(p.graph, p.word(), p.input, init), eval_psi_ref(p.graph, p.word(), p.input, init))
        << serialize_program(p);
  });
}

TEST_F(CompositionLaws, IdentityLaw) {
  for_each_word_program(100, [](const Program& p, XorShift64Star&) {
    auto init = init_state(p.graph);
    Word eps = Word::identity(p.input_type);
    EXPECT_EQ(eval_psi_ref(p.graph, eps, p.input, init), std::pair(p.input, init));
    if (!p.input.empty()) {
      EXPECT_EQ(eval_phi(p.graph, eps, p.input[0], init), std::pair(p.input[0], init));
    }
  });
}

TEST_F(CompositionLaws, FunctorAndCompositionLaws) {
  for_each_word_program(200, [](const Program& p, XorShift64Star& rng) {
    const Word& w = p.word();
    auto init = init_state(p.graph);
    auto cut = static_cast<std::ptrdiff_t>(rng.below(w.size() + 1));
    Word w1{{w.letters.begin(), w.letters.begin() + cut}, {}};
    Word w2{{w.letters.begin() + cut, w.letters.end()}, {}};
    if (w1.empty()) w1.anchor = p.input_type;
    if (w2.empty()) w2.anchor = validate_word(p.graph, w1).tgt;

    auto [ys, s] = eval_psi_ref(p.graph, w1, p.input, init);
    EXPECT_EQ(eval_psi_ref(p.graph, w2, ys, s), eval_psi_ref(p.graph, w, p.input, init));

    if (!p.input.empty()) {
      auto [y, s1] = eval_phi(p.graph, w1, p.input[0], init);
      EXPECT_EQ(eval_phi(p.graph, w2, y, s1), eval_phi(p.graph, w, p.input[0], init));
    }
  });
}

TEST_F(CompositionLaws, StateFrame) {
  for_each_word_program(200, [](const Program& p, XorShift64Star&) {
    auto init = init_state(p.graph);
    std::set<ThreadId> letters(p.word().letters.begin(), p.word().letters.end());
    auto [ys, s] = eval_psi_ref(p.graph, p.word(), p.input, init);
    ASSERT_EQ(s.size(), init.size());
    for (const auto& [id, v] : init.slots()) {
      if (!letters.count(id)) {
        EXPECT_EQ(s.at(id), v);
      }
    }
    for (const auto& y : ys) EXPECT_TRUE(has_type(y, validate_word(p.graph, p.word()).tgt.desc));
  });
}

}  // namespace
}  // namespace stc
