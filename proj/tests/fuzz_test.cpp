#include <gtest/gtest.h>

#include "test_support.hpp"

namespace stc {

void PrintTo(Mutation m, std::ostream* os) { *os << to_string(m); }

namespace {

TEST(XorShift64Star, KnownOutputsForSeedSeven) {
  // Reference values computed with an independent implementation.
  XorShift64Star rng(7);
  EXPECT_EQ(rng.next(), 0x65b7a8eda2fb02b4ULL);
  EXPECT_EQ(rng.next(), 0x9730762724452fa1ULL);
  EXPECT_EQ(rng.next(), 0x6f3667328fb46fcaULL);
}

TEST(XorShift64Star, ZeroStateIsReplaced) {
  XorShift64Star rng(XorShift64Star::kSeedMix);
  EXPECT_NE(rng.next(), 0u);
}

TEST(XorShift64Star, RangeStaysInBounds) {
  XorShift64Star rng(1);
  for (int i = 0; i < 10000; ++i) {
    auto v = rng.range(-3, 4);
    EXPECT_GE(v, -3);
    EXPECT_LE(v, 4);
  }
  EXPECT_EQ(rng.below(0), 0u);
}

std::vector<std::uint64_t> digests(std::uint64_t seed, std::size_t n) {
  FuzzConfig cfg;
  cfg.seed = seed;
  ProgramGenerator gen(cfg);
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(program_digest(gen.next()));
  return out;
}

TEST(Generator, SeedDeterminism) {
  EXPECT_EQ(digests(7, 100), digests(7, 100));
  EXPECT_NE(digests(7, 100), digests(8, 100));
}

TEST(Generator, ProgramsAreWellFormed) {
  FuzzConfig cfg;
  ProgramGenerator gen(cfg);
  std::size_t branches = 0, repeated = 0, empty = 0;
  for (int i = 0; i < 500; ++i) {
    Program p = gen.next();
    EXPECT_LE(p.input.size(), cfg.max_list_len);
    for (const auto& x : p.input) EXPECT_TRUE(has_type(x, p.input_type.desc));
    if (p.is_branch()) {
      ++branches;
      const auto& b = p.branch();
      EXPECT_EQ(validate_branch(p.graph, b).src.desc, p.input_type.desc);
      std::set<ThreadId> seen;
      std::size_t total = 0;
      for (const Word* w : {&b.producer, &b.left, &b.right, &b.consumer}) {
        seen.insert(w->letters.begin(), w->letters.end());
        total += std::set<ThreadId>(w->letters.begin(), w->letters.end()).size();
      }
      EXPECT_EQ(seen.size(), total);
    } else {
      EXPECT_EQ(validate_word(p.graph, p.word()).src.desc, p.input_type.desc);
      EXPECT_LE(p.word().size(), cfg.max_word_len);
      if (!smap_check(p.word()).ok()) ++repeated;
      if (p.word().empty()) ++empty;
    }
  }
  EXPECT_GT(branches, 50u);
  EXPECT_GT(repeated, 50u);
  EXPECT_GT(empty, 0u);
}

TEST(Check, SmallFuzzRunIsClean) {
  FuzzConfig cfg;
  cfg.trials = 60;
  auto report = check_fuzz(cfg);
  EXPECT_TRUE(report.all_equal()) << report.to_json().dump(2);
  EXPECT_EQ(report.to_json()["passed"], 60);
}

TEST(Check, ModesCoverEveryExecutor) {
  auto rec = check_program(parse_program(R"({"threads":[{"id":1,"fn":"counter_add"},{"id":2,"fn":"scale_by_state","init_state":2}],
    "word":[1,2],"input":[1,2,3],"input_type":"int"})"));
  EXPECT_TRUE(rec.equal);
  auto has = [&](const std::string& m) { return std::find(rec.modes.begin(), rec.modes.end(), m) != rec.modes.end(); };
  EXPECT_TRUE(has("interleaved"));
  EXPECT_TRUE(has("pipeline/w8"));
  EXPECT_TRUE(has("auto/w4"));
}

class MutationDetection : public ::testing::TestWithParam<Mutation> {};

TEST_P(MutationDetection, CaughtAndReplayable) {
  FuzzConfig cfg;
  CheckOptions opts;
  opts.mutation = GetParam();
  auto report = check_fuzz(cfg, opts, true);
  ASSERT_FALSE(report.all_equal()) << to_string(GetParam()) << " survived " << cfg.trials << " trials";
  const TrialRecord& bad = report.trials.back();
  ASSERT_FALSE(bad.equal);
  ASSERT_TRUE(bad.first.has_value());

  // The stored program replays to the same failure.
  Program replay = parse_program(bad.program);
  auto again = check_program(replay, opts, cfg.seed);
  EXPECT_FALSE(again.equal);
  EXPECT_EQ(again.first->mode, bad.first->mode);
  // Without the fault the same program is clean.
  EXPECT_TRUE(check_program(replay, {}, cfg.seed).equal);
}

INSTANTIATE_TEST_SUITE_P(All, MutationDetection,
                         ::testing::Values(Mutation::DropStateUpdate, Mutation::SwapStageOrder,
                                           Mutation::IgnoreJoinFlags, Mutation::DropStageStateForward,
                                           Mutation::RemoveSegmentBarrier),
                         [](const auto& info) {
                           std::string s = to_string(info.param);
                           std::replace(s.begin(), s.end(), '-', '_');
                           return s;
                         });

}  // namespace
}  // namespace stc
