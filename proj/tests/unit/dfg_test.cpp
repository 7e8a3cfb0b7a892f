#include <fmt/core.h>
#include <gtest/gtest.h>

#include "xrel/dfg.hpp"
#include "xrel/errors.hpp"
#include "xrel/rng.hpp"

namespace xrel {
namespace {

DfgNode in(const std::string& id, int w = 8) { return {id, NodeKind::kInput, w, {}, std::nullopt}; }
DfgNode op(const std::string& id, NodeKind k, const std::string& a, const std::string& b, int w = 8) {
  return {id, k, w, {a, b}, std::nullopt};
}
DfgNode out(const std::string& id, const std::string& a, int w = 8) { return {id, NodeKind::kOutput, w, {a}, std::nullopt}; }

std::int64_t wrap(std::int64_t v, int w) {
  const std::int64_t m = std::int64_t{1} << w;
  v %= m;
  if (v < 0) v += m;
  return v >= m / 2 ? v - m : v;
}

TEST(TruncOp, Examples) {
  EXPECT_EQ(trunc_op(NodeKind::kAdd, 7, 9, 8, 0), 16);
  EXPECT_EQ(trunc_op(NodeKind::kAdd, 7, 9, 8, 2), 12);
  EXPECT_EQ(trunc_op(NodeKind::kMul, 5, 3, 8, 1), 8);
  EXPECT_EQ(trunc_op(NodeKind::kAdd, 100, 100, 8, 0), -56);
  EXPECT_THROW(trunc_op(NodeKind::kAdd, 1, 1, 8, 9), ValidationError);
  EXPECT_THROW(trunc_op(NodeKind::kInput, 1, 1, 8, 0), ValidationError);
}

TEST(TruncOp, ExhaustiveSmallWidths) {
  for (int w = 2; w <= 6; ++w) {
    const std::int64_t lo = -(std::int64_t{1} << (w - 1)), hi = (std::int64_t{1} << (w - 1)) - 1;
    for (std::int64_t x = lo; x <= hi; ++x)
      for (std::int64_t y = lo; y <= hi; ++y) {
        EXPECT_EQ(trunc_op(NodeKind::kAdd, x, y, w, 0), wrap(x + y, w));
        EXPECT_EQ(trunc_op(NodeKind::kMul, x, y, w, 0), wrap(x * y, w));
        for (int j = 1; j <= w; ++j) {
          const std::int64_t mask = ~((std::int64_t{1} << j) - 1);
          EXPECT_EQ(trunc_op(NodeKind::kAdd, x, y, w, j), wrap((x & mask) + (y & mask), w));
          EXPECT_EQ(trunc_op(NodeKind::kMul, x, y, w, j), wrap((x & mask) * (y & mask), w));
          // Unwrapped add error is one-sided and bounded.
          const std::int64_t e = (x + y) - ((x & mask) + (y & mask));
          EXPECT_GE(e, 0);
          EXPECT_LE(e, 2 * ((std::int64_t{1} << j) - 1));
        }
      }
  }
}

TEST(Validate, WellFormedBenchmarks) {
  for (const auto& name : benchmark_names()) EXPECT_TRUE(validate(build_benchmark(name, 16)).empty()) << name;
}

TEST(Validate, DanglingOperand) {
  Dfg g{"g", {in("a"), op("s", NodeKind::kAdd, "a", "ghost"), out("y", "s")}};
  const auto v = validate(g);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("ghost"), std::string::npos);
}

TEST(Validate, Cycle) {
  Dfg g{"g", {in("a"), op("p", NodeKind::kAdd, "a", "q"), op("q", NodeKind::kAdd, "a", "p"), out("y", "q")}};
  const auto v = validate(g);
  ASSERT_FALSE(v.empty());
  bool found = false;
  for (const auto& s : v) found |= s.find("cycle") != std::string::npos;
  EXPECT_TRUE(found);
  EXPECT_THROW(CompiledDfg{g}, InputError);
}

TEST(Validate, OtherViolations) {
  EXPECT_FALSE(validate(Dfg{"g", {in("a"), in("a"), out("y", "a")}}).empty());
  EXPECT_FALSE(validate(Dfg{"g", {in("a", 1), out("y", "a")}}).empty());
  EXPECT_FALSE(validate(Dfg{"g", {in("a")}}).empty());
  EXPECT_FALSE(validate(Dfg{"g", {{"c", NodeKind::kConst, 8, {}, std::nullopt}, out("y", "c")}}).empty());
}

TEST(Eval, SingleAdd) {
  const CompiledDfg g(Dfg{"g", {in("a"), in("b"), op("s", NodeKind::kAdd, "a", "b"), out("y", "s")}});
  EXPECT_EQ(eval(g, exact_plan(g), {{"a", 3}, {"b", 4}}).at("y"), 7);
  EXPECT_THROW(eval(g, exact_plan(g), {{"a", 3}}), InputError);
  TruncationPlan missing;
  EXPECT_THROW(eval(g, missing, {{"a", 3}, {"b", 4}}), InputError);
}

TEST(Eval, SixNodeGraphHandTrace) {
  // (a + b) * (c + d) + a, with the first add and the multiply truncated.
  const CompiledDfg g(Dfg{"six",
                          {in("a"), in("b"), in("c"), in("d"), op("n1", NodeKind::kAdd, "a", "b"),
                           op("n2", NodeKind::kAdd, "c", "d"), op("n3", NodeKind::kMul, "n1", "n2"),
                           op("n4", NodeKind::kAdd, "n3", "a"), out("y", "n4")}});
  TruncationPlan plan = exact_plan(g);
  plan.assignments["n1"] = 2;
  plan.assignments["n3"] = 1;
  // a=7 b=6: (4 + 4) = 8; c=3 d=2: 5; n3 = (8 & ~1) * (5 & ~1) = 8 * 4 = 32; n4 = 39.
  EXPECT_EQ(eval(g, plan, {{"a", 7}, {"b", 6}, {"c", 3}, {"d", 2}}).at("y"), 39);
  EXPECT_EQ(eval(g, exact_plan(g), {{"a", 7}, {"b", 6}, {"c", 3}, {"d", 2}}).at("y"), 72);
}

TEST(Eval, FirMatchesConvolution) {
  for (int taps : {8, 64}) {
    const int width = 16, frac = 7;
    const CompiledDfg g(build_fir(taps, width, frac));
    const auto coeffs = fir_coefficients(taps, frac);
    Xoshiro256 rng(taps);
    for (int trial = 0; trial < 200; ++trial) {
      std::map<std::string, std::int64_t> inputs;
      std::int64_t acc = 0;
      for (int t = 0; t < taps; ++t) {
        const std::int64_t x = wrap(static_cast<std::int64_t>(rng.bits(16)), 16);
        inputs[fmt::format("x{:02}", t)] = x;
        acc += coeffs[t] * x;
      }
      EXPECT_EQ(eval(g, exact_plan(g), inputs).at("y"), wrap(acc, width));
    }
  }
}

TEST(Benchmarks, NodeCounts) {
  EXPECT_EQ(operator_count(build_benchmark("fir8", 16)), 15u);
  EXPECT_EQ(operator_count(build_benchmark("fir64", 16)), 127u);
  EXPECT_EQ(operator_count(build_benchmark("smt3", 16)), 17u);
  EXPECT_EQ(operator_count(build_benchmark("mm8", 16)), 64u * 15u);
  EXPECT_EQ(CompiledDfg(build_benchmark("mm8", 16)).outputs().size(), 64u);
  EXPECT_THROW(build_benchmark("foo", 16), ValidationError);
  EXPECT_THROW(build_benchmark("fir8", 4), ValidationError);
}

TEST(Benchmarks, FirCoefficients) {
  const auto c = fir_coefficients(8, 15);
  std::int64_t sum = 0;
  for (auto v : c) {
    EXPECT_NE(v, 0);
    sum += v;
  }
  EXPECT_NEAR(static_cast<double>(sum), 32768.0, 8.0);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(c[i], c[c.size() - 1 - i]);
}

TEST(CompiledDfg, LevelsOfRejectsBadPlans) {
  const CompiledDfg g(build_benchmark("fir8", 16));
  TruncationPlan p = exact_plan(g);
  p.assignments["x00"] = 1;
  EXPECT_THROW(g.levels_of(p), InputError);
  p = exact_plan(g);
  p.assignments["a00"] = 17;
  EXPECT_THROW(g.levels_of(p), InputError);
}

}  // namespace
}  // namespace xrel
