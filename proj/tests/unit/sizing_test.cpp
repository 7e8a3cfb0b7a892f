#include <cmath>

#include <gtest/gtest.h>

#include "xrel/errors.hpp"
#include "xrel/sizing.hpp"

namespace xrel {
namespace {

// Independent oracle: integer search for the largest power of two <= mted.
int oracle_k(double mted, int n) {
  if (mted < 1.0) return 0;
  int k = 0;
  while (k + 1 <= n - 1 && std::ldexp(1.0, k + 1) <= mted) ++k;
  return k;
}

TEST(Sizing, MtedFromQualityBound) {
  EXPECT_DOUBLE_EQ(compute_mted({8, 10.0, std::nullopt}), 25.5);
  EXPECT_DOUBLE_EQ(compute_mted({8, 0.0, std::nullopt}), 0.0);
  EXPECT_NEAR(compute_mted({16, 0.048, std::nullopt}), 65535 * 0.00048, 1e-9);
}

TEST(Sizing, OverrideTakesPrecedence) {
  EXPECT_DOUBLE_EQ(compute_mted({8, 10.0, 3.5}), 3.5);
  EXPECT_THROW(compute_mted({8, 10.0, -1.0}), ValidationError);
}

TEST(Sizing, RejectsInvalidSpecs) {
  EXPECT_THROW(compute_mted({1, 10.0, std::nullopt}), ValidationError);
  EXPECT_THROW(compute_mted({65, 10.0, std::nullopt}), ValidationError);
  EXPECT_THROW(compute_mted({8, -0.1, std::nullopt}), ValidationError);
  EXPECT_THROW(compute_mted({8, 100.1, std::nullopt}), ValidationError);
}

TEST(Sizing, KRoundsDown) {
  EXPECT_EQ(compute_k(25.5, 8), 4);
  EXPECT_EQ(compute_k(0.9, 8), 0);
  EXPECT_EQ(compute_k(1.0, 8), 0);
  EXPECT_EQ(compute_k(2.0, 8), 1);
  EXPECT_EQ(compute_k(compute_mted({16, 12.5, std::nullopt}), 16), 12);
  EXPECT_EQ(compute_k(1e9, 8), 7);
}

TEST(Sizing, VarianceBound) {
  EXPECT_NEAR(variance_upper_bound(16, 1), 16.0 / 15.0, 1e-12);
  EXPECT_DOUBLE_EQ(variance_upper_bound(16, 4), 240.0);
  EXPECT_DOUBLE_EQ(variance_upper_bound(16, 0), 0.0);
  EXPECT_THROW(variance_upper_bound(16, 16), ValidationError);
  EXPECT_THROW(variance_upper_bound(16, -1), ValidationError);
}

TEST(Sizing, ReferenceTableKColumn) {
  const auto rows = size_table(16, reference_q_list());
  ASSERT_EQ(rows.size(), 12u);
  for (int i = 0; i < 12; ++i) EXPECT_EQ(rows[i].k, i + 1) << "row " << i;
}

TEST(Sizing, ReferenceTableVarianceColumn) {
  // Printed three-figure values; one unit of the last digit covers truncated printings.
  const double printed[] = {1.06, 9.60, 52.2, 240, 1.03e3, 4.23e3, 1.72e4, 6.94e4, 2.79e5, 0.0, 4.47e6, 1.79e7};
  const auto rows = size_table(16, reference_q_list());
  for (int i = 0; i < 12; ++i) {
    if (i == 9) {
      // The printed 1.17E+06 disagrees with the closed form; check the closed form.
      EXPECT_NEAR(rows[i].v_ub, 16.0 / 15.0 * 1023.0 * 1023.0, 1e-6);
      continue;
    }
    const double unit = std::pow(10.0, std::floor(std::log10(printed[i])) - 2);
    EXPECT_LE(std::abs(rows[i].v_ub - printed[i]), unit * (1 + 1e-9)) << "row " << i;
  }
}

TEST(Sizing, TableEdgeCases) {
  EXPECT_TRUE(size_table(16, {}).empty());
  const auto rows = size_table(8, {10.0});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_DOUBLE_EQ(rows[0].mted, 25.5);
  EXPECT_EQ(rows[0].k, 4);
  EXPECT_NEAR(rows[0].v_ub, 8.0 / 7.0 * 225.0, 1e-9);
  try {
    size_table(8, {10.0, 200.0});
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
  }
}

TEST(SizingProperty, RoundingDownGuarantee) {
  for (int n = 2; n <= 32; ++n)
    for (double q = 0.001; q <= 100.0; q *= 1.37) {
      const double mted = compute_mted({n, q, std::nullopt});
      const int k = compute_k(mted, n);
      EXPECT_EQ(k, oracle_k(mted, n)) << n << " " << q;
      if (mted >= 1.0) EXPECT_LE(std::ldexp(1.0, k), mted);
      EXPECT_LE(k, n - 1);
    }
}

TEST(SizingProperty, ExactPowersOfTwo) {
  for (int n = 2; n <= 64; ++n)
    for (int e = 0; e < n; ++e) EXPECT_EQ(compute_k(std::ldexp(1.0, e), n), e);
}

TEST(SizingProperty, MonotoneInQualityAndK) {
  for (int n : {8, 16, 32}) {
    int prev = 0;
    for (double q = 0.0; q <= 100.0; q += 0.25) {
      const int k = compute_k(compute_mted({n, q, std::nullopt}), n);
      EXPECT_GE(k, prev);
      prev = k;
    }
    for (int k = 1; k < n; ++k) EXPECT_GT(variance_upper_bound(n, k), variance_upper_bound(n, k - 1));
  }
}

}  // namespace
}  // namespace xrel
