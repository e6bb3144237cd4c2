#include "conq/qte.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "conq/error.hpp"
#include "conq/normal.hpp"

namespace conq {
namespace {

// Reference normal tail via erfc, independent of the library's helpers.
double two_sided(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

TEST(DeltaPercentTest, ReferenceValues) {
  EXPECT_EQ(delta_percent(1.7, 1.7), 0.0);
  EXPECT_NEAR(delta_percent(std::log(100.0), std::log(110.0)), 10.0, 1e-10);
  EXPECT_NEAR(delta_percent(std::log(200.0), std::log(100.0)), -50.0, 1e-10);
}

TEST(DeltaSeTest, ReferenceValues) {
  EXPECT_EQ(delta_se(1.0, 2.0, 0.0, 0.0), 0.0);
  EXPECT_NEAR(delta_se(3.0, 3.0, 0.03, 0.04), 5.0, 1e-12);
  EXPECT_NEAR(delta_se(1.0, 1.0 + std::log(2.0), 0.0, 0.01), 2.0, 1e-12);
  EXPECT_THROW(delta_se(0.0, 0.0, -0.1, 0.0), DomainError);
}

TEST(PValueTest, ReferenceValues) {
  EXPECT_EQ(p_value(0.0, 2.0), 1.0);
  EXPECT_NEAR(p_value(1.959964, 1.0), 0.05, 1e-4);
  EXPECT_NEAR(p_value(-2.575829, 1.0), 0.01, 1e-4);
  EXPECT_EQ(p_value(0.0, 0.0), 1.0);
  EXPECT_EQ(p_value(0.3, 0.0), 0.0);
  EXPECT_THROW(p_value(1.0, -1.0), DomainError);
}

TEST(PValueTest, SignSymmetryAndCiDuality) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-30.0, 30.0), s(0.01, 10.0);
  for (int i = 0; i < 500; ++i) {
    const double delta = d(rng), se = s(rng);
    EXPECT_EQ(p_value(delta, se), p_value(-delta, se));
    EXPECT_NEAR(p_value(delta, se), two_sided(delta / se), 1e-12);
    for (double alpha : {0.01, 0.05, 0.2}) {
      const double z = z_critical(alpha);
      const bool covers_zero = delta - z * se <= 0.0 && 0.0 <= delta + z * se;
      const double p = p_value(delta, se);
      if (std::abs(p - alpha) > 1e-9) EXPECT_EQ(covers_zero, p >= alpha);
    }
  }
}

TEST(ZCriticalTest, KnownQuantiles) {
  EXPECT_NEAR(z_critical(0.05), 1.959963984540054, 1e-12);
  EXPECT_NEAR(z_critical(0.01), 2.5758293035489, 1e-10);
  EXPECT_THROW(z_critical(0.0), DomainError);
  EXPECT_THROW(z_critical(1.0), DomainError);
}

TEST(QteGridTest, OnePointPlugIn) {
  GridAnalysis c{{0.5}, {std::log(100.0)}, {0.03}};
  GridAnalysis t{{0.5}, {std::log(110.0)}, {0.03}};
  const auto rows = qte_grid(c, t, 0.05);
  ASSERT_EQ(rows.size(), 1u);
  const auto& r = rows[0];
  const double se = std::sqrt(0.0018) * 1.1 * 100.0;
  EXPECT_NEAR(r.delta_pct, 10.0, 1e-9);
  EXPECT_NEAR(r.se_pct, se, 1e-9);
  EXPECT_NEAR(r.se_pct, 4.667, 1e-3);
  EXPECT_NEAR(r.p_value, two_sided(10.0 / se), 1e-12);
  EXPECT_NEAR(r.p_value, 0.0322, 1e-4);
  EXPECT_NEAR(r.ci_lower, 0.853, 1e-3);
  EXPECT_NEAR(r.ci_upper, 19.147, 1e-3);
  EXPECT_NEAR(r.q_control, 100.0, 1e-9);
  EXPECT_NEAR(r.q_treatment, 110.0, 1e-9);
}

TEST(QteGridTest, IdenticalArmsAreNull) {
  GridAnalysis a{{0.2, 0.5, 0.9}, {1.0, 2.0, 3.0}, {0.1, 0.0, 0.3}};
  for (const auto& r : qte_grid(a, a, 0.05)) {
    EXPECT_EQ(r.delta_pct, 0.0);
    EXPECT_EQ(r.p_value, 1.0);
    EXPECT_LE(r.ci_lower, 0.0);
    EXPECT_GE(r.ci_upper, 0.0);
  }
}

TEST(QteGridTest, RowInvariants) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> q(3.0, 6.0), se(0.0, 0.2);
  GridAnalysis c, t;
  for (int i = 1; i <= 50; ++i) {
    c.grid.push_back(i / 51.0);
    t.grid.push_back(i / 51.0);
    c.q_log.push_back(q(rng));
    t.q_log.push_back(q(rng));
    c.se_log.push_back(se(rng));
    t.se_log.push_back(se(rng));
  }
  for (const auto& r : qte_grid(c, t, 0.05)) {
    EXPECT_LE(r.ci_lower, r.delta_pct);
    EXPECT_LE(r.delta_pct, r.ci_upper);
    EXPECT_GE(r.p_value, 0.0);
    EXPECT_LE(r.p_value, 1.0);
    EXPECT_NEAR(r.ci_upper - r.ci_lower, 2.0 * 1.959964 * r.se_pct, 1e-5 * (1.0 + r.se_pct));
  }
}

TEST(QteGridTest, RejectsGridMismatch) {
  GridAnalysis c{{0.5}, {1.0}, {0.1}};
  GridAnalysis t{{0.6}, {1.0}, {0.1}};
  EXPECT_THROW(qte_grid(c, t, 0.05), DataError);
}

TEST(GridTest, DefaultGridIsP20ToP99) {
  const auto g = default_grid();
  ASSERT_EQ(g.size(), 80u);
  EXPECT_EQ(g.front(), 0.2);
  EXPECT_EQ(g[30], 0.5);
  EXPECT_EQ(g.back(), 0.99);
}

TEST(GridTest, ParseSpec) {
  EXPECT_EQ(parse_grid("P20:P99:1"), default_grid());
  const auto g = parse_grid("P20:P95:5");
  ASSERT_EQ(g.size(), 16u);
  EXPECT_EQ(g[6], 0.5);
  EXPECT_EQ(g.back(), 0.95);
  EXPECT_EQ(parse_grid("P50:P50:1"), (std::vector<double>{0.5}));
  EXPECT_EQ(parse_grid("P10:P11:0.5").size(), 3u);
  for (const char* bad : {"", "P20:P99", "20-99-1", "P20:P99:0", "P99:P20:1", "P0:P50:1",
                          "P20:P100:1", "Px:P50:1", "P20:P50:1:2"}) {
    EXPECT_THROW(parse_grid(bad), ConfigError) << bad;
  }
}

}  // namespace
}  // namespace conq
