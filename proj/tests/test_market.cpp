#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dlmm/market.hpp"
#include "dlmm/models.hpp"
#include "fixtures.hpp"

using namespace dlmm;

TEST(Tenor, AnnualGrid) {
  const TenorStructure t(11.0, 10, 1);
  EXPECT_DOUBLE_EQ(t.delta(), 1.0);
  EXPECT_EQ(t.step_count(), 11u);
  for (std::size_t i = 0; i <= 11; ++i) EXPECT_DOUBLE_EQ(t.grid_time(i), static_cast<double>(i));
  for (std::size_t j = 1; j <= 11; ++j) EXPECT_DOUBLE_EQ(t.tenor_date(j), static_cast<double>(j));
}

TEST(Tenor, RefinedGridInvariants) {
  for (std::size_t p : {1u, 2u, 3u, 8u}) {
    const TenorStructure t(11.0, 10, p);
    EXPECT_EQ(t.step_count(), 11 * p);
    const auto g = t.grid_times();
    for (std::size_t i = 1; i < g.size(); ++i) EXPECT_LT(g[i - 1], g[i]);
    for (std::size_t j = 1; j <= 11; ++j) {
      EXPECT_DOUBLE_EQ(t.grid_time(t.fixing_step(j)), t.tenor_date(j));
      EXPECT_EQ(t.eta(t.fixing_step(j)), j);
    }
    for (std::size_t i = 1; i <= t.step_count(); ++i) {
      const std::size_t u = t.eta(i);
      EXPECT_LE(t.grid_time(i), t.tenor_date(u) + 1e-12);
      if (u > 1) {
        EXPECT_GT(t.grid_time(i), t.tenor_date(u - 1) + 1e-12);
      }
    }
  }
}

TEST(Tenor, RejectsDegenerate) {
  EXPECT_THROW(TenorStructure(0.0, 10, 1), ValidationError);
  EXPECT_THROW(TenorStructure(11.0, 0, 1), ValidationError);
  EXPECT_THROW(TenorStructure(11.0, 10, 0), ValidationError);
}

TEST(Bonds, TerminalRatio) {
  const auto t = fixtures::tenor();
  const auto b = initial_bonds(fixtures::kLibors, t);
  ASSERT_EQ(b.size(), 11u);
  EXPECT_NEAR(b[10] / b[9], 1.0 / 1.04, 1e-15);
  EXPECT_NEAR(b[10] / b[9], 0.961538, 1e-6);
}

TEST(Bonds, ZeroRatesGiveFlatBonds) {
  const std::vector<double> zeros(10, 0.0);
  for (double b : initial_bonds(zeros, 1.0, 0.7)) EXPECT_EQ(b, 0.7);
}

TEST(Bonds, SingleRate) {
  const std::vector<double> one{0.0207};
  const auto b = initial_bonds(one, 1.0, 1.0);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0], 1.0);
  EXPECT_DOUBLE_EQ(b[1], 1.0 / 1.0207);
}

TEST(Bonds, NegativeRateRejected) {
  const std::vector<double> bad{0.02, -0.01};
  EXPECT_THROW(initial_bonds(bad, 1.0, 1.0), ValidationError);
  const TenorStructure t(3.0, 2, 1);
  EXPECT_THROW(MarketCurve(std::vector<double>{0.02, 0.0}, t), ValidationError);
}

TEST(Bonds, StrictlyDecreasingOnRandomCurves) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> rate(1e-6, 0.5);
  const auto t = fixtures::tenor();
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> libors(10);
    for (double& l : libors) l = rate(rng);
    const MarketCurve c(libors, t);
    for (std::size_t j = 1; j <= 10; ++j) {
      EXPECT_LT(c.bond(j + 1), c.bond(j));
      EXPECT_NEAR(c.bond(j + 1), c.bond(j) / (1.0 + c.libor(j)), 1e-16);
    }
  }
}

TEST(Bonds, NormalizationScales) {
  const auto t = fixtures::tenor();
  const MarketCurve a(fixtures::kLibors, t, 1.0);
  const MarketCurve b(fixtures::kLibors, t, 3.25);
  for (std::size_t j = 1; j <= 11; ++j) EXPECT_NEAR(b.bond(j), 3.25 * a.bond(j), 1e-15);
}

TEST(Curve, IncreasingCheck) {
  const auto t = fixtures::tenor();
  EXPECT_TRUE(fixtures::curve(t).strictly_increasing());
  std::vector<double> printed = fixtures::kLibors;
  printed[1] = 0.23;
  printed[3] = 0.28;
  EXPECT_FALSE(MarketCurve(printed, t).strictly_increasing());
}

TEST(Ell, Values) {
  EXPECT_NEAR(ell(0.04, 1.0), 0.0384615, 1e-7);
  EXPECT_NEAR(ell(1e-300, 1.0), 0.0, 1e-299);
  EXPECT_GT(ell(0.05, 1.0), ell(0.04, 1.0));
  EXPECT_THROW(ell(0.0, 1.0), DomainError);
  EXPECT_THROW(ell(-0.01, 1.0), DomainError);
}

TEST(Ell, RangeAndIdentity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> rate(1e-8, 5.0), acc(0.01, 2.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const double l = rate(rng), d = acc(rng);
    const double e = ell(l, d);
    EXPECT_GT(e, 0.0);
    EXPECT_LT(e, 1.0);
    EXPECT_NEAR(e * (1.0 + d * l), d * l, 1e-15 * d * l);
  }
}

TEST(ForwardRatio, Values) {
  EXPECT_EQ(one_step_forward_ratio(0.04, 0.04, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(one_step_forward_ratio(0.05, 0.04, 1.0), 1.05 / 1.04);
}

TEST(ForwardRatio, Telescopes) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> rate(0.001, 0.2);
  std::vector<double> path(50);
  for (double& l : path) l = rate(rng);
  double prod = 1.0;
  for (std::size_t k = 1; k < path.size(); ++k) prod *= one_step_forward_ratio(path[k], path[k - 1], 0.5);
  EXPECT_NEAR(prod, (1.0 + 0.5 * path.back()) / (1.0 + 0.5 * path.front()), 1e-13);
}

TEST(Ledger, TerminalDensity) {
  MeasureLedger ledger(1, 3);
  for (std::size_t j = 1; j <= 4; ++j) EXPECT_EQ(ledger.terminal_density(j), 1.0);
  ledger.accumulate(3, 1.05 / 1.04);
  ledger.accumulate(2, 2.0);
  EXPECT_DOUBLE_EQ(ledger.terminal_density(3), 1.05 / 1.04);
  EXPECT_DOUBLE_EQ(ledger.terminal_density(2), 2.0 * 1.05 / 1.04);
  EXPECT_EQ(ledger.terminal_density(4), 1.0);
  EXPECT_THROW(ledger.accumulate(1, 0.0), DomainError);
}

TEST(Ledger, SingleRateWeight) {
  const TenorStructure t(2.0, 1, 1);
  const MarketCurve c(std::vector<double>{0.04}, t);
  ModelState s = initial_state(c);
  EXPECT_EQ(terminal_rn_weight(s, 1, t), 1.0);
  EXPECT_EQ(terminal_rn_weight(s, 2, t), 1.0);
  s.rates[0] = 0.05;
  s.ledger.accumulate(1, one_step_forward_ratio(0.05, 0.04, 1.0));
  EXPECT_DOUBLE_EQ(terminal_rn_weight(s, 1, t), 1.05 / 1.04);
}

TEST(Vols, PositiveWhileAlive) {
  const auto t = fixtures::tenor();
  std::vector<std::vector<double>> rows(11, fixtures::kVols);
  rows[3][7] = 0.0;  // step 4, rate 8: alive
  EXPECT_THROW(VolSurface(t, rows), ValidationError);
  rows[3][7] = 0.2;
  rows[9][2] = 0.0;  // step 10, rate 3: already fixed
  EXPECT_NO_THROW(VolSurface(t, rows));
}

TEST(Vols, LimitSampledAtLeftEndpoint) {
  const TenorStructure t(3.0, 2, 2);
  const auto v = VolSurface::from_limit(t, {[](double s) { return 0.1 + s; }, [](double s) { return 0.2 + s; }});
  EXPECT_DOUBLE_EQ(v(1, 1), 0.1);
  EXPECT_DOUBLE_EQ(v(2, 1), 0.1 + 0.5);
  EXPECT_DOUBLE_EQ(v(3, 1), 0.0);  // rate 1 fixed at step 2
  EXPECT_DOUBLE_EQ(v(4, 2), 0.2 + 1.5);
}

TEST(Vols, IntegrabilityScale) {
  const auto t = fixtures::tenor();
  double total = 0.0;
  for (double v : fixtures::kVols) total += v;
  EXPECT_NEAR(fixtures::vols(t).integrability_scale(), total, 1e-15);
}
