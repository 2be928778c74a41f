#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dlmm/models.hpp"
#include "dlmm/pricing.hpp"
#include "fixtures.hpp"

using namespace dlmm;

namespace {

ModelSetup base_setup(const DriverSpec& d, std::size_t p = 1) {
  const auto t = fixtures::tenor(p);
  return ModelSetup(t, fixtures::curve(t), fixtures::vols(t), d);
}

}  // namespace

TEST(Step, ExponentZeroLeavesRate) {
  const TenorStructure t(2.0, 1, 1);
  const MarketCurve c(std::vector<double>{0.04}, t);
  const std::vector<double> lam{0.16}, b{-0.3};
  const auto s = step_exponential(initial_state(c), 0.3, t, lam, b);
  EXPECT_EQ(s.rates[0], 0.04);
  EXPECT_EQ(s.step, 1u);
  const auto d = step_difference(initial_state(c), 0.3, t, lam, b);
  EXPECT_EQ(d.rates[0], 0.04);
}

TEST(Step, EqualVolsScaleAlike) {
  const TenorStructure t(3.0, 2, 1);
  const MarketCurve c(std::vector<double>{0.03, 0.05}, t);
  const std::vector<double> lam{0.2, 0.2}, b{0.1, 0.1};
  const auto s = step_exponential(initial_state(c), 0.7, t, lam, b);
  EXPECT_DOUBLE_EQ(s.rates[0] / 0.03, s.rates[1] / 0.05);
}

TEST(Step, OneBernoulliStepTerminalRate) {
  const auto setup = base_setup(bernoulli_driver());
  PathEvolver ev(setup);
  const auto s0 = initial_state(setup.curve);
  const auto drifts = ev.drifts_for(s0);
  const double b = drifts[9];
  EXPECT_NEAR(b, -0.0796, 1e-4);
  for (double x : {1.0, -1.0}) {
    ModelState s = s0;
    ev.advance(s, x);
    EXPECT_NEAR(s.rate(10), 0.04 * std::exp(0.16 * (x + b)), 1e-17);
    EXPECT_DOUBLE_EQ(terminal_rn_weight(s, 10, setup.tenor), (1.0 + s.rate(10)) / 1.04);
  }
}

TEST(Step, MissingDriftIsSequencingError) {
  const auto setup = base_setup(bernoulli_driver());
  const auto s0 = initial_state(setup.curve);
  std::vector<double> b(10, std::numeric_limits<double>::quiet_NaN());
  EXPECT_THROW(step_exponential(s0, 1.0, setup.tenor, setup.vols.row(1), b), SequencingError);
  std::vector<double> short_b(3, 0.0);
  EXPECT_THROW(step_exponential(s0, 1.0, setup.tenor, setup.vols.row(1), short_b), SequencingError);
}

TEST(Step, DifferenceEqualsExponentialFuzz) {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> rate(0.001, 0.2), lam(0.01, 0.6), x(-3.0, 3.0), b(-0.5, 0.5);
  const TenorStructure t(6.0, 5, 1);
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<double> libors(5), lambdas(5), drifts(5);
    for (int k = 0; k < 5; ++k) {
      libors[k] = rate(rng);
      lambdas[k] = lam(rng);
      drifts[k] = b(rng);
    }
    const MarketCurve c(libors, t);
    const double xv = x(rng);
    const auto e = step_exponential(initial_state(c), xv, t, lambdas, drifts);
    const auto d = step_difference(initial_state(c), xv, t, lambdas, drifts);
    for (int k = 0; k < 5; ++k) worst = std::max(worst, std::abs(d.rates[k] - e.rates[k]) / e.rates[k]);
  }
  EXPECT_LE(worst, 1e-15);
}

TEST(Step, DifferenceCompositionMatches) {
  const auto setup = base_setup(bernoulli_driver());
  PathEvolver ev(setup);
  ModelState e = initial_state(setup.curve), d = e;
  PathStream stream(1, 1);
  for (std::size_t i = 1; i <= 6; ++i) {
    const double x = sample(setup.driver, stream);
    const auto be = ev.drifts_for(e);
    const std::vector<double> drifts(be.begin(), be.end());
    e = step_exponential(e, x, setup.tenor, setup.vols.row(i), drifts);
    d = step_difference(d, x, setup.tenor, setup.vols.row(i), drifts);
    for (std::size_t k = 0; k < 10; ++k) EXPECT_NEAR(d.rates[k], e.rates[k], 4e-15 * e.rates[k]);
  }
}

TEST(Tree, PathCounts) {
  const auto setup = base_setup(bernoulli_driver());
  const auto one = enumerate_tree(setup, 1);
  ASSERT_EQ(one.size(), 2u);
  EXPECT_EQ(one.weights[0], 0.5);
  EXPECT_EQ(one.weights[1], 0.5);
  EXPECT_EQ(enumerate_tree(setup, 5).size(), 32u);
}

TEST(Tree, ThreeAtoms) {
  const auto d = make_driver({AtomicLaw{{{-1.0, 0.2}, {0.0, 0.5}, {1.5, 0.3}}}});
  const auto setup = base_setup(d);
  const auto tree = enumerate_tree(setup, 2);
  ASSERT_EQ(tree.size(), 9u);
  const double p[3] = {0.2, 0.5, 0.3};
  double total = 0.0;
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_DOUBLE_EQ(tree.weights[3 * a + c], p[a] * p[c]);
      total += tree.weights[3 * a + c];
    }
  EXPECT_NEAR(total, 1.0, 1e-15);
}

TEST(Tree, PathLimit) {
  const auto setup = base_setup(bernoulli_driver());
  EXPECT_THROW(enumerate_tree(setup, 11, {1, 1000, false}), SizeError);
  EXPECT_THROW(enumerate_tree(setup, 12), HorizonError);
}

// Martingale identities on the exact tree, at every grid time up to each
// rate's fixing.
TEST(Tree, MartingaleIdentities) {
  for (std::size_t p : {1u, 2u}) {
    const auto setup = base_setup(bernoulli_driver(1.0 / p), p);
    const std::size_t horizon = std::min<std::size_t>(setup.tenor.step_count() - p, 10);
    const auto tree = enumerate_tree(setup, horizon, {1, std::size_t{1} << 20, true});
    double total = 0.0;
    for (double w : tree.weights) total += w;
    EXPECT_NEAR(total, 1.0, 1e-14);
    for (std::size_t i = 0; i <= horizon; ++i) {
      for (std::size_t j = setup.tenor.eta(i); j <= 10; ++j) {
        if (!setup.tenor.alive(j, i)) continue;
        CompensatedSum mart, dens, dens_j;
        for (std::size_t q = 0; q < tree.size(); ++q) {
          const auto& s = tree.trajectories[q][i];
          const double w = terminal_rn_weight(s, j + 1, setup.tenor);
          mart.add(tree.weights[q] * w * s.rate(j));
          dens.add(tree.weights[q] * w);
          dens_j.add(tree.weights[q] * terminal_rn_weight(s, j, setup.tenor));
        }
        EXPECT_NEAR(mart.value(), setup.curve.libor(j) * dens.value(), 1e-12 * setup.curve.libor(j))
            << "p=" << p << " i=" << i << " j=" << j;
        EXPECT_NEAR(dens.value(), 1.0, 1e-12);
        EXPECT_NEAR(dens_j.value(), 1.0, 1e-12);
      }
    }
  }
}

TEST(Tree, DeadRatesFrozen) {
  const auto setup = base_setup(bernoulli_driver());
  const auto tree = enumerate_tree(setup, 6);
  for (const auto& traj : tree.trajectories)
    for (std::size_t j = 1; j <= 5; ++j)
      for (std::size_t i = j + 1; i < traj.size(); ++i) EXPECT_EQ(traj[i].rate(j), traj[j].rate(j));
}

TEST(Tree, RateIndexErrors) {
  const auto setup = base_setup(bernoulli_driver());
  const auto tree = enumerate_tree(setup, 6);
  EXPECT_THROW(terminal_rn_weight(tree.trajectories[0][6], 3, setup.tenor), IndexError);
  EXPECT_NO_THROW(terminal_rn_weight(tree.trajectories[0][6], 6, setup.tenor));
}

TEST(Simulate, Deterministic) {
  const auto setup = base_setup(gaussian_driver());
  const auto a = simulate_paths(setup, 5, 500, 99);
  const auto b = simulate_paths(setup, 5, 500, 99);
  EXPECT_EQ(a.rates, b.rates);
  EXPECT_EQ(a.ratios, b.ratios);
  const auto c = simulate_paths(setup, 5, 500, 100);
  EXPECT_NE(a.rates, c.rates);
}

TEST(Simulate, ThreadCountIrrelevant) {
  const auto setup = base_setup(gaussian_driver());
  const auto a = simulate_paths(setup, 5, 5000, 3, {1, false, 1});
  const auto b = simulate_paths(setup, 5, 5000, 3, {1, false, 3});
  EXPECT_EQ(a.rates, b.rates);
}

TEST(Simulate, PrefixStable) {
  const auto setup = base_setup(bernoulli_driver());
  const auto small = simulate_paths(setup, 5, 100, 8);
  const auto large = simulate_paths(setup, 5, 300, 8);
  for (std::size_t q = 0; q < 100; ++q)
    for (std::size_t j = 1; j <= 10; ++j) EXPECT_EQ(small.rate(q, j), large.rate(q, j));
}

TEST(Simulate, SinglePath) {
  const auto setup = base_setup(gaussian_driver());
  const auto e = simulate_paths(setup, 3, 1, 4);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e.weights[0], 1.0);
}

TEST(Simulate, SkippingEarlyRatesChangesNothingLater) {
  const auto setup = base_setup(bernoulli_driver());
  const auto full = simulate_paths(setup, 5, 200, 12, {1, false, 1});
  const auto tail = simulate_paths(setup, 5, 200, 12, {5, false, 1});
  for (std::size_t q = 0; q < 200; ++q)
    for (std::size_t j = 5; j <= 10; ++j) {
      EXPECT_EQ(full.rate(q, j), tail.rate(q, j));
      EXPECT_EQ(full.terminal_density(q, j), tail.terminal_density(q, j));
    }
}

TEST(Simulate, BernoulliMatchesTreeWithinThreeSe) {
  const auto setup = base_setup(bernoulli_driver());
  const CapletSpec spec{5, fixtures::kStrikes};
  const auto tree = enumerate_tree(setup, 5, {5, 1 << 20, false});
  const auto mc = simulate_paths(setup, 5, 200000, 31, {5, false, 1});
  const auto exact = caplet_prices(tree, spec, setup.curve, setup.tenor);
  const auto est = caplet_prices(mc, spec, setup.curve, setup.tenor);
  for (std::size_t k = 0; k < exact.size(); ++k) {
    if (exact[k].price == 0.0) {
      EXPECT_EQ(est[k].price, 0.0);
      continue;
    }
    EXPECT_LE(std::abs(est[k].price - exact[k].price), 3.0 * est[k].std_error) << "strike " << spec.strike_multipliers[k];
  }
}

TEST(Gz, InitSingleRate) {
  const TenorStructure t(2.0, 1, 1);
  const MarketCurve c(std::vector<double>{0.04}, t);
  const auto s = gz_init(c);
  EXPECT_EQ(s.w[0], 0.04);
}

TEST(Gz, InitRoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> rate(0.001, 0.2);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + trial % 9;
    const TenorStructure t(static_cast<double>(n + 1) * 0.5, n, 1);
    std::vector<double> libors(n);
    for (double& l : libors) l = rate(rng);
    const MarketCurve c(libors, t);
    const auto s = gz_init(c);
    for (std::size_t j = 1; j <= n; ++j) {
      EXPECT_GT(s.w[j - 1], 0.0);
      EXPECT_NEAR(gz_rate(s, j, t.delta()), libors[j - 1], 1e-15 * libors[j - 1]);
    }
  }
}

TEST(Gz, BaseCurvePositive) {
  const auto t = fixtures::tenor();
  const auto s = gz_init(fixtures::curve(t));
  for (double w : s.w) EXPECT_GT(w, 0.0);
}

TEST(Gz, ZeroVolsFreeze) {
  const auto t = fixtures::tenor();
  const auto s0 = gz_init(fixtures::curve(t));
  const std::vector<double> zeros(10, 0.0);
  const auto s1 = gz_step(s0, 1.3, 1.0, zeros);
  EXPECT_EQ(s1.w, s0.w);
}

TEST(Gz, SingleRateLognormal) {
  const TenorStructure t(2.0, 1, 1);
  const auto s0 = gz_init(MarketCurve(std::vector<double>{0.04}, t));
  const std::vector<double> lam{0.3};
  const auto s1 = gz_step(s0, 0.5, 1.0, lam);
  EXPECT_DOUBLE_EQ(s1.w[0], 0.04 * std::exp(-0.045 + 0.15));
}

TEST(Gz, OneStepMartingale) {
  const auto t = fixtures::tenor();
  const auto s0 = gz_init(fixtures::curve(t));
  const auto vols = fixtures::vols(t);
  const auto row = vols.row(1);
  const int n = 100000;
  std::vector<double> sum(10, 0.0), sq(10, 0.0);
  for (int q = 0; q < n; ++q) {
    PathStream stream(5, static_cast<std::uint64_t>(q));
    const auto s1 = gz_step(s0, stream.normal(), 1.0, row);
    for (int j = 0; j < 10; ++j) {
      sum[j] += s1.w[j];
      sq[j] += s1.w[j] * s1.w[j];
    }
  }
  for (int j = 0; j < 10; ++j) {
    const double mean = sum[j] / n;
    const double se = std::sqrt((sq[j] / n - mean * mean) / n);
    EXPECT_LE(std::abs(mean - s0.w[j]), 3.0 * se) << "W_" << j + 1;
  }
}

TEST(Gz, EnsemblePositiveAndDensityMeanOne) {
  const auto t = fixtures::tenor();
  const auto e = simulate_gz_paths(t, fixtures::curve(t), fixtures::vols(t), gaussian_driver(), 5, 50000, 17, {5, false, 1});
  double sum = 0.0, sq = 0.0;
  for (std::size_t q = 0; q < e.size(); ++q) {
    for (std::size_t j = 5; j <= 10; ++j) ASSERT_GT(e.rate(q, j), 0.0);
    const double d = e.terminal_density(q, 6);
    sum += d;
    sq += d * d;
  }
  const double mean = sum / e.size();
  EXPECT_LE(std::abs(mean - 1.0), 3.0 * std::sqrt((sq / e.size() - mean * mean) / e.size()));
}
