#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "dlmm/driver.hpp"

using namespace dlmm;

TEST(MakeDriver, SymmetricBernoulli) {
  std::vector<std::string> warnings;
  const auto d = make_driver({AtomicLaw{{{1.0, 0.5}, {-1.0, 0.5}}}}, &warnings);
  EXPECT_TRUE(d.is_atomic());
  EXPECT_EQ(d.mean(), 0.0);
  EXPECT_EQ(d.variance(), 1.0);
  EXPECT_TRUE(warnings.empty());
}

TEST(MakeDriver, StandardGaussian) {
  std::vector<std::string> warnings;
  const auto d = make_driver({GaussianLaw{1.0}}, &warnings);
  EXPECT_TRUE(d.is_gaussian());
  EXPECT_EQ(d.gaussian_variance(), 1.0);
  EXPECT_TRUE(warnings.empty());
}

TEST(MakeDriver, Rejections) {
  EXPECT_THROW(make_driver({AtomicLaw{{{1.0, 0.6}, {-1.0, 0.6}}}}), ValidationError);
  EXPECT_THROW(make_driver({AtomicLaw{{{1.0, 1.0}}}}), ValidationError);
  EXPECT_THROW(make_driver({AtomicLaw{{{1.0, 1.2}, {-1.0, -0.2}}}}), ValidationError);
  EXPECT_THROW(make_driver({GaussianLaw{0.0}}), ValidationError);
  EXPECT_THROW(make_driver({GaussianLaw{-1.0}}), ValidationError);
  EXPECT_THROW(make_driver({GaussianLaw{1.0}, 0.0}), ValidationError);
}

TEST(MakeDriver, NonStandardMomentsWarn) {
  std::vector<std::string> warnings;
  const auto d = make_driver({AtomicLaw{{{2.0, 0.5}, {0.0, 0.5}}}}, &warnings);
  EXPECT_EQ(warnings.size(), 1u);  // mean 1; variance happens to be 1
  EXPECT_EQ(d.mean(), 1.0);
  warnings.clear();
  (void)make_driver({GaussianLaw{0.25}}, &warnings);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(Mgf, Values) {
  const auto b = bernoulli_driver();
  EXPECT_DOUBLE_EQ(mgf(b, 0.16), std::cosh(0.16));
  EXPECT_NEAR(mgf(b, 0.16), 1.0128273, 1e-7);
  EXPECT_EQ(mgf(b, 0.0), 1.0);
  const auto g = gaussian_driver();
  EXPECT_EQ(mgf(g, 0.0), 1.0);
  EXPECT_NEAR(mgf(g, 0.26), std::exp(0.0338), 1e-15);
}

TEST(Mgf, BoundEnforced) {
  const auto d = make_driver({GaussianLaw{1.0}, 1.0, 2.0});
  EXPECT_NO_THROW(mgf(d, 2.0));
  EXPECT_THROW(mgf(d, 2.5), DomainError);
  EXPECT_THROW(mgf(d, -2.5), DomainError);
}

TEST(Mgf, JensenAndBruteForce) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> val(-2.0, 2.0), uu(-3.0, 3.0), pr(0.05, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const int count = 2 + trial % 4;
    std::vector<Atom> atoms(count);
    double total = 0.0;
    for (auto& a : atoms) {
      a.value = val(rng);
      a.probability = pr(rng);
      total += a.probability;
    }
    for (auto& a : atoms) a.probability /= total;
    double fix = 1.0;
    for (std::size_t k = 0; k + 1 < atoms.size(); ++k) fix -= atoms[k].probability;
    atoms.back().probability = fix;
    const auto d = make_driver({AtomicLaw{atoms}});
    const double u = uu(rng);
    double brute = 0.0;
    for (const auto& a : d.atoms()) brute += a.probability * std::exp(u * a.value);
    EXPECT_EQ(mgf(d, u), brute);
    EXPECT_GE(mgf(d, u), std::exp(u * d.mean()) * (1.0 - 1e-14));
  }
}

TEST(Scaling, AtomsAndVariance) {
  const double dt = 1.0 / 64.0;
  const auto b = bernoulli_driver(dt);
  EXPECT_DOUBLE_EQ(b.atoms()[0].value, std::sqrt(dt));
  EXPECT_DOUBLE_EQ(b.variance(), dt);
  EXPECT_DOUBLE_EQ(gaussian_driver(dt).gaussian_variance(), dt);
}

TEST(Sample, Deterministic) {
  const auto g = gaussian_driver();
  PathStream a(5, 0), b(5, 0);
  for (int k = 0; k < 1000; ++k) EXPECT_EQ(sample(g, a), sample(g, b));
}

TEST(Sample, BernoulliMean) {
  const auto b = bernoulli_driver();
  PathStream s(2024, 0);
  const int n = 1000000;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double x = sample(b, s);
    ASSERT_TRUE(x == 1.0 || x == -1.0);
    sum += x;
  }
  EXPECT_LT(std::abs(sum / n), 4.0 / std::sqrt(n));
}

TEST(Sample, GaussianVariance) {
  const auto g = make_driver({GaussianLaw{0.25}});
  PathStream s(77, 1);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int k = 0; k < n; ++k) {
    const double x = sample(g, s);
    sum += x;
    sq += x * x;
  }
  const double var = sq / n - (sum / n) * (sum / n);
  // SE of the sample variance of a normal: v sqrt(2/n)
  EXPECT_NEAR(var, 0.25, 3.0 * 0.25 * std::sqrt(2.0 / n));
}

TEST(Sample, ThreeAtomFrequencies) {
  const auto d = make_driver({AtomicLaw{{{-1.0, 0.2}, {0.0, 0.5}, {2.0, 0.3}}}});
  PathStream s(3, 3);
  const int n = 300000;
  int counts[3] = {0, 0, 0};
  for (int k = 0; k < n; ++k) {
    const double x = sample(d, s);
    counts[x < -0.5 ? 0 : (x < 1.0 ? 1 : 2)]++;
  }
  const double p[3] = {0.2, 0.5, 0.3};
  for (int a = 0; a < 3; ++a) EXPECT_NEAR(counts[a] / static_cast<double>(n), p[a], 4.0 * std::sqrt(p[a] * (1 - p[a]) / n));
}
