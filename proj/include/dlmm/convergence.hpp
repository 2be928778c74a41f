#pragma once

/// \file convergence.hpp
/// Grid-refinement experiments: a caplet priced in the discrete model at
/// p = 1, 2, 4, ... sub-steps per accrual period, with driver increments
/// scaled to variance dt, compared with the Black price of the lognormal
/// limit and with a Kolmogorov-Smirnov distance of the fixing distribution.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dlmm/driver.hpp"
#include "dlmm/errors.hpp"
#include "dlmm/market.hpp"
#include "dlmm/models.hpp"
#include "dlmm/pricing.hpp"

namespace dlmm {

enum class ConvergenceModel { bernoulli, gaussian, gz };

inline std::string to_string(ConvergenceModel m) {
  switch (m) {
    case ConvergenceModel::bernoulli:
      return "bernoulli";
    case ConvergenceModel::gaussian:
      return "gaussian";
    case ConvergenceModel::gz:
      return "gz";
  }
  return "unknown";
}

inline ConvergenceModel parse_convergence_model(const std::string& name) {
  if (name == "bernoulli") return ConvergenceModel::bernoulli;
  if (name == "gaussian") return ConvergenceModel::gaussian;
  if (name == "gz") return ConvergenceModel::gz;
  throw ValidationError("unknown convergence model '" + name + "' (expected bernoulli, gaussian or gz)");
}

struct ConvergenceSpec {
  double horizon = 11.0;
  std::size_t rate_count = 10;
  std::vector<double> initial_libors;
  double normalization = 1.0;
  /// lambda(t, T_j), one function per rate.
  std::vector<VolSurface::LimitFunction> limit_vols;
  std::vector<std::size_t> levels{1, 2, 4, 8, 16, 32, 64};
  std::vector<ConvergenceModel> models{ConvergenceModel::bernoulli};
  std::size_t fixing_index = 10;
  double strike_multiplier = 1.4;
  std::size_t paths = 1000000;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  bool exact = false;
  std::size_t path_limit = std::size_t{1} << 20;
  bool control_variate = true;
  unsigned threads = 1;

  void validate() const {
    const TenorStructure base(horizon, rate_count, 1);
    const MarketCurve curve(initial_libors, base, normalization);
    if (!curve.strictly_increasing())
      throw ValidationError("convergence: initial rates must be strictly increasing in j");
    if (limit_vols.size() != rate_count) throw ValidationError("convergence: need one limit vol per rate");
    if (levels.empty()) throw ValidationError("convergence: no refinement levels");
    for (std::size_t p : levels)
      if (p == 0) throw ValidationError("convergence: refinement levels must be >= 1");
    if (fixing_index == 0 || fixing_index > rate_count) throw ValidationError("convergence: fixing index out of range");
    if (!(strike_multiplier > 0.0)) throw ValidationError("convergence: strike multiplier must be positive");
    if (!exact && paths == 0) throw ValidationError("convergence: path count must be >= 1");
    if (!exact && seeds.empty()) throw ValidationError("convergence: need at least one seed");
    const std::size_t finest = *std::max_element(levels.begin(), levels.end());
    const TenorStructure fine(horizon, rate_count, finest);
    for (std::size_t j = 1; j <= rate_count; ++j)
      for (std::size_t i = 0; i < fine.fixing_step(j); ++i)
        if (!(limit_vols[j - 1](fine.grid_time(i)) > 0.0))
          throw ValidationError("convergence: limit vol of rate " + std::to_string(j) + " must be positive");
  }
};

struct ConvergenceRow {
  std::size_t p = 0;
  ConvergenceModel model = ConvergenceModel::bernoulli;
  double price = 0.0;
  double std_error = 0.0;
  double benchmark = 0.0;
  double rel_error = 0.0;
  double ks_stat = 0.0;
  std::uint64_t seed = 0;
};

/// Lognormal law of the fixing under its own forward measure.
struct LognormalLaw {
  double log_mean;
  double log_sd;

  double cdf(double x) const { return x > 0.0 ? normal_cdf((std::log(x) - log_mean) / log_sd) : 0.0; }
};

/// sup_x |F_n(x) - F(x)| for a (weighted) sample. Weights default to equal;
/// they are normalized internally.
inline double ks_distance(std::span<const double> sample, const LognormalLaw& law,
                          std::span<const double> weights = {}) {
  if (sample.empty()) throw ValidationError("ks_distance: empty sample");
  if (!weights.empty() && weights.size() != sample.size())
    throw ValidationError("ks_distance: weights and sample differ in size");
  std::vector<std::size_t> order(sample.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sample[a] < sample[b]; });
  double total = 0.0;
  if (weights.empty())
    total = static_cast<double>(sample.size());
  else
    for (double w : weights) total += w;
  double below = 0.0;
  double worst = 0.0;
  std::size_t k = 0;
  while (k < order.size()) {
    const double x = sample[order[k]];
    const double f = law.cdf(x);
    worst = std::max(worst, std::abs(f - below / total));
    while (k < order.size() && sample[order[k]] == x) {
      below += weights.empty() ? 1.0 : weights[order[k]];
      ++k;
    }
    worst = std::max(worst, std::abs(below / total - f));
  }
  return worst;
}

/// Black volatility of the limit: sqrt(int_0^T lambda(s)^2 ds / T).
inline double limit_black_vol(const VolSurface::LimitFunction& lambda, double expiry) {
  const auto integrand = [&](double s) {
    const double v = lambda(s);
    return v * v;
  };
  const double total = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, expiry, 15, 1e-13);
  return std::sqrt(total / expiry);
}

/// One ensemble per (model, level, seed); exact mode enumerates the tree
/// once per level instead (Bernoulli only).
inline std::vector<ConvergenceRow> refine_experiment(const ConvergenceSpec& spec) {
  spec.validate();
  const std::size_t j = spec.fixing_index;
  const CapletSpec caplet{j, {spec.strike_multiplier}};
  std::vector<ConvergenceRow> rows;

  for (ConvergenceModel model : spec.models) {
    if (spec.exact && model != ConvergenceModel::bernoulli)
      throw ValidationError("convergence: exact mode needs the Bernoulli driver");
    for (std::size_t p : spec.levels) {
      const TenorStructure tenor(spec.horizon, spec.rate_count, p);
      const MarketCurve curve(spec.initial_libors, tenor, spec.normalization);
      const VolSurface vols = VolSurface::from_limit(tenor, spec.limit_vols);
      const double dt = tenor.step_length();
      const DriverSpec driver =
          model == ConvergenceModel::bernoulli ? bernoulli_driver(dt) : gaussian_driver(dt);
      const std::size_t horizon = tenor.fixing_step(j);
      const double expiry = tenor.tenor_date(j);
      const double sigma = limit_black_vol(spec.limit_vols[j - 1], expiry);
      const double benchmark = black_benchmark(caplet, spec.strike_multiplier, sigma, curve, tenor);
      const LognormalLaw law{std::log(curve.libor(j)) - 0.5 * sigma * sigma * expiry, sigma * std::sqrt(expiry)};

      const auto record = [&](const PathEnsemble& e, std::uint64_t seed) {
        const CapletPrice price = caplet_price(e, j, spec.strike_multiplier, curve, tenor, spec.control_variate);
        std::vector<double> fixings(e.size()), weights(e.size());
        for (std::size_t q = 0; q < e.size(); ++q) {
          fixings[q] = e.rate(q, j);
          weights[q] = e.weights[q] * e.terminal_density(q, j + 1);
        }
        ConvergenceRow row;
        row.p = p;
        row.model = model;
        row.price = price.price;
        row.std_error = price.std_error;
        row.benchmark = benchmark;
        row.rel_error = (price.price - benchmark) / benchmark;
        row.ks_stat = ks_distance(fixings, law, weights);
        row.seed = seed;
        rows.push_back(row);
      };

      if (spec.exact) {
        const std::size_t count = tree_path_count(2, horizon);
        if (count > spec.path_limit)
          throw SizeError("convergence: exact tree at p=" + std::to_string(p) + " needs 2^" + std::to_string(horizon) +
                          " paths, above the limit of " + std::to_string(spec.path_limit));
        const ModelSetup setup(tenor, curve, vols, driver);
        record(enumerate_tree(setup, horizon, {j, spec.path_limit, false}), 0);
        continue;
      }
      for (std::uint64_t seed : spec.seeds) {
        if (model == ConvergenceModel::gz) {
          record(simulate_gz_paths(tenor, curve, vols, driver, horizon, spec.paths, seed, {j, false, spec.threads}),
                 seed);
        } else {
          const ModelSetup setup(tenor, curve, vols, driver);
          record(simulate_paths(setup, horizon, spec.paths, seed, {j, false, spec.threads}), seed);
        }
      }
    }
  }
  return rows;
}

struct ConvergenceSummary {
  ConvergenceModel model;
  std::size_t p;
  double median_abs_rel_error;
  double median_ks;
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw ValidationError("median: empty input");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  return m;
}

/// Median over seeds of |rel_error| and of the KS statistic per (model, p).
inline std::vector<ConvergenceSummary> summarize(const std::vector<ConvergenceRow>& rows) {
  std::vector<ConvergenceSummary> out;
  for (const auto& r : rows) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](const ConvergenceSummary& s) {
      return s.model == r.model && s.p == r.p;
    });
    if (seen) continue;
    std::vector<double> errs, ks;
    for (const auto& q : rows)
      if (q.model == r.model && q.p == r.p) {
        errs.push_back(std::abs(q.rel_error));
        ks.push_back(q.ks_stat);
      }
    out.push_back({r.model, r.p, median(errs), median(ks)});
  }
  return out;
}

}  // namespace dlmm
