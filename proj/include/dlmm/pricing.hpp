#pragma once

/// \file pricing.hpp
/// Caplets under their forward measure, the Black-76 benchmark and implied
/// volatility inversion.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dlmm/driver.hpp"
#include "dlmm/errors.hpp"
#include "dlmm/market.hpp"
#include "dlmm/models.hpp"

namespace dlmm {

/// Caplet on L(T_j*, T_j*) paid at T_{j*+1}; strikes are multiples of L(0,T_j*).
struct CapletSpec {
  std::size_t fixing_index = 5;
  std::vector<double> strike_multipliers{0.6, 1.0, 1.4, 1.8, 2.2, 2.6, 3.0, 3.4};

  void validate(const TenorStructure& tenor) const {
    if (fixing_index == 0 || fixing_index > tenor.rate_count())
      throw ValidationError("caplet: fixing index " + std::to_string(fixing_index) + " outside 1.." +
                            std::to_string(tenor.rate_count()));
    for (double k : strike_multipliers)
      if (!(k >= 0.0) || !std::isfinite(k)) throw ValidationError("caplet: strike multipliers must be non-negative");
  }
};

struct CapletPrice {
  double price = 0.0;
  double std_error = 0.0;
};

struct SmilePoint {
  double strike_multiplier = 0.0;
  double price = 0.0;
  /// Empty when the price admits no Black volatility (e.g. zero price).
  std::optional<double> implied_vol;
  double std_error = 0.0;
  std::string note;
};

/// Neumaier-compensated running sum; fixed order gives reproducible totals.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      carry_ += (sum_ - t) + x;
    else
      carry_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// discount * delta * (F N(d1) - K N(d2)).
inline double black_caplet(double forward, double strike, double sigma, double expiry, double discount, double delta) {
  if (!(forward > 0.0) || !(expiry > 0.0) || !(discount > 0.0) || !(delta > 0.0) || !(strike >= 0.0))
    throw DomainError("black_caplet: forward, expiry, discount and delta must be positive, strike non-negative");
  const double scale = discount * delta;
  if (strike == 0.0) return scale * forward;
  if (!(sigma > 0.0)) {
    if (forward != strike) throw DomainError("black_caplet: sigma must be positive");
    return 0.0;
  }
  const double total = sigma * std::sqrt(expiry);
  const double d1 = (std::log(forward / strike) + 0.5 * total * total) / total;
  return scale * (forward * normal_cdf(d1) - strike * normal_cdf(d1 - total));
}

struct ImpliedVolBracket {
  double lower = 1e-6;
  double upper = 5.0;
};

/// Black volatility reproducing `price`, by bisection.
inline double implied_vol(double price, double forward, double strike, double expiry, double discount, double delta,
                          ImpliedVolBracket bracket = {}) {
  const double scale = discount * delta;
  const double intrinsic = scale * std::max(forward - strike, 0.0);
  if (!(price > intrinsic))
    throw NoSolutionError("implied_vol: price " + std::to_string(price) + " does not exceed the intrinsic value " +
                          std::to_string(intrinsic));
  if (!(price < scale * forward))
    throw NoSolutionError("implied_vol: price " + std::to_string(price) + " at or above the forward bound");
  double lo = bracket.lower;
  double hi = bracket.upper;
  const double f_lo = black_caplet(forward, strike, lo, expiry, discount, delta) - price;
  const double f_hi = black_caplet(forward, strike, hi, expiry, discount, delta) - price;
  if (f_lo > 0.0 || f_hi < 0.0)
    throw NoSolutionError("implied_vol: price " + std::to_string(price) + " outside the Black range on [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (black_caplet(forward, strike, mid, expiry, discount, delta) < price)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace detail {

struct FixingSample {
  double rate;
  double density;
};

/// Rate j* and dP_{j*+1}/dP_{n+1}, both at T_j*, for one path.
inline FixingSample fixing_sample(const PathEnsemble& e, std::size_t path, std::size_t fixing_index,
                                  std::size_t fixing_step, const TenorStructure& tenor) {
  if (e.horizon == fixing_step)
    return {e.rate(path, fixing_index), e.terminal_density(path, fixing_index + 1)};
  const ModelState& s = e.trajectories[path][fixing_step];
  return {s.rate(fixing_index), terminal_rn_weight(s, fixing_index + 1, tenor)};
}

}  // namespace detail

/// B(0,T_{j*+1}) delta E_{P_{j*+1}}[(L(T_j*,T_j*) - K L(0,T_j*))^+] for every
/// strike, computed as a terminal-measure expectation weighted by the density
/// at T_j*. With `control_variate`, Monte Carlo estimates are corrected with
/// the forward-measure martingale L(T_j*,T_j*), whose mean L(0,T_j*) is known.
inline std::vector<CapletPrice> caplet_prices(const PathEnsemble& ensemble, const CapletSpec& spec,
                                              const MarketCurve& curve, const TenorStructure& tenor,
                                              bool control_variate = false) {
  spec.validate(tenor);
  const std::size_t j = spec.fixing_index;
  const std::size_t fixing_step = tenor.fixing_step(j);
  if (j < ensemble.first_rate) throw IndexError("caplet: rate " + std::to_string(j) + " was not simulated");
  if (ensemble.horizon < fixing_step)
    throw HorizonError("caplet: ensemble horizon " + std::to_string(ensemble.horizon) + " does not reach T_" +
                       std::to_string(j) + " (step " + std::to_string(fixing_step) + ")");
  if (ensemble.horizon != fixing_step && ensemble.trajectories.size() != ensemble.size())
    throw HorizonError("caplet: ensemble runs past T_" + std::to_string(j) + " without recorded trajectories");

  const double forward = curve.libor(j);
  const double scale = curve.bond(j + 1) * tenor.delta();
  const std::size_t paths = ensemble.size();

  std::vector<detail::FixingSample> samples(paths);
  for (std::size_t p = 0; p < paths; ++p) samples[p] = detail::fixing_sample(ensemble, p, j, fixing_step, tenor);

  std::vector<CapletPrice> out;
  out.reserve(spec.strike_multipliers.size());
  for (double multiplier : spec.strike_multipliers) {
    const double strike = multiplier * forward;
    CompensatedSum mean;
    for (std::size_t p = 0; p < paths; ++p)
      mean.add(ensemble.weights[p] * std::max(samples[p].rate - strike, 0.0) * samples[p].density);
    CapletPrice price{scale * mean.value(), 0.0};
    if (!ensemble.exact && paths > 1) {
      // Weights are 1/N: plain sample statistics of Y = payoff * density.
      const double n = static_cast<double>(paths);
      const double y_bar = mean.value();
      if (!control_variate) {
        CompensatedSum ss;
        for (std::size_t p = 0; p < paths; ++p) {
          const double d = std::max(samples[p].rate - strike, 0.0) * samples[p].density - y_bar;
          ss.add(d * d);
        }
        price.std_error = scale * std::sqrt(ss.value() / (n - 1.0) / n);
      } else {
        CompensatedSum c_mean;
        for (std::size_t p = 0; p < paths; ++p) c_mean.add(samples[p].rate * samples[p].density / n);
        const double c_bar = c_mean.value();
        CompensatedSum cov, var;
        for (std::size_t p = 0; p < paths; ++p) {
          const double dy = std::max(samples[p].rate - strike, 0.0) * samples[p].density - y_bar;
          const double dc = samples[p].rate * samples[p].density - c_bar;
          cov.add(dy * dc);
          var.add(dc * dc);
        }
        const double beta = var.value() > 0.0 ? cov.value() / var.value() : 0.0;
        const double corrected = y_bar - beta * (c_bar - forward);
        CompensatedSum resid;
        for (std::size_t p = 0; p < paths; ++p) {
          const double dy = std::max(samples[p].rate - strike, 0.0) * samples[p].density - y_bar;
          const double dc = samples[p].rate * samples[p].density - c_bar;
          const double r = dy - beta * dc;
          resid.add(r * r);
        }
        price.price = scale * corrected;
        price.std_error = scale * std::sqrt(resid.value() / std::max(1.0, n - 2.0) / n);
      }
    }
    out.push_back(price);
  }
  return out;
}

inline CapletPrice caplet_price(const PathEnsemble& ensemble, std::size_t fixing_index, double strike_multiplier,
                                const MarketCurve& curve, const TenorStructure& tenor, bool control_variate = false) {
  return caplet_prices(ensemble, {fixing_index, {strike_multiplier}}, curve, tenor, control_variate).front();
}

/// Black price of the caplet described by `spec` at one strike.
inline double black_benchmark(const CapletSpec& spec, double strike_multiplier, double sigma, const MarketCurve& curve,
                              const TenorStructure& tenor) {
  const std::size_t j = spec.fixing_index;
  return black_caplet(curve.libor(j), strike_multiplier * curve.libor(j), sigma, tenor.tenor_date(j),
                      curve.bond(j + 1), tenor.delta());
}

enum class SmileModel { bernoulli_exact, lognormal_mc, gz_mc };

inline std::string to_string(SmileModel m) {
  switch (m) {
    case SmileModel::bernoulli_exact:
      return "bernoulli-exact";
    case SmileModel::lognormal_mc:
      return "lognormal-mc";
    case SmileModel::gz_mc:
      return "gz-mc";
  }
  return "unknown";
}

inline SmileModel parse_smile_model(const std::string& name) {
  if (name == "bernoulli-exact") return SmileModel::bernoulli_exact;
  if (name == "lognormal-mc") return SmileModel::lognormal_mc;
  if (name == "gz-mc") return SmileModel::gz_mc;
  throw ValidationError("unknown model '" + name + "' (expected bernoulli-exact, lognormal-mc or gz-mc)");
}

struct SmileRequest {
  SmileModel model = SmileModel::bernoulli_exact;
  std::size_t paths = 500000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool control_variate = false;
  std::size_t path_limit = std::size_t{1} << 20;
};

/// Prices every strike and inverts Black. The exact tree is used for the
/// atomic model, Monte Carlo otherwise. Only rates j* and later are
/// simulated; earlier rates cannot influence them.
inline std::vector<SmilePoint> build_smile(const TenorStructure& tenor, const MarketCurve& curve,
                                           const VolSurface& vols, const DriverSpec& driver, const CapletSpec& spec,
                                           const SmileRequest& request) {
  spec.validate(tenor);
  const std::size_t horizon = tenor.fixing_step(spec.fixing_index);
  PathEnsemble ensemble;
  switch (request.model) {
    case SmileModel::bernoulli_exact: {
      if (!driver.is_atomic()) throw ValidationError("bernoulli-exact requires an atomic driver");
      const ModelSetup setup(tenor, curve, vols, driver);
      ensemble = enumerate_tree(setup, horizon, {spec.fixing_index, request.path_limit, false});
      break;
    }
    case SmileModel::lognormal_mc: {
      if (!driver.is_gaussian()) throw ValidationError("lognormal-mc requires a Gaussian driver");
      const ModelSetup setup(tenor, curve, vols, driver);
      ensemble = simulate_paths(setup, horizon, request.paths, request.seed,
                                {spec.fixing_index, false, request.threads});
      break;
    }
    case SmileModel::gz_mc:
      if (!driver.is_gaussian()) throw ValidationError("gz-mc requires a Gaussian driver");
      ensemble = simulate_gz_paths(tenor, curve, vols, driver, horizon, request.paths, request.seed,
                                   {spec.fixing_index, false, request.threads});
      break;
  }

  const auto prices = caplet_prices(ensemble, spec, curve, tenor, request.control_variate);
  const std::size_t j = spec.fixing_index;
  std::vector<SmilePoint> out;
  for (std::size_t s = 0; s < prices.size(); ++s) {
    SmilePoint pt;
    pt.strike_multiplier = spec.strike_multipliers[s];
    pt.price = prices[s].price;
    pt.std_error = prices[s].std_error;
    try {
      pt.implied_vol = implied_vol(pt.price, curve.libor(j), pt.strike_multiplier * curve.libor(j),
                                   tenor.tenor_date(j), curve.bond(j + 1), tenor.delta());
    } catch (const NoSolutionError& e) {
      pt.note = e.what();
    }
    out.push_back(std::move(pt));
  }
  std::sort(out.begin(), out.end(),
            [](const SmilePoint& a, const SmilePoint& b) { return a.strike_multiplier < b.strike_multiplier; });
  return out;
}

}  // namespace dlmm
