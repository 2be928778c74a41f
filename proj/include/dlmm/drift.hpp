#pragma once

/// \file drift.hpp
/// Martingale-restoring drifts b^j_{t_i}.
///
/// Rate j must be a martingale under P_{j+1}. The conditional expectation
/// defining its drift is evaluated under the terminal measure P_{n+1} by
/// weighting each increment x with the one-step density of P_{j+1} relative
/// to P_{n+1},
///
///     w_j(x) = prod_{k=j+1..n} ( ell_k (e^{lambda_ik (x + b^k)} - 1) + 1 ),
///
/// where ell_k = ell(L(t_{i-1},T_k)). Because w_j involves the drifts of all
/// later rates, drifts are computed backwards j = n, n-1, ....

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dlmm/driver.hpp"
#include "dlmm/errors.hpp"
#include "dlmm/market.hpp"

namespace dlmm {

/// Largest number of factors a subset expansion may carry (2^20 terms).
inline constexpr std::size_t kMaxExpansionFactors = 20;

/// One factor of the density weight: the later rate k's ell, vol and drift.
struct CompensatorFactor {
  double ell;
  double lambda;
  double drift;
};

/// State-measurable inputs for the drift of one rate at one step; the
/// factors run over the later rates k = j+1..n.
struct CompensatorContext {
  std::vector<CompensatorFactor> factors;
};

namespace detail {

inline void check_ell(double ell) {
  if (!(ell >= 0.0 && ell < 1.0)) throw DomainError("compensator: ell " + std::to_string(ell) + " outside [0,1)");
}

inline void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw DomainError("drift: lambda must be positive for a live rate");
}

}  // namespace detail

/// Direct product form of w_j(x).
inline double compensator_weight(double x, const CompensatorContext& ctx) {
  double w = 1.0;
  for (const auto& f : ctx.factors) {
    detail::check_ell(f.ell);
    w *= f.ell * std::expm1(f.lambda * (x + f.drift)) + 1.0;
  }
  return w;
}

/// w_j(x) expanded as a sum over subsets sigma of the later rates:
/// sum_sigma prod_{k in sigma} ell_k e^{lambda_k (x+b^k)} prod_{k not in sigma} (1-ell_k).
inline double subset_expansion_weight(double x, const CompensatorContext& ctx) {
  const std::size_t count = ctx.factors.size();
  if (count > kMaxExpansionFactors)
    throw SizeError("subset expansion: " + std::to_string(count) + " factors exceed the limit of " +
                    std::to_string(kMaxExpansionFactors));
  for (const auto& f : ctx.factors) detail::check_ell(f.ell);
  double total = 0.0;
  const std::size_t subsets = std::size_t{1} << count;
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    double term = 1.0;
    for (std::size_t k = 0; k < count; ++k) {
      const auto& f = ctx.factors[k];
      term *= (mask >> k) & 1u ? f.ell * std::exp(f.lambda * (x + f.drift)) : 1.0 - f.ell;
    }
    total += term;
  }
  return total;
}

/// b = -(1/lambda) log sum_a p_a e^{lambda x_a} w(x_a).
inline double drift_atomic(const DriverSpec& driver, double lambda, const CompensatorContext& ctx) {
  detail::check_lambda(lambda);
  if (!driver.is_atomic()) throw ValidationError("drift_atomic: driver is not atomic");
  (void)mgf(driver, lambda);  // integrability bound
  double s = 0.0;
  for (const auto& a : driver.atoms()) s += a.probability * std::exp(lambda * a.value) * compensator_weight(a.value, ctx);
  return -std::log(s) / lambda;
}

/// Terms c_sigma e^{s_sigma X} of the expanded Gaussian integrand, before the
/// rate's own exp(lambda X) factor is attached.
struct ExpansionTerm {
  double coefficient;
  double exponent;
};

namespace detail {

/// Multiplies every term by (1-ell) + ell e^{lambda b} e^{lambda X}.
inline void expand(std::vector<ExpansionTerm>& terms, const CompensatorFactor& f) {
  check_ell(f.ell);
  const double up = f.ell * std::exp(f.lambda * f.drift);
  const double stay = 1.0 - f.ell;
  const std::size_t count = terms.size();
  terms.resize(2 * count);
  for (std::size_t t = 0; t < count; ++t) {
    terms[count + t] = {terms[t].coefficient * up, terms[t].exponent + f.lambda};
    terms[t].coefficient *= stay;
  }
}

inline double gaussian_drift_from_terms(std::span<const ExpansionTerm> terms, double lambda, double variance) {
  double s = 0.0;
  for (const auto& t : terms) {
    const double u = lambda + t.exponent;
    s += t.coefficient * std::exp(0.5 * u * u * variance);
  }
  return -std::log(s) / lambda;
}

}  // namespace detail

/// Exact drift for a Gaussian driver: E[e^{uX}] = e^{u^2 v/2} applied to each
/// term of the subset expansion.
inline double drift_gaussian(const DriverSpec& driver, double lambda, const CompensatorContext& ctx) {
  detail::check_lambda(lambda);
  if (!driver.is_gaussian()) throw ValidationError("drift_gaussian: driver is not Gaussian");
  if (ctx.factors.size() > kMaxExpansionFactors)
    throw SizeError("drift_gaussian: " + std::to_string(ctx.factors.size()) + " factors exceed the limit of " +
                    std::to_string(kMaxExpansionFactors));
  (void)mgf(driver, lambda);
  std::vector<ExpansionTerm> terms{{1.0, 0.0}};
  terms.reserve(std::size_t{1} << ctx.factors.size());
  for (const auto& f : ctx.factors) detail::expand(terms, f);
  return detail::gaussian_drift_from_terms(terms, lambda, driver.gaussian_variance());
}

inline double drift(const DriverSpec& driver, double lambda, const CompensatorContext& ctx) {
  return driver.is_atomic() ? drift_atomic(driver, lambda, ctx) : drift_gaussian(driver, lambda, ctx);
}

/// Backward recursion over the live rates of one step.
///
/// `rates_prev[k]` and `lambdas[k]` refer to rate first+k (k = 0..count-1,
/// the last entry being rate n); the first `live_from` entries are skipped.
/// Writes b^j into `drifts` for the live entries. Reuses the running
/// products across rates, so the cost is O(A n) for A atoms and
/// O(2^{n-j}) for a Gaussian driver.
class StepDriftEngine {
 public:
  void compute(const DriverSpec& driver, std::span<const double> rates_prev, std::span<const double> lambdas,
               double delta, std::size_t live_from, std::span<double> drifts) {
    const std::size_t count = rates_prev.size();
    if (lambdas.size() != count || drifts.size() != count)
      throw ValidationError("drift engine: mismatched state sizes");
    if (live_from >= count) return;
    if (driver.is_atomic()) {
      const auto& atoms = driver.atoms();
      weights_.assign(atoms.size(), 1.0);
      for (std::size_t k = count; k-- > live_from;) {
        const double lambda = lambdas[k];
        detail::check_lambda(lambda);
        double s = 0.0;
        for (std::size_t a = 0; a < atoms.size(); ++a)
          s += atoms[a].probability * std::exp(lambda * atoms[a].value) * weights_[a];
        const double b = -std::log(s) / lambda;
        drifts[k] = b;
        if (k == live_from) break;
        const double l = ell(rates_prev[k], delta);
        for (std::size_t a = 0; a < atoms.size(); ++a)
          weights_[a] *= l * std::expm1(lambda * (atoms[a].value + b)) + 1.0;
      }
    } else {
      const double variance = driver.gaussian_variance();
      if (count - live_from - 1 > kMaxExpansionFactors)
        throw SizeError("drift engine: Gaussian expansion over " + std::to_string(count - live_from - 1) +
                        " factors exceeds the limit of " + std::to_string(kMaxExpansionFactors));
      terms_.assign(1, {1.0, 0.0});
      for (std::size_t k = count; k-- > live_from;) {
        const double lambda = lambdas[k];
        detail::check_lambda(lambda);
        const double b = detail::gaussian_drift_from_terms(terms_, lambda, variance);
        drifts[k] = b;
        if (k == live_from) break;
        detail::expand(terms_, {ell(rates_prev[k], delta), lambda, b});
      }
    }
  }

 private:
  std::vector<double> weights_;
  std::vector<ExpansionTerm> terms_;
};

}  // namespace dlmm
