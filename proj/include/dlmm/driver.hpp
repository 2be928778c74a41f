#pragma once

/// \file driver.hpp
/// Per-step laws of the driving increments under the terminal measure.

#include <cmath>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "dlmm/errors.hpp"
#include "dlmm/random.hpp"

namespace dlmm {

struct Atom {
  double value;
  double probability;

  friend bool operator==(const Atom&, const Atom&) = default;
};

struct AtomicLaw {
  std::vector<Atom> atoms;
};

struct GaussianLaw {
  double variance;
};

/// Unvalidated driver parameters. Atom values and the Gaussian variance are
/// given for a unit step; `step_scale` rescales them for refined grids
/// (atoms by sqrt(scale), variance by scale).
struct DriverParams {
  std::variant<AtomicLaw, GaussianLaw> law = AtomicLaw{{{1.0, 0.5}, {-1.0, 0.5}}};
  double step_scale = 1.0;
  double mgf_bound = std::numeric_limits<double>::infinity();
};

/// Validated per-step law of X_{t_i}. Exponential moments E[e^{uX}] may be
/// requested for |u| <= mgf_bound.
class DriverSpec {
 public:
  bool is_atomic() const noexcept { return std::holds_alternative<AtomicLaw>(law_); }
  bool is_gaussian() const noexcept { return std::holds_alternative<GaussianLaw>(law_); }

  /// Scaled atoms. Throws if the driver is Gaussian.
  const std::vector<Atom>& atoms() const {
    if (!is_atomic()) throw ValidationError("driver: not atomic");
    return std::get<AtomicLaw>(law_).atoms;
  }
  /// Scaled per-step variance. Throws if the driver is atomic.
  double gaussian_variance() const {
    if (!is_gaussian()) throw ValidationError("driver: not Gaussian");
    return std::get<GaussianLaw>(law_).variance;
  }

  double step_scale() const noexcept { return step_scale_; }
  double mgf_bound() const noexcept { return mgf_bound_; }

  double mean() const {
    if (is_gaussian()) return 0.0;
    double m = 0.0;
    for (const auto& a : atoms()) m += a.probability * a.value;
    return m;
  }

  double variance() const {
    if (is_gaussian()) return gaussian_variance();
    const double m = mean();
    double v = 0.0;
    for (const auto& a : atoms()) v += a.probability * (a.value - m) * (a.value - m);
    return v;
  }

  const std::variant<AtomicLaw, GaussianLaw>& law() const noexcept { return law_; }

 private:
  friend DriverSpec make_driver(const DriverParams&, std::vector<std::string>*);
  std::variant<AtomicLaw, GaussianLaw> law_;
  double step_scale_ = 1.0;
  double mgf_bound_ = std::numeric_limits<double>::infinity();
};

/// Validates `params`. A unit-step law that is not mean-zero/unit-variance is
/// accepted but reported through `warnings`.
inline DriverSpec make_driver(const DriverParams& params, std::vector<std::string>* warnings = nullptr) {
  if (!(params.step_scale > 0.0) || !std::isfinite(params.step_scale))
    throw ValidationError("driver: step_scale must be positive");
  if (!(params.mgf_bound > 0.0)) throw ValidationError("driver: mgf_bound must be positive");

  DriverSpec spec;
  spec.step_scale_ = params.step_scale;
  spec.mgf_bound_ = params.mgf_bound;
  double unit_mean = 0.0;
  double unit_var = 1.0;

  if (const auto* atomic = std::get_if<AtomicLaw>(&params.law)) {
    if (atomic->atoms.size() < 2) throw ValidationError("driver: need at least 2 atoms");
    double total = 0.0;
    for (const auto& a : atomic->atoms) {
      if (!(a.probability > 0.0)) throw ValidationError("driver: atom probabilities must be positive");
      if (!std::isfinite(a.value)) throw ValidationError("driver: atom values must be finite");
      total += a.probability;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw ValidationError("driver: atom probabilities sum to " + std::to_string(total) + ", expected 1");
    const double scale = std::sqrt(params.step_scale);
    AtomicLaw scaled;
    unit_mean = 0.0;
    for (const auto& a : atomic->atoms) {
      scaled.atoms.push_back({a.value * scale, a.probability});
      unit_mean += a.probability * a.value;
    }
    unit_var = 0.0;
    for (const auto& a : atomic->atoms) unit_var += a.probability * (a.value - unit_mean) * (a.value - unit_mean);
    spec.law_ = std::move(scaled);
  } else {
    const auto& g = std::get<GaussianLaw>(params.law);
    if (!(g.variance > 0.0) || !std::isfinite(g.variance))
      throw ValidationError("driver: Gaussian variance must be positive");
    unit_var = g.variance;
    spec.law_ = GaussianLaw{g.variance * params.step_scale};
  }

  if (warnings) {
    if (std::abs(unit_mean) > 1e-12) warnings->push_back("driver: unit-step mean is " + std::to_string(unit_mean) + ", not 0");
    if (std::abs(unit_var - 1.0) > 1e-12)
      warnings->push_back("driver: unit-step variance is " + std::to_string(unit_var) + ", not 1");
  }
  return spec;
}

/// Symmetric +-1 atoms, or a standard normal, scaled to the step.
inline DriverSpec bernoulli_driver(double step_scale = 1.0) {
  return make_driver({AtomicLaw{{{1.0, 0.5}, {-1.0, 0.5}}}, step_scale});
}
inline DriverSpec gaussian_driver(double step_scale = 1.0) { return make_driver({GaussianLaw{1.0}, step_scale}); }

/// E[e^{uX}].
inline double mgf(const DriverSpec& driver, double u) {
  if (!(std::abs(u) <= driver.mgf_bound()))
    throw DomainError("mgf: argument " + std::to_string(u) + " outside the integrability bound");
  if (driver.is_gaussian()) return std::exp(0.5 * u * u * driver.gaussian_variance());
  double s = 0.0;
  for (const auto& a : driver.atoms()) s += a.probability * std::exp(u * a.value);
  return s;
}

/// One draw of X from the stream.
inline double sample(const DriverSpec& driver, PathStream& stream) {
  if (driver.is_gaussian()) return std::sqrt(driver.gaussian_variance()) * stream.normal();
  const auto& atoms = driver.atoms();
  const double u = stream.uniform();
  double cumulative = 0.0;
  for (std::size_t a = 0; a + 1 < atoms.size(); ++a) {
    cumulative += atoms[a].probability;
    if (u < cumulative) return atoms[a].value;
  }
  return atoms.back().value;
}

}  // namespace dlmm
