#pragma once

/// \file market.hpp
/// Tenor and grid arithmetic, the initial curve, the ell factor, volatility
/// surfaces and the bookkeeping of forward-measure densities.
///
/// Index conventions used throughout the library:
///   - rates are indexed j = 1..n, tenor dates T_1..T_{n+1};
///   - grid steps are indexed i = 1..m, the step i moving t_{i-1} to t_i;
///   - rate j is alive (still evolving) at steps i <= j*p and frozen after.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dlmm/errors.hpp"

namespace dlmm {

class TenorStructure {
 public:
  TenorStructure(double horizon, std::size_t rate_count, std::size_t steps_per_period)
      : horizon_(horizon), n_(rate_count), p_(steps_per_period) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
      throw ValidationError("tenor: horizon must be positive");
    if (rate_count == 0) throw ValidationError("tenor: need at least one rate");
    if (steps_per_period == 0) throw ValidationError("tenor: steps per period must be >= 1");
  }

  double horizon() const noexcept { return horizon_; }
  std::size_t rate_count() const noexcept { return n_; }
  std::size_t steps_per_period() const noexcept { return p_; }
  std::size_t step_count() const noexcept { return (n_ + 1) * p_; }

  /// Accrual fraction of every period, T*/(n+1).
  double delta() const noexcept { return horizon_ / static_cast<double>(n_ + 1); }
  double step_length() const noexcept { return horizon_ / static_cast<double>(step_count()); }

  double grid_time(std::size_t i) const {
    if (i > step_count()) throw IndexError("tenor: grid index out of range");
    return static_cast<double>(i) / static_cast<double>(step_count()) * horizon_;
  }

  /// T_j for j = 1..n+1.
  double tenor_date(std::size_t j) const {
    if (j == 0 || j > n_ + 1) throw IndexError("tenor: tenor index out of range");
    return static_cast<double>(j) / static_cast<double>(n_ + 1) * horizon_;
  }

  /// Smallest tenor index u >= 1 with t_i <= T_u.
  std::size_t eta(std::size_t i) const {
    if (i > step_count()) throw IndexError("tenor: grid index out of range");
    if (i == 0) return 1;
    return (i + p_ - 1) / p_;
  }

  /// Grid index of T_j.
  std::size_t fixing_step(std::size_t j) const { return j * p_; }

  bool alive(std::size_t j, std::size_t i) const noexcept { return i <= j * p_; }

  std::vector<double> grid_times() const {
    std::vector<double> out(step_count() + 1);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = grid_time(i);
    return out;
  }

  std::vector<double> tenor_dates() const {
    std::vector<double> out(n_ + 1);
    for (std::size_t j = 1; j <= n_ + 1; ++j) out[j - 1] = tenor_date(j);
    return out;
  }

 private:
  double horizon_;
  std::size_t n_;
  std::size_t p_;
};

/// delta*L/(1+delta*L), the weight a forward price ratio puts on the rate move.
inline double ell(double rate, double delta) {
  if (!(rate > 0.0)) throw DomainError("ell: rate must be positive");
  if (!(delta > 0.0)) throw DomainError("ell: delta must be positive");
  return delta * rate / (1.0 + delta * rate);
}

/// (1+delta*L_new)/(1+delta*L_prev); telescopes to the forward price ratio.
inline double one_step_forward_ratio(double rate_new, double rate_prev, double delta) {
  if (!(rate_new > 0.0) || !(rate_prev > 0.0))
    throw DomainError("one_step_forward_ratio: rates must be positive");
  return (1.0 + delta * rate_new) / (1.0 + delta * rate_prev);
}

/// Zero-coupon prices B(0,T_1..T_{n+1}) from simple forward rates, with
/// B(0,T_1) fixed to `normalization`. Zero rates are tolerated (flat bonds).
inline std::vector<double> initial_bonds(std::span<const double> rates, double delta,
                                         double normalization) {
  if (!(normalization > 0.0)) throw ValidationError("initial_bonds: normalization must be positive");
  if (!(delta > 0.0)) throw ValidationError("initial_bonds: delta must be positive");
  std::vector<double> bonds;
  bonds.reserve(rates.size() + 1);
  bonds.push_back(normalization);
  for (std::size_t j = 0; j < rates.size(); ++j) {
    if (!(rates[j] >= 0.0) || !std::isfinite(rates[j]))
      throw ValidationError("initial_bonds: rate " + std::to_string(j + 1) + " must be non-negative");
    bonds.push_back(bonds.back() / (1.0 + delta * rates[j]));
  }
  return bonds;
}

inline std::vector<double> initial_bonds(std::span<const double> rates, const TenorStructure& tenor,
                                         double normalization = 1.0) {
  if (rates.size() != tenor.rate_count())
    throw ValidationError("initial_bonds: expected " + std::to_string(tenor.rate_count()) + " rates");
  return initial_bonds(rates, tenor.delta(), normalization);
}

class MarketCurve {
 public:
  MarketCurve(std::vector<double> initial_libors, const TenorStructure& tenor, double normalization = 1.0)
      : libors_(std::move(initial_libors)), delta_(tenor.delta()), normalization_(normalization) {
    if (libors_.size() != tenor.rate_count())
      throw ValidationError("curve: expected " + std::to_string(tenor.rate_count()) + " initial rates, got " +
                            std::to_string(libors_.size()));
    for (std::size_t j = 0; j < libors_.size(); ++j)
      if (!(libors_[j] > 0.0) || !std::isfinite(libors_[j]))
        throw ValidationError("curve: L(0,T_" + std::to_string(j + 1) + ") must be positive");
    bonds_ = initial_bonds(libors_, delta_, normalization_);
  }

  std::size_t rate_count() const noexcept { return libors_.size(); }
  double delta() const noexcept { return delta_; }
  double normalization() const noexcept { return normalization_; }

  /// L(0,T_j), j = 1..n.
  double libor(std::size_t j) const {
    if (j == 0 || j > libors_.size()) throw IndexError("curve: rate index out of range");
    return libors_[j - 1];
  }
  /// B(0,T_j), j = 1..n+1.
  double bond(std::size_t j) const {
    if (j == 0 || j > bonds_.size()) throw IndexError("curve: bond index out of range");
    return bonds_[j - 1];
  }

  const std::vector<double>& libors() const noexcept { return libors_; }
  const std::vector<double>& bonds() const noexcept { return bonds_; }

  bool strictly_increasing() const noexcept {
    for (std::size_t j = 1; j < libors_.size(); ++j)
      if (!(libors_[j] > libors_[j - 1])) return false;
    return true;
  }

 private:
  std::vector<double> libors_;
  double delta_;
  double normalization_;
  std::vector<double> bonds_;
};

/// Deterministic volatilities lambda_ij, one row per grid step.
class VolSurface {
 public:
  using LimitFunction = std::function<double(double)>;

  /// `rows[i-1][j-1]` is lambda_ij for step i = 1..m and rate j = 1..n.
  VolSurface(const TenorStructure& tenor, std::vector<std::vector<double>> rows)
      : n_(tenor.rate_count()), m_(tenor.step_count()) {
    if (rows.size() != m_)
      throw ValidationError("vols: expected " + std::to_string(m_) + " rows, got " + std::to_string(rows.size()));
    values_.reserve(m_ * n_);
    for (std::size_t i = 0; i < m_; ++i) {
      if (rows[i].size() != n_)
        throw ValidationError("vols: row " + std::to_string(i + 1) + " has " + std::to_string(rows[i].size()) +
                              " entries, expected " + std::to_string(n_));
      for (double v : rows[i]) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("vols: entries must be non-negative");
        values_.push_back(v);
      }
    }
    check_live(tenor);
  }

  /// Time-homogeneous vols, one constant per rate.
  static VolSurface per_rate(const TenorStructure& tenor, std::span<const double> lambdas) {
    if (lambdas.size() != tenor.rate_count())
      throw ValidationError("vols: expected " + std::to_string(tenor.rate_count()) + " per-rate values, got " +
                            std::to_string(lambdas.size()));
    std::vector<std::vector<double>> rows(tenor.step_count(), std::vector<double>(lambdas.begin(), lambdas.end()));
    return VolSurface(tenor, std::move(rows));
  }

  /// Samples lambda(t_{i-1}, T_j) on the grid of `tenor`.
  static VolSurface from_limit(const TenorStructure& tenor, std::vector<LimitFunction> limits) {
    if (limits.size() != tenor.rate_count())
      throw ValidationError("vols: expected one limit function per rate");
    std::vector<std::vector<double>> rows(tenor.step_count(), std::vector<double>(tenor.rate_count()));
    for (std::size_t i = 1; i <= tenor.step_count(); ++i)
      for (std::size_t j = 1; j <= tenor.rate_count(); ++j)
        rows[i - 1][j - 1] = tenor.alive(j, i) ? limits[j - 1](tenor.grid_time(i - 1)) : 0.0;
    VolSurface out(tenor, std::move(rows));
    out.limits_ = std::move(limits);
    return out;
  }

  std::size_t rate_count() const noexcept { return n_; }
  std::size_t step_count() const noexcept { return m_; }

  double operator()(std::size_t i, std::size_t j) const {
    if (i == 0 || i > m_ || j == 0 || j > n_) throw IndexError("vols: index out of range");
    return values_[(i - 1) * n_ + (j - 1)];
  }

  /// lambda_i1..lambda_in for step i.
  std::span<const double> row(std::size_t i) const {
    if (i == 0 || i > m_) throw IndexError("vols: step out of range");
    return {values_.data() + (i - 1) * n_, n_};
  }

  /// max_i lambda_ij summed over j; the driver's exponential moments must
  /// be finite up to (1+eps) times this.
  double integrability_scale() const {
    double total = 0.0;
    for (std::size_t j = 1; j <= n_; ++j) {
      double mx = 0.0;
      for (std::size_t i = 1; i <= m_; ++i) mx = std::max(mx, (*this)(i, j));
      total += mx;
    }
    return total;
  }

  const std::vector<LimitFunction>& limits() const noexcept { return limits_; }

 private:
  void check_live(const TenorStructure& tenor) const {
    for (std::size_t j = 1; j <= n_; ++j)
      for (std::size_t i = 1; i <= std::min(m_, tenor.fixing_step(j)); ++i)
        if (!((*this)(i, j) > 0.0))
          throw ValidationError("vols: lambda(" + std::to_string(i) + "," + std::to_string(j) +
                                ") must be positive while rate " + std::to_string(j) + " is alive");
  }

  std::size_t n_;
  std::size_t m_;
  std::vector<double> values_;
  std::vector<LimitFunction> limits_;
};

/// Accumulated forward price ratios F_B(t,T_l,T_{l+1})/F_B(0,T_l,T_{l+1})
/// for the simulated rates l = first..n.
class MeasureLedger {
 public:
  MeasureLedger() = default;
  MeasureLedger(std::size_t first_rate, std::size_t rate_count)
      : first_(first_rate), ratios_(rate_count + 1 - first_rate, 1.0) {}

  std::size_t first_rate() const noexcept { return first_; }
  std::size_t last_rate() const noexcept { return first_ + ratios_.size() - 1; }

  double ratio(std::size_t l) const { return ratios_.at(l - first_); }
  void accumulate(std::size_t l, double one_step_ratio) {
    double& r = ratios_.at(l - first_);
    r *= one_step_ratio;
    if (!(r > 0.0)) throw DomainError("ledger: density must stay positive");
  }

  /// dP_j/dP_{n+1} at the ledger's time: product of the ratios l = j..n.
  double terminal_density(std::size_t j) const {
    if (j == last_rate() + 1) return 1.0;
    if (j < first_ || j > last_rate() + 1) throw IndexError("ledger: rate " + std::to_string(j) + " not tracked");
    double out = 1.0;
    for (std::size_t l = j; l <= last_rate(); ++l) out *= ratios_[l - first_];
    return out;
  }

  std::span<const double> ratios() const noexcept { return ratios_; }
  std::span<double> ratios() noexcept { return ratios_; }

 private:
  std::size_t first_ = 1;
  std::vector<double> ratios_;
};

}  // namespace dlmm
