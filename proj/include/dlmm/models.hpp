#pragma once

/// \file models.hpp
/// Evolution of the joint LIBOR vector under the terminal measure.
///
/// Two families are provided:
///   - the discrete analogue, L(t_i,T_j) = L(t_{i-1},T_j) exp(lambda_ij (X_i + b^j_i))
///     with state-dependent drifts from drift.hpp, either enumerated as an
///     exact tree (atomic drivers) or simulated;
///   - the Glasserman-Zhao scheme, which evolves deflated bond differences
///     W_j lognormally and reads rates as W_j / (delta (1 + W_{j+1} + ... + W_n)).
///
/// Both produce a PathEnsemble in the same layout, so pricing does not care
/// which model generated it. A simulation may start at `first_rate` > 1:
/// rates below it never influence later rates, so they can be skipped when
/// only later rates are priced.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "dlmm/drift.hpp"
#include "dlmm/driver.hpp"
#include "dlmm/errors.hpp"
#include "dlmm/market.hpp"
#include "dlmm/random.hpp"

namespace dlmm {

/// Everything the discrete analogue needs.
struct ModelSetup {
  TenorStructure tenor;
  MarketCurve curve;
  VolSurface vols;
  DriverSpec driver;

  ModelSetup(TenorStructure t, MarketCurve c, VolSurface v, DriverSpec d)
      : tenor(t), curve(std::move(c)), vols(std::move(v)), driver(std::move(d)) {
    if (curve.rate_count() != tenor.rate_count() || vols.rate_count() != tenor.rate_count() ||
        vols.step_count() != tenor.step_count())
      throw ValidationError("model: curve, vols and tenor disagree on dimensions");
    if (std::abs(curve.delta() - tenor.delta()) > 1e-14)
      throw ValidationError("model: curve built for a different accrual");
    if (driver.mgf_bound() < vols.integrability_scale())
      throw ValidationError("model: driver integrability bound is below the sum of maximal vols");
  }
};

/// Rates and densities at grid time t_step for the simulated rates
/// first_rate..n. Dead rates keep their fixing values.
struct ModelState {
  std::size_t step = 0;
  std::size_t first_rate = 1;
  std::vector<double> rates;
  MeasureLedger ledger;
  /// b^j used on the step into `step`; NaN for rates that did not move.
  std::vector<double> drifts;

  std::size_t last_rate() const noexcept { return first_rate + rates.size() - 1; }

  double rate(std::size_t j) const {
    if (j < first_rate || j > last_rate()) throw IndexError("state: rate " + std::to_string(j) + " not simulated");
    return rates[j - first_rate];
  }
};

inline ModelState initial_state(const MarketCurve& curve, std::size_t first_rate = 1) {
  if (first_rate == 0 || first_rate > curve.rate_count()) throw IndexError("state: first rate out of range");
  ModelState s;
  s.first_rate = first_rate;
  s.rates.assign(curve.libors().begin() + static_cast<std::ptrdiff_t>(first_rate - 1), curve.libors().end());
  s.ledger = MeasureLedger(first_rate, curve.rate_count());
  s.drifts.assign(s.rates.size(), std::numeric_limits<double>::quiet_NaN());
  return s;
}

/// Offset into the state vectors of the first rate alive at step i.
inline std::size_t live_offset(const ModelState& s, const TenorStructure& tenor, std::size_t step) {
  const std::size_t first_live = std::max(s.first_rate, tenor.eta(step));
  return std::min(first_live - s.first_rate, s.rates.size());
}

/// dP_j/dP_{n+1} at the state's time. Requires rates j..n to be alive.
inline double terminal_rn_weight(const ModelState& s, std::size_t j, const TenorStructure& tenor) {
  if (j == tenor.rate_count() + 1) return 1.0;
  if (j < s.first_rate || j > tenor.rate_count())
    throw IndexError("terminal_rn_weight: rate " + std::to_string(j) + " not simulated");
  if (!tenor.alive(j, s.step))
    throw IndexError("terminal_rn_weight: rate " + std::to_string(j) + " fixed before step " + std::to_string(s.step));
  return s.ledger.terminal_density(j);
}

namespace detail {

enum class StepForm { exponential, difference };

inline void apply_step(ModelState& s, double x, const TenorStructure& tenor, std::span<const double> lambda_row,
                       std::span<const double> drifts, StepForm form) {
  const std::size_t next = s.step + 1;
  if (next > tenor.step_count()) throw SequencingError("step: grid exhausted");
  if (lambda_row.size() != tenor.rate_count()) throw ValidationError("step: vol row has wrong length");
  if (drifts.size() != s.rates.size()) throw SequencingError("step: drift vector does not match the state");
  const double delta = tenor.delta();
  const std::size_t from = live_offset(s, tenor, next);
  for (std::size_t k = 0; k < s.rates.size(); ++k) {
    if (k < from) {
      s.drifts[k] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const std::size_t j = s.first_rate + k;
    const double b = drifts[k];
    if (!std::isfinite(b)) throw SequencingError("step: missing drift for rate " + std::to_string(j));
    const double prev = s.rates[k];
    const double exponent = lambda_row[j - 1] * (x + b);
    const double now = form == StepForm::exponential ? prev * std::exp(exponent) : prev + prev * std::expm1(exponent);
    s.rates[k] = now;
    s.ledger.accumulate(j, one_step_forward_ratio(now, prev, delta));
    s.drifts[k] = b;
  }
  s.step = next;
}

}  // namespace detail

/// L_j <- L_j exp(lambda_ij (x + b^j)) for every live rate.
inline ModelState step_exponential(ModelState s, double x, const TenorStructure& tenor,
                                   std::span<const double> lambda_row, std::span<const double> drifts) {
  detail::apply_step(s, x, tenor, lambda_row, drifts, detail::StepForm::exponential);
  return s;
}

/// Difference form, Delta L_j = L_j (e^{lambda_ij (x + b^j)} - 1).
inline ModelState step_difference(ModelState s, double x, const TenorStructure& tenor,
                                  std::span<const double> lambda_row, std::span<const double> drifts) {
  detail::apply_step(s, x, tenor, lambda_row, drifts, detail::StepForm::difference);
  return s;
}

/// Computes drifts from a state and advances it in place. Holds scratch
/// buffers; one instance per worker.
class PathEvolver {
 public:
  explicit PathEvolver(const ModelSetup& setup) : setup_(setup) {
    const auto& tenor = setup.tenor;
    // The terminal rate's drift has an empty context, hence is the same on
    // every path.
    terminal_drift_.resize(tenor.step_count() + 1);
    const std::size_t n = tenor.rate_count();
    for (std::size_t i = 1; i <= tenor.step_count(); ++i) {
      const double lambda = setup.vols(i, n);
      terminal_drift_[i] = tenor.alive(n, i) ? -std::log(mgf(setup.driver, lambda)) / lambda : 0.0;
    }
  }

  /// Drifts b^j_{t_{s.step+1}} for every simulated rate (NaN if dead).
  std::span<const double> drifts_for(const ModelState& s) {
    const auto& tenor = setup_.tenor;
    const std::size_t next = s.step + 1;
    if (next > tenor.step_count()) throw SequencingError("step: grid exhausted");
    const std::size_t count = s.rates.size();
    drifts_.assign(count, std::numeric_limits<double>::quiet_NaN());
    const std::size_t from = live_offset(s, tenor, next);
    if (from >= count) return drifts_;
    if (from == count - 1 && s.last_rate() == tenor.rate_count()) {
      drifts_[from] = terminal_drift_[next];
      return drifts_;
    }
    const auto row = setup_.vols.row(next);
    lambdas_.assign(row.begin() + static_cast<std::ptrdiff_t>(s.first_rate - 1), row.end());
    engine_.compute(setup_.driver, s.rates, lambdas_, tenor.delta(), from, drifts_);
    return drifts_;
  }

  void advance(ModelState& s, double x) {
    const auto b = drifts_for(s);
    detail::apply_step(s, x, setup_.tenor, setup_.vols.row(s.step + 1), b, detail::StepForm::exponential);
  }

 private:
  const ModelSetup& setup_;
  StepDriftEngine engine_;
  std::vector<double> terminal_drift_;
  std::vector<double> drifts_;
  std::vector<double> lambdas_;
};

/// Per-path records at the ensemble horizon, stored path-major.
struct PathEnsemble {
  std::size_t horizon = 0;
  std::size_t first_rate = 1;
  std::size_t rate_count = 0;
  std::uint64_t seed = 0;
  /// True for exhaustive trees: weights are exact path probabilities.
  bool exact = false;
  std::vector<double> weights;
  std::vector<double> rates;
  std::vector<double> ratios;
  /// Full state trajectories (steps 0..horizon), when recorded.
  std::vector<std::vector<ModelState>> trajectories;

  std::size_t width() const noexcept { return rate_count + 1 - first_rate; }
  std::size_t size() const noexcept { return weights.size(); }

  std::span<const double> path_rates(std::size_t path) const { return {rates.data() + path * width(), width()}; }
  std::span<const double> path_ratios(std::size_t path) const { return {ratios.data() + path * width(), width()}; }

  double rate(std::size_t path, std::size_t j) const {
    if (j < first_rate || j > rate_count) throw IndexError("ensemble: rate " + std::to_string(j) + " not simulated");
    return rates[path * width() + (j - first_rate)];
  }

  /// Product of the accumulated forward ratios l = j..n at the horizon.
  double terminal_density(std::size_t path, std::size_t j) const {
    if (j == rate_count + 1) return 1.0;
    if (j < first_rate || j > rate_count) throw IndexError("ensemble: rate " + std::to_string(j) + " not simulated");
    double out = 1.0;
    for (std::size_t l = j; l <= rate_count; ++l) out *= ratios[path * width() + (l - first_rate)];
    return out;
  }

  void store(std::size_t path, const ModelState& s) {
    std::copy(s.rates.begin(), s.rates.end(), rates.begin() + static_cast<std::ptrdiff_t>(path * width()));
    const auto r = s.ledger.ratios();
    std::copy(r.begin(), r.end(), ratios.begin() + static_cast<std::ptrdiff_t>(path * width()));
  }

  void allocate(std::size_t paths) {
    weights.assign(paths, 0.0);
    rates.assign(paths * width(), 0.0);
    ratios.assign(paths * width(), 1.0);
  }
};

struct TreeOptions {
  std::size_t first_rate = 1;
  std::size_t path_limit = std::size_t{1} << 20;
  bool record_trajectories = true;
};

/// A^H, or SIZE_MAX on overflow.
inline std::size_t tree_path_count(std::size_t atoms, std::size_t horizon) {
  std::size_t count = 1;
  for (std::size_t i = 0; i < horizon; ++i) {
    if (count > std::numeric_limits<std::size_t>::max() / atoms) return std::numeric_limits<std::size_t>::max();
    count *= atoms;
  }
  return count;
}

/// All A^H paths of an atomic driver with their exact probabilities.
inline PathEnsemble enumerate_tree(const ModelSetup& setup, std::size_t horizon, const TreeOptions& options = {}) {
  if (!setup.driver.is_atomic()) throw ValidationError("enumerate_tree: driver must be atomic");
  if (horizon > setup.tenor.step_count()) throw HorizonError("enumerate_tree: horizon beyond the grid");
  const auto& atoms = setup.driver.atoms();
  const std::size_t count = tree_path_count(atoms.size(), horizon);
  if (count > options.path_limit)
    throw SizeError("enumerate_tree: " + std::to_string(atoms.size()) + "^" + std::to_string(horizon) +
                    " paths exceed the limit of " + std::to_string(options.path_limit));

  PathEnsemble out;
  out.horizon = horizon;
  out.first_rate = options.first_rate;
  out.rate_count = setup.tenor.rate_count();
  out.exact = true;
  out.allocate(count);
  if (options.record_trajectories) out.trajectories.reserve(count);

  PathEvolver evolver(setup);
  std::vector<ModelState> trail{initial_state(setup.curve, options.first_rate)};
  std::vector<double> probability{1.0};
  std::size_t next_path = 0;

  // Depth-first: drifts are computed once per node and shared by its children.
  auto visit = [&](auto&& self, std::size_t depth) -> void {
    if (depth == horizon) {
      out.weights[next_path] = probability.back();
      out.store(next_path, trail.back());
      if (options.record_trajectories) out.trajectories.push_back(trail);
      ++next_path;
      return;
    }
    const auto drifts = evolver.drifts_for(trail.back());
    const std::vector<double> b(drifts.begin(), drifts.end());
    const auto row = setup.vols.row(depth + 1);
    for (const auto& atom : atoms) {
      trail.push_back(step_exponential(trail.back(), atom.value, setup.tenor, row, b));
      probability.push_back(probability.back() * atom.probability);
      self(self, depth + 1);
      trail.pop_back();
      probability.pop_back();
    }
  };
  visit(visit, 0);
  return out;
}

struct SimulationOptions {
  std::size_t first_rate = 1;
  bool record_trajectories = false;
  unsigned threads = 1;
};

namespace detail {

/// Runs body(begin, end) over contiguous path blocks. Each path writes only
/// its own slots, so results do not depend on the thread count.
template <class Body>
void for_path_blocks(std::size_t paths, unsigned threads, Body&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, paths / 1024))));
  if (threads == 1) {
    body(std::size_t{0}, paths);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t chunk = (paths + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(paths, t * chunk);
    const std::size_t end = std::min(paths, begin + chunk);
    pool.emplace_back([&, t, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

/// N independent trajectories; path p draws from substream (seed, p).
inline PathEnsemble simulate_paths(const ModelSetup& setup, std::size_t horizon, std::size_t paths,
                                   std::uint64_t seed, const SimulationOptions& options = {}) {
  if (paths == 0) throw ValidationError("simulate_paths: need at least one path");
  if (horizon > setup.tenor.step_count()) throw HorizonError("simulate_paths: horizon beyond the grid");
  PathEnsemble out;
  out.horizon = horizon;
  out.first_rate = options.first_rate;
  out.rate_count = setup.tenor.rate_count();
  out.seed = seed;
  out.allocate(paths);
  std::fill(out.weights.begin(), out.weights.end(), 1.0 / static_cast<double>(paths));
  if (options.record_trajectories) out.trajectories.resize(paths);
  const ModelState start = initial_state(setup.curve, options.first_rate);

  detail::for_path_blocks(paths, options.threads, [&](std::size_t begin, std::size_t end) {
    PathEvolver evolver(setup);
    ModelState s;
    for (std::size_t p = begin; p < end; ++p) {
      PathStream stream(seed, p);
      s = start;
      if (options.record_trajectories) out.trajectories[p].push_back(s);
      for (std::size_t i = 1; i <= horizon; ++i) {
        evolver.advance(s, sample(setup.driver, stream));
        if (options.record_trajectories) out.trajectories[p].push_back(s);
      }
      out.store(p, s);
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Glasserman-Zhao

/// Deflated bond differences W_j(i) for j = first_rate..n.
struct GzState {
  std::size_t step = 0;
  std::size_t first_rate = 1;
  std::vector<double> w;

  std::size_t last_rate() const noexcept { return first_rate + w.size() - 1; }
};

/// Inverts L_j = W_j / (delta (1 + W_{j+1} + ... + W_n)) at time zero.
inline GzState gz_init(const MarketCurve& curve, std::size_t first_rate = 1) {
  const std::size_t n = curve.rate_count();
  if (first_rate == 0 || first_rate > n) throw IndexError("gz_init: first rate out of range");
  GzState s;
  s.first_rate = first_rate;
  s.w.resize(n + 1 - first_rate);
  double tail = 0.0;
  for (std::size_t j = n; j >= first_rate; --j) {
    const double w = curve.delta() * curve.libor(j) * (1.0 + tail);
    s.w[j - first_rate] = w;
    tail += w;
  }
  return s;
}

/// Rate j read off the W variables.
inline double gz_rate(const GzState& s, std::size_t j, double delta) {
  if (j < s.first_rate || j > s.last_rate()) throw IndexError("gz_rate: rate " + std::to_string(j) + " not simulated");
  double tail = 0.0;
  for (std::size_t k = j + 1; k <= s.last_rate(); ++k) tail += s.w[k - s.first_rate];
  return s.w[j - s.first_rate] / (delta * (1.0 + tail));
}

/// W_j <- W_j exp(-sigma_j^2 v/2 + sigma_j y), with
/// sigma_j = lambda_j + sum_{k>j} W_k lambda_k / (1 + W_k + ... + W_n)
/// evaluated on the pre-step W. `y` has variance `variance`.
inline GzState gz_step(GzState s, double y, double variance, std::span<const double> lambda_row) {
  if (lambda_row.size() < s.last_rate()) throw ValidationError("gz_step: vol row too short");
  if (!(variance > 0.0)) throw ValidationError("gz_step: variance must be positive");
  double tail = 0.0;    // W_{j+1} + ... + W_n
  double loading = 0.0; // sum_{k>j} W_k lambda_k / (1 + W_k + ... + W_n)
  for (std::size_t j = s.last_rate(); j >= s.first_rate; --j) {
    double& w = s.w[j - s.first_rate];
    const double lambda = lambda_row[j - 1];
    const double sigma = lambda + loading;
    const double old = w;
    tail += old;
    loading += old * lambda / (1.0 + tail);
    w = old * std::exp(-0.5 * sigma * sigma * variance + sigma * y);
    if (j == s.first_rate) break;
  }
  ++s.step;
  return s;
}

/// Monte Carlo for the GZ scheme, producing the same ensemble layout as the
/// discrete analogue: live rates are read from W; fixed rates freeze.
inline PathEnsemble simulate_gz_paths(const TenorStructure& tenor, const MarketCurve& curve, const VolSurface& vols,
                                      const DriverSpec& driver, std::size_t horizon, std::size_t paths,
                                      std::uint64_t seed, const SimulationOptions& options = {}) {
  if (!driver.is_gaussian()) throw ValidationError("simulate_gz_paths: driver must be Gaussian");
  if (paths == 0) throw ValidationError("simulate_gz_paths: need at least one path");
  if (horizon > tenor.step_count()) throw HorizonError("simulate_gz_paths: horizon beyond the grid");
  const double variance = driver.gaussian_variance();
  const double delta = tenor.delta();
  PathEnsemble out;
  out.horizon = horizon;
  out.first_rate = options.first_rate;
  out.rate_count = tenor.rate_count();
  out.seed = seed;
  out.allocate(paths);
  std::fill(out.weights.begin(), out.weights.end(), 1.0 / static_cast<double>(paths));
  if (options.record_trajectories) out.trajectories.resize(paths);
  const GzState w0 = gz_init(curve, options.first_rate);
  const ModelState start = initial_state(curve, options.first_rate);

  detail::for_path_blocks(paths, options.threads, [&](std::size_t begin, std::size_t end) {
    ModelState s;
    for (std::size_t p = begin; p < end; ++p) {
      PathStream stream(seed, p);
      GzState w = w0;
      s = start;
      if (options.record_trajectories) out.trajectories[p].push_back(s);
      for (std::size_t i = 1; i <= horizon; ++i) {
        w = gz_step(std::move(w), std::sqrt(variance) * stream.normal(), variance, vols.row(i));
        const std::size_t from = live_offset(s, tenor, i);
        double tail = 0.0;
        for (std::size_t k = s.rates.size(); k-- > 0;) {
          const double wk = w.w[k];
          if (k >= from) {
            const double prev = s.rates[k];
            const double now = wk / (delta * (1.0 + tail));
            s.rates[k] = now;
            s.ledger.accumulate(s.first_rate + k, one_step_forward_ratio(now, prev, delta));
          }
          tail += wk;
        }
        s.step = i;
        if (options.record_trajectories) out.trajectories[p].push_back(s);
      }
      out.store(p, s);
    }
  });
  return out;
}

}  // namespace dlmm
