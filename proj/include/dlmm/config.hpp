#pragma once

/// \file config.hpp
/// Run configuration: JSON (de)serialization with field-path errors, a
/// provenance hash, and builders for the model objects.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dlmm/convergence.hpp"
#include "dlmm/driver.hpp"
#include "dlmm/errors.hpp"
#include "dlmm/market.hpp"
#include "dlmm/pricing.hpp"

namespace dlmm {

struct TenorBlock {
  double horizon = 11.0;
  std::size_t rate_count = 10;
  std::size_t steps_per_period = 1;
  double delta = 1.0;
  bool operator==(const TenorBlock&) const = default;
};

struct CurveBlock {
  std::vector<double> initial_libors;
  double normalization = 1.0;
  bool operator==(const CurveBlock&) const = default;
};

/// Either one constant per rate or a full matrix with one row per rate
/// (row j holds lambda_ij for i = 1..m; entries past the fixing are ignored).
struct VolBlock {
  std::vector<double> per_rate;
  std::vector<std::vector<double>> matrix;
  bool operator==(const VolBlock&) const = default;
};

struct DriverBlock {
  std::vector<Atom> atoms{{-1.0, 0.5}, {1.0, 0.5}};
  double gaussian_variance = 1.0;
  double mgf_bound = std::numeric_limits<double>::infinity();
  bool operator==(const DriverBlock& o) const {
    if (atoms.size() != o.atoms.size()) return false;
    for (std::size_t a = 0; a < atoms.size(); ++a)
      if (atoms[a].value != o.atoms[a].value || atoms[a].probability != o.atoms[a].probability) return false;
    return gaussian_variance == o.gaussian_variance && mgf_bound == o.mgf_bound;
  }
};

struct PricingBlock {
  std::string model = "bernoulli-exact";
  std::size_t fixing_index = 5;
  std::vector<double> strikes{0.6, 1.0, 1.4, 1.8, 2.2, 2.6, 3.0, 3.4};
  std::size_t paths = 500000;
  std::uint64_t seed = 20240521;
  bool control_variate = false;
  std::size_t path_limit = std::size_t{1} << 20;
  unsigned threads = 1;
  bool operator==(const PricingBlock&) const = default;
};

struct OutputBlock {
  std::string smile_csv = "smile.csv";
  std::string plot_csv = "smile_plot.csv";
  std::string convergence_csv = "convergence.csv";
  bool operator==(const OutputBlock&) const = default;
};

/// Refinement experiment. Limit vols are constants per rate; empty means
/// "use vols.per_rate". A fixing index of 0 selects the terminal rate.
struct ConvergenceBlock {
  std::vector<std::size_t> levels{1, 2, 4, 8, 16, 32, 64};
  std::vector<std::string> models{"bernoulli"};
  std::size_t fixing_index = 0;
  double strike_multiplier = 1.4;
  std::vector<double> limit_vols;
  std::size_t paths = 1000000;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  bool exact = false;
  std::size_t path_limit = std::size_t{1} << 20;
  bool control_variate = true;
  bool operator==(const ConvergenceBlock&) const = default;
};

struct RunConfig {
  TenorBlock tenor;
  CurveBlock curve;
  std::optional<CurveBlock> curve_as_printed;
  VolBlock vols;
  DriverBlock driver;
  PricingBlock pricing;
  OutputBlock output;
  std::optional<ConvergenceBlock> convergence;
  bool operator==(const RunConfig&) const = default;
};

namespace detail {

using nlohmann::json;

inline std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ValidationError(path + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(join_path(path, key) + ": missing");
  return *it;
}

inline double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) throw ValidationError(path + ": expected a number");
  return v.get<double>();
}

inline std::uint64_t as_count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    throw ValidationError(path + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

inline bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ValidationError(path + ": expected true or false");
  return v.get<bool>();
}

inline std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ValidationError(path + ": expected a string");
  return v.get<std::string>();
}

inline const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ValidationError(path + ": expected an array");
  return v;
}

inline std::vector<double> doubles(const json& v, const std::string& path) {
  std::vector<double> out;
  for (std::size_t k = 0; k < as_array(v, path).size(); ++k)
    out.push_back(as_double(v[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

template <class F>
void optional_field(const json& obj, const std::string& key, const std::string& path, F&& assign) {
  const auto it = obj.find(key);
  if (it != obj.end()) assign(*it, join_path(path, key));
}

inline void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ValidationError(join_path(path, it.key()) + ": unknown field");
  }
}

inline CurveBlock parse_curve(const json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path + ": expected an object");
  reject_unknown(j, path, {"initial_libors", "normalization"});
  CurveBlock c;
  c.initial_libors = doubles(require(j, "initial_libors", path), join_path(path, "initial_libors"));
  optional_field(j, "normalization", path, [&](const json& v, const std::string& p) { c.normalization = as_double(v, p); });
  return c;
}

inline json curve_json(const CurveBlock& c) {
  return json{{"initial_libors", c.initial_libors}, {"normalization", c.normalization}};
}

}  // namespace detail

/// Builds a RunConfig from parsed JSON; every failure names the offending
/// field. Only structure and types are checked here, see validate().
inline RunConfig parse_config(const nlohmann::json& root) {
  using detail::as_bool;
  using detail::as_count;
  using detail::as_double;
  using detail::as_string;
  using detail::json;
  using detail::optional_field;
  using detail::require;
  if (!root.is_object()) throw ValidationError("config: top level must be an object");
  detail::reject_unknown(root, "", {"tenor", "curve", "curve_as_printed", "vols", "driver", "pricing", "output",
                                    "convergence"});
  RunConfig cfg;

  const json& t = require(root, "tenor", "");
  detail::reject_unknown(t, "tenor", {"T_star", "n", "p", "delta"});
  cfg.tenor.horizon = as_double(require(t, "T_star", "tenor"), "tenor.T_star");
  cfg.tenor.rate_count = as_count(require(t, "n", "tenor"), "tenor.n");
  optional_field(t, "p", "tenor", [&](const json& v, const std::string& p) { cfg.tenor.steps_per_period = as_count(v, p); });
  cfg.tenor.delta = cfg.tenor.rate_count + 1 > 0 ? cfg.tenor.horizon / static_cast<double>(cfg.tenor.rate_count + 1) : 0.0;
  optional_field(t, "delta", "tenor", [&](const json& v, const std::string& p) { cfg.tenor.delta = as_double(v, p); });

  cfg.curve = detail::parse_curve(require(root, "curve", ""), "curve");
  optional_field(root, "curve_as_printed", "",
                 [&](const json& v, const std::string& p) { cfg.curve_as_printed = detail::parse_curve(v, p); });

  const json& vb = require(root, "vols", "");
  detail::reject_unknown(vb, "vols", {"per_rate", "matrix"});
  optional_field(vb, "per_rate", "vols", [&](const json& v, const std::string& p) { cfg.vols.per_rate = detail::doubles(v, p); });
  optional_field(vb, "matrix", "vols", [&](const json& v, const std::string& p) {
    for (std::size_t r = 0; r < detail::as_array(v, p).size(); ++r)
      cfg.vols.matrix.push_back(detail::doubles(v[r], p + "[" + std::to_string(r) + "]"));
  });

  optional_field(root, "driver", "", [&](const json& d, const std::string& path) {
    if (!d.is_object()) throw ValidationError(path + ": expected an object");
    detail::reject_unknown(d, path, {"atoms", "gaussian_variance", "mgf_bound"});
    optional_field(d, "atoms", path, [&](const json& v, const std::string& p) {
      cfg.driver.atoms.clear();
      for (std::size_t a = 0; a < detail::as_array(v, p).size(); ++a) {
        const std::string ap = p + "[" + std::to_string(a) + "]";
        detail::reject_unknown(v[a], ap, {"value", "probability"});
        cfg.driver.atoms.push_back({as_double(require(v[a], "value", ap), ap + ".value"),
                                    as_double(require(v[a], "probability", ap), ap + ".probability")});
      }
    });
    optional_field(d, "gaussian_variance", path,
                   [&](const json& v, const std::string& p) { cfg.driver.gaussian_variance = as_double(v, p); });
    optional_field(d, "mgf_bound", path, [&](const json& v, const std::string& p) {
      cfg.driver.mgf_bound = v.is_null() ? std::numeric_limits<double>::infinity() : as_double(v, p);
    });
  });

  optional_field(root, "pricing", "", [&](const json& pr, const std::string& path) {
    if (!pr.is_object()) throw ValidationError(path + ": expected an object");
    detail::reject_unknown(pr, path, {"model", "fixing_index", "strikes", "paths", "seed", "control_variate",
                                      "path_limit", "threads"});
    auto& b = cfg.pricing;
    optional_field(pr, "model", path, [&](const json& v, const std::string& p) { b.model = as_string(v, p); });
    optional_field(pr, "fixing_index", path, [&](const json& v, const std::string& p) { b.fixing_index = as_count(v, p); });
    optional_field(pr, "strikes", path, [&](const json& v, const std::string& p) { b.strikes = detail::doubles(v, p); });
    optional_field(pr, "paths", path, [&](const json& v, const std::string& p) { b.paths = as_count(v, p); });
    optional_field(pr, "seed", path, [&](const json& v, const std::string& p) { b.seed = as_count(v, p); });
    optional_field(pr, "control_variate", path, [&](const json& v, const std::string& p) { b.control_variate = as_bool(v, p); });
    optional_field(pr, "path_limit", path, [&](const json& v, const std::string& p) { b.path_limit = as_count(v, p); });
    optional_field(pr, "threads", path, [&](const json& v, const std::string& p) { b.threads = static_cast<unsigned>(as_count(v, p)); });
  });

  optional_field(root, "output", "", [&](const json& o, const std::string& path) {
    if (!o.is_object()) throw ValidationError(path + ": expected an object");
    detail::reject_unknown(o, path, {"smile_csv", "plot_csv", "convergence_csv"});
    optional_field(o, "smile_csv", path, [&](const json& v, const std::string& p) { cfg.output.smile_csv = as_string(v, p); });
    optional_field(o, "plot_csv", path, [&](const json& v, const std::string& p) { cfg.output.plot_csv = as_string(v, p); });
    optional_field(o, "convergence_csv", path,
                   [&](const json& v, const std::string& p) { cfg.output.convergence_csv = as_string(v, p); });
  });

  optional_field(root, "convergence", "", [&](const json& c, const std::string& path) {
    if (!c.is_object()) throw ValidationError(path + ": expected an object");
    detail::reject_unknown(c, path, {"levels", "models", "fixing_index", "strike_multiplier", "limit_vols", "paths",
                                     "seeds", "exact", "path_limit", "control_variate"});
    ConvergenceBlock b;
    optional_field(c, "levels", path, [&](const json& v, const std::string& p) {
      b.levels.clear();
      for (std::size_t k = 0; k < detail::as_array(v, p).size(); ++k)
        b.levels.push_back(as_count(v[k], p + "[" + std::to_string(k) + "]"));
    });
    optional_field(c, "models", path, [&](const json& v, const std::string& p) {
      b.models.clear();
      for (std::size_t k = 0; k < detail::as_array(v, p).size(); ++k)
        b.models.push_back(as_string(v[k], p + "[" + std::to_string(k) + "]"));
    });
    optional_field(c, "fixing_index", path, [&](const json& v, const std::string& p) { b.fixing_index = as_count(v, p); });
    optional_field(c, "strike_multiplier", path,
                   [&](const json& v, const std::string& p) { b.strike_multiplier = as_double(v, p); });
    optional_field(c, "limit_vols", path, [&](const json& v, const std::string& p) { b.limit_vols = detail::doubles(v, p); });
    optional_field(c, "paths", path, [&](const json& v, const std::string& p) { b.paths = as_count(v, p); });
    optional_field(c, "seeds", path, [&](const json& v, const std::string& p) {
      b.seeds.clear();
      for (std::size_t k = 0; k < detail::as_array(v, p).size(); ++k)
        b.seeds.push_back(as_count(v[k], p + "[" + std::to_string(k) + "]"));
    });
    optional_field(c, "exact", path, [&](const json& v, const std::string& p) { b.exact = as_bool(v, p); });
    optional_field(c, "path_limit", path, [&](const json& v, const std::string& p) { b.path_limit = as_count(v, p); });
    optional_field(c, "control_variate", path,
                   [&](const json& v, const std::string& p) { b.control_variate = as_bool(v, p); });
    cfg.convergence = b;
  });
  return cfg;
}

inline nlohmann::json to_json(const RunConfig& cfg) {
  using detail::json;
  json root;
  root["tenor"] = {{"T_star", cfg.tenor.horizon},
                   {"n", cfg.tenor.rate_count},
                   {"p", cfg.tenor.steps_per_period},
                   {"delta", cfg.tenor.delta}};
  root["curve"] = detail::curve_json(cfg.curve);
  if (cfg.curve_as_printed) root["curve_as_printed"] = detail::curve_json(*cfg.curve_as_printed);
  json vols = json::object();
  if (!cfg.vols.per_rate.empty()) vols["per_rate"] = cfg.vols.per_rate;
  if (!cfg.vols.matrix.empty()) vols["matrix"] = cfg.vols.matrix;
  root["vols"] = vols;
  json atoms = json::array();
  for (const auto& a : cfg.driver.atoms) atoms.push_back({{"value", a.value}, {"probability", a.probability}});
  root["driver"] = {{"atoms", atoms}, {"gaussian_variance", cfg.driver.gaussian_variance}};
  if (std::isfinite(cfg.driver.mgf_bound)) root["driver"]["mgf_bound"] = cfg.driver.mgf_bound;
  const auto& pr = cfg.pricing;
  root["pricing"] = {{"model", pr.model},       {"fixing_index", pr.fixing_index},
                     {"strikes", pr.strikes},   {"paths", pr.paths},
                     {"seed", pr.seed},         {"control_variate", pr.control_variate},
                     {"path_limit", pr.path_limit}, {"threads", pr.threads}};
  root["output"] = {{"smile_csv", cfg.output.smile_csv},
                    {"plot_csv", cfg.output.plot_csv},
                    {"convergence_csv", cfg.output.convergence_csv}};
  if (cfg.convergence) {
    const auto& c = *cfg.convergence;
    root["convergence"] = {{"levels", c.levels},
                           {"models", c.models},
                           {"fixing_index", c.fixing_index},
                           {"strike_multiplier", c.strike_multiplier},
                           {"limit_vols", c.limit_vols},
                           {"paths", c.paths},
                           {"seeds", c.seeds},
                           {"exact", c.exact},
                           {"path_limit", c.path_limit},
                           {"control_variate", c.control_variate}};
  }
  return root;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open '" + path + "'");
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(root);
}

/// FNV-1a (64 bit) of the canonical serialization, as 16 hex digits. Object
/// keys serialize in sorted order, so the hash ignores the file's layout.
inline std::string config_hash(const RunConfig& cfg) {
  const std::string text = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline TenorStructure make_tenor(const RunConfig& cfg) {
  const auto& t = cfg.tenor;
  if (t.rate_count == 0) throw ValidationError("tenor.n: must be >= 1");
  if (t.steps_per_period == 0) throw ValidationError("tenor.p: must be >= 1");
  if (!(t.horizon > 0.0) || !std::isfinite(t.horizon)) throw ValidationError("tenor.T_star: must be positive");
  const double implied = t.horizon / static_cast<double>(t.rate_count + 1);
  if (std::abs(t.delta - implied) > 1e-12 * implied)
    throw ValidationError("tenor.delta: " + std::to_string(t.delta) + " disagrees with T_star/(n+1) = " +
                          std::to_string(implied));
  return TenorStructure(t.horizon, t.rate_count, t.steps_per_period);
}

inline MarketCurve make_curve(const CurveBlock& c, const TenorStructure& tenor, const std::string& path) {
  if (c.initial_libors.size() != tenor.rate_count())
    throw ValidationError(path + ".initial_libors: expected " + std::to_string(tenor.rate_count()) + " rates, got " +
                          std::to_string(c.initial_libors.size()));
  for (std::size_t j = 0; j < c.initial_libors.size(); ++j)
    if (!(c.initial_libors[j] > 0.0) || !std::isfinite(c.initial_libors[j]))
      throw ValidationError(path + ".initial_libors[" + std::to_string(j) + "]: rate " + std::to_string(j + 1) +
                            " must be positive");
  if (!(c.normalization > 0.0) || !std::isfinite(c.normalization))
    throw ValidationError(path + ".normalization: must be positive");
  return MarketCurve(c.initial_libors, tenor, c.normalization);
}

/// The corrected curve, or the literal one when `as_printed` is set.
inline MarketCurve make_curve(const RunConfig& cfg, const TenorStructure& tenor, bool as_printed = false) {
  if (!as_printed) return make_curve(cfg.curve, tenor, "curve");
  if (!cfg.curve_as_printed) throw ValidationError("curve_as_printed: missing");
  return make_curve(*cfg.curve_as_printed, tenor, "curve_as_printed");
}

inline VolSurface make_vols(const RunConfig& cfg, const TenorStructure& tenor) {
  const auto& v = cfg.vols;
  const std::size_t n = tenor.rate_count();
  const std::size_t m = tenor.step_count();
  if (v.per_rate.empty() == v.matrix.empty())
    throw ValidationError("vols: give exactly one of per_rate or matrix");
  std::vector<std::vector<double>> rows(m, std::vector<double>(n, 0.0));
  if (!v.per_rate.empty()) {
    if (v.per_rate.size() < n)
      throw ValidationError("vols.per_rate: missing vol for rate " + std::to_string(v.per_rate.size() + 1));
    if (v.per_rate.size() > n)
      throw ValidationError("vols.per_rate: " + std::to_string(v.per_rate.size()) + " entries for " +
                            std::to_string(n) + " rates");
    for (std::size_t j = 1; j <= n; ++j) {
      const double lambda = v.per_rate[j - 1];
      if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw ValidationError("vols.per_rate[" + std::to_string(j - 1) + "]: vol of rate " + std::to_string(j) +
                              " must be positive");
      for (std::size_t i = 1; i <= tenor.fixing_step(j); ++i) rows[i - 1][j - 1] = lambda;
    }
  } else {
    if (v.matrix.size() < n)
      throw ValidationError("vols.matrix: missing row for rate " + std::to_string(v.matrix.size() + 1));
    if (v.matrix.size() > n)
      throw ValidationError("vols.matrix: " + std::to_string(v.matrix.size()) + " rows for " + std::to_string(n) +
                            " rates");
    for (std::size_t j = 1; j <= n; ++j) {
      const auto& row = v.matrix[j - 1];
      const std::string path = "vols.matrix[" + std::to_string(j - 1) + "]";
      if (row.size() < tenor.fixing_step(j))
        throw ValidationError(path + ": rate " + std::to_string(j) + " needs " + std::to_string(tenor.fixing_step(j)) +
                              " step vols, got " + std::to_string(row.size()));
      for (std::size_t i = 1; i <= tenor.fixing_step(j); ++i) {
        if (!(row[i - 1] > 0.0) || !std::isfinite(row[i - 1]))
          throw ValidationError(path + "[" + std::to_string(i - 1) + "]: vol of rate " + std::to_string(j) +
                                " must be positive");
        rows[i - 1][j - 1] = row[i - 1];
      }
    }
  }
  return VolSurface(tenor, rows);
}

inline DriverSpec make_atomic_driver(const RunConfig& cfg, std::vector<std::string>* warnings = nullptr) {
  try {
    return make_driver({AtomicLaw{cfg.driver.atoms}, 1.0, cfg.driver.mgf_bound}, warnings);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("driver.atoms: ") + e.what());
  }
}

inline DriverSpec make_gaussian_driver(const RunConfig& cfg, std::vector<std::string>* warnings = nullptr) {
  try {
    return make_driver({GaussianLaw{cfg.driver.gaussian_variance}, 1.0, cfg.driver.mgf_bound}, warnings);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("driver.gaussian_variance: ") + e.what());
  }
}

inline CapletSpec make_caplet(const RunConfig& cfg, const TenorStructure& tenor) {
  const auto& pr = cfg.pricing;
  if (pr.fixing_index == 0 || pr.fixing_index > tenor.rate_count())
    throw ValidationError("pricing.fixing_index: " + std::to_string(pr.fixing_index) + " outside 1.." +
                          std::to_string(tenor.rate_count()));
  if (pr.strikes.empty()) throw ValidationError("pricing.strikes: empty");
  for (std::size_t k = 0; k < pr.strikes.size(); ++k)
    if (!(pr.strikes[k] > 0.0) || !std::isfinite(pr.strikes[k]))
      throw ValidationError("pricing.strikes[" + std::to_string(k) + "]: must be positive");
  return {pr.fixing_index, pr.strikes};
}

inline ConvergenceSpec make_convergence(const RunConfig& cfg, bool as_printed = false) {
  if (!cfg.convergence) throw ValidationError("convergence: block missing");
  const auto& c = *cfg.convergence;
  const TenorStructure tenor = make_tenor(cfg);
  const MarketCurve curve = make_curve(cfg, tenor, as_printed);
  ConvergenceSpec spec;
  spec.horizon = cfg.tenor.horizon;
  spec.rate_count = cfg.tenor.rate_count;
  spec.initial_libors = curve.libors();
  spec.normalization = curve.bond(1);
  std::vector<double> limits = c.limit_vols;
  if (limits.empty()) {
    if (cfg.vols.per_rate.empty())
      throw ValidationError("convergence.limit_vols: required when vols are given as a matrix");
    limits = cfg.vols.per_rate;
  }
  if (limits.size() != spec.rate_count)
    throw ValidationError("convergence.limit_vols: expected " + std::to_string(spec.rate_count) + " entries, got " +
                          std::to_string(limits.size()));
  for (std::size_t j = 0; j < limits.size(); ++j) {
    if (!(limits[j] > 0.0) || !std::isfinite(limits[j]))
      throw ValidationError("convergence.limit_vols[" + std::to_string(j) + "]: must be positive");
    const double lambda = limits[j];
    spec.limit_vols.push_back([lambda](double) { return lambda; });
  }
  if (c.levels.empty()) throw ValidationError("convergence.levels: empty");
  for (std::size_t k = 0; k < c.levels.size(); ++k)
    if (c.levels[k] == 0) throw ValidationError("convergence.levels[" + std::to_string(k) + "]: must be >= 1");
  spec.levels = c.levels;
  spec.models.clear();
  for (std::size_t k = 0; k < c.models.size(); ++k) {
    try {
      spec.models.push_back(parse_convergence_model(c.models[k]));
    } catch (const ValidationError& e) {
      throw ValidationError("convergence.models[" + std::to_string(k) + "]: " + e.what());
    }
  }
  if (spec.models.empty()) throw ValidationError("convergence.models: empty");
  spec.fixing_index = c.fixing_index == 0 ? spec.rate_count : c.fixing_index;
  if (spec.fixing_index > spec.rate_count)
    throw ValidationError("convergence.fixing_index: " + std::to_string(c.fixing_index) + " outside 1.." +
                          std::to_string(spec.rate_count));
  if (!(c.strike_multiplier > 0.0)) throw ValidationError("convergence.strike_multiplier: must be positive");
  spec.strike_multiplier = c.strike_multiplier;
  if (!c.exact && c.paths == 0) throw ValidationError("convergence.paths: must be >= 1");
  if (!c.exact && c.seeds.empty()) throw ValidationError("convergence.seeds: empty");
  spec.paths = c.paths;
  spec.seeds = c.seeds;
  spec.exact = c.exact;
  spec.path_limit = c.path_limit;
  spec.control_variate = c.control_variate;
  spec.threads = cfg.pricing.threads;
  return spec;
}

/// Builds every object a run would use. The convergence block is checked
/// only when `with_convergence` is set.
inline void validate(const RunConfig& cfg, bool with_convergence = true) {
  const TenorStructure tenor = make_tenor(cfg);
  const MarketCurve curve = make_curve(cfg, tenor);
  if (cfg.curve_as_printed) (void)make_curve(cfg, tenor, true);
  const VolSurface vols = make_vols(cfg, tenor);
  (void)make_caplet(cfg, tenor);
  const auto& pr = cfg.pricing;
  const SmileModel model = [&] {
    try {
      return parse_smile_model(pr.model);
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("pricing.model: ") + e.what());
    }
  }();
  if (pr.paths == 0) throw ValidationError("pricing.paths: must be >= 1");
  if (pr.threads == 0) throw ValidationError("pricing.threads: must be >= 1");
  if (pr.path_limit == 0) throw ValidationError("pricing.path_limit: must be >= 1");
  const DriverSpec driver = model == SmileModel::bernoulli_exact ? make_atomic_driver(cfg) : make_gaussian_driver(cfg);
  try {
    (void)ModelSetup(tenor, curve, vols, driver);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("driver.mgf_bound: ") + e.what());
  }
  if (cfg.output.smile_csv.empty()) throw ValidationError("output.smile_csv: empty path");
  if (cfg.output.plot_csv.empty()) throw ValidationError("output.plot_csv: empty path");
  if (cfg.output.convergence_csv.empty()) throw ValidationError("output.convergence_csv: empty path");
  if (with_convergence && cfg.convergence) {
    const ConvergenceSpec spec = make_convergence(cfg);
    try {
      spec.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("convergence: ") + e.what());
    }
  }
}

}  // namespace dlmm
