// dlmm: batch front end for smile tables and refinement experiments.
//
//   dlmm validate --config configs/paper.json
//   dlmm price    --model lognormal-mc --paths 500000 --seed 7 --out smile.csv
//   dlmm smile    --model gz-mc --out smile_plot.csv
//   dlmm converge --levels 1,2,4,8 --out convergence.csv
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dlmm/dlmm.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string config = "configs/paper.json";
  std::optional<std::string> model;
  std::optional<std::size_t> paths;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> levels;
  std::optional<unsigned> threads;
  std::string curve = "corrected";
  bool control_variate = false;
  bool exact = false;
  bool strict = false;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) parts.push_back(item);
  return parts;
}

std::vector<std::size_t> parse_levels(const std::string& text) {
  std::vector<std::size_t> levels;
  for (const auto& part : split(text, ',')) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != part.size() || part.front() == '-')
      throw dlmm::ValidationError("--levels: '" + part + "' is not a positive integer");
    levels.push_back(static_cast<std::size_t>(v));
  }
  if (levels.empty()) throw dlmm::ValidationError("--levels: empty list");
  return levels;
}

// Loads the file and folds the command-line overrides in, so the hash
// describes what actually ran.
dlmm::RunConfig effective_config(const Options& o) {
  dlmm::RunConfig cfg = dlmm::load_config(o.config);
  if (o.curve == "printed") {
    if (!cfg.curve_as_printed) throw dlmm::ValidationError("--curve printed: config has no curve_as_printed block");
    cfg.curve = *cfg.curve_as_printed;
  } else if (o.curve != "corrected") {
    throw dlmm::ValidationError("--curve: expected 'corrected' or 'printed'");
  }
  if (o.threads) cfg.pricing.threads = *o.threads;
  return cfg;
}

void print_smile(const std::vector<dlmm::SmilePoint>& smile, const std::string& model) {
  std::printf("model %s\n%10s %14s %12s %12s\n", model.c_str(), "strike", "price", "implied_vol", "std_err");
  for (const auto& pt : smile) {
    if (pt.implied_vol)
      std::printf("%10.2f %14.8e %12.6f %12.3e\n", pt.strike_multiplier, pt.price, *pt.implied_vol, pt.std_error);
    else
      std::printf("%10.2f %14.8e %12s %12.3e\n", pt.strike_multiplier, pt.price, "-", pt.std_error);
  }
}

int run_smile(const Options& o, bool plot) {
  dlmm::RunConfig cfg = effective_config(o);
  if (o.model) cfg.pricing.model = *o.model;
  if (o.paths) cfg.pricing.paths = *o.paths;
  if (o.seed) cfg.pricing.seed = *o.seed;
  if (o.control_variate) cfg.pricing.control_variate = true;
  if (o.out) (plot ? cfg.output.plot_csv : cfg.output.smile_csv) = *o.out;
  dlmm::validate(cfg, false);

  const auto tenor = dlmm::make_tenor(cfg);
  const auto curve = dlmm::make_curve(cfg, tenor);
  const auto vols = dlmm::make_vols(cfg, tenor);
  const auto caplet = dlmm::make_caplet(cfg, tenor);
  dlmm::SmileRequest request;
  request.model = dlmm::parse_smile_model(cfg.pricing.model);
  request.paths = cfg.pricing.paths;
  request.seed = cfg.pricing.seed;
  request.threads = cfg.pricing.threads;
  request.control_variate = cfg.pricing.control_variate;
  request.path_limit = cfg.pricing.path_limit;
  std::vector<std::string> warnings;
  const auto driver = request.model == dlmm::SmileModel::bernoulli_exact ? dlmm::make_atomic_driver(cfg, &warnings)
                                                                         : dlmm::make_gaussian_driver(cfg, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';

  const auto start = std::chrono::steady_clock::now();
  const auto smile = dlmm::build_smile(tenor, curve, vols, driver, caplet, request);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const dlmm::Provenance prov{dlmm::config_hash(cfg), std::to_string(cfg.pricing.seed),
                              std::string(plot ? "smile" : "price") + " model=" + cfg.pricing.model};
  const std::string path = plot ? cfg.output.plot_csv : cfg.output.smile_csv;
  if (plot)
    dlmm::write_csv_file(path, dlmm::write_plot_csv, smile, prov);
  else
    dlmm::write_csv_file(path, dlmm::write_smile_csv, smile, prov);

  print_smile(smile, cfg.pricing.model);
  std::printf("wrote %s (%.2f s, config %s)\n", path.c_str(), seconds, prov.config_hash.c_str());
  bool missing = false;
  for (const auto& pt : smile) {
    if (pt.implied_vol) continue;
    missing = true;
    std::cerr << "no implied vol at strike " << pt.strike_multiplier << ": " << pt.note << '\n';
  }
  return missing && o.strict ? kExitNumerical : kExitOk;
}

int run_converge(const Options& o) {
  dlmm::RunConfig cfg = effective_config(o);
  if (!cfg.convergence) throw dlmm::ValidationError("convergence: block missing from config");
  auto& c = *cfg.convergence;
  if (o.levels) c.levels = parse_levels(*o.levels);
  if (o.model) c.models = split(*o.model, ',');
  if (o.paths) c.paths = *o.paths;
  if (o.seed) c.seeds = {*o.seed};
  if (o.exact) c.exact = true;
  if (o.out) cfg.output.convergence_csv = *o.out;
  dlmm::validate(cfg, true);

  const auto spec = dlmm::make_convergence(cfg);
  const auto start = std::chrono::steady_clock::now();
  const auto rows = dlmm::refine_experiment(spec);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const dlmm::Provenance prov{dlmm::config_hash(cfg), c.exact ? "exact" : dlmm::join_seeds(c.seeds), "converge"};
  dlmm::write_csv_file(cfg.output.convergence_csv, dlmm::write_convergence_csv, rows, prov);

  std::printf("%10s %5s %14s %14s\n", "model", "p", "|rel_error|", "ks_stat");
  for (const auto& s : dlmm::summarize(rows))
    std::printf("%10s %5zu %14.6e %14.6e\n", dlmm::to_string(s.model).c_str(), s.p, s.median_abs_rel_error,
                s.median_ks);
  std::printf("wrote %s (%.2f s, config %s)\n", cfg.output.convergence_csv.c_str(), seconds, prov.config_hash.c_str());
  return kExitOk;
}

int run_validate(const Options& o) {
  const dlmm::RunConfig cfg = effective_config(o);
  dlmm::validate(cfg, true);
  std::printf("config %s ok (hash %s)\n", o.config.c_str(), dlmm::config_hash(cfg).c_str());
  return kExitOk;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("-c,--config", o.config, "JSON run configuration")->capture_default_str();
  cmd->add_option("--curve", o.curve, "initial curve: corrected or printed")->capture_default_str();
  cmd->add_option("--threads", o.threads, "worker threads for Monte Carlo");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete LIBOR market model: caplet smiles and refinement experiments"};
  app.require_subcommand(1);
  Options o;

  auto* price = app.add_subcommand("price", "price the caplet strip and write the smile table");
  auto* smile = app.add_subcommand("smile", "price the caplet strip and write plot data (vol x 100)");
  for (auto* cmd : {price, smile}) {
    add_common(cmd, o);
    cmd->add_option("--model", o.model, "bernoulli-exact, lognormal-mc or gz-mc");
    cmd->add_option("--paths", o.paths, "Monte Carlo path count");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--out", o.out, "output CSV path");
    cmd->add_flag("--control-variate", o.control_variate, "use the forward-rate control variate");
    cmd->add_flag("--strict", o.strict, "exit 3 when a strike has no implied vol");
  }
  auto* converge = app.add_subcommand("converge", "run the grid refinement experiment");
  add_common(converge, o);
  converge->add_option("--levels", o.levels, "comma-separated sub-steps per period, e.g. 1,2,4");
  converge->add_option("--model", o.model, "comma-separated drivers: bernoulli, gaussian, gz");
  converge->add_option("--paths", o.paths, "paths per level and seed");
  converge->add_option("--seed", o.seed, "run a single seed instead of the configured list");
  converge->add_option("--out", o.out, "output CSV path");
  converge->add_flag("--exact", o.exact, "enumerate the Bernoulli tree instead of simulating");
  auto* validate = app.add_subcommand("validate", "check a configuration and print its hash");
  add_common(validate, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*price) return run_smile(o, false);
    if (*smile) return run_smile(o, true);
    if (*converge) return run_converge(o);
    return run_validate(o);
  } catch (const dlmm::ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const dlmm::IoError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const dlmm::Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}
