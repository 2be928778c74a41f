#pragma once

/// \file report.hpp
/// CSV emission. Every file starts with a '#' provenance line carrying the
/// config hash and seed, followed by a header row.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "dlmm/convergence.hpp"
#include "dlmm/errors.hpp"
#include "dlmm/pricing.hpp"

namespace dlmm {

struct Provenance {
  std::string config_hash;
  std::string seed;
  std::string command;
};

inline std::string provenance_line(const Provenance& p) {
  std::string line = "# dlmm config_hash=" + p.config_hash + " seed=" + p.seed;
  if (!p.command.empty()) line += " command=" + p.command;
  return line;
}

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string join_seeds(const std::vector<std::uint64_t>& seeds) {
  std::string s;
  for (std::size_t k = 0; k < seeds.size(); ++k) s += (k ? ";" : "") + std::to_string(seeds[k]);
  return s;
}

/// strike_mult, price, implied_vol, std_err. A missing implied vol is an
/// empty field.
inline void write_smile_csv(std::ostream& out, const std::vector<SmilePoint>& smile, const Provenance& prov) {
  out << provenance_line(prov) << '\n' << "strike_mult,price,implied_vol,std_err\n";
  for (const auto& pt : smile) {
    out << format_double(pt.strike_multiplier) << ',' << format_double(pt.price) << ','
        << (pt.implied_vol ? format_double(*pt.implied_vol) : std::string()) << ',' << format_double(pt.std_error)
        << '\n';
  }
}

/// strike_mult, implied_vol_x100 (the smile in percent).
inline void write_plot_csv(std::ostream& out, const std::vector<SmilePoint>& smile, const Provenance& prov) {
  out << provenance_line(prov) << '\n' << "strike_mult,implied_vol_x100\n";
  for (const auto& pt : smile)
    out << format_double(pt.strike_multiplier) << ','
        << (pt.implied_vol ? format_double(100.0 * *pt.implied_vol) : std::string()) << '\n';
}

inline void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows, const Provenance& prov) {
  out << provenance_line(prov) << '\n' << "p,model,price,benchmark,rel_error,ks_stat,seed\n";
  for (const auto& r : rows)
    out << r.p << ',' << to_string(r.model) << ',' << format_double(r.price) << ',' << format_double(r.benchmark)
        << ',' << format_double(r.rel_error) << ',' << format_double(r.ks_stat) << ',' << r.seed << '\n';
}

template <class Writer, class Rows>
void write_csv_file(const std::string& path, Writer&& writer, const Rows& rows, const Provenance& prov) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  writer(out, rows, prov);
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace dlmm
