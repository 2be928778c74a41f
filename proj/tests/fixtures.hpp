#pragma once

#include <cstddef>
#include <vector>

#include "dlmm/market.hpp"

namespace fixtures {

// Ten annual rates, T* = 11, corrected initial curve.
inline const std::vector<double> kLibors{0.0207, 0.023, 0.0262, 0.028, 0.0292, 0.0318, 0.0342, 0.0362, 0.0379, 0.04};
inline const std::vector<double> kVols{0.34, 0.32, 0.3, 0.28, 0.26, 0.24, 0.22, 0.2, 0.18, 0.16};
inline const std::vector<double> kStrikes{0.6, 1.0, 1.4, 1.8, 2.2, 2.6, 3.0, 3.4};

inline dlmm::TenorStructure tenor(std::size_t p = 1) { return dlmm::TenorStructure(11.0, 10, p); }
inline dlmm::MarketCurve curve(const dlmm::TenorStructure& t, double normalization = 1.0) {
  return dlmm::MarketCurve(kLibors, t, normalization);
}
inline dlmm::VolSurface vols(const dlmm::TenorStructure& t) { return dlmm::VolSurface::per_rate(t, kVols); }

}  // namespace fixtures
