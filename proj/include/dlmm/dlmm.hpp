#pragma once

/// \file dlmm.hpp
/// Umbrella header for the discrete LIBOR market model library.

#include "dlmm/config.hpp"
#include "dlmm/convergence.hpp"
#include "dlmm/drift.hpp"
#include "dlmm/driver.hpp"
#include "dlmm/errors.hpp"
#include "dlmm/market.hpp"
#include "dlmm/models.hpp"
#include "dlmm/pricing.hpp"
#include "dlmm/random.hpp"
#include "dlmm/report.hpp"
