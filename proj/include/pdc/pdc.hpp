// SPDX-License-Identifier: Apache-2.0

/// @file pdc.hpp
/// Umbrella header.

#ifndef PDC_PDC_HPP
#define PDC_PDC_HPP

#include "pdc/errors.hpp"
#include "pdc/core.hpp"
#include "pdc/trialfns.hpp"
#include "pdc/pca.hpp"
#include "pdc/fit_engine.hpp"
#include "pdc/synthetic.hpp"
#include "pdc/metrics.hpp"
#include "pdc/likelihood.hpp"
#include "pdc/io.hpp"
#include "pdc/sweep.hpp"

#endif  // PDC_PDC_HPP
