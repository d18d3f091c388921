// SPDX-License-Identifier: Apache-2.0

/**
 * @file sweep.hpp
 * Model-order sweep: one fit per (m, r) pair on shared read-only data,
 * reported next to the PCA spectrum tail of m.
 */

#ifndef PDC_SWEEP_HPP
#define PDC_SWEEP_HPP

#include <algorithm>
#include <limits>
#include <atomic>
#include <string>
#include <thread>
#include <vector>

#include "pdc/fit_engine.hpp"
#include "pdc/pca.hpp"

namespace pdc {

struct SweepRow {
  int m = 0;
  int r = 0;
  std::uint64_t seed = 0;
  double final_cost = 0.0;  // NaN when the fit failed
  double tail = 0.0;        // spectrum_tail(m)
  int steps = 0;
  std::string error;        // empty on success
};

struct IntRange {
  int lo = 1;
  int hi = 1;
};

/// Row i (in (m, r) order) is fitted with seed base.seed + i.
inline std::vector<SweepRow> sweep_orders(const TimeSeries& series, IntRange m_range, IntRange r_range,
                                          const FitConfig& base, unsigned threads = 1) {
  detail::require(m_range.lo >= 1 && m_range.hi >= m_range.lo && m_range.hi < series.n(),
                  "sweep_orders: need 1 <= m_lo <= m_hi < n");
  detail::require(r_range.lo >= 1 && r_range.hi >= r_range.lo && r_range.hi < series.N(),
                  "sweep_orders: need 1 <= r_lo <= r_hi < N");
  const PcaResult pca = principal_components(series);

  std::vector<SweepRow> rows;
  for (int m = m_range.lo; m <= m_range.hi; ++m)
    for (int r = r_range.lo; r <= r_range.hi; ++r) {
      SweepRow row;
      row.m = m;
      row.r = r;
      row.seed = base.seed + rows.size();
      row.tail = spectrum_tail(pca, m, series.N());
      rows.push_back(row);
    }

  auto run = [&](SweepRow& row) {
    FitConfig cfg = base;
    cfg.m = row.m;
    cfg.r = row.r;
    cfg.seed = row.seed;
    try {
      const FitResult res = fit(series, cfg);
      row.final_cost = res.report.final_cost;
      row.steps = res.report.steps_taken;
    } catch (const std::exception& e) {
      row.final_cost = std::numeric_limits<double>::quiet_NaN();
      row.error = e.what();
    }
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(rows.size())));
  if (threads == 1) {
    for (auto& row : rows) run(row);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) run(rows[i]);
      });
    for (auto& th : pool) th.join();
  }
  return rows;
}

}  // namespace pdc

#endif  // PDC_SWEEP_HPP
