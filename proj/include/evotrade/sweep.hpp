#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "evotrade/trading.hpp"

namespace evotrade {

/// Long-short returns indexed by (n_long, n_short), both 1-based.
struct ReturnGrid {
  int max_long = 0;
  int max_short = 0;
  std::vector<double> values;  // row-major, long index outer

  double at(int n_long, int n_short) const;
};

class SweepError : public std::runtime_error {
 public:
  SweepError(int n_long, int n_short, const std::string& what);
  int n_long;
  int n_short;
};

/// Reference loop, one cell after another.
ReturnGrid sweep_grid_serial(const PredictionPanel& panel, const PriceBook& book, CostModel cost, double capital,
                             int max_long = 15, int max_short = 15);

/// Same cells computed with OpenMP; results are identical to the serial loop.
ReturnGrid sweep_grid(const PredictionPanel& panel, const PriceBook& book, CostModel cost, double capital,
                      int max_long = 15, int max_short = 15);

/// Header `,short_1,...`, then one `long_L,...` row per long count.
std::string format_grid_csv(const ReturnGrid& grid);

}  // namespace evotrade
