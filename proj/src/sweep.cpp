#include "evotrade/sweep.hpp"

#include <exception>
#include <optional>

#include <fmt/format.h>

#include "evotrade/numeric_io.hpp"

namespace evotrade {

double ReturnGrid::at(int n_long, int n_short) const {
  if (n_long < 1 || n_long > max_long || n_short < 1 || n_short > max_short) {
    throw std::out_of_range(fmt::format("no grid cell ({}, {})", n_long, n_short));
  }
  return values[static_cast<std::size_t>((n_long - 1) * max_short + (n_short - 1))];
}

SweepError::SweepError(int l, int s, const std::string& what)
    : std::runtime_error(fmt::format("cell long_{} short_{}: {}", l, s, what)), n_long(l), n_short(s) {}

namespace {

ReturnGrid empty_grid(int max_long, int max_short) {
  if (max_long < 1 || max_short < 1) throw std::invalid_argument("grid bounds must be at least 1");
  ReturnGrid g;
  g.max_long = max_long;
  g.max_short = max_short;
  g.values.assign(static_cast<std::size_t>(max_long) * static_cast<std::size_t>(max_short), 0.0);
  return g;
}

}  // namespace

ReturnGrid sweep_grid_serial(const PredictionPanel& panel, const PriceBook& book, CostModel cost, double capital,
                             int max_long, int max_short) {
  auto grid = empty_grid(max_long, max_short);
  for (int l = 1; l <= max_long; ++l) {
    for (int s = 1; s <= max_short; ++s) {
      try {
        grid.values[static_cast<std::size_t>((l - 1) * max_short + (s - 1))] =
            long_short_backtest(panel, book, cost, capital, l, s).overall_return;
      } catch (const std::exception& e) {
        throw SweepError(l, s, e.what());
      }
    }
  }
  return grid;
}

ReturnGrid sweep_grid(const PredictionPanel& panel, const PriceBook& book, CostModel cost, double capital,
                      int max_long, int max_short) {
  auto grid = empty_grid(max_long, max_short);
  const int cells = max_long * max_short;
  // Exceptions cannot leave the parallel region; keep the messages and raise the first cell's afterwards.
  std::vector<std::optional<std::string>> failures(static_cast<std::size_t>(cells));

#pragma omp parallel for collapse(2) schedule(dynamic)
  for (int l = 1; l <= max_long; ++l) {
    for (int s = 1; s <= max_short; ++s) {
      const auto idx = static_cast<std::size_t>((l - 1) * max_short + (s - 1));
      try {
        grid.values[idx] = long_short_backtest(panel, book, cost, capital, l, s).overall_return;
      } catch (const std::exception& e) {
        failures[idx] = e.what();
      }
    }
  }

  for (int i = 0; i < cells; ++i) {
    if (failures[static_cast<std::size_t>(i)]) {
      throw SweepError(i / max_short + 1, i % max_short + 1, *failures[static_cast<std::size_t>(i)]);
    }
  }
  return grid;
}

std::string format_grid_csv(const ReturnGrid& grid) {
  std::string out;
  for (int s = 1; s <= grid.max_short; ++s) out += fmt::format(",short_{}", s);
  out += '\n';
  for (int l = 1; l <= grid.max_long; ++l) {
    out += fmt::format("long_{}", l);
    for (int s = 1; s <= grid.max_short; ++s) out += "," + format_double(grid.at(l, s));
    out += '\n';
  }
  return out;
}

}  // namespace evotrade
