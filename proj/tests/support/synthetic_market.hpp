#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "evotrade/file_io.hpp"
#include "evotrade/numeric_io.hpp"
#include "synthetic.hpp"

namespace synthetic {

/// Writes <dir>/<ticker>.csv for each ticker plus <dir>/index.csv over `days` weekdays from `start`.
/// Returns follow a noisy AR(2) so there is something to learn.
inline void write_market(const std::filesystem::path& dir, const std::vector<std::string>& tickers,
                         std::uint64_t seed, std::size_t days = 650, evotrade::Date start = {2020, 7, 1}) {
  const auto dates = weekdays(days, start);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);

  std::vector<double> market(days);
  for (std::size_t i = 0; i < days; ++i) market[i] = 0.005 * z(rng);
  std::string index = "date,dji_return,spx_return\n";
  for (std::size_t i = 0; i < days; ++i) {
    index += evotrade::to_string(dates[i]) + "," + evotrade::format_double(market[i]) + "," +
             evotrade::format_double(0.9 * market[i] + 0.001 * z(rng)) + "\n";
  }
  evotrade::write_file_atomic(dir / "index.csv", index);

  for (std::size_t k = 0; k < tickers.size(); ++k) {
    auto base = ar2(days, seed * 31 + k + 1, 0.01);
    double close = 20.0 + 10.0 * static_cast<double>(k);
    std::string csv = "date,close,bid,ask,volume,shares_outstanding\n";
    for (std::size_t i = 0; i < days; ++i) {
      close *= 1.0 + base[i] + market[i];
      const double spread = close * (0.0005 + 0.001 * std::abs(z(rng)));
      const double volume = std::round(1e6 * std::exp(0.3 * z(rng)));
      csv += evotrade::to_string(dates[i]) + "," + evotrade::format_double(close) + "," +
             evotrade::format_double(close - spread / 2) + "," + evotrade::format_double(close + spread / 2) + "," +
             evotrade::format_double(volume) + ",5000000\n";
    }
    evotrade::write_file_atomic(dir / (tickers[k] + ".csv"), csv);
  }
}

/// Small, fast settings for end-to-end runs.
inline std::string small_config_text(const std::string& tickers, int evaluations = 20, int repeats = 2) {
  return "[data]\n"
         "dir = data\n"
         "tickers = " + tickers + "\n"
         "test_year = 2022\n"
         "[evolution]\n"
         "islands = 2\n"
         "capacity = 3\n"
         "evaluations = " + std::to_string(evaluations) + "\n"
         "repeats = " + std::to_string(repeats) + "\n"
         "repopulation_period = 10\n"
         "[training]\n"
         "epochs = 2\n"
         "[baseline]\n"
         "epochs = 3\n"
         "repeats = 2\n"
         "[strategy]\n"
         "kind = long_only\n"
         "cost = half_spread\n"
         "capital = 100000\n"
         "n_long = 1\n"
         "n_short = 1\n"
         "[output]\n"
         "dir = out\n"
         "[run]\n"
         "seed = 7\n"
         "workers = 1\n";
}

}  // namespace synthetic
