#pragma once

#include <random>
#include <string>

#include "evotrade/trading.hpp"

namespace synthetic {

using evotrade::Date;
using evotrade::PredictionPanel;
using evotrade::PriceBook;

struct Market {
  PredictionPanel panel;
  PriceBook book;
};

/// Random walk prices with a positive spread around each close, and random signals.
inline Market random_market(std::mt19937_64& rng, std::size_t tickers, std::size_t days, double spread_scale = 0.01) {
  std::normal_distribution<double> step(0.0, 0.02);
  std::normal_distribution<double> signal(0.0, 0.01);
  std::uniform_real_distribution<double> spread(0.1, 1.0);
  Market m;
  for (std::size_t k = 0; k < tickers; ++k) m.panel.tickers.push_back(std::string(1, static_cast<char>('A' + k)));
  std::vector<double> price(tickers);
  for (auto& p : price) p = std::uniform_real_distribution<double>(10, 100)(rng);
  for (std::size_t d = 0; d < days; ++d) {
    Date dt{2022, 1 + static_cast<int>(d / 28), 1 + static_cast<int>(d % 28)};
    m.panel.days.push_back(dt);
    auto& pred = m.panel.predicted.emplace_back();
    auto& act = m.panel.actual.emplace_back();
    for (std::size_t k = 0; k < tickers; ++k) {
      const double r = step(rng);
      price[k] *= 1.0 + r;
      const double s = price[k] * spread_scale * spread(rng);
      // Close is not always the midpoint.
      const double skew = std::uniform_real_distribution<double>(0.25, 0.75)(rng);
      m.book.add(m.panel.tickers[k], dt, {price[k], price[k] - skew * s, price[k] + (1 - skew) * s});
      pred.push_back(signal(rng));
      act.push_back(r);
    }
  }
  return m;
}

}  // namespace synthetic
