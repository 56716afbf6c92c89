#pragma once

// Hand-worked backtests. Expected trades and final cash were worked out by hand from the
// quotes; fractional share counts are written as quota / execution price.

#include <string>
#include <vector>

#include "evotrade/trading.hpp"

namespace fixtures {

using evotrade::CostModel;
using evotrade::Date;
using evotrade::PredictionPanel;
using evotrade::PriceBook;
using evotrade::Quote;
using evotrade::Side;
using evotrade::Trade;

struct LedgerFixture {
  std::string name;
  PredictionPanel panel;
  PriceBook book;
  CostModel cost = CostModel::none;
  double capital = 0.0;
  bool long_short = false;
  int n_long = 0;
  int n_short = 0;
  std::vector<Trade> trades;
  double final_cash = 0.0;
};

inline Date day(int d) { return Date{2023, 3, d}; }

inline PredictionPanel panel(std::vector<std::string> tickers, std::vector<std::vector<double>> predicted) {
  PredictionPanel p;
  p.tickers = std::move(tickers);
  for (std::size_t d = 0; d < predicted.size(); ++d) {
    p.days.push_back(day(static_cast<int>(d) + 1));
    p.actual.emplace_back(p.tickers.size(), 0.0);
  }
  p.predicted = std::move(predicted);
  return p;
}

inline Quote flat(double close) { return {close, close, close}; }

inline std::vector<LedgerFixture> ledger_fixtures() {
  std::vector<LedgerFixture> out;

  {
    // Rotation between two names, then an exact-zero signal that must be ignored.
    LedgerFixture f;
    f.name = "long_only_rotation";
    f.panel = panel({"A", "B"}, {{0.01, -0.02}, {-0.01, 0.03}, {0.0, -0.01}});
    f.book.add("A", day(1), flat(10));
    f.book.add("B", day(1), flat(20));
    f.book.add("A", day(2), flat(12.5));
    f.book.add("B", day(2), flat(25));
    f.book.add("A", day(3), flat(11));
    f.book.add("B", day(3), flat(20));
    f.capital = 100;
    f.trades = {{day(1), "A", Side::buy, 10, 10},
                {day(2), "A", Side::sell, 10, 12.5},
                {day(2), "B", Side::buy, 5, 25},
                {day(3), "B", Side::sell, 5, 20}};
    f.final_cash = 100;
    out.push_back(std::move(f));
  }
  {
    // Bid/ask execution, a re-buy of a held name and final liquidation.
    LedgerFixture f;
    f.name = "long_only_bid_ask";
    f.panel = panel({"A", "B", "C"}, {{0.02, 0.01, -0.01}, {0.01, -0.02, 0.03}});
    f.book.add("A", day(1), {10, 9.5, 10});
    f.book.add("B", day(1), {20, 19, 20});
    f.book.add("C", day(1), {40, 39, 40});
    f.book.add("A", day(2), {11, 11, 12.5});
    f.book.add("B", day(2), {18.25, 18, 18.5});
    f.book.add("C", day(2), {40, 39.5, 45});
    f.cost = CostModel::bid_ask;
    f.capital = 1000;
    // Day 2: selling B gives 450, split 225/225 into A at 12.5 and C at 45.
    f.trades = {{day(1), "A", Side::buy, 50, 10},   {day(1), "B", Side::buy, 25, 20},
                {day(2), "B", Side::sell, 25, 18},  {day(2), "A", Side::buy, 18, 12.5},
                {day(2), "C", Side::buy, 5, 45},    {day(2), "A", Side::sell, 68, 11},
                {day(2), "C", Side::sell, 5, 39.5}};
    f.final_cash = 68 * 11 + 5 * 39.5;
    out.push_back(std::move(f));
  }
  {
    // One long, one short, gate closed on the last day.
    LedgerFixture f;
    f.name = "long_short_pair";
    f.panel = panel({"A", "B"}, {{0.05, -0.02}, {0.01, 0.02}});
    f.book.add("A", day(1), flat(10));
    f.book.add("B", day(1), flat(20));
    f.book.add("A", day(2), flat(11));
    f.book.add("B", day(2), flat(18));
    f.capital = 100;
    f.long_short = true;
    f.n_long = 1;
    f.n_short = 1;
    f.trades = {{day(1), "A", Side::buy, 10, 10},
                {day(1), "B", Side::sell, 5, 20},
                {day(2), "A", Side::sell, 10, 11},
                {day(2), "B", Side::buy, 5, 18}};
    f.final_cash = 120;
    out.push_back(std::move(f));
  }
  {
    // Half-spread costs, two shorts, a closed gate on day 2 and a re-balance on day 3.
    LedgerFixture f;
    f.name = "long_short_half_spread";
    f.panel = panel({"A", "B", "C"}, {{-0.01, 0.02, -0.03}, {0.01, 0.02, 0.01}, {0.03, -0.01, -0.02}});
    f.book.add("A", day(1), {10.5, 10, 11});
    f.book.add("B", day(1), {24, 23, 25});
    f.book.add("C", day(1), {32, 30, 34});
    f.book.add("A", day(2), {11, 10.5, 11.5});
    f.book.add("B", day(2), {26, 25, 27});
    f.book.add("C", day(2), {30, 29, 31});
    f.book.add("A", day(3), {11.5, 11, 12});
    f.book.add("B", day(3), {25.5, 25, 26});
    f.book.add("C", day(3), {31.5, 31, 32});
    f.cost = CostModel::half_spread;
    f.capital = 300;
    f.long_short = true;
    f.n_long = 1;
    f.n_short = 2;
    // Day 3 liquidation: 300 - 15*12 + 12*25 - 5*32 = 260.
    const double cash3 = 260;
    f.trades = {{day(1), "B", Side::buy, 12, 25},
                {day(1), "A", Side::sell, 15, 10},
                {day(1), "C", Side::sell, 5, 30},
                {day(3), "A", Side::buy, 15, 12},
                {day(3), "B", Side::sell, 12, 25},
                {day(3), "C", Side::buy, 5, 32},
                {day(3), "A", Side::buy, cash3 / 12, 12},
                {day(3), "B", Side::sell, (cash3 / 2) / 25, 25},
                {day(3), "C", Side::sell, (cash3 / 2) / 31, 31},
                {day(3), "A", Side::sell, cash3 / 12, 11},
                {day(3), "B", Side::buy, (cash3 / 2) / 25, 26},
                {day(3), "C", Side::buy, (cash3 / 2) / 31, 32}};
    f.final_cash = cash3 + cash3 / 12 * 11 - 5.2 * 26 - 130.0 / 31 * 32;
    out.push_back(std::move(f));
  }
  {
    // Tied top signal resolved by ticker order; a zero signal on day 2 sits mid-table.
    LedgerFixture f;
    f.name = "long_short_ties";
    f.panel = panel({"A", "B", "C"}, {{0.02, 0.02, -0.01}, {0.0, -0.01, 0.01}});
    f.book.add("A", day(1), flat(10));
    f.book.add("B", day(1), flat(15));
    f.book.add("C", day(1), flat(20));
    f.book.add("A", day(2), flat(12));
    f.book.add("B", day(2), flat(15));
    f.book.add("C", day(2), flat(18));
    f.capital = 60;
    f.long_short = true;
    f.n_long = 1;
    f.n_short = 1;
    // Day 2 liquidation: 60 + 6*12 - 3*18 = 78.
    f.trades = {{day(1), "A", Side::buy, 6, 10},         {day(1), "C", Side::sell, 3, 20},
                {day(2), "A", Side::sell, 6, 12},        {day(2), "C", Side::buy, 3, 18},
                {day(2), "C", Side::buy, 78.0 / 18, 18}, {day(2), "B", Side::sell, 78.0 / 15, 15},
                {day(2), "B", Side::buy, 78.0 / 15, 15}, {day(2), "C", Side::sell, 78.0 / 18, 18}};
    f.final_cash = 78;
    out.push_back(std::move(f));
  }
  return out;
}

inline evotrade::ReturnReport run(const LedgerFixture& f) {
  if (f.long_short) return evotrade::long_short_backtest(f.panel, f.book, f.cost, f.capital, f.n_long, f.n_short);
  return evotrade::long_only_backtest(f.panel, f.book, f.cost, f.capital);
}

inline bool close_rel(double a, double b, double rel = 1e-12) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Empty when the report reproduces the hand-worked ledger, otherwise the first difference.
/// Final cash is held to 1e-12 relative; the trade sequence must match exactly.
inline std::string compare(const LedgerFixture& f, const evotrade::ReturnReport& r) {
  if (!close_rel(r.final_cash, f.final_cash)) {
    return f.name + ": final cash " + std::to_string(r.final_cash) + " != " + std::to_string(f.final_cash);
  }
  if (r.trades.size() != f.trades.size()) {
    return f.name + ": " + std::to_string(r.trades.size()) + " trades, expected " + std::to_string(f.trades.size());
  }
  for (std::size_t i = 0; i < f.trades.size(); ++i) {
    const auto& got = r.trades[i];
    const auto& want = f.trades[i];
    if (!(got == want)) {
      return f.name + ": trade " + std::to_string(i) + " differs (" + got.ticker + " " + evotrade::to_string(got.side) +
             " " + std::to_string(got.shares) + " @ " + std::to_string(got.price) + ")";
    }
  }
  return {};
}

}  // namespace fixtures
