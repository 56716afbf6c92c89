#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evotrade/date.hpp"
#include "evotrade/market_data.hpp"

namespace evotrade {

struct Quote {
  double close_price = 0.0;
  double bid = 0.0;
  double ask = 0.0;
};

class PriceBook {
 public:
  void add(const std::string& ticker, const Date& day, const Quote& quote);
  void add_bars(const std::string& ticker, const std::vector<StockBar>& bars);

  bool contains(const std::string& ticker, const Date& day) const;
  /// Throws DataError naming ticker and day when absent.
  const Quote& quote(const std::string& ticker, const Date& day) const;
  std::vector<std::string> tickers() const;

 private:
  std::map<std::string, std::map<Date, Quote>> quotes_;
};

/// predicted[d][k] is the signal acted on at days[d] for tickers[k]; actual[d][k] is the return realized that day.
struct PredictionPanel {
  std::vector<Date> days;
  std::vector<std::string> tickers;
  std::vector<std::vector<double>> predicted;
  std::vector<std::vector<double>> actual;

  /// Sorted unique tickers, ascending unique days, rectangular finite values.
  void check() const;
  /// (ticker, day) pairs the book cannot price, empty when aligned.
  std::vector<std::pair<std::string, Date>> missing_quotes(const PriceBook& book) const;
};

std::string format_panel_csv(const PredictionPanel& panel);
PredictionPanel parse_panel_csv(std::string_view text);

enum class CostModel { none, half_spread, bid_ask };
enum class Side { buy, sell };

std::string to_string(CostModel cost);
CostModel parse_cost_model(std::string_view text);
std::string to_string(Side side);

double execution_price(const PriceBook& book, const std::string& ticker, const Date& day, Side side,
                       CostModel cost);

struct Trade {
  Date day;
  std::string ticker;
  Side side = Side::buy;
  double shares = 0.0;
  double price = 0.0;

  friend bool operator==(const Trade&, const Trade&) = default;
};

/// Signed fractional positions; a sale past zero opens a short.
struct Ledger {
  double cash = 0.0;
  std::map<std::string, double> positions;
  std::vector<Trade> trades;

  void buy(const Date& day, const std::string& ticker, double shares, double price);
  void sell(const Date& day, const std::string& ticker, double shares, double price);
  double position(const std::string& ticker) const;
  double equity(const PriceBook& book, const Date& day) const;
};

/// Rebuilds cash and positions from the trade log alone.
Ledger replay(double initial_cash, const std::vector<Trade>& trades);

struct ReturnReport {
  std::string strategy;
  CostModel cost = CostModel::none;
  double initial_capital = 0.0;
  double final_cash = 0.0;
  double overall_return = 0.0;
  std::vector<std::pair<Date, double>> equity_curve;
  std::vector<Trade> trades;

  std::size_t trade_count() const { return trades.size(); }
};

double period_return(double initial_capital, double final_cash);

ReturnReport long_only_backtest(const PredictionPanel& panel, const PriceBook& book, CostModel cost,
                                double capital);
ReturnReport long_short_backtest(const PredictionPanel& panel, const PriceBook& book, CostModel cost,
                                 double capital, int n_long, int n_short);
ReturnReport buy_and_hold(const PriceBook& book, const std::vector<std::string>& tickers,
                          const std::vector<Date>& days, double capital, CostModel cost = CostModel::none);

std::string format_report(const ReturnReport& report);

}  // namespace evotrade
