#include "evotrade/trading.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "evotrade/numeric_io.hpp"

namespace evotrade {

void PriceBook::add(const std::string& ticker, const Date& day, const Quote& quote) {
  if (!std::isfinite(quote.close_price) || !std::isfinite(quote.bid) || !std::isfinite(quote.ask)) {
    throw DataError(fmt::format("{} {}: non-finite quote", ticker, to_string(day)));
  }
  if (quote.ask < quote.bid) throw DataError(fmt::format("{} {}: ask < bid", ticker, to_string(day)));
  if (quote.close_price <= 0.0) throw DataError(fmt::format("{} {}: close must be positive", ticker, to_string(day)));
  quotes_[ticker][day] = quote;
}

void PriceBook::add_bars(const std::string& ticker, const std::vector<StockBar>& bars) {
  for (const auto& b : bars) add(ticker, b.date, {b.close_price, b.bid, b.ask});
}

bool PriceBook::contains(const std::string& ticker, const Date& day) const {
  auto it = quotes_.find(ticker);
  return it != quotes_.end() && it->second.count(day) > 0;
}

const Quote& PriceBook::quote(const std::string& ticker, const Date& day) const {
  auto it = quotes_.find(ticker);
  if (it != quotes_.end()) {
    auto q = it->second.find(day);
    if (q != it->second.end()) return q->second;
  }
  throw DataError(fmt::format("no quote for {} on {}", ticker, to_string(day)));
}

std::vector<std::string> PriceBook::tickers() const {
  std::vector<std::string> out;
  for (const auto& [t, _] : quotes_) out.push_back(t);
  return out;
}

void PredictionPanel::check() const {
  if (!std::is_sorted(tickers.begin(), tickers.end()) ||
      std::adjacent_find(tickers.begin(), tickers.end()) != tickers.end()) {
    throw DataError("panel tickers must be sorted and unique");
  }
  for (std::size_t d = 1; d < days.size(); ++d) {
    if (!(days[d - 1] < days[d])) throw DataError("panel days must be strictly increasing");
  }
  if (predicted.size() != days.size() || actual.size() != days.size()) {
    throw DataError("panel has a day without values");
  }
  for (std::size_t d = 0; d < days.size(); ++d) {
    if (predicted[d].size() != tickers.size() || actual[d].size() != tickers.size()) {
      throw DataError(fmt::format("panel day {} does not cover every ticker", to_string(days[d])));
    }
    for (std::size_t k = 0; k < tickers.size(); ++k) {
      if (!std::isfinite(predicted[d][k]) || !std::isfinite(actual[d][k])) {
        throw DataError(fmt::format("panel value for {} on {} is not finite", tickers[k], to_string(days[d])));
      }
    }
  }
}

std::vector<std::pair<std::string, Date>> PredictionPanel::missing_quotes(const PriceBook& book) const {
  std::vector<std::pair<std::string, Date>> missing;
  for (const auto& t : tickers)
    for (const auto& d : days)
      if (!book.contains(t, d)) missing.emplace_back(t, d);
  return missing;
}

std::string format_panel_csv(const PredictionPanel& panel) {
  std::string out = "date,ticker,predicted_return,actual_return\n";
  for (std::size_t d = 0; d < panel.days.size(); ++d) {
    for (std::size_t k = 0; k < panel.tickers.size(); ++k) {
      out += fmt::format("{},{},{},{}\n", to_string(panel.days[d]), panel.tickers[k],
                         format_double(panel.predicted[d][k]), format_double(panel.actual[d][k]));
    }
  }
  return out;
}

PredictionPanel parse_panel_csv(std::string_view text) {
  std::map<Date, std::map<std::string, std::pair<double, double>>> cells;
  std::set<std::string> names;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (n == 1) {
      if (line != "date,ticker,predicted_return,actual_return") {
        throw DataError("panel: line 1: expected header 'date,ticker,predicted_return,actual_return'");
      }
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream fields(line);
    for (std::string item; std::getline(fields, item, ',');) f.push_back(item);
    if (f.size() != 4) throw DataError(fmt::format("panel: line {}: expected 4 fields", n));
    try {
      auto day = parse_date(f[0]);
      auto& row = cells[day];
      if (row.count(f[1])) throw DataError(fmt::format("panel: line {}: duplicate {} on {}", n, f[1], f[0]));
      row[f[1]] = {parse_double(f[2]), parse_double(f[3])};
      names.insert(f[1]);
    } catch (const std::invalid_argument& e) {
      throw DataError(fmt::format("panel: line {}: {}", n, e.what()));
    }
  }
  if (n == 0) throw DataError("panel: empty file");

  PredictionPanel panel;
  panel.tickers.assign(names.begin(), names.end());
  for (const auto& [day, row] : cells) {
    panel.days.push_back(day);
    auto& p = panel.predicted.emplace_back();
    auto& a = panel.actual.emplace_back();
    for (const auto& t : panel.tickers) {
      auto it = row.find(t);
      if (it == row.end()) throw DataError(fmt::format("panel: {} missing on {}", t, to_string(day)));
      p.push_back(it->second.first);
      a.push_back(it->second.second);
    }
  }
  panel.check();
  return panel;
}

std::string to_string(CostModel cost) {
  switch (cost) {
    case CostModel::none: return "none";
    case CostModel::half_spread: return "half_spread";
    case CostModel::bid_ask: return "bid_ask";
  }
  return "?";
}

CostModel parse_cost_model(std::string_view text) {
  if (text == "none") return CostModel::none;
  if (text == "half_spread") return CostModel::half_spread;
  if (text == "bid_ask") return CostModel::bid_ask;
  throw std::invalid_argument(fmt::format("unknown cost model '{}'", text));
}

std::string to_string(Side side) { return side == Side::buy ? "buy" : "sell"; }

double execution_price(const PriceBook& book, const std::string& ticker, const Date& day, Side side,
                       CostModel cost) {
  const auto& q = book.quote(ticker, day);
  double price = q.close_price;
  switch (cost) {
    case CostModel::none:
      break;
    case CostModel::half_spread: {
      const double half = (q.ask - q.bid) / 2.0;
      price = side == Side::buy ? q.close_price + half : q.close_price - half;
      break;
    }
    case CostModel::bid_ask:
      price = side == Side::buy ? q.ask : q.bid;
      break;
  }
  if (!(price > 0.0)) {
    throw DataError(fmt::format("non-positive {} price for {} on {}", to_string(side), ticker, to_string(day)));
  }
  return price;
}

void Ledger::buy(const Date& day, const std::string& ticker, double shares, double price) {
  cash -= shares * price;
  positions[ticker] += shares;
  if (positions[ticker] == 0.0) positions.erase(ticker);
  trades.push_back({day, ticker, Side::buy, shares, price});
}

void Ledger::sell(const Date& day, const std::string& ticker, double shares, double price) {
  cash += shares * price;
  positions[ticker] -= shares;
  if (positions[ticker] == 0.0) positions.erase(ticker);
  trades.push_back({day, ticker, Side::sell, shares, price});
}

double Ledger::position(const std::string& ticker) const {
  auto it = positions.find(ticker);
  return it == positions.end() ? 0.0 : it->second;
}

double Ledger::equity(const PriceBook& book, const Date& day) const {
  double total = cash;
  for (const auto& [t, shares] : positions) total += shares * book.quote(t, day).close_price;
  return total;
}

Ledger replay(double initial_cash, const std::vector<Trade>& trades) {
  Ledger l;
  l.cash = initial_cash;
  for (const auto& t : trades) {
    if (t.side == Side::buy) l.buy(t.day, t.ticker, t.shares, t.price);
    else l.sell(t.day, t.ticker, t.shares, t.price);
  }
  return l;
}

double period_return(double initial_capital, double final_cash) {
  return (final_cash - initial_capital) / initial_capital;
}

namespace {

void check_capital(double capital) {
  if (!(capital > 0.0) || !std::isfinite(capital)) {
    throw std::invalid_argument(fmt::format("capital must be positive, got {}", capital));
  }
}

/// Closes every position at day prices: longs are sold, shorts bought back.
void liquidate(Ledger& ledger, const PriceBook& book, const Date& day, CostModel cost) {
  const auto open = ledger.positions;
  for (const auto& [t, shares] : open) {
    if (shares > 0.0) ledger.sell(day, t, shares, execution_price(book, t, day, Side::sell, cost));
    else ledger.buy(day, t, -shares, execution_price(book, t, day, Side::buy, cost));
  }
}

ReturnReport finish(std::string strategy, CostModel cost, double capital, Ledger& ledger,
                    std::vector<std::pair<Date, double>> curve) {
  ReturnReport r;
  r.strategy = std::move(strategy);
  r.cost = cost;
  r.initial_capital = capital;
  r.final_cash = ledger.cash;
  r.overall_return = period_return(capital, ledger.cash);
  r.equity_curve = std::move(curve);
  r.trades = std::move(ledger.trades);
  return r;
}

}  // namespace

ReturnReport long_only_backtest(const PredictionPanel& panel, const PriceBook& book, CostModel cost,
                                double capital) {
  check_capital(capital);
  panel.check();
  Ledger ledger;
  ledger.cash = capital;
  std::vector<std::pair<Date, double>> curve;

  for (std::size_t d = 0; d < panel.days.size(); ++d) {
    const Date& day = panel.days[d];
    const auto& pred = panel.predicted[d];
    for (std::size_t k = 0; k < panel.tickers.size(); ++k) {
      const auto& t = panel.tickers[k];
      const double held = ledger.position(t);
      if (held > 0.0 && pred[k] < 0.0) ledger.sell(day, t, held, execution_price(book, t, day, Side::sell, cost));
    }
    std::vector<std::size_t> invest;
    for (std::size_t k = 0; k < panel.tickers.size(); ++k)
      if (pred[k] > 0.0) invest.push_back(k);
    if (!invest.empty() && ledger.cash > 0.0) {
      const double quota = ledger.cash / static_cast<double>(invest.size());
      for (std::size_t k : invest) {
        const auto& t = panel.tickers[k];
        const double price = execution_price(book, t, day, Side::buy, cost);
        ledger.buy(day, t, quota / price, price);
      }
      // All cash is deployed; only rounding remains.
      ledger.cash = 0.0;
    }
    if (d + 1 == panel.days.size()) liquidate(ledger, book, day, cost);
    curve.emplace_back(day, ledger.equity(book, day));
  }
  return finish("long_only", cost, capital, ledger, std::move(curve));
}

ReturnReport long_short_backtest(const PredictionPanel& panel, const PriceBook& book, CostModel cost,
                                 double capital, int n_long, int n_short) {
  check_capital(capital);
  panel.check();
  const auto count = panel.tickers.size();
  if (n_long < 1 || n_short < 1) throw std::invalid_argument("n_long and n_short must be at least 1");
  if (static_cast<std::size_t>(n_long) + static_cast<std::size_t>(n_short) > count) {
    throw std::invalid_argument(
        fmt::format("n_long + n_short = {} exceeds the {} available tickers", n_long + n_short, count));
  }
  const auto nl = static_cast<std::size_t>(n_long);
  const auto ns = static_cast<std::size_t>(n_short);

  Ledger ledger;
  ledger.cash = capital;
  std::vector<std::pair<Date, double>> curve;
  std::vector<std::size_t> order(count);

  for (std::size_t d = 0; d < panel.days.size(); ++d) {
    const Date& day = panel.days[d];
    const auto& pred = panel.predicted[d];
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Tickers are sorted, so a stable sort breaks ties lexicographically.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pred[a] > pred[b]; });

    if (pred[order[nl - 1]] > 0.0 && pred[order[count - ns]] < 0.0) {
      liquidate(ledger, book, day, cost);
      const double cash = ledger.cash;
      if (cash > 0.0) {
        const double quota_long = cash / static_cast<double>(nl);
        const double quota_short = cash / static_cast<double>(ns);
        for (std::size_t i = 0; i < nl; ++i) {
          const auto& t = panel.tickers[order[i]];
          const double price = execution_price(book, t, day, Side::buy, cost);
          ledger.buy(day, t, quota_long / price, price);
        }
        for (std::size_t i = count - ns; i < count; ++i) {
          const auto& t = panel.tickers[order[i]];
          const double price = execution_price(book, t, day, Side::sell, cost);
          ledger.sell(day, t, quota_short / price, price);
        }
      }
    }
    if (d + 1 == panel.days.size()) liquidate(ledger, book, day, cost);
    curve.emplace_back(day, ledger.equity(book, day));
  }
  return finish(fmt::format("long_short_{}_{}", n_long, n_short), cost, capital, ledger, std::move(curve));
}

ReturnReport buy_and_hold(const PriceBook& book, const std::vector<std::string>& tickers,
                          const std::vector<Date>& days, double capital, CostModel cost) {
  check_capital(capital);
  if (tickers.empty()) throw std::invalid_argument("buy_and_hold needs at least one ticker");
  if (days.empty()) throw std::invalid_argument("buy_and_hold needs at least one day");
  Ledger ledger;
  ledger.cash = capital;
  const double quota = capital / static_cast<double>(tickers.size());
  for (const auto& t : tickers) {
    const double price = execution_price(book, t, days.front(), Side::buy, cost);
    ledger.buy(days.front(), t, quota / price, price);
  }
  ledger.cash = 0.0;
  std::vector<std::pair<Date, double>> curve;
  for (std::size_t d = 0; d < days.size(); ++d) {
    if (d + 1 == days.size()) liquidate(ledger, book, days[d], cost);
    curve.emplace_back(days[d], ledger.equity(book, days[d]));
  }
  return finish("buy_and_hold", cost, capital, ledger, std::move(curve));
}

std::string format_report(const ReturnReport& report) {
  std::string out;
  out += fmt::format("strategy={}\n", report.strategy);
  out += fmt::format("cost={}\n", to_string(report.cost));
  out += fmt::format("initial_capital={}\n", format_double(report.initial_capital));
  out += fmt::format("final_cash={}\n", format_double(report.final_cash));
  out += fmt::format("return={}\n", format_double(report.overall_return));
  out += fmt::format("trade_count={}\n", report.trade_count());
  out += "date,equity\n";
  for (const auto& [day, equity] : report.equity_curve) {
    out += fmt::format("{},{}\n", to_string(day), format_double(equity));
  }
  return out;
}

}  // namespace evotrade
