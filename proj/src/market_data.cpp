#include "evotrade/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "evotrade/numeric_io.hpp"

namespace evotrade {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

/// Reads all lines, checks the header and calls parse(fields, line_number) for each data row.
template <typename Parse>
void read_csv(const std::filesystem::path& path, std::string_view header, std::size_t columns,
              Parse&& parse) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  std::string line;
  std::size_t line_number = 0;
  if (!std::getline(in, line)) throw DataError(fmt::format("{}: empty file", path.string()));
  ++line_number;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) {
    throw DataError(fmt::format("{}: line 1: expected header '{}'", path.string(), header));
  }
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != columns) {
      throw DataError(fmt::format("{}: line {}: expected {} fields, got {}", path.string(),
                                  line_number, columns, fields.size()));
    }
    try {
      parse(fields, line_number);
    } catch (const std::invalid_argument& e) {
      throw DataError(fmt::format("{}: line {}: {}", path.string(), line_number, e.what()));
    }
  }
}

template <typename Bar>
void sort_and_check_dates(std::vector<Bar>& bars, const std::vector<std::size_t>& lines,
                          const std::filesystem::path& path) {
  std::vector<std::size_t> order(bars.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return bars[a].date < bars[b].date; });
  std::vector<Bar> sorted;
  sorted.reserve(bars.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0 && bars[order[i]].date == bars[order[i - 1]].date) {
      throw DataError(fmt::format("{}: line {}: duplicate date {}", path.string(), lines[order[i]],
                                  to_string(bars[order[i]].date)));
    }
    sorted.push_back(bars[order[i]]);
  }
  bars = std::move(sorted);
}

}  // namespace

FeatureVector FeatureRow::features() const {
  return {ret, volume_change, bid_ask_spread, illiquidity, turn_over, dji_return, spx_return};
}

void FeatureRow::set_features(const FeatureVector& v) {
  ret = v[0];
  volume_change = v[1];
  bid_ask_spread = v[2];
  illiquidity = v[3];
  turn_over = v[4];
  dji_return = v[5];
  spx_return = v[6];
}

double Normalizer::apply(std::size_t feature, double value) const {
  if (constant[feature]) return 0.5;
  return (value - min[feature]) / (max[feature] - min[feature]);
}

double Normalizer::invert(std::size_t feature, double value) const {
  // A constant feature carries its only train value in min.
  if (constant[feature]) return min[feature];
  return min[feature] + value * (max[feature] - min[feature]);
}

RowRange StockDataset::range(Split which) const {
  switch (which) {
    case Split::train: return train;
    case Split::valid: return valid;
    case Split::test: return test;
  }
  return {};
}

SeriesSplit StockDataset::split(Split which) const {
  const auto r = range(which);
  SeriesSplit out;
  out.inputs.reserve(r.size());
  out.targets.reserve(r.size());
  out.target_dates.reserve(r.size());
  for (std::size_t i = r.begin; i < r.end; ++i) {
    out.inputs.push_back(rows[i].features());
    out.targets.push_back(target[i].value());
    out.target_dates.push_back(rows[i + 1].date);
  }
  return out;
}

std::vector<StockBar> load_stock_csv(const std::filesystem::path& path) {
  std::vector<StockBar> bars;
  std::vector<std::size_t> lines;
  read_csv(path, "date,close,bid,ask,volume,shares_outstanding", 6,
           [&](const std::vector<std::string_view>& f, std::size_t line) {
             StockBar bar{parse_date(f[0]), parse_double(f[1]), parse_double(f[2]),
                          parse_double(f[3]), parse_double(f[4]), parse_double(f[5])};
             auto fail = [&](std::string_view what) {
               throw DataError(fmt::format("{}: line {}: rejected row: {}", path.string(), line, what));
             };
             if (!(bar.close_price > 0.0) || !std::isfinite(bar.close_price)) fail("close must be > 0");
             if (!(bar.volume >= 0.0) || !std::isfinite(bar.volume)) fail("volume must be >= 0");
             if (!(bar.shares_outstanding > 0.0) || !std::isfinite(bar.shares_outstanding))
               fail("shares_outstanding must be > 0");
             if (!std::isfinite(bar.bid) || !std::isfinite(bar.ask)) fail("non-finite quote");
             if (bar.ask < bar.bid) fail("ask < bid");
             bars.push_back(bar);
             lines.push_back(line);
           });
  sort_and_check_dates(bars, lines, path);
  return bars;
}

std::vector<IndexBar> load_index_csv(const std::filesystem::path& path) {
  std::vector<IndexBar> bars;
  std::vector<std::size_t> lines;
  read_csv(path, "date,dji_return,spx_return", 3,
           [&](const std::vector<std::string_view>& f, std::size_t line) {
             IndexBar bar{parse_date(f[0]), parse_double(f[1]), parse_double(f[2])};
             if (!std::isfinite(bar.dji_return) || !std::isfinite(bar.spx_return)) {
               throw DataError(fmt::format("{}: line {}: non-finite index return", path.string(), line));
             }
             bars.push_back(bar);
             lines.push_back(line);
           });
  sort_and_check_dates(bars, lines, path);
  return bars;
}

std::vector<FeatureRow> compute_predictors(const std::vector<StockBar>& bars,
                                           const std::vector<IndexBar>& index) {
  if (bars.size() < 2) throw DataError("compute_predictors needs at least 2 bars");
  std::map<Date, const IndexBar*> by_date;
  for (const auto& bar : index) by_date.emplace(bar.date, &bar);

  std::vector<FeatureRow> rows;
  rows.reserve(bars.size() - 1);
  for (std::size_t t = 1; t < bars.size(); ++t) {
    const auto& prev = bars[t - 1];
    const auto& cur = bars[t];
    if (!(prev.date < cur.date)) {
      throw DataError(fmt::format("bars not strictly increasing at {}", to_string(cur.date)));
    }
    auto it = by_date.find(cur.date);
    if (it == by_date.end()) {
      throw DataError(fmt::format("index series has no entry for {}", to_string(cur.date)));
    }
    FeatureRow row;
    row.date = cur.date;
    row.ret = (cur.close_price - prev.close_price) / prev.close_price;
    row.volume_change = prev.volume == 0.0 ? 0.0 : (cur.volume - prev.volume) / prev.volume;
    row.bid_ask_spread = (cur.ask - cur.bid) / cur.close_price;
    row.illiquidity = cur.volume == 0.0 ? 0.0 : row.ret / (cur.volume * cur.close_price);
    row.turn_over = cur.volume / cur.shares_outstanding;
    row.dji_return = it->second->dji_return;
    row.spx_return = it->second->spx_return;
    rows.push_back(row);
  }
  return rows;
}

StockDataset split_by_year(std::vector<FeatureRow> rows, int test_year, std::string ticker) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i - 1].date < rows[i].date)) {
      throw DataError(fmt::format("rows not strictly increasing at {}", to_string(rows[i].date)));
    }
  }
  StockDataset ds;
  ds.ticker = std::move(ticker);
  ds.rows = std::move(rows);
  const std::size_t n = ds.rows.size();
  ds.target.assign(n, std::nullopt);
  for (std::size_t i = 0; i + 1 < n; ++i) ds.target[i] = ds.rows[i + 1].ret;

  // Row i belongs to the split containing the date of the return it predicts.
  auto year_of_target = [&](std::size_t i) { return ds.rows[i + 1].date.year; };
  const std::size_t with_target = n == 0 ? 0 : n - 1;
  std::size_t i = 0;
  while (i < with_target && year_of_target(i) < test_year - 1) ++i;
  ds.train = {0, i};
  while (i < with_target && year_of_target(i) == test_year - 1) ++i;
  ds.valid = {ds.train.end, i};
  while (i < with_target && year_of_target(i) == test_year) ++i;
  ds.test = {ds.valid.end, i};

  if (ds.train.empty()) throw DataError("train split empty");
  if (ds.valid.empty()) throw DataError("valid split empty");
  if (ds.test.empty()) throw DataError("test split empty");
  return ds;
}

StockDataset normalize(const StockDataset& dataset) {
  if (dataset.train.empty()) throw DataError("train split empty");
  if (dataset.normalizer) throw DataError("dataset is already normalized");
  Normalizer norm;
  norm.min.fill(std::numeric_limits<double>::infinity());
  norm.max.fill(-std::numeric_limits<double>::infinity());
  for (std::size_t i = dataset.train.begin; i < dataset.train.end; ++i) {
    const auto f = dataset.rows[i].features();
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
      norm.min[k] = std::min(norm.min[k], f[k]);
      norm.max[k] = std::max(norm.max[k], f[k]);
    }
  }
  for (std::size_t k = 0; k < kFeatureCount; ++k) norm.constant[k] = norm.min[k] == norm.max[k];

  StockDataset out = dataset;
  for (auto& row : out.rows) {
    auto f = row.features();
    for (std::size_t k = 0; k < kFeatureCount; ++k) f[k] = norm.apply(k, f[k]);
    row.set_features(f);
  }
  out.normalizer = norm;
  return out;
}

StockDataset denormalize(const StockDataset& dataset) {
  if (!dataset.normalizer) throw DataError("dataset is not normalized");
  StockDataset out = dataset;
  for (auto& row : out.rows) {
    auto f = row.features();
    for (std::size_t k = 0; k < kFeatureCount; ++k) f[k] = dataset.normalizer->invert(k, f[k]);
    row.set_features(f);
  }
  out.normalizer.reset();
  return out;
}

}  // namespace evotrade
