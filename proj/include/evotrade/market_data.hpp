#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "evotrade/date.hpp"

namespace evotrade {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StockBar {
  Date date;
  double close_price = 0.0;
  double bid = 0.0;
  double ask = 0.0;
  double volume = 0.0;
  double shares_outstanding = 0.0;
};

struct IndexBar {
  Date date;
  double dji_return = 0.0;
  double spx_return = 0.0;
};

inline constexpr std::size_t kFeatureCount = 7;
using FeatureVector = std::array<double, kFeatureCount>;

/// Column order used everywhere a FeatureRow is flattened.
inline constexpr std::array<const char*, kFeatureCount> kFeatureNames = {
    "return", "volume_change", "bid_ask_spread", "illiquidity", "turn_over", "dji_return", "spx_return"};

struct FeatureRow {
  Date date;
  double ret = 0.0;
  double volume_change = 0.0;
  double bid_ask_spread = 0.0;
  double illiquidity = 0.0;
  double turn_over = 0.0;
  double dji_return = 0.0;
  double spx_return = 0.0;

  FeatureVector features() const;
  void set_features(const FeatureVector& values);
};

/// Per-feature min-max map fitted on the training rows. Constant features map to 0.5.
struct Normalizer {
  FeatureVector min{};
  FeatureVector max{};
  std::array<bool, kFeatureCount> constant{};

  double apply(std::size_t feature, double value) const;
  double invert(std::size_t feature, double value) const;
};

/// Half-open range of row indices.
struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
};

enum class Split { train, valid, test };

/// One split as a model sees it: inputs[i] predicts targets[i], which is the return on target_dates[i].
struct SeriesSplit {
  std::vector<FeatureVector> inputs;
  std::vector<double> targets;
  std::vector<Date> target_dates;
  std::size_t size() const { return targets.size(); }
};

struct StockDataset {
  std::string ticker;
  std::vector<FeatureRow> rows;
  /// target[t] = raw return of rows[t + 1]; the final row has none.
  std::vector<std::optional<double>> target;
  RowRange train;
  RowRange valid;
  RowRange test;
  std::optional<Normalizer> normalizer;

  RowRange range(Split which) const;
  SeriesSplit split(Split which) const;
};

std::vector<StockBar> load_stock_csv(const std::filesystem::path& path);
std::vector<IndexBar> load_index_csv(const std::filesystem::path& path);

/// Table-1 predictors. n bars yield n - 1 rows; the first bar only seeds the differences.
std::vector<FeatureRow> compute_predictors(const std::vector<StockBar>& bars,
                                           const std::vector<IndexBar>& index);

/// Assigns each row to a split by the calendar year of the return it predicts:
/// test predicts test_year, valid predicts test_year - 1, train everything earlier.
StockDataset split_by_year(std::vector<FeatureRow> rows, int test_year, std::string ticker = {});

StockDataset normalize(const StockDataset& dataset);
StockDataset denormalize(const StockDataset& dataset);

}  // namespace evotrade
