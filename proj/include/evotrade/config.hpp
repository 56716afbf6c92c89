#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "evotrade/cell.hpp"
#include "evotrade/evolution.hpp"
#include "evotrade/trading.hpp"
#include "evotrade/training.hpp"

namespace evotrade {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class StrategyKind { long_only, long_short, sweep };

std::string to_string(StrategyKind kind);
StrategyKind parse_strategy_kind(std::string_view text);

struct StrategyConfig {
  StrategyKind kind = StrategyKind::long_only;
  CostModel cost = CostModel::half_spread;
  double capital = 1e6;
  int n_long = 5;
  int n_short = 5;
  int max_long = 15;
  int max_short = 15;
};

struct BaselineConfig {
  std::vector<CellKind> cells = {CellKind::lstm, CellKind::gru, CellKind::mgu};
  TrainConfig training;  // epochs 1000, learning rate 1e-4 unless overridden
  int repeats = 10;

  BaselineConfig() {
    training.epochs = 1000;
    training.learning_rate = 1e-4;
  }
};

struct ExperimentConfig {
  std::filesystem::path data_dir;
  std::filesystem::path index_file;  // DJI/S&P returns, resolved against data_dir
  std::vector<std::string> tickers;  // each reads <data_dir>/<ticker>.csv
  int test_year = 2022;

  EvoConfig evolution;
  TrainConfig training;
  int repeats = 10;

  BaselineConfig baseline;
  StrategyConfig strategy;

  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;
  int workers = 1;

  std::filesystem::path stock_file(const std::string& ticker) const;
  /// Throws ConfigError on out-of-range values or missing input files.
  void check() const;
};

/// INI text: [section] headers and key = value lines. Relative paths resolve against base_dir.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Stable text form of every setting, used for hashing.
std::string canonical_config(const ExperimentConfig& config);
std::uint64_t config_hash(const ExperimentConfig& config);

}  // namespace evotrade
