#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evotrade/config.hpp"
#include "evotrade/market_data.hpp"
#include "evotrade/sweep.hpp"
#include "evotrade/trading.hpp"

namespace evotrade {

struct TickerRun {
  std::string ticker;
  std::vector<std::uint64_t> seeds;
  std::vector<double> validation_mse;  // one per finished repeat
  int chosen = -1;
  std::string genome_path;  // relative to the output directory
  std::string error;        // set when the ticker failed

  bool ok() const { return error.empty(); }
};

struct RunManifest {
  std::string kind;  // "evolve" or "baseline_<cell>"
  std::uint64_t config_hash = 0;
  std::uint64_t master_seed = 0;
  std::vector<TickerRun> runs;
};

std::string serialize_manifest(const RunManifest& manifest);
RunManifest parse_manifest(std::string_view text);
RunManifest load_manifest(const std::filesystem::path& path);

/// Independent stream per (master seed, ticker, repeat).
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view ticker, int repeat);

/// Prices + index -> predictors -> year split -> normalization.
StockDataset load_dataset(const ExperimentConfig& config, const std::string& ticker);

std::filesystem::path manifest_path(const ExperimentConfig& config, std::string_view kind);
std::filesystem::path panel_path(const ExperimentConfig& config, std::string_view kind);

/// Progress lines go to `log` when given.
RunManifest cmd_evolve(const ExperimentConfig& config, std::ostream* log = nullptr);
RunManifest cmd_baseline(const ExperimentConfig& config, CellKind cell, std::ostream* log = nullptr);

/// Writes the test-split prediction panel for the manifest's chosen genomes and returns its path.
std::filesystem::path cmd_predict(const ExperimentConfig& config, const std::filesystem::path& manifest_file,
                                  std::ostream* log = nullptr);

struct BacktestOutput {
  std::optional<ReturnReport> strategy;  // empty for a sweep
  ReturnReport buy_and_hold;
  std::optional<ReturnGrid> grid;
  std::vector<std::filesystem::path> files;
};

BacktestOutput cmd_backtest(const ExperimentConfig& config, const std::filesystem::path& panel_file);

/// Collects manifests and reports in the output directory into summary.txt.
std::filesystem::path cmd_report(const ExperimentConfig& config);

}  // namespace evotrade
