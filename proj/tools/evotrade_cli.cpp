#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "evotrade/config.hpp"
#include "evotrade/experiment.hpp"
#include "evotrade/numeric_io.hpp"

using namespace evotrade;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment config (INI)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "master RNG seed, overrides [run] seed");
  cmd->add_option("--workers", c.workers, "evaluation threads, overrides [run] workers")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "output directory, overrides [output] dir");
}

ExperimentConfig resolve(const Common& c) {
  auto config = load_config(c.config);
  if (c.seed) config.seed = *c.seed;
  if (c.workers) config.workers = *c.workers;
  if (c.out) config.output_dir = *c.out;
  return config;
}

void print_report(const ReturnReport& r) {
  std::cout << r.strategy << " (" << to_string(r.cost) << "): return " << format_double(r.overall_return)
            << ", final cash " << format_double(r.final_cash) << ", trades " << r.trade_count() << '\n';
}

void print_manifest(const RunManifest& m) {
  for (const auto& r : m.runs) {
    if (r.ok()) {
      std::cout << r.ticker << ": chose repeat " << r.chosen << ", validation mse "
                << format_double(r.validation_mse[static_cast<std::size_t>(r.chosen)]) << '\n';
    } else {
      std::cout << r.ticker << ": FAILED " << r.error << '\n';
    }
  }
}

int failed_tickers(const RunManifest& m) {
  int n = 0;
  for (const auto& r : m.runs) n += r.ok() ? 0 : 1;
  return n;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolved recurrent forecasters and portfolio backtests"};
  app.require_subcommand(1);

  Common evolve_opts, baseline_opts, predict_opts, backtest_opts, sweep_opts, report_opts;
  std::string cell;
  std::optional<std::string> manifest;
  std::optional<std::string> panel;
  std::optional<std::string> backtest_panel;

  auto* evolve_cmd = app.add_subcommand("evolve", "evolve forecasters for every ticker");
  add_common(evolve_cmd, evolve_opts);

  auto* baseline_cmd = app.add_subcommand("baseline", "train two-layer LSTM/GRU/MGU baselines");
  add_common(baseline_cmd, baseline_opts);
  baseline_cmd->add_option("--cell", cell, "LSTM, GRU or MGU (default: every cell in [baseline] cells)");

  auto* predict_cmd = app.add_subcommand("predict", "write test-split predictions for a manifest");
  add_common(predict_cmd, predict_opts);
  predict_cmd->add_option("--manifest", manifest, "manifest file (default: <out>/manifest_evolve.txt)");

  auto* backtest_cmd = app.add_subcommand("backtest", "run the configured strategy on a prediction panel");
  add_common(backtest_cmd, backtest_opts);
  backtest_cmd->add_option("--panel", backtest_panel, "panel CSV (default: <out>/predictions_evolve.csv)");

  auto* sweep_cmd = app.add_subcommand("sweep", "long/short count grid on a prediction panel");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--panel", panel, "panel CSV (default: <out>/predictions_evolve.csv)");

  auto* report_cmd = app.add_subcommand("report", "summarize manifests and reports in the output directory");
  add_common(report_cmd, report_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*evolve_cmd) {
      auto m = cmd_evolve(resolve(evolve_opts), &std::cerr);
      print_manifest(m);
      return failed_tickers(m) == static_cast<int>(m.runs.size()) ? 1 : 0;
    }
    if (*baseline_cmd) {
      auto config = resolve(baseline_opts);
      auto cells = config.baseline.cells;
      if (!cell.empty()) cells = {parse_cell_kind(cell)};
      int failed = 0;
      std::size_t total = 0;
      for (auto c : cells) {
        auto m = cmd_baseline(config, c, &std::cerr);
        print_manifest(m);
        failed += failed_tickers(m);
        total += m.runs.size();
      }
      return failed == static_cast<int>(total) ? 1 : 0;
    }
    if (*predict_cmd) {
      auto config = resolve(predict_opts);
      auto path = cmd_predict(config, manifest ? std::filesystem::path(*manifest) : manifest_path(config, "evolve"),
                              &std::cerr);
      std::cout << path.string() << '\n';
      return 0;
    }
    if (*backtest_cmd || *sweep_cmd) {
      const bool sweep = sweep_cmd->parsed();
      auto config = resolve(sweep ? sweep_opts : backtest_opts);
      if (sweep) config.strategy.kind = StrategyKind::sweep;
      const auto& chosen = sweep ? panel : backtest_panel;
      auto out = cmd_backtest(config, chosen ? std::filesystem::path(*chosen) : panel_path(config, "evolve"));
      if (out.strategy) print_report(*out.strategy);
      print_report(out.buy_and_hold);
      for (const auto& f : out.files) std::cout << f.string() << '\n';
      return 0;
    }
    if (*report_cmd) {
      std::cout << cmd_report(resolve(report_opts)).string() << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "evotrade: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
