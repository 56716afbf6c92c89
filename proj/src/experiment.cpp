#include "evotrade/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "evotrade/evolution.hpp"
#include "evotrade/file_io.hpp"
#include "evotrade/genome_io.hpp"
#include "evotrade/layered.hpp"
#include "evotrade/network.hpp"
#include "evotrade/numeric_io.hpp"
#include "evotrade/training.hpp"

namespace evotrade {

namespace {

constexpr std::string_view kManifestMagic = "evotrade-manifest v1";

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& format) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + format(items[i]);
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void say(std::ostream* log, const std::string& line) {
  if (log) *log << line << '\n' << std::flush;
}

int argmin(const std::vector<double>& values) {
  int best = -1;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isnan(values[i])) continue;
    if (best < 0 || values[i] < values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

/// Runs `repeat(seed, k)` for every repeat of every ticker, isolating failures per ticker.
template <typename Repeat>
RunManifest run_all(const ExperimentConfig& config, std::string kind, int repeats, std::ostream* log,
                    Repeat&& repeat) {
  RunManifest m;
  m.kind = std::move(kind);
  m.config_hash = config_hash(config);
  m.master_seed = config.seed;
  for (const auto& ticker : config.tickers) {
    TickerRun run;
    run.ticker = ticker;
    try {
      const auto dataset = load_dataset(config, ticker);
      for (int k = 0; k < repeats; ++k) {
        const auto seed = derive_seed(config.seed, ticker, k);
        run.seeds.push_back(seed);
        Genome best = repeat(dataset, seed, k);
        const auto rel = std::filesystem::path("genomes") / ticker / fmt::format("{}_r{}.genome", m.kind, k);
        save_genome(config.output_dir / rel, best);
        run.validation_mse.push_back(*best.fitness);
        say(log, fmt::format("{} {} repeat {}: validation mse {}", m.kind, ticker, k, format_double(*best.fitness)));
      }
      run.chosen = argmin(run.validation_mse);
      if (run.chosen < 0) throw NumericError("every repeat produced a non-finite validation mse");
      run.genome_path = (std::filesystem::path("genomes") / ticker / fmt::format("{}_r{}.genome", m.kind, run.chosen))
                            .generic_string();
    } catch (const std::exception& e) {
      run.error = e.what();
      run.chosen = -1;
      run.genome_path.clear();
      say(log, fmt::format("{} {} failed: {}", m.kind, ticker, e.what()));
    }
    m.runs.push_back(std::move(run));
  }
  write_file_atomic(manifest_path(config, m.kind), serialize_manifest(m));
  return m;
}

std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  std::replace(text.begin(), text.end(), '\r', ' ');
  return text;
}

}  // namespace

std::string serialize_manifest(const RunManifest& m) {
  std::string out(kManifestMagic);
  out += '\n';
  out += fmt::format("kind {}\nconfig_hash {:016x}\nmaster_seed {}\n", m.kind, m.config_hash, m.master_seed);
  for (const auto& r : m.runs) {
    out += fmt::format("ticker {}\n", r.ticker);
    out += fmt::format("seeds {}\n", join(r.seeds, [](std::uint64_t s) { return std::to_string(s); }));
    out += fmt::format("mse {}\n", join(r.validation_mse, [](double v) { return format_double(v); }));
    if (r.ok()) {
      out += fmt::format("chosen {}\ngenome {}\n", r.chosen, r.genome_path);
    } else {
      out += fmt::format("error {}\n", one_line(r.error));
    }
    out += "end\n";
  }
  return out;
}

RunManifest parse_manifest(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  auto fail = [&n](const std::string& why) { return DataError(fmt::format("manifest line {}: {}", n, why)); };
  if (!std::getline(in, line) || line != kManifestMagic) {
    n = 1;
    throw fail("not a manifest");
  }
  n = 1;
  RunManifest m;
  std::optional<TickerRun> open;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto space = line.find(' ');
    const std::string key = line.substr(0, space);
    const std::string value = space == std::string::npos ? "" : line.substr(space + 1);
    auto list = [&value]() {
      std::vector<std::string> items;
      std::istringstream fields(value);
      for (std::string item; std::getline(fields, item, ',');) items.push_back(item);
      return items;
    };
    try {
      if (key == "kind") m.kind = value;
      else if (key == "config_hash") m.config_hash = std::stoull(value, nullptr, 16);
      else if (key == "master_seed") m.master_seed = std::stoull(value);
      else if (key == "ticker") {
        if (open) throw fail("ticker before end");
        open.emplace();
        open->ticker = value;
      } else if (!open) {
        throw fail(fmt::format("'{}' outside a ticker block", key));
      } else if (key == "seeds") {
        for (const auto& s : list()) open->seeds.push_back(std::stoull(s));
      } else if (key == "mse") {
        for (const auto& s : list()) open->validation_mse.push_back(parse_double(s));
      } else if (key == "chosen") open->chosen = std::stoi(value);
      else if (key == "genome") open->genome_path = value;
      else if (key == "error") open->error = value.empty() ? "unknown error" : value;
      else if (key == "end") {
        m.runs.push_back(std::move(*open));
        open.reset();
      } else {
        throw fail(fmt::format("unknown record '{}'", key));
      }
    } catch (const DataError&) {
      throw;
    } catch (const std::exception& e) {
      throw fail(e.what());
    }
  }
  if (open) throw fail("truncated ticker block");
  return m;
}

RunManifest load_manifest(const std::filesystem::path& path) {
  try {
    return parse_manifest(read_file(path));
  } catch (const std::exception& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view ticker, int repeat) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : ticker) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return splitmix64(splitmix64(splitmix64(master_seed) ^ h) ^ static_cast<std::uint64_t>(repeat));
}

StockDataset load_dataset(const ExperimentConfig& config, const std::string& ticker) {
  const auto bars = load_stock_csv(config.stock_file(ticker));
  const auto index = load_index_csv(config.index_file);
  return normalize(split_by_year(compute_predictors(bars, index), config.test_year, ticker));
}

std::filesystem::path manifest_path(const ExperimentConfig& config, std::string_view kind) {
  return config.output_dir / fmt::format("manifest_{}.txt", kind);
}

std::filesystem::path panel_path(const ExperimentConfig& config, std::string_view kind) {
  return config.output_dir / fmt::format("predictions_{}.csv", kind);
}

RunManifest cmd_evolve(const ExperimentConfig& config, std::ostream* log) {
  config.check();
  return run_all(config, "evolve", config.repeats, log, [&](const StockDataset& ds, std::uint64_t seed, int k) {
    auto result = evolve(ds, config.evolution, config.training, config.workers, seed);
    write_file_atomic(config.output_dir / "logs" / fmt::format("{}_evolve_r{}.csv", ds.ticker, k),
                      format_evolution_log(result.log));
    return std::move(result.best);
  });
}

RunManifest cmd_baseline(const ExperimentConfig& config, CellKind cell, std::ostream* log) {
  if (cell == CellKind::simple) throw ConfigError("baseline cell must be LSTM, GRU or MGU");
  config.check();
  const std::string kind = fmt::format("baseline_{}", to_string(cell));
  return run_all(config, kind, config.baseline.repeats, log, [&](const StockDataset& ds, std::uint64_t seed, int) {
    std::mt19937_64 rng(seed);
    auto trained = bptt_train(build_layered(cell, rng), ds.split(Split::train), config.baseline.training);
    evaluate_validation(trained.genome, ds.split(Split::valid));
    return std::move(trained.genome);
  });
}

std::filesystem::path cmd_predict(const ExperimentConfig& config, const std::filesystem::path& manifest_file,
                                  std::ostream* log) {
  const auto manifest = load_manifest(manifest_file);
  PredictionPanel panel;
  std::vector<std::pair<std::string, SeriesSplit>> columns;
  std::vector<std::vector<double>> predictions;
  for (const auto& run : manifest.runs) {
    if (!run.ok()) {
      say(log, fmt::format("skipping {}: {}", run.ticker, run.error));
      continue;
    }
    const auto file = config.output_dir / run.genome_path;
    if (!std::filesystem::exists(file)) {
      throw DataError(fmt::format("{}: genome file '{}' not found", run.ticker, file.string()));
    }
    const auto genome = load_genome(file);
    auto test = load_dataset(config, run.ticker).split(Split::test);
    predictions.push_back(forward_pass(genome, test.inputs));
    columns.emplace_back(run.ticker, std::move(test));
  }
  if (columns.empty()) throw DataError("manifest has no usable genomes");

  std::vector<std::size_t> order(columns.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return columns[a].first < columns[b].first; });
  panel.days = columns[order[0]].second.target_dates;
  for (auto i : order) {
    if (columns[i].second.target_dates != panel.days) {
      throw DataError(fmt::format("{}: test days differ from {}", columns[i].first, columns[order[0]].first));
    }
    panel.tickers.push_back(columns[i].first);
  }
  for (std::size_t d = 0; d < panel.days.size(); ++d) {
    auto& p = panel.predicted.emplace_back();
    auto& a = panel.actual.emplace_back();
    for (auto i : order) {
      p.push_back(predictions[i][d]);
      a.push_back(columns[i].second.targets[d]);
    }
  }
  panel.check();
  const auto out = panel_path(config, manifest.kind);
  write_file_atomic(out, format_panel_csv(panel));
  return out;
}

BacktestOutput cmd_backtest(const ExperimentConfig& config, const std::filesystem::path& panel_file) {
  const auto panel = parse_panel_csv(read_file(panel_file));
  PriceBook book;
  for (const auto& t : panel.tickers) book.add_bars(t, load_stock_csv(config.stock_file(t)));
  const auto missing = panel.missing_quotes(book);
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size(); ++i) {
      list += fmt::format("{}{} {}", i ? ", " : "", missing[i].first, to_string(missing[i].second));
    }
    throw DataError(fmt::format("panel and prices are misaligned; missing quotes: {}", list));
  }

  const auto& s = config.strategy;
  BacktestOutput out;
  auto write = [&](const std::string& name, const std::string& content) {
    auto path = config.output_dir / name;
    write_file_atomic(path, content);
    out.files.push_back(path);
  };
  switch (s.kind) {
    case StrategyKind::long_only:
      out.strategy = long_only_backtest(panel, book, s.cost, s.capital);
      break;
    case StrategyKind::long_short:
      out.strategy = long_short_backtest(panel, book, s.cost, s.capital, s.n_long, s.n_short);
      break;
    case StrategyKind::sweep:
      out.grid = sweep_grid(panel, book, s.cost, s.capital, s.max_long, s.max_short);
      break;
  }
  if (out.strategy) write(fmt::format("report_{}.txt", out.strategy->strategy), format_report(*out.strategy));
  if (out.grid) write("grid.csv", format_grid_csv(*out.grid));
  out.buy_and_hold = buy_and_hold(book, panel.tickers, panel.days, s.capital, s.cost);
  write("report_buy_and_hold.txt", format_report(out.buy_and_hold));
  return out;
}

std::filesystem::path cmd_report(const ExperimentConfig& config) {
  std::vector<std::filesystem::path> manifests;
  std::vector<std::filesystem::path> reports;
  if (std::filesystem::is_directory(config.output_dir)) {
    for (const auto& entry : std::filesystem::directory_iterator(config.output_dir)) {
      const auto name = entry.path().filename().string();
      if (name.rfind("manifest_", 0) == 0 && entry.path().extension() == ".txt") manifests.push_back(entry.path());
      if (name.rfind("report_", 0) == 0 && entry.path().extension() == ".txt") reports.push_back(entry.path());
    }
  }
  if (manifests.empty() && reports.empty()) {
    throw DataError(fmt::format("nothing to report in '{}'", config.output_dir.string()));
  }
  std::sort(manifests.begin(), manifests.end());
  std::sort(reports.begin(), reports.end());

  std::string out = "model,ticker,chosen_repeat,validation_mse,status\n";
  for (const auto& path : manifests) {
    const auto m = load_manifest(path);
    for (const auto& r : m.runs) {
      if (r.ok()) {
        out += fmt::format("{},{},{},{},ok\n", m.kind, r.ticker, r.chosen,
                           format_double(r.validation_mse[static_cast<std::size_t>(r.chosen)]));
      } else {
        out += fmt::format("{},{},,,failed\n", m.kind, r.ticker);
      }
    }
  }
  out += "\nstrategy,cost,initial_capital,final_cash,return,trade_count\n";
  for (const auto& path : reports) {
    std::istringstream in(read_file(path));
    std::map<std::string, std::string> kv;
    for (std::string line; std::getline(in, line) && line != "date,equity";) {
      const auto eq = line.find('=');
      if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    out += fmt::format("{},{},{},{},{},{}\n", kv["strategy"], kv["cost"], kv["initial_capital"], kv["final_cash"],
                       kv["return"], kv["trade_count"]);
  }
  const auto grid = config.output_dir / "grid.csv";
  if (std::filesystem::exists(grid)) out += "\nlong/short grid\n" + read_file(grid);
  const auto path = config.output_dir / "summary.txt";
  write_file_atomic(path, out);
  return path;
}

}  // namespace evotrade
