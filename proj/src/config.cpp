#include "evotrade/config.hpp"

#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "evotrade/file_io.hpp"
#include "evotrade/numeric_io.hpp"

namespace evotrade {

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::long_only: return "long_only";
    case StrategyKind::long_short: return "long_short";
    case StrategyKind::sweep: return "sweep";
  }
  return "?";
}

StrategyKind parse_strategy_kind(std::string_view text) {
  if (text == "long_only") return StrategyKind::long_only;
  if (text == "long_short") return StrategyKind::long_short;
  if (text == "sweep") return StrategyKind::sweep;
  throw std::invalid_argument(fmt::format("unknown strategy '{}'", text));
}

std::filesystem::path ExperimentConfig::stock_file(const std::string& ticker) const {
  return data_dir / (ticker + ".csv");
}

void ExperimentConfig::check() const {
  try {
    evolution.check();
    training.check();
    baseline.training.check();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (tickers.empty()) throw ConfigError("data.tickers is empty");
  if (repeats < 1) throw ConfigError("evolution.repeats must be at least 1");
  if (baseline.repeats < 1) throw ConfigError("baseline.repeats must be at least 1");
  if (workers < 1) throw ConfigError("run.workers must be at least 1");
  if (!(strategy.capital > 0.0)) throw ConfigError("strategy.capital must be positive");
  if (strategy.n_long < 1 || strategy.n_short < 1) throw ConfigError("strategy.n_long and n_short must be at least 1");
  if (strategy.max_long < 1 || strategy.max_short < 1) throw ConfigError("strategy.max_long and max_short must be at least 1");
  for (auto c : baseline.cells) {
    if (c == CellKind::simple) throw ConfigError("baseline.cells accepts LSTM, GRU and MGU only");
  }
  if (!std::filesystem::exists(index_file)) throw ConfigError(fmt::format("index file '{}' not found", index_file.string()));
  for (const auto& t : tickers) {
    if (!std::filesystem::exists(stock_file(t))) {
      throw ConfigError(fmt::format("price file for {} not found at '{}'", t, stock_file(t).string()));
    }
  }
}

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"data", {"dir", "index", "tickers", "test_year"}},
      {"evolution",
       {"islands", "capacity", "evaluations", "repeats", "mutation_rate", "inter_island_fraction",
        "repopulation_period", "time_skip_max", "new_weight_range", "cells", "mutation_weights"}},
      {"training", {"epochs", "learning_rate", "clip_low", "clip_high"}},
      {"baseline", {"cells", "epochs", "learning_rate", "repeats"}},
      {"strategy", {"kind", "cost", "capital", "n_long", "n_short", "max_long", "max_short"}},
      {"output", {"dir"}},
      {"run", {"seed", "workers"}},
  };
  return keys;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  template <typename T, typename Parse>
  void get(const std::string& key, T& out, Parse&& parse) const {
    auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!v) return;
    try {
      out = parse(*v);
    } catch (const std::exception& e) {
      throw ConfigError(fmt::format("{}: {}", key, e.what()));
    }
  }

  void number(const std::string& key, double& out) const {
    get(key, out, [](const std::string& s) { return parse_double(s); });
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) const {
    get(key, out, [](const std::string& s) {
      std::size_t used = 0;
      const long long v = std::stoll(s, &used);
      if (used != s.size()) throw std::invalid_argument(fmt::format("'{}' is not an integer", s));
      return static_cast<Int>(v);
    });
  }

 private:
  const pt::ptree& tree_;
};

std::vector<CellKind> parse_cells(const std::string& text) {
  std::vector<CellKind> cells;
  for (const auto& name : split_list(text)) cells.push_back(parse_cell_kind(name));
  if (cells.empty()) throw std::invalid_argument("empty cell list");
  return cells;
}

std::string join_cells(const std::vector<CellKind>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + std::string(to_string(cells[i]));
  return out;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("line {}: {}", e.line(), e.message()));
  }
  for (auto& [section, body] : tree) {
    // Trailing "; comment" or "# comment" after a value.
    for (auto& [key, leaf] : body) {
      auto value = leaf.get_value<std::string>();
      const auto cut = value.find_first_of(";#");
      if (cut == std::string::npos) continue;
      value.erase(cut);
      value.erase(value.find_last_not_of(" \t") + 1);
      leaf.put_value(value);
    }
    auto it = known_keys().find(section);
    if (it == known_keys().end()) throw ConfigError(fmt::format("unknown section [{}]", section));
    for (const auto& [key, _] : body) {
      if (!it->second.count(key)) throw ConfigError(fmt::format("unknown key {}.{}", section, key));
    }
  }

  ExperimentConfig c;
  c.data_dir = base_dir;
  Reader r(tree);
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  r.get("data.dir", c.data_dir, resolve);
  std::string index_name = "index.csv";
  r.get("data.index", index_name, [](const std::string& s) { return s; });
  c.index_file = std::filesystem::path(index_name).is_absolute() ? std::filesystem::path(index_name)
                                                                   : c.data_dir / index_name;
  r.get("data.tickers", c.tickers, split_list);
  r.integer("data.test_year", c.test_year);

  r.integer("evolution.islands", c.evolution.n_islands);
  r.integer("evolution.capacity", c.evolution.capacity);
  r.integer("evolution.evaluations", c.evolution.total_evaluations);
  r.integer("evolution.repeats", c.repeats);
  r.number("evolution.mutation_rate", c.evolution.mutation_rate);
  c.evolution.crossover_rate = 1.0 - c.evolution.mutation_rate;
  r.number("evolution.inter_island_fraction", c.evolution.inter_island_fraction);
  r.integer("evolution.repopulation_period", c.evolution.repopulation_period);
  r.integer("evolution.time_skip_max", c.evolution.time_skip_max);
  r.number("evolution.new_weight_range", c.evolution.new_weight_range);
  r.get("evolution.cells", c.evolution.hidden_cells, parse_cells);
  r.get("evolution.mutation_weights", c.evolution.mutation_weights, [](const std::string& s) {
    auto items = split_list(s);
    if (items.size() != kMutationKinds) {
      throw std::invalid_argument(fmt::format("expected {} weights, got {}", kMutationKinds, items.size()));
    }
    std::array<double, kMutationKinds> w{};
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = parse_double(items[i]);
    return w;
  });

  r.integer("training.epochs", c.training.epochs);
  r.number("training.learning_rate", c.training.learning_rate);
  r.number("training.clip_low", c.training.clip_low);
  r.number("training.clip_high", c.training.clip_high);

  r.get("baseline.cells", c.baseline.cells, parse_cells);
  r.integer("baseline.epochs", c.baseline.training.epochs);
  r.number("baseline.learning_rate", c.baseline.training.learning_rate);
  r.integer("baseline.repeats", c.baseline.repeats);

  r.get("strategy.kind", c.strategy.kind, [](const std::string& s) { return parse_strategy_kind(s); });
  r.get("strategy.cost", c.strategy.cost, [](const std::string& s) { return parse_cost_model(s); });
  r.number("strategy.capital", c.strategy.capital);
  r.integer("strategy.n_long", c.strategy.n_long);
  r.integer("strategy.n_short", c.strategy.n_short);
  r.integer("strategy.max_long", c.strategy.max_long);
  r.integer("strategy.max_short", c.strategy.max_short);

  r.get("output.dir", c.output_dir, resolve);
  if (!tree.get_optional<std::string>(pt::ptree::path_type("output.dir", '.'))) c.output_dir = resolve("out");
  r.get("run.seed", c.seed, [](const std::string& s) {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size() || s.front() == '-') throw std::invalid_argument(fmt::format("'{}' is not a u64", s));
    return static_cast<std::uint64_t>(v);
  });
  r.integer("run.workers", c.workers);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  try {
    return parse_config(text, path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string canonical_config(const ExperimentConfig& c) {
  std::string out;
  auto line = [&out](std::string_view key, const std::string& value) { out += fmt::format("{}={}\n", key, value); };
  auto num = [](double v) { return format_double(v); };
  std::string tickers;
  for (std::size_t i = 0; i < c.tickers.size(); ++i) tickers += (i ? "," : "") + c.tickers[i];
  // Paths are hashed by file name only so a moved data directory keeps its hash.
  line("data.tickers", tickers);
  line("data.index", c.index_file.filename().string());
  line("data.test_year", std::to_string(c.test_year));
  line("evolution.islands", std::to_string(c.evolution.n_islands));
  line("evolution.capacity", std::to_string(c.evolution.capacity));
  line("evolution.evaluations", std::to_string(c.evolution.total_evaluations));
  line("evolution.repeats", std::to_string(c.repeats));
  line("evolution.mutation_rate", num(c.evolution.mutation_rate));
  line("evolution.inter_island_fraction", num(c.evolution.inter_island_fraction));
  line("evolution.repopulation_period", std::to_string(c.evolution.repopulation_period));
  line("evolution.time_skip_max", std::to_string(c.evolution.time_skip_max));
  line("evolution.new_weight_range", num(c.evolution.new_weight_range));
  line("evolution.cells", join_cells(c.evolution.hidden_cells));
  std::string weights;
  for (std::size_t i = 0; i < c.evolution.mutation_weights.size(); ++i) {
    weights += (i ? "," : "") + num(c.evolution.mutation_weights[i]);
  }
  line("evolution.mutation_weights", weights);
  line("training.epochs", std::to_string(c.training.epochs));
  line("training.learning_rate", num(c.training.learning_rate));
  line("training.clip_low", num(c.training.clip_low));
  line("training.clip_high", num(c.training.clip_high));
  line("baseline.cells", join_cells(c.baseline.cells));
  line("baseline.epochs", std::to_string(c.baseline.training.epochs));
  line("baseline.learning_rate", num(c.baseline.training.learning_rate));
  line("baseline.repeats", std::to_string(c.baseline.repeats));
  line("strategy.kind", to_string(c.strategy.kind));
  line("strategy.cost", to_string(c.strategy.cost));
  line("strategy.capital", num(c.strategy.capital));
  line("strategy.n_long", std::to_string(c.strategy.n_long));
  line("strategy.n_short", std::to_string(c.strategy.n_short));
  line("strategy.max_long", std::to_string(c.strategy.max_long));
  line("strategy.max_short", std::to_string(c.strategy.max_short));
  line("run.seed", std::to_string(c.seed));
  return out;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  // FNV-1a, 64 bit.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : canonical_config(config)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace evotrade
