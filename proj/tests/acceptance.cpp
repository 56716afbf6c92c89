// Runs every acceptance criterion at its stated tolerance and prints one line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "evotrade/evolution.hpp"
#include "evotrade/file_io.hpp"
#include "evotrade/layered.hpp"
#include "evotrade/network.hpp"
#include "evotrade/sweep.hpp"
#include "evotrade/training.hpp"
#include "ledger_fixtures.hpp"
#include "oracles.hpp"
#include "random_market.hpp"
#include "synthetic.hpp"
#include "synthetic_market.hpp"
#include "temp_dir.hpp"

using namespace evotrade;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome fail(std::string why) { return {false, std::move(why)}; }

// 1
Outcome ledger_oracles() {
  const auto fixtures = fixtures::ledger_fixtures();
  for (const auto& f : fixtures) {
    auto diff = fixtures::compare(f, fixtures::run(f));
    if (!diff.empty()) return fail(diff);
  }
  return {true, fmt::format("{} fixtures match", fixtures.size())};
}

// 2
Outcome gradients() {
  std::mt19937_64 rng(2);
  const std::vector<CellKind> cells = {CellKind::simple, CellKind::lstm, CellKind::gru, CellKind::mgu};
  std::size_t checked = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    // 8 fixed nodes plus 3..12 hidden keeps every genome at 20 nodes or fewer.
    auto g = oracle::random_genome(rng, 3 + trial, cells);
    auto xs = oracle::random_series(rng, 50);
    std::vector<double> ys(xs.size());
    for (auto& y : ys) y = std::normal_distribution<double>(0, 0.5)(rng);
    std::vector<double> analytic;
    CompiledNetwork(g).loss_and_gradient(xs, ys, analytic);
    auto numeric = oracle::finite_difference_gradient(g, xs, ys, 1e-5);
    if (analytic.size() != numeric.size()) return fail("gradient length mismatch");
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      if (!oracle::gradient_close(analytic[i], numeric[i])) {
        return fail(fmt::format("genome {} weight {}: analytic {} numeric {}", trial, i, analytic[i], numeric[i]));
      }
      const double mag = std::max(std::abs(analytic[i]), std::abs(numeric[i]));
      if (mag >= 1e-3) worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / mag);
      ++checked;
    }
  }
  return {true, fmt::format("{} weights, worst relative error {:.2e}", checked, worst)};
}

// 3
Outcome mutation_soundness() {
  EvoConfig cfg;
  Population pop(cfg, 3);
  std::vector<Genome> pool = {seed_genome(pop)};
  std::mt19937_64 rng(33);
  std::uniform_int_distribution<std::size_t> kind(0, kMutationKinds - 1);
  auto same_behavior = [&](const Genome& a, const Genome& b) {
    for (int s = 0; s < 5; ++s) {
      auto xs = oracle::random_series(rng, 30);
      auto pa = forward_pass(a, xs);
      auto pb = forward_pass(b, xs);
      for (std::size_t t = 0; t < pa.size(); ++t)
        if (pa[t] != pb[t]) return false;
    }
    return true;
  };

  int violations = 0;
  int identity_checks = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto& parent = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(pop.rng)];
    const auto k = kAllMutations[kind(pop.rng)];
    auto child = mutate(parent, k, pop);
    if (auto why = check_invariants(child)) {
      ++violations;
      std::cerr << "mutation " << to_string(k) << ": " << *why << '\n';
      continue;
    }
    if (child.origin == "clone") {
      ++identity_checks;
      if (!same_behavior(parent, child)) return fail("clone child differs from its parent");
    }
    if (pool.size() < 300) pool.push_back(std::move(child));
    else pool[static_cast<std::size_t>(i) % pool.size()] = std::move(child);
  }
  for (auto& g : pool) g.fitness = std::uniform_real_distribution<double>(0, 1)(rng);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (int i = 0; i < 2000; ++i) {
    const auto& a = pool[pick(rng)];
    const bool self = i % 10 == 0;
    const auto& b = self ? a : pool[pick(rng)];
    auto child = crossover(a, b, pop);
    if (auto why = check_invariants(child)) {
      ++violations;
      std::cerr << "crossover: " << *why << '\n';
      continue;
    }
    if (self) {
      ++identity_checks;
      if (!same_behavior(a, child)) return fail("self-crossover child differs from its parent");
    }
  }
  if (violations) return fail(fmt::format("{} invariant violations", violations));
  return {true, fmt::format("0 violations, {} clone/self-crossover identity checks", identity_checks)};
}

// 4
Outcome evolution_progress() {
  const auto ds = synthetic::ar2_dataset();
  EvoConfig cfg;
  cfg.total_evaluations = 2000;
  auto r = evolve(ds, cfg, TrainConfig{}, 1, 42);
  double record = std::numeric_limits<double>::infinity();
  for (const auto& e : r.log) {
    if (e.global_best_fitness > record) return fail("global best increased");
    record = e.global_best_fitness;
  }
  const double ratio = *r.best.fitness / r.seed_fitness;
  const std::string detail =
      fmt::format("seed {:.5f}, best {:.5f}, ratio {:.3f} (limit 0.5)", r.seed_fitness, *r.best.fitness, ratio);
  return {ratio <= 0.5, detail};
}

// 5
Outcome cost_monotonicity() {
  int compared = 0;
  auto check = [&](const PredictionPanel& panel, const PriceBook& book, bool ls, int nl, int ns) -> std::string {
    auto run = [&](CostModel c) {
      return ls ? long_short_backtest(panel, book, c, 1000, nl, ns) : long_only_backtest(panel, book, c, 1000);
    };
    auto none = run(CostModel::none);
    if (none.trade_count() == 0) return {};
    for (auto c : {CostModel::half_spread, CostModel::bid_ask}) {
      auto r = run(c);
      if (r.overall_return > none.overall_return) {
        return fmt::format("{} return {} above cost-free {}", to_string(c), r.overall_return, none.overall_return);
      }
    }
    ++compared;
    return {};
  };
  for (const auto& f : fixtures::ledger_fixtures()) {
    if (auto why = check(f.panel, f.book, f.long_short, f.n_long, f.n_short); !why.empty()) return fail(f.name + ": " + why);
  }
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const auto seed = rng();
    std::mt19937_64 a(seed);
    auto m = synthetic::random_market(a, n, 5 + trial % 30);
    std::mt19937_64 b(seed);
    auto flat = synthetic::random_market(b, n, 5 + trial % 30, 0.0);
    const int nl = 1 + trial % static_cast<int>(n - 1);
    const int ns = 1 + (trial / 7) % static_cast<int>(n - static_cast<std::size_t>(nl));
    for (bool ls : {false, true}) {
      if (auto why = check(m.panel, m.book, ls, nl, ns); !why.empty()) return fail(why);
      auto run = [&](CostModel c) {
        return ls ? long_short_backtest(flat.panel, flat.book, c, 1000, nl, ns).overall_return
                  : long_only_backtest(flat.panel, flat.book, c, 1000).overall_return;
      };
      const double base = run(CostModel::none);
      for (auto c : {CostModel::half_spread, CostModel::bid_ask}) {
        if (std::abs(run(c) - base) > 1e-12) return fail("zero-spread cost models disagree");
      }
    }
  }
  return {true, fmt::format("{} traded fixtures ordered, zero spreads agree", compared)};
}

// 6
Outcome grid_shape() {
  std::mt19937_64 rng(6);
  auto m = synthetic::random_market(rng, 30, 60);
  auto grid = sweep_grid(m.panel, m.book, CostModel::half_spread, 1e6, 15, 15);
  auto csv = format_grid_csv(grid);
  std::string header;
  for (int s = 1; s <= 15; ++s) header += ",short_" + std::to_string(s);
  std::vector<std::string> lines;
  for (std::size_t b = 0, e; b < csv.size(); b = e + 1) {
    e = csv.find('\n', b);
    lines.push_back(csv.substr(b, e - b));
  }
  if (lines.size() != 16 || lines[0] != header) return fail("header or row count wrong");
  for (int l = 1; l <= 15; ++l) {
    const auto& row = lines[static_cast<std::size_t>(l)];
    if (row.rfind(fmt::format("long_{},", l), 0) != 0) return fail("row label wrong on row " + std::to_string(l));
    if (std::count(row.begin(), row.end(), ',') != 15) return fail("row " + std::to_string(l) + " lacks 15 cells");
    for (int s = 1; s <= 15; ++s) {
      const double alone = long_short_backtest(m.panel, m.book, CostModel::half_spread, 1e6, l, s).overall_return;
      if (std::abs(grid.at(l, s) - alone) > 1e-12) return fail(fmt::format("cell ({}, {}) differs", l, s));
    }
  }
  return {true, "15x15, labels match, 225 cells equal standalone runs"};
}

// 7
Outcome return_formula() {
  for (const auto& f : fixtures::ledger_fixtures()) {
    auto r = fixtures::run(f);
    if (r.overall_return != (r.final_cash - r.initial_capital) / r.initial_capital) {
      return fail(f.name + ": return not (C1 - C0) / C0");
    }
    if (r.final_cash == f.final_cash && r.overall_return != (f.final_cash - f.capital) / f.capital) {
      return fail(f.name + ": return differs from the hand-computed value");
    }
    auto scaled = f;
    scaled.capital *= 10;
    if (std::abs(fixtures::run(scaled).overall_return - r.overall_return) > 1e-12) {
      return fail(f.name + ": return changed when capital was scaled by 10");
    }
  }
  return {true, "return = (C1 - C0) / C0 on every fixture, invariant to 10x capital"};
}

// 8
Outcome baseline_trainability() {
  const auto ds = synthetic::ar2_dataset();
  const auto train = ds.split(Split::train);
  const auto valid = ds.split(Split::valid);
  const double mean = std::accumulate(train.targets.begin(), train.targets.end(), 0.0) / static_cast<double>(train.size());
  double constant = 0.0;
  for (double y : valid.targets) constant += (y - mean) * (y - mean);
  constant /= static_cast<double>(valid.size());

  std::mt19937_64 rng(0);
  TrainConfig tc;
  tc.epochs = 1000;
  tc.learning_rate = 1e-4;
  auto trained = bptt_train(build_layered(CellKind::gru, rng), train, tc);
  const double mse = evaluate(trained.genome, valid);
  return {mse < constant, fmt::format("GRU validation mse {:.5f} vs constant-mean {:.5f}", mse, constant)};
}

// 9
Outcome end_to_end_determinism() {
  TempDir dir;
  synthetic::write_market(dir.path() / "data", {"AAA", "BBB", "CCC"}, 19);
  auto ini = dir.write("exp.ini", synthetic::small_config_text("AAA,BBB,CCC", 60, 2));
  const std::string cli = EVOTRADE_CLI;
  std::vector<std::string> outputs;
  for (const char* out : {"run1", "run2"}) {
    const auto out_dir = (dir.path() / out).string();
    for (const char* cmd : {"evolve", "predict", "backtest"}) {
      const auto line = fmt::format("\"{}\" {} --config \"{}\" --seed 1234 --workers 1 --out \"{}\" > /dev/null 2>&1",
                                    cli, cmd, ini.string(), out_dir);
      if (std::system(line.c_str()) != 0) return fail(fmt::format("'{}' failed", cmd));
    }
    outputs.push_back(read_file(dir.path() / out / "predictions_evolve.csv") + "\x1f" +
                      read_file(dir.path() / out / "report_long_only.txt") + "\x1f" +
                      read_file(dir.path() / out / "report_buy_and_hold.txt"));
  }
  if (outputs[0] != outputs[1]) return fail("panels or reports differ between runs");
  return {true, fmt::format("panel and reports identical ({} bytes)", outputs[0].size())};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "ledger oracle equivalence", 1, ledger_oracles},
      {2, "gradient correctness", 30, gradients},
      {3, "mutation soundness", 30, mutation_soundness},
      {4, "evolution progress", 600, evolution_progress},
      {5, "cost monotonicity", 0, cost_monotonicity},
      {6, "grid shape", 0, grid_shape},
      {7, "return formula", 0, return_formula},
      {8, "baseline trainability", 300, baseline_trainability},
      {9, "end-to-end determinism", 0, end_to_end_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0 && secs > c.limit_seconds) {
      o.pass = false;
      o.detail += fmt::format("; over the {:.0f} s limit", c.limit_seconds);
    }
    failures += o.pass ? 0 : 1;
    std::cout << fmt::format("criterion {} {}: {} ({}; {:.2f} s)", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail, secs)
              << std::endl;
  }
  std::cout << (failures ? fmt::format("{} criteria failed", failures) : std::string("all criteria passed")) << '\n';
  return failures ? 1 : 0;
}
