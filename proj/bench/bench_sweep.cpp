#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "evotrade/sweep.hpp"

using namespace evotrade;

namespace {

struct Market {
  PredictionPanel panel;
  PriceBook book;
};

// 30 tickers over one trading year, like the evaluation universe.
const Market& market() {
  static const Market m = [] {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> step(0.0, 0.02);
    std::normal_distribution<double> signal(0.0, 0.01);
    Market out;
    const std::size_t tickers = 30;
    for (std::size_t k = 0; k < tickers; ++k) out.panel.tickers.push_back("T" + std::to_string(100 + k));
    std::vector<double> price(tickers, 50.0);
    for (int d = 0; d < 250; ++d) {
      Date day{2023 + d / 336, 1 + (d / 28) % 12, 1 + d % 28};
      out.panel.days.push_back(day);
      auto& pred = out.panel.predicted.emplace_back();
      auto& act = out.panel.actual.emplace_back();
      for (std::size_t k = 0; k < tickers; ++k) {
        const double r = step(rng);
        price[k] *= 1.0 + r;
        out.book.add(out.panel.tickers[k], day, {price[k], price[k] * 0.999, price[k] * 1.001});
        pred.push_back(signal(rng));
        act.push_back(r);
      }
    }
    return out;
  }();
  return m;
}

void BM_SweepSerial(benchmark::State& state) {
  const auto& m = market();
  for (auto _ : state) benchmark::DoNotOptimize(sweep_grid_serial(m.panel, m.book, CostModel::half_spread, 1e6));
}

void BM_SweepOpenMP(benchmark::State& state) {
  const auto& m = market();
  for (auto _ : state) benchmark::DoNotOptimize(sweep_grid(m.panel, m.book, CostModel::half_spread, 1e6));
}

}  // namespace

BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepOpenMP)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
