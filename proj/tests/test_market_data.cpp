#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "evotrade/market_data.hpp"
#include "temp_dir.hpp"

using namespace evotrade;

namespace {

constexpr const char* kHeader = "date,close,bid,ask,volume,shares_outstanding\n";

std::vector<IndexBar> flat_index(const std::vector<StockBar>& bars) {
  std::vector<IndexBar> out;
  for (const auto& b : bars) out.push_back({b.date, 0.001, -0.002});
  return out;
}

StockBar bar(const char* date, double close, double volume = 1000.0, double bid = 0.0, double ask = 0.0) {
  if (bid == 0.0 && ask == 0.0) {
    bid = close - 0.01;
    ask = close + 0.01;
  }
  return {parse_date(date), close, bid, ask, volume, 1e6};
}

/// One row per week over [first_year, last_year].
std::vector<FeatureRow> weekly_rows(int first_year, int last_year, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<FeatureRow> rows;
  for (int y = first_year; y <= last_year; ++y)
    for (int m = 1; m <= 12; ++m)
      for (int d : {3, 10, 17, 24}) {
        FeatureRow r;
        r.date = {y, m, d};
        r.set_features({noise(rng), noise(rng), std::abs(noise(rng)), noise(rng), std::abs(noise(rng)), noise(rng),
                        noise(rng)});
        rows.push_back(r);
      }
  return rows;
}

}  // namespace

TEST_CASE("load_stock_csv reads a well-formed file") {
  TempDir dir;
  auto file = dir.write("a.csv", std::string(kHeader) +
                                     "2021-01-04,10,9.9,10.1,100,1000\n"
                                     "2021-01-05,10.5,10.4,10.6,120,1000\n"
                                     "2021-01-06,10.2,10.1,10.3,90,1000\n");
  auto bars = load_stock_csv(file);
  REQUIRE(bars.size() == 3);
  CHECK(bars[0].date == Date{2021, 1, 4});
  CHECK(bars[1].close_price == 10.5);
  CHECK(bars[2].volume == 90.0);
}

TEST_CASE("load_stock_csv rejects ask below bid citing the line") {
  TempDir dir;
  auto file = dir.write("a.csv", std::string(kHeader) + "2021-01-04,10,10.1,9.9,100,1000\n");
  try {
    load_stock_csv(file);
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    CHECK(std::string(e.what()).find("ask < bid") != std::string::npos);
  }
}

TEST_CASE("load_stock_csv sorts shuffled dates") {
  TempDir dir;
  const std::string r1 = "2021-01-04,10,9.9,10.1,100,1000\n";
  const std::string r2 = "2021-01-05,11,10.9,11.1,100,1000\n";
  const std::string r3 = "2021-01-06,12,11.9,12.1,100,1000\n";
  auto sorted = load_stock_csv(dir.write("s.csv", kHeader + r1 + r2 + r3));
  auto shuffled = load_stock_csv(dir.write("u.csv", kHeader + r3 + r1 + r2));
  REQUIRE(sorted.size() == shuffled.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    CHECK(sorted[i].date == shuffled[i].date);
    CHECK(sorted[i].close_price == shuffled[i].close_price);
  }
}

TEST_CASE("load_stock_csv error paths") {
  TempDir dir;
  CHECK_THROWS_AS(load_stock_csv(dir.write("h.csv", "date,close\n")), DataError);
  CHECK_THROWS_WITH_AS(load_stock_csv(dir.write("m.csv", std::string(kHeader) + "2021-01-04,10,9.9\n")),
                       doctest::Contains("line 2"), DataError);
  CHECK_THROWS_WITH_AS(load_stock_csv(dir.write("n.csv", std::string(kHeader) + "2021-01-04,10,9.9,10.1,100,1000\n"
                                                                                "2021-01-05,abc,9.9,10.1,100,1000\n")),
                       doctest::Contains("line 3"), DataError);
  CHECK_THROWS_WITH_AS(load_stock_csv(dir.write("d.csv", std::string(kHeader) + "2021-01-04,10,9.9,10.1,100,1000\n"
                                                                                "2021-01-04,10,9.9,10.1,100,1000\n")),
                       doctest::Contains("duplicate date"), DataError);
  CHECK_THROWS_AS(load_stock_csv(dir.write("z.csv", std::string(kHeader) + "2021-01-04,0,0,0,100,1000\n")), DataError);
  CHECK_THROWS_AS(load_stock_csv(dir.path() / "missing.csv"), DataError);
}

TEST_CASE("load_index_csv") {
  TempDir dir;
  auto idx = load_index_csv(dir.write("i.csv", "date,dji_return,spx_return\n2021-01-05,0.01,-0.02\n2021-01-04,0,0\n"));
  REQUIRE(idx.size() == 2);
  CHECK(idx[0].date == Date{2021, 1, 4});
  CHECK(idx[1].spx_return == -0.02);
}

TEST_CASE("compute_predictors follows the predictor formulas") {
  std::vector<StockBar> bars = {bar("2021-01-04", 100, 10), bar("2021-01-05", 102, 10, 101.9, 102.1)};
  auto rows = compute_predictors(bars, flat_index(bars));
  REQUIRE(rows.size() == 1);
  const auto& r = rows[0];
  CHECK(r.date == Date{2021, 1, 5});
  CHECK(r.ret == doctest::Approx(0.02).epsilon(1e-14));
  CHECK(r.volume_change == 0.0);
  CHECK(r.bid_ask_spread == doctest::Approx(0.2 / 102).epsilon(1e-12));
  CHECK(r.illiquidity == doctest::Approx(0.02 / (10 * 102)).epsilon(1e-12));
  CHECK(r.turn_over == doctest::Approx(10 / 1e6));
  CHECK(r.dji_return == 0.001);
  CHECK(r.spx_return == -0.002);

  std::vector<StockBar> quote = {bar("2021-01-04", 10.0), bar("2021-01-05", 10.0, 1000, 9.9, 10.1)};
  CHECK(compute_predictors(quote, flat_index(quote))[0].bid_ask_spread == doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("compute_predictors on constant prices gives zero return and illiquidity") {
  std::vector<StockBar> bars;
  for (int d = 4; d <= 8; ++d) bars.push_back(bar(("2021-01-0" + std::to_string(d)).c_str(), 50.0, 100.0 * d));
  auto rows = compute_predictors(bars, flat_index(bars));
  CHECK(rows.size() == bars.size() - 1);
  for (const auto& r : rows) {
    CHECK(r.ret == 0.0);
    CHECK(r.illiquidity == 0.0);
  }
}

TEST_CASE("compute_predictors zero denominators and missing index") {
  std::vector<StockBar> bars = {bar("2021-01-04", 10, 0), bar("2021-01-05", 11, 0), bar("2021-01-06", 12, 5)};
  auto rows = compute_predictors(bars, flat_index(bars));
  CHECK(rows[0].volume_change == 0.0);
  CHECK(rows[0].illiquidity == 0.0);
  CHECK(rows[1].volume_change == 0.0);
  CHECK(rows[1].illiquidity == doctest::Approx((1.0 / 11) / (5 * 12)));

  auto idx = flat_index(bars);
  idx.erase(idx.begin() + 2);
  CHECK_THROWS_WITH_AS(compute_predictors(bars, idx), doctest::Contains("2021-01-06"), DataError);
  CHECK_THROWS_AS(compute_predictors({bars[0]}, idx), DataError);
}

TEST_CASE("split_by_year 1992-2022") {
  std::mt19937_64 rng(1);
  auto ds = split_by_year(weekly_rows(1992, 2022, rng), 2022);
  auto train = ds.split(Split::train);
  auto valid = ds.split(Split::valid);
  auto test = ds.split(Split::test);
  CHECK(train.target_dates.front().year == 1992);
  CHECK(train.target_dates.back().year == 2020);
  CHECK(valid.target_dates.front().year == 2021);
  CHECK(valid.target_dates.back().year == 2021);
  CHECK(test.target_dates.front().year == 2022);
  CHECK(test.target_dates.back().year == 2022);
  // The first test prediction reads the last validation-year row.
  CHECK(ds.rows[ds.test.begin].date.year == 2021);
  CHECK(ds.rows[ds.test.begin + 1].date == test.target_dates.front());
  CHECK(ds.test.end == ds.rows.size() - 1);
}

TEST_CASE("split_by_year minimal span and degenerate input") {
  std::mt19937_64 rng(2);
  auto ds = split_by_year(weekly_rows(2020, 2022, rng), 2022);
  auto train = ds.split(Split::train);
  CHECK(train.target_dates.front().year == 2020);
  CHECK(train.target_dates.back().year == 2020);
  CHECK_THROWS_WITH_AS(split_by_year(weekly_rows(2022, 2022, rng), 2022), "train split empty", DataError);
  CHECK_THROWS_WITH_AS(split_by_year(weekly_rows(2019, 2020, rng), 2022), "valid split empty", DataError);
  CHECK_THROWS_WITH_AS(split_by_year(weekly_rows(2019, 2021, rng), 2022), "test split empty", DataError);
}

TEST_CASE("normalize maps train span to the unit interval") {
  std::vector<FeatureRow> rows;
  const double values[] = {-1.0, 1.0, 0.0, 0.5, 2.0, 0.25};
  const Date dates[] = {{2020, 3, 1}, {2020, 6, 1}, {2020, 9, 1}, {2021, 3, 1}, {2021, 6, 1}, {2022, 3, 1}};
  for (int i = 0; i < 6; ++i) {
    FeatureRow r;
    r.date = dates[i];
    r.ret = values[i];
    r.volume_change = 3.0;  // constant on train
    rows.push_back(r);
  }
  // Predicting 2020 rows: rows 0,1 -> train; rows 2,3 -> valid (targets 2021); row 4 -> test.
  auto ds = split_by_year(rows, 2022);
  REQUIRE(ds.train.size() == 2);
  auto n = normalize(ds);
  CHECK(n.rows[0].ret == 0.0);
  CHECK(n.rows[1].ret == 1.0);
  CHECK(n.rows[2].ret == 0.5);
  CHECK(n.rows[4].ret == 1.5);
  for (const auto& r : n.rows) CHECK(r.volume_change == 0.5);
  CHECK(n.normalizer->constant[1]);
  // Targets stay raw.
  CHECK(*n.target[0] == 1.0);
  CHECK(*n.target[3] == 2.0);
  CHECK_THROWS_AS(normalize(n), DataError);
}

TEST_CASE("property: normalize round-trips, targets align, splits partition") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> start(1990, 2015);
  std::uniform_int_distribution<int> span(3, 12);
  for (int trial = 0; trial < 50; ++trial) {
    const int first = start(rng);
    const int last = first + span(rng) - 1;
    auto rows = weekly_rows(first, last, rng);
    auto ds = split_by_year(rows, last);

    CHECK(ds.train.begin == 0);
    CHECK(ds.train.end == ds.valid.begin);
    CHECK(ds.valid.end == ds.test.begin);
    CHECK(ds.test.end == ds.rows.size() - 1);
    CHECK(!ds.target.back().has_value());
    for (std::size_t t = 0; t + 1 < ds.rows.size(); ++t) CHECK(*ds.target[t] == ds.rows[t + 1].ret);
    for (auto which : {Split::train, Split::valid, Split::test}) {
      auto s = ds.split(which);
      for (std::size_t i = 1; i < s.size(); ++i) CHECK(s.target_dates[i - 1] < s.target_dates[i]);
    }
    CHECK(ds.split(Split::train).target_dates.back() < ds.split(Split::valid).target_dates.front());
    CHECK(ds.split(Split::valid).target_dates.back() < ds.split(Split::test).target_dates.front());

    auto back = denormalize(normalize(ds));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto a = ds.rows[i].features();
      auto b = back.rows[i].features();
      for (std::size_t k = 0; k < kFeatureCount; ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-12);
    }
  }
}
