#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "ubsfc/analysis.hpp"
#include "ubsfc/rng.hpp"

using namespace ubsfc;

namespace {

// Dense reference: (I + lambda D'D) tau = y with D the second-difference matrix.
std::vector<double> dense_trend(const std::vector<double>& y, double lambda) {
  const auto n = static_cast<Eigen::Index>(y.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n - 2, n);
  for (Eigen::Index i = 0; i < n - 2; ++i) {
    d(i, i) = 1.0;
    d(i, i + 1) = -2.0;
    d(i, i + 2) = 1.0;
  }
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) + lambda * d.transpose() * d;
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  const Eigen::VectorXd tau = a.ldlt().solve(rhs);
  return {tau.data(), tau.data() + n};
}

std::vector<double> random_walk(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<double> y(n);
  double x = 0.0;
  for (auto& v : y) {
    x += rng.uniform() - 0.5;
    v = x;
  }
  return y;
}

}  // namespace

TEST_CASE("HP filter leaves straight lines alone") {
  for (std::size_t n : {4u, 5u, 37u, 1030u}) {
    std::vector<double> y(n);
    for (std::size_t t = 0; t < n; ++t) y[t] = 3.0 - 0.25 * static_cast<double>(t);
    const auto r = hp_filter(y, 1600.0);
    for (std::size_t t = 0; t < n; ++t) {
      CHECK(std::abs(r.cycle[t]) < 1e-10);
      CHECK(std::abs(r.trend[t] + r.cycle[t] - y[t]) < 1e-10);
    }
  }
  const std::vector<double> flat(20, 0.7);
  for (double v : hp_filter(flat).trend) CHECK(v == doctest::Approx(0.7));
}

TEST_CASE("HP filter matches a dense solve") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto y = random_walk(seed, 200);
    for (double lambda : {1600.0, 100.0, 129600.0}) {
      const auto r = hp_filter(y, lambda);
      const auto ref = dense_trend(y, lambda);
      double worst = 0.0;
      for (std::size_t t = 0; t < y.size(); ++t) worst = std::max(worst, std::abs(r.trend[t] - ref[t]));
      CHECK(worst < 1e-8);
    }
  }
}

TEST_CASE("HP filter is linear") {
  const auto x = random_walk(11, 150);
  const auto y = random_walk(12, 150);
  std::vector<double> z(150);
  for (std::size_t t = 0; t < 150; ++t) z[t] = 2.5 * x[t] - 0.75 * y[t];
  const auto fx = hp_filter(x), fy = hp_filter(y), fz = hp_filter(z);
  for (std::size_t t = 0; t < 150; ++t) CHECK(fz.trend[t] == doctest::Approx(2.5 * fx.trend[t] - 0.75 * fy.trend[t]));
}

TEST_CASE("HP filter rejects short input") {
  const std::vector<double> y{1.0, 2.0, 4.0};
  CHECK_THROWS_AS(hp_filter(y), std::invalid_argument);
  const std::vector<double> ok{1.0, 2.0, 4.0, 3.0};
  CHECK_THROWS_AS(hp_filter(ok, 0.0), std::invalid_argument);
}

namespace {

std::vector<Snapshot> flat_snapshots(int steps, double employed, double start) {
  const auto& cols = snapshot_columns();
  std::vector<Snapshot> rows;
  for (int s = 1; s <= steps; ++s) {
    Snapshot snap;
    snap.step = s;
    snap.values.assign(cols.size(), 0.0);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (cols[k] == "employed") snap.values[k] = employed;
      if (cols[k] == "employed_start") snap.values[k] = start;
      if (cols[k] == "monitoring") snap.values[k] = 0.5;
    }
    rows.push_back(snap);
  }
  return rows;
}

}  // namespace

TEST_CASE("metrics from events and snapshots") {
  const auto snaps = flat_snapshots(3, 100.0, 100.0);
  const std::vector<MatchEvent> events{{2, MatchKind::fire, 4, 0}, {2, MatchKind::fire, 5, 1}};
  const auto f = compute_metrics(events, snapshot_columns(), snaps, 100);
  CHECK(f.series("turnover")[1] == doctest::Approx(0.02));
  CHECK(f.series("retention")[1] == doctest::Approx(0.98));
  CHECK(f.series("fires")[1] == 2.0);
  CHECK(f.series("turnover")[0] == 0.0);
  CHECK(f.series("retention")[0] == 1.0);
  CHECK(f.series("unemployment_rate")[2] == 0.0);
  CHECK(f.series("monitoring")[0] == 0.5);
  CHECK_THROWS_AS(f.series("happiness"), std::out_of_range);

  const auto half = compute_metrics({}, snapshot_columns(), flat_snapshots(2, 250.0, 250.0), 500);
  CHECK(half.series("unemployment_rate")[0] == doctest::Approx(0.5));
}

TEST_CASE("aggregation") {
  auto a = compute_metrics({}, snapshot_columns(), flat_snapshots(1080, 400.0, 400.0), 500, "x", 0);
  auto b = compute_metrics({}, snapshot_columns(), flat_snapshots(1080, 300.0, 300.0), 500, "x", 1);
  const std::vector<TimeSeriesFrame> one{a};
  const auto single = aggregate(one, 50);
  CHECK(single.steps.size() == 1030);
  CHECK(single.steps.front() == 51);
  CHECK(single.get("unemployment_rate").mean[0] == doctest::Approx(0.2));

  const std::vector<TimeSeriesFrame> two{a, b};
  const auto s = aggregate(two, 50);
  CHECK(s.get("unemployment_rate").mean[100] == doctest::Approx(0.3));
  const std::vector<TimeSeriesFrame> swapped{b, a};
  const auto t = aggregate(swapped, 50);
  for (const auto& m : s.metrics) {
    const auto& n = t.get(m.metric);
    CHECK(m.mean == n.mean);
    CHECK(m.p10 == n.p10);
    CHECK(m.p90 == n.p90);
  }
  CHECK(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.1) == doctest::Approx(1.4));
  CHECK(quantile({5.0, 1.0}, 0.9) == doctest::Approx(4.6));
}

TEST_CASE("csv round trips") {
  const auto snaps = flat_snapshots(5, 480.0, 482.0);
  std::stringstream s;
  write_snapshots_csv(s, snaps);
  std::vector<Snapshot> back;
  const auto cols = read_snapshots_csv(s, back);
  CHECK(cols == snapshot_columns());
  REQUIRE(back.size() == snaps.size());
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    CHECK(back[k].step == snaps[k].step);
    CHECK(back[k].values == snaps[k].values);
  }

  const std::vector<MatchEvent> quit{{3, MatchKind::quit, 1, 0}};
  auto f = compute_metrics(quit, snapshot_columns(), snaps, 500, "low", 4);
  f.values[0][2] = 0.1 + 0.2;  // needs all 17 digits
  std::stringstream fs;
  const std::vector<TimeSeriesFrame> frames(1, f);
  write_frames_csv(fs, frames);
  const auto fb = read_frames_csv(fs, "low");
  REQUIRE(fb.size() == 1);
  CHECK(fb[0].replicate == 4);
  CHECK(fb[0].steps == f.steps);
  CHECK(fb[0].series("unemployment_rate") == f.series("unemployment_rate"));
  CHECK(fb[0].series("quits") == f.series("quits"));
  CHECK(format_number(0.1 + 0.2) == "0.30000000000000004");
}
