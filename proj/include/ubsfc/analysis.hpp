#pragma once

// Metrics from event logs and snapshots, HP detrending and cross-replicate
// aggregation, plus the CSV formats they are exchanged in.

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ubsfc/engine.hpp"
#include "ubsfc/labour_market.hpp"

namespace ubsfc {

struct HpResult {
  std::vector<double> trend;
  std::vector<double> cycle;
};

// Minimises sum (y - tau)^2 + lambda sum (second difference of tau)^2 by a
// banded Cholesky solve of (I + lambda K' K). Throws std::invalid_argument
// for fewer than 4 points or lambda <= 0.
HpResult hp_filter(std::span<const double> series, double lambda = 1600.0);

// Metric names in frame order.
const std::vector<std::string>& metric_names();

struct TimeSeriesFrame {
  std::string scenario;
  int replicate = 0;
  std::vector<int> steps;
  std::vector<std::string> metrics;
  std::vector<std::vector<double>> values;  // values[metric][row]

  // Throws std::out_of_range for an unknown metric.
  const std::vector<double>& series(std::string_view metric) const;
};

// Snapshot rows carry the columns named in `columns`; events supply hires,
// fires and quits per step.
TimeSeriesFrame compute_metrics(std::span<const MatchEvent> events, std::span<const std::string> columns,
                                std::span<const Snapshot> snapshots, int households, std::string scenario = {},
                                int replicate = 0);

struct MetricSummary {
  std::string metric;
  std::vector<double> mean;
  std::vector<double> p10;
  std::vector<double> p90;
  std::vector<double> trend;
  std::vector<double> cycle;
};

struct ScenarioSummary {
  std::vector<int> steps;
  std::vector<MetricSummary> metrics;

  const MetricSummary& get(std::string_view metric) const;
};

// Keeps steps after `burn_in`, takes the cross-replicate mean and the
// 10th/90th percentiles (linear interpolation) per step, and HP-filters the
// mean path. Paths shorter than 4 points get trend = mean, cycle = 0.
ScenarioSummary aggregate(std::span<const TimeSeriesFrame> frames, int burn_in, double hp_lambda = 1600.0);

// Linear-interpolation quantile of an unsorted sample, q in [0, 1].
double quantile(std::vector<double> sample, double q);

// Round-trip exact shortest decimal form.
std::string format_number(double v);

void write_snapshots_csv(std::ostream& out, std::span<const Snapshot> snapshots);
// Returns the column names (without "step") and fills `rows`.
std::vector<std::string> read_snapshots_csv(std::istream& in, std::vector<Snapshot>& rows);

// Long format: step,replicate,metric,value.
void write_frames_csv(std::ostream& out, std::span<const TimeSeriesFrame> frames);
std::vector<TimeSeriesFrame> read_frames_csv(std::istream& in, const std::string& scenario = {});

// step,metric,mean,p10,p90,trend,cycle
void write_aggregate_csv(std::ostream& out, const ScenarioSummary& summary);

}  // namespace ubsfc
