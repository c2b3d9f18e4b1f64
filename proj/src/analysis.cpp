#include "ubsfc/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ubsfc/errors.hpp"

namespace ubsfc {
namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("malformed number in CSV: '" + std::string(s) + "'");
  }
  return v;
}

int to_int(std::string_view s) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("malformed integer in CSV: '" + std::string(s) + "'");
  }
  return v;
}

std::size_t column_index(std::span<const std::string> columns, std::string_view name) {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ConfigError("snapshot column '" + std::string(name) + "' missing");
  return static_cast<std::size_t>(it - columns.begin());
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

}  // namespace

HpResult hp_filter(std::span<const double> series, double lambda) {
  const std::size_t n = series.size();
  if (n < 4) throw std::invalid_argument("hp_filter needs at least 4 observations");
  if (!(lambda > 0.0)) throw std::invalid_argument("hp_filter needs a positive lambda");

  // Bands of I + lambda K'K, K the (n-2) x n second-difference operator.
  std::vector<double> d0(n, 1.0), d1(n, 0.0), d2(n, 0.0);
  for (std::size_t r = 0; r + 2 < n; ++r) {
    d0[r] += lambda;
    d0[r + 1] += 4.0 * lambda;
    d0[r + 2] += lambda;
    d1[r] -= 2.0 * lambda;
    d1[r + 1] -= 2.0 * lambda;
    d2[r] += lambda;
  }

  // Banded Cholesky: L has the diagonal `l0` and two subdiagonals.
  std::vector<double> l0(n), l1(n, 0.0), l2(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double a = d0[i];
    if (i >= 1) a -= l1[i - 1] * l1[i - 1];
    if (i >= 2) a -= l2[i - 2] * l2[i - 2];
    l0[i] = std::sqrt(a);
    if (i + 1 < n) {
      double b = d1[i];
      if (i >= 1) b -= l2[i - 1] * l1[i - 1];
      l1[i] = b / l0[i];
    }
    if (i + 2 < n) l2[i] = d2[i] / l0[i];
  }

  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = series[i];
    if (i >= 1) v -= l1[i - 1] * z[i - 1];
    if (i >= 2) v -= l2[i - 2] * z[i - 2];
    z[i] = v / l0[i];
  }
  HpResult out;
  out.trend.assign(n, 0.0);
  for (std::size_t k = n; k-- > 0;) {
    double v = z[k];
    if (k + 1 < n) v -= l1[k] * out.trend[k + 1];
    if (k + 2 < n) v -= l2[k] * out.trend[k + 2];
    out.trend[k] = v / l0[k];
  }
  out.cycle.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.cycle[i] = series[i] - out.trend[i];
  return out;
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {
      "unemployment_rate", "unemployment_spell", "employment_spell", "turnover",        "retention",
      "hires",             "fires",              "quits",            "satisfaction",    "satisfaction_O",
      "satisfaction_C",    "satisfaction_SE",    "satisfaction_ST",  "job_quality",     "job_quality_O",
      "job_quality_C",     "job_quality_SE",     "job_quality_ST",   "monitoring",      "pfp_mix",
      "bonus_rate",        "real_gdp",           "real_consumption", "labour_demand"};
  return names;
}

const std::vector<double>& TimeSeriesFrame::series(std::string_view metric) const {
  for (std::size_t m = 0; m < metrics.size(); ++m)
    if (metrics[m] == metric) return values[m];
  throw std::out_of_range("unknown metric '" + std::string(metric) + "'");
}

TimeSeriesFrame compute_metrics(std::span<const MatchEvent> events, std::span<const std::string> columns,
                                std::span<const Snapshot> snapshots, int households, std::string scenario,
                                int replicate) {
  TimeSeriesFrame frame;
  frame.scenario = std::move(scenario);
  frame.replicate = replicate;
  frame.metrics = metric_names();
  frame.values.assign(frame.metrics.size(), {});

  std::map<int, std::array<int, 3>> counts;  // hires, fires, quits
  for (const auto& e : events) {
    auto& c = counts[e.step];
    switch (e.kind) {
      case MatchKind::hire:
      case MatchKind::signal_hire: ++c[0]; break;
      case MatchKind::fire: ++c[1]; break;
      case MatchKind::quit: ++c[2]; break;
    }
  }

  const auto col = [&](std::string_view name) { return column_index(columns, name); };
  const std::size_t employed = col("employed");
  const std::size_t employed_start = col("employed_start");
  // Metrics copied straight from a snapshot column of the same name.
  const std::vector<std::string> direct = {
      "unemployment_spell", "employment_spell", "satisfaction",   "satisfaction_O",   "satisfaction_C",
      "satisfaction_SE",    "satisfaction_ST",  "job_quality",    "job_quality_O",    "job_quality_C",
      "job_quality_SE",     "job_quality_ST",   "monitoring",     "pfp_mix",          "bonus_rate",
      "real_gdp",           "real_consumption", "labour_demand"};
  std::vector<std::pair<std::size_t, std::size_t>> copies;  // metric index, column index
  for (const auto& name : direct) {
    const auto m = static_cast<std::size_t>(
        std::find(frame.metrics.begin(), frame.metrics.end(), name) - frame.metrics.begin());
    copies.emplace_back(m, col(name));
  }

  const double n = static_cast<double>(households);
  for (const auto& snap : snapshots) {
    frame.steps.push_back(snap.step);
    const auto it = counts.find(snap.step);
    const std::array<int, 3> c = it == counts.end() ? std::array<int, 3>{0, 0, 0} : it->second;
    const double start = snap.values[employed_start];
    const double turnover = start > 0.0 ? (c[1] + c[2]) / start : 0.0;
    frame.values[0].push_back(1.0 - snap.values[employed] / n);
    frame.values[3].push_back(turnover);
    frame.values[4].push_back(1.0 - turnover);
    frame.values[5].push_back(c[0]);
    frame.values[6].push_back(c[1]);
    frame.values[7].push_back(c[2]);
    for (const auto& [m, k] : copies) frame.values[m].push_back(snap.values[k]);
  }
  return frame;
}

const MetricSummary& ScenarioSummary::get(std::string_view metric) const {
  for (const auto& m : metrics)
    if (m.metric == metric) return m;
  throw std::out_of_range("unknown metric '" + std::string(metric) + "'");
}

double quantile(std::vector<double> sample, double q) {
  if (sample.empty()) return 0.0;
  std::sort(sample.begin(), sample.end());
  const double pos = q * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sample.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sample[lo] + frac * (sample[hi] - sample[lo]);
}

ScenarioSummary aggregate(std::span<const TimeSeriesFrame> frames, int burn_in, double hp_lambda) {
  ScenarioSummary out;
  if (frames.empty()) return out;
  std::vector<int> steps;
  for (const auto& f : frames)
    for (int s : f.steps)
      if (s > burn_in) steps.push_back(s);
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  out.steps = steps;

  for (const auto& metric : frames.front().metrics) {
    MetricSummary ms;
    ms.metric = metric;
    std::vector<std::map<int, double>> by_step;
    for (const auto& f : frames) {
      const auto& series = f.series(metric);
      std::map<int, double> m;
      for (std::size_t k = 0; k < f.steps.size(); ++k) m[f.steps[k]] = series[k];
      by_step.push_back(std::move(m));
    }
    for (int s : steps) {
      std::vector<double> sample;
      for (const auto& m : by_step)
        if (auto it = m.find(s); it != m.end()) sample.push_back(it->second);
      ms.mean.push_back(std::accumulate(sample.begin(), sample.end(), 0.0) / static_cast<double>(sample.size()));
      ms.p10.push_back(quantile(sample, 0.1));
      ms.p90.push_back(quantile(std::move(sample), 0.9));
    }
    if (ms.mean.size() >= 4) {
      auto hp = hp_filter(ms.mean, hp_lambda);
      ms.trend = std::move(hp.trend);
      ms.cycle = std::move(hp.cycle);
    } else {
      ms.trend = ms.mean;
      ms.cycle.assign(ms.mean.size(), 0.0);
    }
    out.metrics.push_back(std::move(ms));
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_snapshots_csv(std::ostream& out, std::span<const Snapshot> snapshots) {
  out << "step";
  for (const auto& c : snapshot_columns()) out << ',' << c;
  out << '\n';
  for (const auto& s : snapshots) {
    out << s.step;
    for (double v : s.values) out << ',' << format_number(v);
    out << '\n';
  }
}

std::vector<std::string> read_snapshots_csv(std::istream& in, std::vector<Snapshot>& rows) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty snapshots file");
  auto header = split(strip_cr(line), ',');
  if (header.empty() || header.front() != "step") throw ConfigError("snapshots header must start with 'step'");
  std::vector<std::string> columns(header.begin() + 1, header.end());
  while (std::getline(in, line)) {
    const auto view = strip_cr(line);
    if (view.empty()) continue;
    const auto cells = split(view, ',');
    if (cells.size() != header.size()) throw ConfigError("snapshot row has the wrong number of cells");
    Snapshot s;
    s.step = to_int(cells[0]);
    for (std::size_t k = 1; k < cells.size(); ++k) s.values.push_back(to_double(cells[k]));
    rows.push_back(std::move(s));
  }
  return columns;
}

void write_frames_csv(std::ostream& out, std::span<const TimeSeriesFrame> frames) {
  out << "step,replicate,metric,value\n";
  for (const auto& f : frames) {
    for (std::size_t k = 0; k < f.steps.size(); ++k) {
      for (std::size_t m = 0; m < f.metrics.size(); ++m) {
        out << f.steps[k] << ',' << f.replicate << ',' << f.metrics[m] << ',' << format_number(f.values[m][k])
            << '\n';
      }
    }
  }
}

std::vector<TimeSeriesFrame> read_frames_csv(std::istream& in, const std::string& scenario) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "step,replicate,metric,value") {
    throw ConfigError("frames file must start with 'step,replicate,metric,value'");
  }
  std::map<int, TimeSeriesFrame> frames;
  while (std::getline(in, line)) {
    const auto view = strip_cr(line);
    if (view.empty()) continue;
    const auto cells = split(view, ',');
    if (cells.size() != 4) throw ConfigError("frames row must have 4 cells");
    const int step = to_int(cells[0]);
    const int rep = to_int(cells[1]);
    auto& f = frames[rep];
    f.scenario = scenario;
    f.replicate = rep;
    auto mit = std::find(f.metrics.begin(), f.metrics.end(), cells[2]);
    std::size_t m = static_cast<std::size_t>(mit - f.metrics.begin());
    if (mit == f.metrics.end()) {
      f.metrics.emplace_back(cells[2]);
      f.values.emplace_back();
    }
    if (m == 0 && (f.steps.empty() || f.steps.back() != step)) f.steps.push_back(step);
    f.values[m].push_back(to_double(cells[3]));
  }
  std::vector<TimeSeriesFrame> out;
  for (auto& [rep, f] : frames) out.push_back(std::move(f));
  return out;
}

void write_aggregate_csv(std::ostream& out, const ScenarioSummary& summary) {
  out << "step,metric,mean,p10,p90,trend,cycle\n";
  for (std::size_t k = 0; k < summary.steps.size(); ++k) {
    for (const auto& m : summary.metrics) {
      out << summary.steps[k] << ',' << m.metric << ',' << format_number(m.mean[k]) << ',' << format_number(m.p10[k])
          << ',' << format_number(m.p90[k]) << ',' << format_number(m.trend[k]) << ','
          << format_number(m.cycle[k]) << '\n';
    }
  }
}

}  // namespace ubsfc
