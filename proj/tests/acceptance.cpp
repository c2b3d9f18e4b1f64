// Acceptance report: one line per criterion. Hard criteria decide the exit
// code; the emergent scenario checks are reported as calibration findings.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "support/oracles.hpp"
#include "ubsfc/analysis.hpp"
#include "ubsfc/cli.hpp"
#include "ubsfc/engine.hpp"
#include "ubsfc/labour_market.hpp"

using namespace ubsfc;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int hard_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail, bool hard = true) {
  const char* tag = pass ? "PASS" : (hard ? "FAIL" : "CALIBRATION FINDING");
  std::printf("[%s] %s: %s\n", tag, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass && hard) ++hard_failures;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

void stationary_state() {
  const auto t0 = Clock::now();
  const auto config = *scenario_preset("baseline");
  const auto s = solve_stationary_state(config);
  Economy economy(config, config.seed);
  const double elapsed = seconds_since(t0);

  const std::vector<std::pair<std::string, double>> targets = {
      {"reserves", 1576.018}, {"advances", 1073.109}, {"cb_bills", 502.909},  {"bank_bills", 0.0},
      {"bills", 502.909},     {"wage_bill", 4000.0},  {"unit_cost", 7.158356}, {"price", 10.021698}};
  bool ok = s.residual < 1e-8 && elapsed < 1.0;
  std::string detail;
  for (const auto& [name, want] : targets) {
    const double got = stationary_field(s, name);
    const bool hit = std::abs(got - want) < 5e-4;
    ok = ok && hit;
    if (!hit) detail += name + "=" + fmt("%.6f", got) + " ";
  }
  const auto dev = stationary_deviations(s);
  std::string devs;
  for (const auto& d : dev) devs += d.name + " " + fmt("%.4f", d.reference) + "->" + fmt("%.4f", d.solved) + "; ";
  ok = ok && !dev.empty();
  report("stationary state", ok,
         detail + "8 published values to 3 decimals, residual " + fmt("%.1e", s.residual) + ", " +
             fmt("%.3f s", elapsed) + ", reported deviations: " + devs);
}

void sfc_closure() {
  auto config = *scenario_preset("baseline");
  const auto t0 = Clock::now();
  const auto r = run_replicate(config, 0);
  const double elapsed = seconds_since(t0);
  const bool ok = r.completed && r.snapshots.size() == 1080 && r.flagged_steps == 0 &&
                  r.max_relative_residual < 1e-6 && elapsed < 10.0;
  report("SFC closure", ok,
         std::to_string(r.snapshots.size()) + " steps, " + std::to_string(r.flagged_steps) +
             " flagged, max relative residual " + fmt("%.2e", r.max_relative_residual) + ", " +
             fmt("%.2f s", elapsed) + (r.completed ? "" : ", error: " + r.error));
}

void fixed_point() {
  auto c = *scenario_preset("baseline");
  c.strategy.adapt = false;
  c.monitoring = false;
  c.quitting = false;
  c.matching = MatchingMode::balanced;
  Economy e(c, c.seed);
  const auto s0 = e.stocks();
  std::vector<double> firm0;
  for (const auto& f : e.firms())
    for (double v : {f.price, f.unit_cost, f.inventory, f.nominal_inventory, f.loans, f.expected_sales})
      firm0.push_back(v);
  e.step();
  const auto& s1 = e.stocks();
  const auto& fl = e.flows();
  const auto& st = e.stationary();
  const std::vector<std::pair<double, double>> pairs = {
      {s1.loans, s0.loans},           {s1.inventories, s0.inventories}, {s1.deposits, s0.deposits},
      {s1.reserves, s0.reserves},     {s1.bank_bills, s0.bank_bills},   {s1.advances, s0.advances},
      {s1.cb_bills, s0.cb_bills},     {s1.bills, s0.bills},             {s1.nw_households, s0.nw_households},
      {s1.nw_firms, s0.nw_firms},     {s1.nw_bank, s0.nw_bank},         {s1.gov_debt, s0.gov_debt},
      {fl.consumption, st.consumption}, {fl.gov_spending, st.gov_spending}, {fl.wage_bill, st.wage_bill},
      {fl.taxes, st.taxes},           {fl.firm_profits, st.firm_profits}, {fl.bank_profits, st.bank_profits},
      {fl.cb_profits, st.cb_profits}, {fl.disposable_income, st.disposable_income}, {fl.benefits, 0.0},
      {fl.delta_inventories, 0.0},    {fl.real_output, st.output}};
  double worst = 0.0;
  for (const auto& [a, b] : pairs) worst = std::max(worst, rel(a, b));
  std::size_t k = 0;
  for (const auto& f : e.firms())
    for (double v : {f.price, f.unit_cost, f.inventory, f.nominal_inventory, f.loans, f.expected_sales})
      worst = std::max(worst, rel(v, firm0[k++]));
  report("fixed point", worst < 1e-8, "max relative change after one quiet step " + fmt("%.2e", worst));
}

void set_oracles() {
  const auto r = oracle::check_selection_sets(50);
  report("set oracles", r.mismatches == 0 && r.fixtures == 50,
         std::to_string(r.fixtures) + " fixtures, " + std::to_string(r.mismatches) + " mismatches (" +
             std::to_string(r.hires) + " hires, " + std::to_string(r.fires) + " fires, " + std::to_string(r.quits) +
             " quits, " + std::to_string(r.signals) + " signalling hires)" +
             (r.first_failure.empty() ? "" : ", first: " + r.first_failure));
}

void benefit_schedule() {
  Household h;
  h.ever_employed = true;
  h.last_wage = 8.0;
  BenefitScheme base;
  BenefitScheme high = base;
  high.replacement_rate = 0.69;
  const double b = benefits(h, base, 8.0, 100);
  const double hi = benefits(h, high, 8.0, 100);
  const double post = benefits(h, high, 8.0, 360);
  const bool ok = b == 0.6 * 8.0 && std::abs(b - 4.80) < 1e-15 && hi == 0.69 * 8.0 && std::abs(hi - 5.52) < 1e-15 &&
                  post == 0.6 * 8.0;
  report("benefit schedule", ok, "baseline " + fmt("%.17g", b) + ", high " + fmt("%.17g", hi) + ", after expiry " +
                                     fmt("%.17g", post));
}

void hp_filter_check() {
  double linear = 0.0;
  for (std::size_t n : {4u, 200u, 1030u}) {
    std::vector<double> y(n);
    for (std::size_t t = 0; t < n; ++t) y[t] = 0.07 + 0.003 * static_cast<double>(t);
    for (double c : hp_filter(y, 1600.0).cycle) linear = std::max(linear, std::abs(c));
  }
  double dense = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    const Eigen::Index n = 200;
    std::vector<double> y(n);
    double x = 0.0;
    for (auto& v : y) v = (x += rng.uniform() - 0.5);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n - 2, n);
    for (Eigen::Index i = 0; i < n - 2; ++i) {
      d(i, i) = 1.0;
      d(i, i + 1) = -2.0;
      d(i, i + 2) = 1.0;
    }
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) + 1600.0 * d.transpose() * d;
    const Eigen::VectorXd ref = a.ldlt().solve(Eigen::Map<const Eigen::VectorXd>(y.data(), n));
    const auto got = hp_filter(y, 1600.0);
    for (Eigen::Index t = 0; t < n; ++t) dense = std::max(dense, std::abs(got.trend[t] - ref(t)));
  }
  report("HP filter", linear < 1e-10 && dense < 1e-8,
         "max cycle on linear input " + fmt("%.2e", linear) + ", max gap to dense solve " + fmt("%.2e", dense));
}

std::map<std::string, std::string> csv_files(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
    std::ifstream in(e.path(), std::ios::binary);
    files[fs::relative(e.path(), root).string()] = {std::istreambuf_iterator<char>(in), {}};
  }
  return files;
}

void determinism() {
  const auto base = fs::temp_directory_path() / "ubsfc-acceptance-determinism";
  fs::remove_all(base);
  std::map<std::string, std::string> runs[2];
  int codes[2];
  for (int k = 0; k < 2; ++k) {
    const auto dir = base / ("run" + std::to_string(k));
    std::ostringstream out, err;
    codes[k] = run_cli({"run", "--scenario", "all", "--seed", "7", "--replicates", "3", "--steps", "300", "--out",
                        dir.string()},
                       out, err);
    runs[k] = csv_files(dir);
  }
  fs::remove_all(base);
  const bool ok = codes[0] == 0 && codes[1] == 0 && !runs[0].empty() && runs[0] == runs[1];
  std::size_t bytes = 0;
  for (const auto& [_, v] : runs[0]) bytes += v.size();
  report("determinism", ok,
         std::to_string(runs[0].size()) + " CSV files, " + std::to_string(bytes) + " bytes, identical across runs");
}

struct ScenarioMeans {
  double unemployment = 0.0;
  double job_quality = 0.0;
};

ScenarioMeans post_burn_in_means(const ScenarioResult& result, std::vector<TimeSeriesFrame>& frames) {
  const auto& c = result.config;
  frames.clear();
  for (const auto& r : result.replicates)
    frames.push_back(compute_metrics(r.events, snapshot_columns(), r.snapshots, c.households, c.name, r.replicate));
  const auto summary = aggregate(frames, c.burn_in, c.hp_lambda);
  const auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  return {mean(summary.get("unemployment_rate").mean), mean(summary.get("job_quality").mean)};
}

void scenarios() {
  // Replicate seeds are master ^ r, so masters far apart keep the five
  // repetitions on disjoint replicate seeds.
  const std::vector<std::uint64_t> seeds{1000, 2000, 3000, 4000, 5000};
  const int replicates = 20;
  const int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  int hold_a = 0, hold_b = 0, hold_c = 0;
  std::string table;
  const auto t0 = Clock::now();

  std::vector<TimeSeriesFrame> baseline_frames;
  std::vector<TimeSeriesFrame> frames;
  for (auto seed : seeds) {
    std::map<std::string, ScenarioMeans> m;
    for (const auto& name : scenario_names()) {
      auto c = *scenario_preset(name);
      c.seed = seed;
      c.replicates = replicates;
      const auto result = run_scenario(c, jobs);
      m[name] = post_burn_in_means(result, frames);
      if (seed == seeds.front() && name == "baseline") baseline_frames = frames;
    }
    const bool a = m["high"].unemployment > m["low"].unemployment;
    const auto top = std::max_element(m.begin(), m.end(), [](const auto& x, const auto& y) {
      return x.second.unemployment < y.second.unemployment;
    });
    const bool b = top->first == "low-long";
    const bool c = m["high-short"].job_quality > m["long"].job_quality &&
                   m["low-short"].job_quality > m["long"].job_quality;
    hold_a += a;
    hold_b += b;
    hold_c += c;
    table += "seed " + std::to_string(seed) + ": u(high)=" + fmt("%.4f", m["high"].unemployment) +
             " u(low)=" + fmt("%.4f", m["low"].unemployment) + " argmax u=" + top->first +
             " q(high-short)=" + fmt("%.4f", m["high-short"].job_quality) +
             " q(low-short)=" + fmt("%.4f", m["low-short"].job_quality) + " q(long)=" + fmt("%.4f", m["long"].job_quality) +
             "\n";
  }
  const double elapsed = seconds_since(t0);
  std::printf("%s", table.c_str());
  const auto share = [&](int k) { return std::to_string(k) + "/" + std::to_string(seeds.size()) + " seeds"; };
  const int needed = static_cast<int>(std::ceil(0.7 * static_cast<double>(seeds.size())));
  report("directional (a) high > low unemployment", hold_a >= needed, share(hold_a), false);
  report("directional (b) low-long highest unemployment", hold_b >= needed, share(hold_b), false);
  report("directional (c) short durations raise job quality over long", hold_c >= needed, share(hold_c), false);
  std::printf("sweep: 9 scenarios x %d replicates x 1080 steps x %zu seeds in %.0f s\n", replicates, seeds.size(),
              elapsed);

  // Baseline qualitative shape, from the first seed's baseline replicates.
  const auto summary = aggregate(baseline_frames, 0, 1600.0);
  const auto& spell = summary.get("unemployment_spell").mean;
  const auto& u = summary.get("unemployment_rate").mean;
  const double final_spell = spell.back();
  // Least-squares slope of the mean unemployment path after expiry.
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (std::size_t k = 0; k < summary.steps.size(); ++k) {
    if (summary.steps[k] <= 360) continue;
    const double x = summary.steps[k];
    sx += x;
    sy += u[k];
    sxx += x * x;
    sxy += x * u[k];
    n += 1;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const bool spell_ok = final_spell >= 0.35 && final_spell <= 0.65;
  const bool declining = slope < 0.0;
  report("baseline qualitative", spell_ok && declining,
         "normalised unemployment spell at step 1080 " + fmt("%.4f", final_spell) + " (target [0.35, 0.65]), " +
             "post-expiry unemployment slope " + fmt("%.3e", slope) + " per step (target < 0)",
         false);
}

}  // namespace

int main() {
  stationary_state();
  sfc_closure();
  fixed_point();
  set_oracles();
  benefit_schedule();
  hp_filter_check();
  determinism();
  scenarios();
  std::printf("%d hard criteria failed\n", hard_failures);
  return hard_failures == 0 ? 0 : 1;
}
