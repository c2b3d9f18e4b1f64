#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "ubsfc/engine.hpp"

using namespace ubsfc;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

ScenarioConfig quiet_config() {
  ScenarioConfig c = *scenario_preset("baseline");
  c.strategy.adapt = false;
  c.monitoring = false;
  c.quitting = false;
  c.matching = MatchingMode::balanced;
  return c;
}

std::vector<double> stock_vector(const SectorStocks& s) {
  return {s.loans,         s.inventories, s.deposits,     s.reserves,  s.bank_bills, s.advances,
          s.cb_bills,      s.bills,       s.nw_households, s.nw_firms, s.nw_bank,    s.gov_debt};
}

std::vector<double> flow_vector(const SectorFlows& f) {
  return {f.consumption,  f.gov_spending, f.delta_inventories, f.wage_bill,        f.taxes,
          f.benefits,     f.firm_profits, f.bank_profits,      f.cb_profits,       f.disposable_income,
          f.real_output,  f.real_consumption, f.median_wage};
}

double max_rel_change(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, rel(a[i], b[i]));
  return worst;
}

}  // namespace

TEST_CASE("stationary state matches the published initial values") {
  const auto s = solve_stationary_state(*scenario_preset("baseline"));
  CHECK(s.residual < 1e-8);
  CHECK(std::abs(s.reserves - 1576.018) < 5e-4);
  CHECK(s.advances == doctest::Approx(1073.109).epsilon(1e-6));
  CHECK(s.cb_bills == doctest::Approx(502.909).epsilon(1e-6));
  CHECK(s.bills == doctest::Approx(502.909).epsilon(1e-6));
  CHECK(s.bank_bills == 0.0);
  CHECK(s.wage_bill == doctest::Approx(4000.0));
  CHECK(s.unit_cost == doctest::Approx(7.158356).epsilon(1e-7));
  CHECK(s.price == doctest::Approx(10.021698).epsilon(1e-7));
  CHECK(s.cb_profits == doctest::Approx(0.0));
  CHECK(s.output / 500.0 == doctest::Approx(1.117575).epsilon(1e-6));
  CHECK(s.propensity_wealth == doctest::Approx(0.2042).epsilon(1e-3));
  CHECK(std::abs(s.household_check) < 1e-6);

  for (const auto& [name, value] : reference_initial_values()) {
    if (name == "taxes") continue;
    INFO(name);
    CHECK(std::abs(stationary_field(s, name) - value) < 5e-4 * std::max(1.0, std::abs(value)));
  }
  const auto dev = stationary_deviations(s);
  const bool taxes_reported =
      std::any_of(dev.begin(), dev.end(), [](const Deviation& d) { return d.name == "taxes"; });
  CHECK(taxes_reported);
}

TEST_CASE("one quiet step from the stationary state is a fixed point") {
  Economy e(quiet_config(), 42);
  const auto stocks0 = stock_vector(e.stocks());
  std::vector<double> prices0, costs0, inv0, loans0;
  for (const auto& f : e.firms()) {
    prices0.push_back(f.price);
    costs0.push_back(f.unit_cost);
    inv0.push_back(f.inventory);
    loans0.push_back(f.loans);
  }
  e.step();
  CHECK(max_rel_change(stock_vector(e.stocks()), stocks0) < 1e-8);
  const auto flows1 = flow_vector(e.flows());
  for (std::size_t k = 0; k < e.firms().size(); ++k) {
    const auto& f = e.firms()[k];
    CHECK(rel(f.price, prices0[k]) < 1e-8);
    CHECK(rel(f.unit_cost, costs0[k]) < 1e-8);
    CHECK(rel(f.inventory, inv0[k]) < 1e-8);
    CHECK(rel(f.loans, loans0[k]) < 1e-8);
  }
  const auto& s = e.stationary();
  CHECK(rel(e.flows().wage_bill, s.wage_bill) < 1e-8);
  CHECK(rel(e.flows().consumption, s.consumption) < 1e-8);
  CHECK(rel(e.flows().gov_spending, s.gov_spending) < 1e-8);
  CHECK(rel(e.flows().taxes, s.taxes) < 1e-8);
  CHECK(rel(e.flows().firm_profits, s.firm_profits) < 1e-8);
  CHECK(rel(e.flows().bank_profits, s.bank_profits) < 1e-8);
  CHECK(std::abs(e.flows().benefits) < 1e-8);
  e.step();
  CHECK(max_rel_change(flow_vector(e.flows()), flows1) < 1e-8);
  CHECK(max_rel_change(stock_vector(e.stocks()), stocks0) < 1e-8);
}

TEST_CASE("flow matrix and balance sheet close on every step of a baseline run") {
  auto c = *scenario_preset("baseline");
  c.steps = 400;
  Economy e(c, 42);
  std::size_t checks = 0;
  double worst = 0.0;
  e.on_consistency = [&](int, const ConsistencyReport& r) {
    ++checks;
    for (const auto& x : r.entries) worst = std::max(worst, std::abs(x.residual) / x.scale);
  };
  for (int t = 0; t < c.steps; ++t) e.step();
  CHECK(checks == static_cast<std::size_t>(c.steps));
  CHECK(worst < 1e-6);
  CHECK(std::abs(redundant_identity(e.balance_sheet())) < 1e-6 * std::max(1.0, e.stocks().reserves));
}

TEST_CASE("labour-market invariants along a run") {
  auto c = *scenario_preset("short");
  c.steps = 260;
  Economy e(c, 5);
  std::map<HouseholdId, FirmId> employer;
  for (const auto& h : e.households()) employer[h.id] = h.employer;
  std::size_t seen_events = e.events().size();  // initial contracts

  for (int t = 1; t <= c.steps; ++t) {
    e.step();
    const auto& ev = e.events();
    std::map<MatchKind, std::set<HouseholdId>> kinds;
    std::set<HouseholdId> quitters;
    for (; seen_events < ev.size(); ++seen_events) {
      const auto& x = ev[seen_events];
      REQUIRE(x.step == t);
      CHECK(kinds[x.kind].insert(x.household).second);  // one event per kind per step
      switch (x.kind) {
        case MatchKind::hire:
        case MatchKind::signal_hire:
          CHECK(employer[x.household] == kNoFirm);
          employer[x.household] = x.firm;
          break;
        case MatchKind::fire:
        case MatchKind::quit:
          CHECK(employer[x.household] == x.firm);
          employer[x.household] = kNoFirm;
          break;
      }
      if (x.kind == MatchKind::quit) quitters.insert(x.household);
    }
    for (auto i : kinds[MatchKind::hire]) {
      CHECK(kinds[MatchKind::fire].count(i) == 0);
      CHECK(kinds[MatchKind::quit].count(i) == 0);
    }
    for (auto i : kinds[MatchKind::fire]) CHECK(kinds[MatchKind::quit].count(i) == 0);

    // Rosters partition the employed households.
    std::vector<int> seen(e.households().size(), 0);
    for (const auto& f : e.firms())
      for (auto i : f.roster) {
        ++seen[i];
        CHECK(e.households()[i].employer == f.id);
      }
    const double floor = 0.6 * e.flows().median_wage;
    for (const auto& h : e.households()) {
      CHECK(seen[h.id] == (h.employed() ? 1 : 0));
      CHECK(employer[h.id] == h.employer);
      if (!h.employed() && !quitters.count(h.id) && floor > 0.0) CHECK(h.benefit >= floor - 1e-12);
      CHECK(h.deposits >= -1e-9);
    }
  }
}

TEST_CASE("a seed determines the run") {
  auto c = *scenario_preset("low-short");
  c.steps = 220;
  c.replicates = 2;
  const auto a = run_scenario(c);
  const auto b = run_scenario(c);
  REQUIRE(a.replicates.size() == 2);
  CHECK(a.replicates[0].seed == (c.seed ^ 0u));
  CHECK(a.replicates[1].seed == (c.seed ^ 1u));
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(a.replicates[r].completed);
    CHECK(a.replicates[r].events == b.replicates[r].events);
    REQUIRE(a.replicates[r].snapshots.size() == b.replicates[r].snapshots.size());
    for (std::size_t k = 0; k < a.replicates[r].snapshots.size(); ++k)
      CHECK(a.replicates[r].snapshots[k].values == b.replicates[r].snapshots[k].values);
  }
  CHECK(a.replicates[0].events != a.replicates[1].events);

  std::set<std::uint64_t> seeds;
  for (std::uint64_t r = 0; r <= 100; ++r) seeds.insert(c.seed ^ r);
  CHECK(seeds.size() == 101);
}

TEST_CASE("replicate runner records consistency") {
  auto c = *scenario_preset("baseline");
  c.steps = 60;
  const auto r = run_replicate(c, 0);
  CHECK(r.completed);
  CHECK(r.flagged_steps == 0);
  CHECK(r.max_relative_residual < 1e-6);
  CHECK(r.snapshots.size() == 60);
}
