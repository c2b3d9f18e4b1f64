#include "ubsfc/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "ubsfc/aggregates.hpp"
#include "ubsfc/errors.hpp"

namespace ubsfc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct StationaryInputs {
  double output, wage, wage_bill, unit_cost, price, gov_spending, consumption_real, consumption;
  double inventories_real, inventories, loans, bills, firm_profits;
};

StationaryInputs stationary_inputs(const ScenarioConfig& c) {
  StationaryInputs in{};
  in.output = c.initial_output;
  in.wage = c.base_wage;
  in.wage_bill = in.wage * c.households;
  in.unit_cost = in.wage_bill / in.output;
  in.price = set_price(in.unit_cost, c.markup);
  std::vector<double> prices(static_cast<std::size_t>(c.firms), in.price);
  in.gov_spending = government_spending(prices, c.finance.gov_purchases);
  in.consumption_real = in.output - c.finance.gov_purchases * c.firms;
  in.consumption = in.consumption_real * in.price;
  in.inventories_real = c.inventory_ratio * in.output;
  in.inventories = in.inventories_real * in.unit_cost;
  in.loans = in.inventories;
  in.bills = c.debt_ratio * in.price * in.output;
  in.firm_profits = in.consumption + in.gov_spending - in.wage_bill - c.finance.loan_rate * in.loans;
  return in;
}

// Evaluates the stationary system at (tax rate, wealth propensity, deposits).
StationaryState evaluate_stationary(const ScenarioConfig& c, const StationaryInputs& in, double tax_rate,
                                    double propensity_wealth, double deposits, std::array<double, 3>& residual) {
  FinanceParams fin = c.finance;
  fin.tax_rate = tax_rate;
  fin.propensity_wealth = propensity_wealth;

  StationaryState s;
  s.output = in.output;
  s.wage = in.wage;
  s.wage_bill = in.wage_bill;
  s.unit_cost = in.unit_cost;
  s.price = in.price;
  s.gov_spending = in.gov_spending;
  s.consumption_real = in.consumption_real;
  s.consumption = in.consumption;
  s.inventories_real = in.inventories_real;
  s.inventories = in.inventories;
  s.loans = in.loans;
  s.bills = in.bills;
  s.firm_profits = in.firm_profits;
  s.tax_rate = tax_rate;
  s.propensity_wealth = propensity_wealth;
  s.deposits = deposits;

  const auto bank = bank_portfolio(deposits, in.loans, fin);
  s.reserves = bank.reserves;
  s.bank_bills = bank.bills;
  s.advances = bank.advances;
  s.cb_bills = in.bills - bank.bills;
  s.cb_profits = fin.bill_rate * (s.cb_bills - s.reserves + s.advances);
  s.bank_profits = bank_profits({in.loans, bank.bills, bank.reserves, deposits, bank.advances}, fin);
  s.taxes = household_tax(in.wage_bill, tax_rate);
  s.disposable_income =
      disposable_income(in.wage_bill, 0.0, in.firm_profits, s.bank_profits, deposits, s.taxes, fin.deposit_rate);

  const double spending = real_consumption(s.disposable_income, deposits, in.price, fin) * in.price;
  residual[0] = (spending - in.consumption) / std::max(1.0, in.consumption);
  residual[1] = (government_bills(in.bills, in.gov_spending, 0.0, s.taxes, s.cb_profits, fin.bill_rate) - in.bills) /
                std::max(1.0, in.bills);
  residual[2] = (s.reserves - s.cb_bills - s.advances) / std::max(1.0, s.reserves);
  s.household_check = s.disposable_income - in.consumption;
  return s;
}

// Gaussian elimination with partial pivoting, in place.
bool solve3(std::array<std::array<double, 3>, 3> a, std::array<double, 3>& b) {
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < 1e-300) return false;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (int r = col + 1; r < 3; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int k = col; k < 3; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  for (int r = 2; r >= 0; --r) {
    double v = b[r];
    for (int k = r + 1; k < 3; ++k) v -= a[r][k] * b[k];
    b[r] = v / a[r][r];
  }
  return true;
}

double max_abs(const std::array<double, 3>& r) {
  return std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2])});
}

std::vector<std::size_t> type_counts(const std::array<double, kValueTypeCount>& shares, std::size_t n) {
  const double total = std::accumulate(shares.begin(), shares.end(), 0.0);
  std::vector<std::size_t> counts(kValueTypeCount, 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t a = 0; a < kValueTypeCount; ++a) {
    const double exact = shares[a] / total * static_cast<double>(n);
    counts[a] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[a];
    remainders.emplace_back(exact - std::floor(exact), a);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[remainders[k % kValueTypeCount].second];
  return counts;
}

}  // namespace

StationaryState solve_stationary_state(const ScenarioConfig& config) {
  const auto in = stationary_inputs(config);
  std::array<double, 3> x = {config.finance.tax_rate, config.finance.propensity_wealth, in.bills + in.loans};
  std::array<double, 3> r{};
  StationaryState s = evaluate_stationary(config, in, x[0], x[1], x[2], r);

  int iter = 0;
  for (; iter < 50 && max_abs(r) > 1e-13; ++iter) {
    std::array<std::array<double, 3>, 3> jac{};
    for (int k = 0; k < 3; ++k) {
      auto xp = x;
      const double h = 1e-7 * std::max(1.0, std::abs(x[k]));
      xp[k] += h;
      std::array<double, 3> rp{};
      evaluate_stationary(config, in, xp[0], xp[1], xp[2], rp);
      for (int i = 0; i < 3; ++i) jac[i][k] = (rp[i] - r[i]) / h;
    }
    std::array<double, 3> delta = {-r[0], -r[1], -r[2]};
    if (!solve3(jac, delta)) break;
    for (int k = 0; k < 3; ++k) x[k] += delta[k];
    s = evaluate_stationary(config, in, x[0], x[1], x[2], r);
  }
  s.iterations = iter;
  s.residual = max_abs(r);
  if (!(s.residual <= 1e-8)) {
    std::ostringstream msg;
    msg << "stationary-state solve did not converge: residuals consumption=" << r[0] << " bills=" << r[1]
        << " reserves=" << r[2];
    throw InitializationError(msg.str());
  }
  if (s.propensity_wealth < 0.0 || s.tax_rate < 0.0) {
    throw InitializationError("stationary state needs a negative tax rate or wealth propensity");
  }
  return s;
}

const std::vector<std::pair<std::string, double>>& reference_initial_values() {
  static const std::vector<std::pair<std::string, double>> values = {
      {"output", 558.787517},         {"wage", 8.0},
      {"wage_bill", 4000.0},          {"unit_cost", 7.158356},
      {"price", 10.021698},           {"gov_spending", 1002.16984},
      {"consumption_real", 458.787517}, {"consumption", 4597.830153},
      {"taxes", 720.0},               {"disposable_income", 4597.830153},
      {"deposits", 4502.908765},      {"loans", 4000.0},
      {"inventories", 4000.0},        {"inventories_real", 558.787517},
      {"firm_profits", 1580.0},       {"reserves", 1576.018067},
      {"bank_bills", 0.0},            {"advances", 1073.109302},
      {"bank_profits", 8.5029087},    {"cb_bills", 502.9087653},
      {"cb_profits", 0.0},            {"bills", 502.9087653},
  };
  return values;
}

double stationary_field(const StationaryState& s, const std::string& name) {
  static const std::vector<std::pair<std::string, double StationaryState::*>> fields = {
      {"output", &StationaryState::output},
      {"wage", &StationaryState::wage},
      {"wage_bill", &StationaryState::wage_bill},
      {"unit_cost", &StationaryState::unit_cost},
      {"price", &StationaryState::price},
      {"gov_spending", &StationaryState::gov_spending},
      {"consumption_real", &StationaryState::consumption_real},
      {"consumption", &StationaryState::consumption},
      {"taxes", &StationaryState::taxes},
      {"tax_rate", &StationaryState::tax_rate},
      {"disposable_income", &StationaryState::disposable_income},
      {"deposits", &StationaryState::deposits},
      {"loans", &StationaryState::loans},
      {"inventories", &StationaryState::inventories},
      {"inventories_real", &StationaryState::inventories_real},
      {"firm_profits", &StationaryState::firm_profits},
      {"reserves", &StationaryState::reserves},
      {"bank_bills", &StationaryState::bank_bills},
      {"advances", &StationaryState::advances},
      {"bank_profits", &StationaryState::bank_profits},
      {"cb_bills", &StationaryState::cb_bills},
      {"cb_profits", &StationaryState::cb_profits},
      {"bills", &StationaryState::bills},
      {"propensity_wealth", &StationaryState::propensity_wealth},
  };
  for (const auto& [key, member] : fields)
    if (key == name) return s.*member;
  throw ConfigError("unknown stationary-state field '" + name + "'");
}

std::vector<Deviation> stationary_deviations(const StationaryState& s, double tol_rel) {
  std::vector<Deviation> out;
  for (const auto& [name, reference] : reference_initial_values()) {
    const double solved = stationary_field(s, name);
    if (std::abs(solved - reference) > tol_rel * std::max(1.0, std::abs(reference))) {
      out.push_back({name, reference, solved});
    }
  }
  return out;
}

const std::vector<std::string>& snapshot_columns() {
  static const std::vector<std::string> columns = {
      "employed",       "employed_start",   "unemployment_spell", "employment_spell", "satisfaction",
      "satisfaction_O", "satisfaction_C",   "satisfaction_SE",    "satisfaction_ST",  "job_quality",
      "job_quality_O",  "job_quality_C",    "job_quality_SE",     "job_quality_ST",   "monitoring",
      "pfp_mix",        "bonus_rate",       "real_gdp",           "real_consumption", "labour_demand",
      "price",          "median_wage",      "benefits",           "deposits",         "bills",
      "redundant_residual", "sfc_max_residual"};
  return columns;
}

Economy::Economy(const ScenarioConfig& config, std::uint64_t seed) : config_(config), rng_(seed) {
  validate(config_);
  initialise();
}

void Economy::initialise() {
  stationary_ = solve_stationary_state(config_);
  config_.finance.tax_rate = stationary_.tax_rate;
  config_.finance.propensity_wealth = stationary_.propensity_wealth;

  const auto n = static_cast<std::size_t>(config_.households);
  const auto nf = static_cast<std::size_t>(config_.firms);

  std::vector<ValueType> types;
  types.reserve(n);
  const auto counts = type_counts(config_.type_shares, n);
  for (std::size_t a = 0; a < kValueTypeCount; ++a) types.insert(types.end(), counts[a], static_cast<ValueType>(a));
  rng_.shuffle(types.begin(), types.end());

  households_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    households_[i].id = static_cast<HouseholdId>(i);
    households_[i].values = draw_value_profile(types[i], rng_);
  }
  network_ = build_friendship_network(types, config_.homophily, config_.mean_degree, rng_);
  intensity_ = InteractionMatrix(n);

  ManagementStrategy strategy;
  strategy.monitoring = config_.strategy.initial_monitoring;
  strategy.pfp_mix = config_.strategy.initial_pfp_mix;
  strategy.bonus_rate = 0.0;
  strategy.base_wage = config_.base_wage;

  firms_.resize(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    firms_[f].id = static_cast<FirmId>(f);
    firms_[f].strategy = strategy;
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto& h = households_[i];
    const auto f = static_cast<FirmId>(i % nf);
    h.employer = f;
    h.hire_step = 0;
    h.ever_employed = true;
    h.base_satisfaction = base_satisfaction(h.values, strategy, config_.kernel);
    h.satisfaction = h.base_satisfaction;
    firms_[static_cast<std::size_t>(f)].roster.push_back(h.id);
  }

  // Cooperation norm at its fixed point: the roster's mean cooperation is
  // E (a + b norm) with E the mean non-shirking time.
  const auto& k = config_.kernel;
  const double span = k.coop_share_max - k.coop_share_min;
  const double kappa = config_.interdependence;
  const double firm_output = stationary_.output / static_cast<double>(nf);
  double pi_max = 0.0;
  for (auto& f : firms_) {
    double effort = 0.0;
    for (auto i : f.roster) effort += 1.0 - allocate_time(households_[i].satisfaction, strategy, 0.0, k).shirking;
    effort /= static_cast<double>(f.roster.size());
    const double a = k.coop_share_min + span * k.coop_weight_pfp * strategy.pfp_mix;
    const double b = span * (1.0 - k.coop_weight_pfp);
    f.cooperation_norm = effort * a / (1.0 - effort * b);

    double capacity = 0.0;
    for (auto i : f.roster) {
      auto& h = households_[i];
      h.shares = allocate_time(h.satisfaction, strategy, f.cooperation_norm, k);
      capacity += individual_output(h.satisfaction, h.shares.personal, f.cooperation_norm, kappa);
    }
    if (!(capacity > 0.0)) throw InitializationError("firm " + std::to_string(f.id) + " has no productive capacity");
    pi_max = std::max(pi_max, firm_output / capacity);
  }
  productivity_max_ = pi_max;

  const double hh_count = static_cast<double>(n);
  for (auto& f : firms_) {
    double potential = 0.0;
    for (auto i : f.roster) {
      auto& h = households_[i];
      h.productivity = productivity_max_ * h.satisfaction;
      h.output = individual_output(h.productivity, h.shares.personal, f.cooperation_norm, kappa);
      potential += h.output;
      h.wage = reward(h.output, 0.0, strategy);
      h.wage_prev = h.wage;
      h.last_wage = h.wage;
    }
    for (std::size_t x = 0; x < f.roster.size(); ++x) {
      for (std::size_t y = x + 1; y < f.roster.size(); ++y) {
        const auto i = f.roster[x];
        const auto j = f.roster[y];
        intensity_.set(i, j, std::min(households_[i].shares.cooperative, households_[j].shares.cooperative));
      }
    }
    const double share = 1.0 / static_cast<double>(nf);
    f.potential_output = potential;
    f.mean_output = potential / static_cast<double>(f.roster.size());
    for (auto i : f.roster) households_[i].bonus = reward(households_[i].output, f.mean_output, strategy) - strategy.base_wage;
    f.output = firm_output;
    f.planned_output = firm_output;
    f.sales = firm_output;
    f.expected_sales = firm_output;
    f.inventory = stationary_.inventories_real * share;
    f.inventory_target = f.inventory;
    f.expected_inventory = f.inventory;
    f.unit_cost = stationary_.unit_cost;
    f.price = stationary_.price;
    f.nominal_inventory = f.inventory * f.unit_cost;
    f.loans = f.nominal_inventory;
    f.wage_bill = config_.base_wage * static_cast<double>(f.roster.size());
    f.wage = config_.base_wage;
    f.revenue = (stationary_.consumption + stationary_.gov_spending) * share;
    f.profits = stationary_.firm_profits * share;
    f.labour_demand = static_cast<int>(f.roster.size());
  }

  for (auto& h : households_) {
    h.deposits = stationary_.deposits / hh_count;
    h.disposable_income = stationary_.disposable_income / hh_count;
    h.consumption_real = stationary_.consumption_real / hh_count;
    h.consumption_nominal = stationary_.consumption / hh_count;
    h.tax = stationary_.taxes / hh_count;
    events_.push_back({0, MatchKind::hire, h.id, h.employer});
  }

  stocks_.loans = stationary_.loans;
  stocks_.inventories = stationary_.inventories;
  stocks_.deposits = stationary_.deposits;
  stocks_.reserves = stationary_.reserves;
  stocks_.bank_bills = stationary_.bank_bills;
  stocks_.advances = stationary_.advances;
  stocks_.cb_bills = stationary_.cb_bills;
  stocks_.bills = stationary_.bills;
  stocks_.nw_households = stocks_.deposits;
  stocks_.nw_firms = stocks_.inventories - stocks_.loans;
  stocks_.nw_bank = stocks_.loans + stocks_.reserves + stocks_.bank_bills - stocks_.deposits - stocks_.advances;
  stocks_.gov_debt = stocks_.bills;

  flows_.consumption = stationary_.consumption;
  flows_.gov_spending = stationary_.gov_spending;
  flows_.wage_bill = stationary_.wage_bill;
  flows_.taxes = stationary_.taxes;
  flows_.firm_profits = stationary_.firm_profits;
  flows_.bank_profits = stationary_.bank_profits;
  flows_.cb_profits = stationary_.cb_profits;
  flows_.disposable_income = stationary_.disposable_income;
  flows_.real_output = stationary_.output;
  flows_.real_consumption = stationary_.consumption_real;
  flows_.median_wage = config_.base_wage;

  const auto& fin = config_.finance;
  record_flows(stocks_, flows_, fin.bill_rate * stocks_.bills, fin.bill_rate * stocks_.bank_bills,
               fin.bill_rate * stocks_.cb_bills, fin.loan_rate * stocks_.loans, fin.bill_rate * stocks_.reserves,
               fin.bill_rate * stocks_.advances, fin.deposit_rate * stocks_.deposits);
  report_ = check_consistency(balance_sheet(), flow_matrix_, config_.sfc_tolerance);
}

BalanceSheet Economy::balance_sheet() const {
  using I = Instrument;
  using H = Holder;
  BalanceSheet bs;
  bs.set(I::inventories, H::firms, stocks_.inventories);
  bs.set(I::loans, H::firms, -stocks_.loans);
  bs.set(I::loans, H::bank, stocks_.loans);
  bs.set(I::deposits, H::households, stocks_.deposits);
  bs.set(I::deposits, H::bank, -stocks_.deposits);
  bs.set(I::bills, H::bank, stocks_.bank_bills);
  bs.set(I::bills, H::government, -stocks_.bills);
  bs.set(I::bills, H::central_bank, stocks_.cb_bills);
  bs.set(I::high_powered_money, H::bank, stocks_.reserves);
  bs.set(I::high_powered_money, H::central_bank, -stocks_.reserves);
  bs.set(I::advances, H::bank, -stocks_.advances);
  bs.set(I::advances, H::central_bank, stocks_.advances);
  bs.set(I::balance, H::firms, -stocks_.nw_firms);
  bs.set(I::balance, H::households, -stocks_.nw_households);
  bs.set(I::balance, H::bank, -stocks_.nw_bank);
  bs.set(I::balance, H::government, stocks_.gov_debt);
  return bs;
}

void Economy::record_flows(const SectorStocks& prev, const SectorFlows& fl, double bill_interest_gov,
                           double bill_interest_bank, double bill_interest_cb, double loan_interest,
                           double reserve_interest, double advance_interest, double deposit_interest) {
  using F = Flow;
  using A = Account;
  auto& m = flow_matrix_;
  m.clear();
  m.record(F::consumption, A::households, -fl.consumption);
  m.record(F::consumption, A::firms_current, fl.consumption);
  m.record(F::government_expenditure, A::government, -fl.gov_spending);
  m.record(F::government_expenditure, A::firms_current, fl.gov_spending);
  m.record(F::change_in_inventories, A::firms_current, fl.delta_inventories);
  m.record(F::change_in_inventories, A::firms_capital, -fl.delta_inventories);
  m.record(F::wages, A::firms_current, -fl.wage_bill);
  m.record(F::wages, A::households, fl.wage_bill);
  m.record(F::taxes, A::government, fl.taxes);
  m.record(F::taxes, A::households, -fl.taxes);
  m.record(F::unemployment_benefits, A::government, -fl.benefits);
  m.record(F::unemployment_benefits, A::households, fl.benefits);
  m.record(F::interest_bills, A::government, -bill_interest_gov);
  m.record(F::interest_bills, A::bank_current, bill_interest_bank);
  m.record(F::interest_bills, A::cb_current, bill_interest_cb);
  m.record(F::interest_loans, A::firms_current, -loan_interest);
  m.record(F::interest_loans, A::bank_current, loan_interest);
  m.record(F::interest_reserves, A::bank_current, reserve_interest);
  m.record(F::interest_reserves, A::cb_current, -reserve_interest);
  m.record(F::interest_advances, A::bank_current, -advance_interest);
  m.record(F::interest_advances, A::cb_current, advance_interest);
  m.record(F::interest_deposits, A::households, deposit_interest);
  m.record(F::interest_deposits, A::bank_current, -deposit_interest);
  m.record(F::profits_firms, A::firms_current, -fl.firm_profits);
  m.record(F::profits_firms, A::households, fl.firm_profits);
  m.record(F::profits_banks, A::bank_current, -fl.bank_profits);
  m.record(F::profits_banks, A::households, fl.bank_profits);
  m.record(F::profits_cb, A::cb_current, -fl.cb_profits);
  m.record(F::profits_cb, A::government, fl.cb_profits);
  m.record(F::change_bills, A::government, stocks_.bills - prev.bills);
  m.record(F::change_bills, A::bank_capital, -(stocks_.bank_bills - prev.bank_bills));
  m.record(F::change_bills, A::cb_capital, -(stocks_.cb_bills - prev.cb_bills));
  m.record(F::change_loans, A::firms_capital, stocks_.loans - prev.loans);
  m.record(F::change_loans, A::bank_capital, -(stocks_.loans - prev.loans));
  m.record(F::change_deposits, A::households, -(stocks_.deposits - prev.deposits));
  m.record(F::change_deposits, A::bank_capital, stocks_.deposits - prev.deposits);
  m.record(F::change_reserves, A::bank_capital, -(stocks_.reserves - prev.reserves));
  m.record(F::change_reserves, A::cb_capital, stocks_.reserves - prev.reserves);
  m.record(F::change_advances, A::bank_capital, stocks_.advances - prev.advances);
  m.record(F::change_advances, A::cb_capital, -(stocks_.advances - prev.advances));
}

void Economy::employ(Household& h, FirmState& f, MatchKind kind, int step) {
  h.employer = f.id;
  h.hire_step = step;
  h.ever_employed = true;
  intensity_.reset(h.id);
  h.base_satisfaction = base_satisfaction(h.values, f.strategy, config_.kernel);
  h.satisfaction = h.base_satisfaction;
  h.productivity = productivity_max_ * h.satisfaction;
  h.bonus = f.strategy.bonus_rate * f.mean_output;
  f.roster.insert(std::upper_bound(f.roster.begin(), f.roster.end(), h.id), h.id);
  events_.push_back({step, kind, h.id, f.id});
}

void Economy::separate(Household& h, MatchKind kind, int step) {
  auto& f = firms_[static_cast<std::size_t>(h.employer)];
  f.roster.erase(std::lower_bound(f.roster.begin(), f.roster.end(), h.id));
  events_.push_back({step, kind, h.id, f.id});
  h.last_employer = h.employer;
  h.employer = kNoFirm;
  h.separation_step = step;
}

void Economy::step() {
  const int t = time_ + 1;
  const auto& fin = config_.finance;
  const auto& kern = config_.kernel;
  const std::size_t n = households_.size();
  const SectorStocks prev = stocks_;

  int employed_start = 0;
  std::vector<HouseholdId> pool;
  for (const auto& h : households_) {
    if (h.employed()) ++employed_start;
    else pool.push_back(h.id);
  }

  // 1. Prices, expectations, planned output, labour demand.
  double staff = 0.0;
  double capacity = 0.0;
  for (const auto& f : firms_) {
    staff += static_cast<double>(f.roster.size());
    if (!f.roster.empty()) capacity += f.mean_output * static_cast<double>(f.roster.size());
  }
  const double fallback_output = staff > 0.0 ? capacity / staff : 0.0;
  for (auto& f : firms_) {
    f.price = set_price(f.unit_cost, config_.markup);
    f.expected_sales = expected_sales(f.sales, f.expected_sales, config_.sales_weight, config_.expectations);
    const auto plan =
        plan_output(f.expected_sales, f.inventory, config_.inventory_ratio, config_.inventory_adjustment, kInf);
    f.inventory_target = plan.inventory_target;
    f.expected_inventory = plan.expected_inventory;
    f.planned_output = plan.output;
    f.labour_demand =
        labour_demand(plan.output, f.mean_output, fallback_output, static_cast<int>(f.roster.size()));
  }

  // 2. Firing, referral hiring, signalling hires.
  for (auto& f : firms_) {
    const int current = static_cast<int>(f.roster.size());
    if (f.labour_demand < current) {
      const auto fired = fire(current - f.labour_demand, f.roster, households_, intensity_, t, config_.firing);
      for (auto i : fired) separate(households_[i], MatchKind::fire, t);
    } else if (f.labour_demand > current) {
      std::vector<HouseholdId> eligible;
      for (auto i : pool)
        if (in_hiring_pool(households_[i], f.id, t)) eligible.push_back(i);
      const int wanted = f.labour_demand - current;
      const auto hired = hire(f.id, wanted, eligible, households_, network_, t);
      for (auto i : hired) employ(households_[i], f, MatchKind::hire, t);
      const int vacancies = wanted - static_cast<int>(hired.size());
      if (vacancies > 0) {
        std::vector<HouseholdId> expired;
        for (auto i : eligible) {
          const auto& h = households_[i];
          if (!h.employed() && benefits_expired(h, config_.benefits, t)) expired.push_back(i);
        }
        for (auto i : hire_signalling(vacancies, expired, households_)) {
          employ(households_[i], f, MatchKind::signal_hire, t);
        }
      }
    }
  }

  // 3. Time allocation, production, wages, monitoring, satisfaction,
  //    strategy review, interaction intensity.
  for (auto& h : households_) {
    h.wage_prev = h.wage;
    h.wage = 0.0;
    h.output = 0.0;
    h.benefit = 0.0;
    if (!h.employed()) h.shares = TimeShares{0.0, 0.0, 0.0};
  }
  std::vector<double> cooperation(n, 0.0);
  std::vector<FirmId> employer(n, kNoFirm);
  std::vector<double> outputs, rewards, shirking;
  for (auto& f : firms_) {
    const auto& roster = f.roster;
    const std::size_t k = roster.size();
    outputs.assign(k, 0.0);
    rewards.assign(k, 0.0);
    shirking.assign(k, 0.0);
    if (k == 0) {
      const auto prod = produce_and_pay({}, {}, f.planned_output, f.unit_cost);
      f.potential_output = 0.0;
      f.output = 0.0;
      f.wage_bill = 0.0;
      f.wage = 0.0;
      f.unit_cost = prod.unit_cost;
      f.mean_output = 0.0;
      continue;
    }
    double coop_sum = 0.0;
    for (std::size_t x = 0; x < k; ++x) {
      auto& h = households_[roster[x]];
      h.shares = allocate_time(h.satisfaction, f.strategy, f.cooperation_norm, kern);
      coop_sum += h.shares.cooperative;
      shirking[x] = h.shares.shirking;
    }
    const double team_cooperation = coop_sum / static_cast<double>(k);
    double output_sum = 0.0;
    for (std::size_t x = 0; x < k; ++x) {
      const auto& h = households_[roster[x]];
      outputs[x] = individual_output(h.productivity, h.shares.personal, team_cooperation, config_.interdependence);
      output_sum += outputs[x];
    }
    const double mean_output = output_sum / static_cast<double>(k);
    for (std::size_t x = 0; x < k; ++x) {
      auto& h = households_[roster[x]];
      const int tenure = t - h.hire_step;
      if (!config_.strategy.periodic_appraisal || (tenure > 0 && tenure % config_.strategy.review_period == 0)) {
        h.bonus = reward(outputs[x], mean_output, f.strategy) - f.strategy.base_wage;
      }
      rewards[x] = f.strategy.base_wage + h.bonus;
    }
    const auto prod = produce_and_pay(outputs, rewards, f.planned_output, f.unit_cost);
    f.potential_output = prod.potential_output;
    f.output = prod.output;
    f.wage_bill = prod.wage_bill;
    f.wage = prod.wage;
    f.unit_cost = prod.unit_cost;
    f.mean_output = mean_output;
    f.cooperation_norm = team_cooperation;

    std::vector<HouseholdId> warned;
    if (config_.monitoring) {
      warned = monitor_and_warn(roster, shirking, f.strategy.monitoring, kern.shirk_tolerance, rng_);
    }
    for (std::size_t x = 0; x < k; ++x) {
      auto& h = households_[roster[x]];
      h.output = outputs[x];
      h.wage = rewards[x];
      h.last_wage = rewards[x];
      const bool was_warned = std::binary_search(warned.begin(), warned.end(), h.id);
      if (was_warned) h.warnings.push_back(t);
      const auto upd = update_satisfaction(h.satisfaction, h.base_satisfaction, was_warned, productivity_max_, kern);
      h.satisfaction = upd.satisfaction;
      h.productivity = upd.productivity;
      cooperation[h.id] = h.shares.cooperative;
      employer[h.id] = f.id;
    }

    f.hill.window_output += mean_output;
    ++f.hill.window_samples;
    if (config_.strategy.adapt && t - f.hill.last_review_step >= config_.strategy.review_period) {
      const double performance = f.hill.window_output / f.hill.window_samples;
      const int gap = f.labour_demand - static_cast<int>(k);
      const auto next = adapt_strategy(f.strategy, f.hill, performance, config_.strategy, gap);
      f.hill.window_output = 0.0;
      f.hill.window_samples = 0;
      f.hill.last_review_step = t;
      const bool changed = next.monitoring != f.strategy.monitoring || next.pfp_mix != f.strategy.pfp_mix ||
                           next.bonus_rate != f.strategy.bonus_rate;
      f.strategy = next;
      if (changed) {
        for (auto i : roster) {
          households_[i].base_satisfaction = base_satisfaction(households_[i].values, f.strategy, kern);
        }
      }
    }
  }
  intensity_.update(employer, cooperation, kern.intensity_rate);

  // 4. Benefits, taxes, consumption with homogeneous rationing.
  const double median = median_wage(households_);
  const std::size_t nf = firms_.size();
  std::vector<std::size_t> seller(n);
  std::vector<double> demand(nf, 0.0);
  double benefits_total = 0.0;
  double taxes_total = 0.0;
  for (auto& h : households_) {
    h.tax = household_tax(h.wage_prev, fin.tax_rate);
    h.benefit = h.employed() ? 0.0 : benefits(h, config_.benefits, median, t);
    benefits_total += h.benefit;
    taxes_total += h.tax;
    const std::size_t s = config_.matching == MatchingMode::random ? rng_.index(nf) : h.id % nf;
    seller[h.id] = s;
    const double price = firms_[s].price;
    const double wanted = std::max(0.0, real_consumption(h.disposable_income, h.deposits, price, fin));
    const double cap = consumption_cap(h.deposits, h.wage, h.benefit, h.tax);
    h.consumption_nominal = std::min(wanted * price, cap);
    h.consumption_real = h.consumption_nominal / price;
    demand[s] += h.consumption_real;
  }
  std::vector<double> factor(nf, 1.0);
  std::vector<double> revenue(nf, 0.0);
  std::vector<double> sales(nf, 0.0);
  double gov_spending = 0.0;
  for (std::size_t f = 0; f < nf; ++f) {
    demand[f] += fin.gov_purchases;
    factor[f] = rationing_factor(demand[f], firms_[f].output + firms_[f].inventory);
    const double gov_real = fin.gov_purchases * factor[f];
    const double gov_nominal = gov_real * firms_[f].price;
    gov_spending += gov_nominal;
    revenue[f] += gov_nominal;
    sales[f] += gov_real;
  }
  double consumption_total = 0.0;
  double consumption_real_total = 0.0;
  for (auto& h : households_) {
    const std::size_t s = seller[h.id];
    if (factor[s] < 1.0) {
      h.consumption_real *= factor[s];
      h.consumption_nominal = h.consumption_real * firms_[s].price;
    }
    revenue[s] += h.consumption_nominal;
    sales[s] += h.consumption_real;
    consumption_total += h.consumption_nominal;
    consumption_real_total += h.consumption_real;
  }

  // 5. Inventories, loans, profits, bank profits, household income, bank portfolio.
  double delta_inventories = 0.0;
  double firm_profits = 0.0;
  double firm_saving = 0.0;
  double real_output = 0.0;
  for (std::size_t f = 0; f < nf; ++f) {
    auto& firm = firms_[f];
    SettleInput in;
    in.sales = sales[f];
    in.output = firm.output;
    in.inventory_prev = firm.inventory;
    in.unit_cost = firm.unit_cost;
    in.nominal_inventory_prev = firm.nominal_inventory;
    in.loans_prev = firm.loans;
    in.revenue = revenue[f];
    in.wage_bill = firm.wage_bill;
    in.loan_rate = fin.loan_rate;
    const auto st = settle(in);
    firm_saving += in.revenue + st.delta_nominal_inventory - in.wage_bill - fin.loan_rate * in.loans_prev - st.profits;
    firm.sales = sales[f];
    firm.revenue = revenue[f];
    firm.inventory = st.inventory;
    firm.nominal_inventory = st.nominal_inventory;
    firm.loans = st.loans;
    firm.profits = st.profits;
    delta_inventories += st.delta_nominal_inventory;
    firm_profits += st.profits;
    real_output += firm.output;
  }
  const BankStocks bank_prev{prev.loans, prev.bank_bills, prev.reserves, prev.deposits, prev.advances};
  const double bank_income = bank_profits(bank_prev, fin);
  const double firm_share = firm_profits / static_cast<double>(n);
  const double bank_share = bank_income / static_cast<double>(n);
  double income_total = 0.0;
  double deposits_total = 0.0;
  double wages_paid = 0.0;
  for (auto& h : households_) {
    const double yd =
        disposable_income(h.wage, h.benefit, firm_share, bank_share, h.deposits, h.tax, fin.deposit_rate);
    h.deposits = h.deposits + yd - h.consumption_nominal;
    h.disposable_income = yd;
    income_total += yd;
    deposits_total += h.deposits;
    wages_paid += h.wage;
  }
  double loans_total = 0.0;
  double inventories_total = 0.0;
  for (const auto& f : firms_) {
    loans_total += f.loans;
    inventories_total += f.nominal_inventory;
  }
  const auto portfolio = bank_portfolio(deposits_total, loans_total, fin);

  // 6. Central-bank profits, bills issuance and allocation.
  const double cb_profits = fin.bill_rate * (prev.cb_bills - prev.reserves + prev.advances);
  const double bills = government_bills(prev.bills, gov_spending, benefits_total, taxes_total, cb_profits, fin.bill_rate);
  const auto cb = central_bank_step(bills, portfolio.bills, prev.reserves, prev.advances, prev.cb_bills, fin.bill_rate);

  // 7. Quitting, evaluated on the state left by the markets.
  if (config_.quitting) {
    std::vector<std::vector<HouseholdId>> rosters;
    rosters.reserve(nf);
    for (const auto& f : firms_) rosters.push_back(f.roster);
    for (auto i : quit(households_, rosters, network_, intensity_, t)) separate(households_[i], MatchKind::quit, t);
  }
  spell_accounting(households_);

  stocks_.loans = loans_total;
  stocks_.inventories = inventories_total;
  stocks_.deposits = deposits_total;
  stocks_.reserves = portfolio.reserves;
  stocks_.bank_bills = portfolio.bills;
  stocks_.advances = portfolio.advances;
  stocks_.bills = bills;
  stocks_.cb_bills = cb.bills;

  const double bill_interest_gov = fin.bill_rate * prev.bills;
  const double bill_interest_bank = fin.bill_rate * prev.bank_bills;
  const double bill_interest_cb = fin.bill_rate * prev.cb_bills;
  const double loan_interest = fin.loan_rate * prev.loans;
  const double reserve_interest = fin.bill_rate * prev.reserves;
  const double advance_interest = fin.bill_rate * prev.advances;
  const double deposit_interest = fin.deposit_rate * prev.deposits;

  stocks_.nw_households = prev.nw_households + income_total - consumption_total;
  stocks_.nw_firms = prev.nw_firms + firm_saving;
  stocks_.nw_bank = prev.nw_bank + (loan_interest + bill_interest_bank + reserve_interest - advance_interest -
                                    deposit_interest - bank_income);
  stocks_.gov_debt =
      prev.gov_debt + gov_spending + benefits_total + bill_interest_gov - taxes_total - cb.profits;

  flows_.consumption = consumption_total;
  flows_.gov_spending = gov_spending;
  flows_.delta_inventories = delta_inventories;
  flows_.wage_bill = wages_paid;
  flows_.taxes = taxes_total;
  flows_.benefits = benefits_total;
  flows_.firm_profits = firm_profits;
  flows_.bank_profits = bank_income;
  flows_.cb_profits = cb.profits;
  flows_.disposable_income = income_total;
  flows_.real_output = real_output;
  flows_.real_consumption = consumption_real_total;
  flows_.median_wage = median;

  record_flows(prev, flows_, bill_interest_gov, bill_interest_bank, bill_interest_cb, loan_interest,
               reserve_interest, advance_interest, deposit_interest);

  report_ = check_consistency(balance_sheet(), flow_matrix_, config_.sfc_tolerance);
  time_ = t;
  if (on_consistency) on_consistency(t, report_);
  take_snapshot(employed_start);
  if (config_.strict_sfc && !report_.ok()) {
    const auto* worst = report_.worst();
    throw ConsistencyError(t, worst->name, worst->residual);
  }
}

void Economy::take_snapshot(int employed_at_start) {
  const std::size_t n = households_.size();
  std::array<double, kValueTypeCount> sat{}, base{}, count{};
  double sat_all = 0.0;
  double base_all = 0.0;
  int employed = 0;
  for (const auto& h : households_) {
    const auto a = static_cast<std::size_t>(h.values.type);
    sat[a] += h.satisfaction;
    base[a] += h.base_satisfaction;
    count[a] += 1.0;
    sat_all += h.satisfaction;
    base_all += h.base_satisfaction;
    if (h.employed()) ++employed;
  }
  double monitoring = 0.0, pfp = 0.0, bonus = 0.0, demand = 0.0, price = 0.0;
  for (const auto& f : firms_) {
    monitoring += f.strategy.monitoring;
    pfp += f.strategy.pfp_mix;
    bonus += f.strategy.bonus_rate;
    demand += f.labour_demand;
    price += f.price;
  }
  const double nf = static_cast<double>(firms_.size());
  const auto type_mean = [&](const std::array<double, kValueTypeCount>& v, std::size_t a) {
    return count[a] > 0.0 ? v[a] / count[a] : 0.0;
  };
  double worst = 0.0;
  for (const auto& r : report_.entries) worst = std::max(worst, std::abs(r.residual) / r.scale);
  const auto* redundant = report_.find("redundant_identity");

  Snapshot s;
  s.step = time_;
  s.values = {static_cast<double>(employed),
              static_cast<double>(employed_at_start),
              normalized_unemployment_spell(households_, time_),
              normalized_employment_spell(households_, time_),
              sat_all / static_cast<double>(n),
              type_mean(sat, 0),
              type_mean(sat, 1),
              type_mean(sat, 2),
              type_mean(sat, 3),
              base_all / static_cast<double>(n),
              type_mean(base, 0),
              type_mean(base, 1),
              type_mean(base, 2),
              type_mean(base, 3),
              monitoring / nf,
              pfp / nf,
              bonus / nf,
              flows_.real_output,
              flows_.real_consumption,
              demand,
              price / nf,
              flows_.median_wage,
              flows_.benefits,
              stocks_.deposits,
              stocks_.bills,
              redundant ? redundant->residual : 0.0,
              worst};
  snapshots_.push_back(std::move(s));
}

ReplicateResult run_replicate(const ScenarioConfig& config, int replicate) {
  ReplicateResult result;
  result.replicate = replicate;
  result.seed = replicate_seed(config.seed, static_cast<std::uint64_t>(replicate));
  try {
    Economy economy(config, result.seed);
    economy.on_consistency = [&](int step, const ConsistencyReport& report) {
      if (!report.ok()) ++result.flagged_steps;
      for (const auto& r : report.entries) {
        result.max_relative_residual = std::max(result.max_relative_residual, std::abs(r.residual) / r.scale);
      }
      if (config.consistency_log) {
        std::ostringstream row;
        write_consistency_csv(row, step, report);
        result.consistency_rows.push_back(row.str());
      }
    };
    try {
      for (int s = 0; s < config.steps; ++s) economy.step();
      result.completed = true;
    } catch (const ConsistencyError& e) {
      result.sfc_failure = true;
      result.failed_step = e.step();
      result.failed_residual = e.residual();
      result.error = e.what();
    } catch (const std::exception& e) {
      result.failed_step = economy.time() + 1;
      result.error = e.what();
    }
    result.events = economy.events();
    result.snapshots = economy.snapshots();
  } catch (const std::exception& e) {
    result.error = e.what();
  }
  return result;
}

ScenarioResult run_scenario(const ScenarioConfig& config, int jobs) {
  validate(config);
  ScenarioResult out;
  out.config = config;
  out.replicates.resize(static_cast<std::size_t>(config.replicates));
  const int workers = std::max(1, std::min(jobs, config.replicates));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int r = next++; r < config.replicates; r = next++) {
      out.replicates[static_cast<std::size_t>(r)] = run_replicate(config, r);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  out.partial = std::any_of(out.replicates.begin(), out.replicates.end(),
                            [](const ReplicateResult& r) { return !r.completed; });
  return out;
}

}  // namespace ubsfc
