#pragma once

// Stationary-state initialisation, the seven-phase step and the replicate
// runner.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ubsfc/accounting.hpp"
#include "ubsfc/config.hpp"
#include "ubsfc/firms.hpp"
#include "ubsfc/household.hpp"
#include "ubsfc/labour_market.hpp"
#include "ubsfc/rng.hpp"

namespace ubsfc {

// Economy-wide totals at the stationary full-employment state.
struct StationaryState {
  double output = 0.0;
  double wage = 0.0;
  double wage_bill = 0.0;
  double unit_cost = 0.0;
  double price = 0.0;
  double gov_spending = 0.0;
  double consumption_real = 0.0;
  double consumption = 0.0;
  double taxes = 0.0;
  double tax_rate = 0.0;
  double disposable_income = 0.0;
  double deposits = 0.0;
  double loans = 0.0;
  double inventories = 0.0;
  double inventories_real = 0.0;
  double firm_profits = 0.0;
  double reserves = 0.0;
  double bank_bills = 0.0;
  double advances = 0.0;
  double bank_profits = 0.0;
  double cb_bills = 0.0;
  double cb_profits = 0.0;
  double bills = 0.0;
  double propensity_wealth = 0.0;

  int iterations = 0;
  double residual = 0.0;            // max scaled residual of the solved system
  double household_check = 0.0;     // Yd - C, the equation the solver does not use
};

struct Deviation {
  std::string name;
  double reference = 0.0;
  double solved = 0.0;
};

// Newton solve on (tax rate, wealth propensity, deposits) with output,
// wage and the debt ratio imposed. Throws InitializationError when the
// scaled residual stays above 1e-8.
StationaryState solve_stationary_state(const ScenarioConfig& config);

// Published initial values, keyed by the StationaryState field name.
const std::vector<std::pair<std::string, double>>& reference_initial_values();
double stationary_field(const StationaryState& s, const std::string& name);

// Entries whose solved value differs from the published one by more than
// tol_rel relative.
std::vector<Deviation> stationary_deviations(const StationaryState& s, double tol_rel = 1e-6);

struct SectorStocks {
  double loans = 0.0;
  double inventories = 0.0;
  double deposits = 0.0;
  double reserves = 0.0;
  double bank_bills = 0.0;
  double advances = 0.0;
  double cb_bills = 0.0;
  double bills = 0.0;
  double nw_households = 0.0;
  double nw_firms = 0.0;
  double nw_bank = 0.0;
  double gov_debt = 0.0;
};

struct SectorFlows {
  double consumption = 0.0;
  double gov_spending = 0.0;
  double delta_inventories = 0.0;
  double wage_bill = 0.0;
  double taxes = 0.0;
  double benefits = 0.0;
  double firm_profits = 0.0;
  double bank_profits = 0.0;
  double cb_profits = 0.0;
  double disposable_income = 0.0;
  double real_output = 0.0;
  double real_consumption = 0.0;
  double median_wage = 0.0;
};

// Column names of the per-step snapshot, in row order.
const std::vector<std::string>& snapshot_columns();

struct Snapshot {
  int step = 0;
  std::vector<double> values;  // aligned with snapshot_columns()
};

class Economy {
 public:
  Economy(const ScenarioConfig& config, std::uint64_t seed);

  // Advances one step. Throws ConsistencyError in strict mode when a
  // residual exceeds the tolerance, StructuralError when bills cannot clear.
  void step();

  int time() const { return time_; }
  const ScenarioConfig& config() const { return config_; }
  const StationaryState& stationary() const { return stationary_; }
  const std::vector<Household>& households() const { return households_; }
  const std::vector<FirmState>& firms() const { return firms_; }
  const FriendshipNetwork& network() const { return network_; }
  const InteractionMatrix& intensity() const { return intensity_; }
  const SectorStocks& stocks() const { return stocks_; }
  const SectorFlows& flows() const { return flows_; }
  const FlowMatrix& flow_matrix() const { return flow_matrix_; }
  BalanceSheet balance_sheet() const;
  const ConsistencyReport& last_report() const { return report_; }
  const std::vector<MatchEvent>& events() const { return events_; }
  const std::vector<Snapshot>& snapshots() const { return snapshots_; }
  double productivity_max() const { return productivity_max_; }

  // Called after every consistency check (strict mode throws after it).
  std::function<void(int, const ConsistencyReport&)> on_consistency;

 private:
  void initialise();
  void separate(Household& h, MatchKind kind, int step);
  void employ(Household& h, FirmState& f, MatchKind kind, int step);
  void record_flows(const SectorStocks& prev, const SectorFlows& fl, double bill_interest_gov,
                    double bill_interest_bank, double bill_interest_cb, double loan_interest, double reserve_interest,
                    double advance_interest, double deposit_interest);
  void take_snapshot(int employed_at_start);

  ScenarioConfig config_;
  Rng rng_;
  int time_ = 0;
  StationaryState stationary_;
  double productivity_max_ = 0.0;

  std::vector<Household> households_;
  std::vector<FirmState> firms_;
  FriendshipNetwork network_;
  InteractionMatrix intensity_;

  SectorStocks stocks_;
  SectorFlows flows_;
  FlowMatrix flow_matrix_;
  ConsistencyReport report_;
  std::vector<MatchEvent> events_;
  std::vector<Snapshot> snapshots_;
};

struct ReplicateResult {
  int replicate = 0;
  std::uint64_t seed = 0;
  bool completed = false;
  std::string error;
  int failed_step = 0;
  double failed_residual = 0.0;
  bool sfc_failure = false;
  std::vector<MatchEvent> events;
  std::vector<Snapshot> snapshots;
  std::size_t flagged_steps = 0;
  double max_relative_residual = 0.0;
  std::vector<std::string> consistency_rows;  // "step,row,residual" when logging
};

ReplicateResult run_replicate(const ScenarioConfig& config, int replicate);

struct ScenarioResult {
  ScenarioConfig config;
  std::vector<ReplicateResult> replicates;  // replicate order
  bool partial = false;
};

// Runs config.replicates replicates with seeds master ^ r on up to `jobs`
// threads; results are stored by replicate index.
ScenarioResult run_scenario(const ScenarioConfig& config, int jobs = 1);

}  // namespace ubsfc
