#pragma once

// Per-firm pricing, expectations, inventory planning, production with a
// potential-output cap, wage payment, loans and profits.

#include <span>
#include <vector>

#include "ubsfc/behavior.hpp"
#include "ubsfc/types.hpp"

namespace ubsfc {

enum class ExpectationMode { adaptive, as_written };

struct FirmState {
  FirmId id = 0;
  double price = 0.0;
  double unit_cost = 0.0;
  double wage = 0.0;
  double wage_bill = 0.0;
  double sales = 0.0;
  double expected_sales = 0.0;
  double inventory = 0.0;
  double inventory_target = 0.0;
  double expected_inventory = 0.0;
  double nominal_inventory = 0.0;
  double loans = 0.0;
  double profits = 0.0;
  double revenue = 0.0;
  double output = 0.0;
  double planned_output = 0.0;
  double potential_output = 0.0;
  double mean_output = 0.0;        // mean O of the roster at the last production
  double cooperation_norm = 0.0;   // lagged mean cooperation
  int labour_demand = 0;
  std::vector<HouseholdId> roster;  // sorted ascending
  ManagementStrategy strategy;
  HillClimbState hill;
};

// p = UC_{t-1} (1 + markup). Throws InitializationError for UC <= 0.
double set_price(double unit_cost_prev, double markup);

// adaptive:   s_exp = s_exp_prev + beta (s_prev - s_exp_prev)
// as_written: s_exp = beta s_prev + (1 - beta)(s_prev - s_exp_prev)
double expected_sales(double sales_prev, double expected_prev, double beta, ExpectationMode mode);

struct OutputPlan {
  double inventory_target = 0.0;
  double expected_inventory = 0.0;
  double output = 0.0;
};

// Leontief: y = min(s_exp + inv_exp - inv_prev, y_pot), floored at 0.
OutputPlan plan_output(double expected_sales, double inventory_prev, double inventory_ratio,
                       double inventory_adjustment, double potential_output);

struct Production {
  double potential_output = 0.0;
  double output = 0.0;
  double wage_bill = 0.0;
  double wage = 0.0;
  double unit_cost = 0.0;
};

// y_pot = sum O_j, y = min(planned, y_pot), WB = sum R_j, W = WB / n,
// UC = WB / y. With no output the previous unit cost is carried over.
Production produce_and_pay(std::span<const double> outputs, std::span<const double> rewards, double planned_output,
                           double unit_cost_prev);

struct SettleInput {
  double sales = 0.0;           // real, after rationing
  double output = 0.0;
  double inventory_prev = 0.0;
  double unit_cost = 0.0;
  double nominal_inventory_prev = 0.0;
  double loans_prev = 0.0;
  double revenue = 0.0;         // household consumption plus government purchases, nominal
  double wage_bill = 0.0;
  double loan_rate = 0.0;
};

struct Settlement {
  double inventory = 0.0;
  double nominal_inventory = 0.0;
  double delta_nominal_inventory = 0.0;
  double loans = 0.0;
  double profits = 0.0;
};

// Inventories, loans financing the change in nominal inventories, and
// profits. Throws std::logic_error when sales exceed output plus stock.
Settlement settle(const SettleInput& in);

// n_d = ceil(y / O_bar). Falls back to the economy-wide mean output per
// worker when the firm has no output history, and keeps the current head
// count when that is unavailable too.
int labour_demand(double output, double mean_output, double fallback_mean_output, int current_employment);

// Homogeneous rationing factor in (0, 1].
double rationing_factor(double demand, double available);

}  // namespace ubsfc
