#include "ubsfc/firms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ubsfc/errors.hpp"

namespace ubsfc {

double set_price(double unit_cost_prev, double markup) {
  if (!(unit_cost_prev > 0.0)) {
    throw InitializationError("unit cost must be positive to set a price, got " + std::to_string(unit_cost_prev));
  }
  return unit_cost_prev * (1.0 + markup);
}

double expected_sales(double sales_prev, double expected_prev, double beta, ExpectationMode mode) {
  switch (mode) {
    case ExpectationMode::adaptive: return expected_prev + beta * (sales_prev - expected_prev);
    case ExpectationMode::as_written: return beta * sales_prev + (1.0 - beta) * (sales_prev - expected_prev);
  }
  return expected_prev;
}

OutputPlan plan_output(double expected_sales, double inventory_prev, double inventory_ratio,
                       double inventory_adjustment, double potential_output) {
  OutputPlan plan;
  plan.inventory_target = inventory_ratio * expected_sales;
  plan.expected_inventory = inventory_prev + inventory_adjustment * (plan.inventory_target - inventory_prev);
  const double wanted = expected_sales + plan.expected_inventory - inventory_prev;
  plan.output = std::max(0.0, std::min(wanted, potential_output));
  return plan;
}

Production produce_and_pay(std::span<const double> outputs, std::span<const double> rewards, double planned_output,
                           double unit_cost_prev) {
  Production p;
  p.potential_output = std::accumulate(outputs.begin(), outputs.end(), 0.0);
  p.output = std::max(0.0, std::min(planned_output, p.potential_output));
  p.wage_bill = std::accumulate(rewards.begin(), rewards.end(), 0.0);
  p.wage = rewards.empty() ? 0.0 : p.wage_bill / static_cast<double>(rewards.size());
  p.unit_cost = p.output > 0.0 ? p.wage_bill / p.output : unit_cost_prev;
  return p;
}

Settlement settle(const SettleInput& in) {
  Settlement s;
  s.inventory = in.inventory_prev + in.output - in.sales;
  const double scale = std::max(1.0, in.inventory_prev + in.output);
  if (s.inventory < -1e-9 * scale) {
    throw std::logic_error("negative inventory after rationing: " + std::to_string(s.inventory));
  }
  s.inventory = std::max(0.0, s.inventory);
  s.nominal_inventory = s.inventory * in.unit_cost;
  s.delta_nominal_inventory = s.nominal_inventory - in.nominal_inventory_prev;
  s.loans = in.loans_prev + s.delta_nominal_inventory;
  s.profits = in.revenue + s.delta_nominal_inventory - in.wage_bill - in.loan_rate * in.loans_prev;
  return s;
}

int labour_demand(double output, double mean_output, double fallback_mean_output, int current_employment) {
  if (output <= 0.0) return 0;
  double per_worker = mean_output;
  if (!(per_worker > 0.0)) per_worker = fallback_mean_output;
  if (!(per_worker > 0.0)) return current_employment;
  // Workers are indivisible; the slack absorbs float noise at exact ratios.
  return static_cast<int>(std::ceil(output / per_worker - 1e-9));
}

double rationing_factor(double demand, double available) {
  if (demand <= available || demand <= 0.0) return 1.0;
  return std::max(0.0, available) / demand;
}

}  // namespace ubsfc
