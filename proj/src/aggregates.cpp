#include "ubsfc/aggregates.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ubsfc/errors.hpp"

namespace ubsfc {

double government_spending(std::span<const double> prices, double gov_purchases) {
  return gov_purchases * std::accumulate(prices.begin(), prices.end(), 0.0);
}

double government_bills(double bills_prev, double spending, double benefits, double taxes, double cb_profits,
                        double bill_rate) {
  return bills_prev + spending + benefits + bill_rate * bills_prev - taxes - cb_profits;
}

GovernmentFlows government_step(std::span<const double> prices, double taxes, double benefits, double cb_profits,
                                double bills_prev, const FinanceParams& params) {
  GovernmentFlows g;
  g.spending = government_spending(prices, params.gov_purchases);
  g.taxes = taxes;
  g.bills = government_bills(bills_prev, g.spending, benefits, taxes, cb_profits, params.bill_rate);
  return g;
}

BankPortfolio bank_portfolio(double deposits, double loans, const FinanceParams& params) {
  BankPortfolio p;
  p.reserves = (params.reserve_ratio + params.liquidity_ratio) * deposits;
  if (deposits - loans - p.reserves > 0.0) {
    p.advances = params.liquidity_ratio * deposits;
    p.bills = deposits + p.advances - loans - p.reserves;
  } else {
    p.bills = 0.0;
    p.advances = p.reserves + loans - deposits;
  }
  return p;
}

double bank_profits(const BankStocks& prev, const FinanceParams& params) {
  return params.loan_rate * prev.loans + params.bill_rate * prev.bills + params.bill_rate * prev.reserves -
         params.deposit_rate * prev.deposits - params.bill_rate * prev.advances;
}

BankFlows bank_step(double deposits, double loans, const BankStocks& prev, const FinanceParams& params) {
  return {bank_portfolio(deposits, loans, params), bank_profits(prev, params)};
}

CentralBankFlows central_bank_step(double bills_total, double bank_bills, double reserves_prev, double advances_prev,
                                   double cb_bills_prev, double bill_rate) {
  CentralBankFlows cb;
  cb.bills = bills_total - bank_bills;
  if (cb.bills < -1e-9 * std::max(1.0, std::abs(bills_total))) {
    throw StructuralError("bills market cannot clear: central bank holdings " + std::to_string(cb.bills));
  }
  cb.profits = bill_rate * (cb_bills_prev - reserves_prev + advances_prev);
  return cb;
}

double real_consumption(double income_prev, double deposits_prev, double price, const FinanceParams& params) {
  if (!(price > 0.0)) return 0.0;
  return (params.propensity_income * income_prev + params.propensity_wealth * deposits_prev) / price;
}

double household_tax(double wage_prev, double tax_rate) { return tax_rate * wage_prev; }

double disposable_income(double wage, double benefit, double firm_profit_share, double bank_profit_share,
                         double deposits_prev, double tax, double deposit_rate) {
  return wage + benefit + firm_profit_share + bank_profit_share + deposit_rate * deposits_prev - tax;
}

double consumption_cap(double deposits_prev, double wage, double benefit, double tax) {
  return std::max(0.0, deposits_prev + wage + benefit - tax);
}

HouseholdFinance household_finance_step(const HouseholdFinanceInput& in, const FinanceParams& params) {
  HouseholdFinance out;
  out.tax = household_tax(in.wage_prev, params.tax_rate);
  const double wanted = std::max(0.0, real_consumption(in.income_prev, in.deposits_prev, in.price, params));
  const double cap = consumption_cap(in.deposits_prev, in.wage, in.benefit, out.tax);
  out.consumption_nominal = std::min(wanted * in.price, cap);
  out.consumption_real = in.price > 0.0 ? out.consumption_nominal / in.price : 0.0;
  out.disposable_income = disposable_income(in.wage, in.benefit, in.firm_profit_share, in.bank_profit_share,
                                            in.deposits_prev, out.tax, params.deposit_rate);
  out.deposits = in.deposits_prev + out.disposable_income - out.consumption_nominal;
  return out;
}

}  // namespace ubsfc
