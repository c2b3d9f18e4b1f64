#pragma once

// Government, bank, central bank and household-sector financial behaviour.

#include <span>

namespace ubsfc {

struct FinanceParams {
  double gov_purchases = 20.0;      // g_bar, real units per firm
  double tax_rate = 0.18;           // tau_g, solved at initialisation
  double bill_rate = 0.004;         // i_b
  double loan_rate = 0.005;         // i_l
  double deposit_rate = 0.003;      // i_d
  double reserve_ratio = 0.1117;    // mu_cb
  double liquidity_ratio = 0.2383;  // v
  double propensity_income = 0.8;   // alpha_1
  double propensity_wealth = 0.2;   // alpha_2, solved at initialisation
};

// G = g_bar * sum p
double government_spending(std::span<const double> prices, double gov_purchases);

// B = B_prev + G + UB + i_b B_prev - T - Pcb
double government_bills(double bills_prev, double spending, double benefits, double taxes, double cb_profits,
                        double bill_rate);

struct GovernmentFlows {
  double spending = 0.0;
  double taxes = 0.0;
  double bills = 0.0;
};

GovernmentFlows government_step(std::span<const double> prices, double taxes, double benefits, double cb_profits,
                                double bills_prev, const FinanceParams& params);

struct BankStocks {
  double loans = 0.0;
  double bills = 0.0;
  double reserves = 0.0;
  double deposits = 0.0;
  double advances = 0.0;
};

struct BankPortfolio {
  double reserves = 0.0;
  double bills = 0.0;
  double advances = 0.0;
};

// H = (mu_cb + v) D. When D - L - H <= 0 the bank holds no bills and
// advances close the balance sheet, A = H + L - D. Otherwise A = v D and
// bills take up the remaining liquidity, Bb = D + A - L - H.
BankPortfolio bank_portfolio(double deposits, double loans, const FinanceParams& params);

// Pb = i_l L_prev + i_b Bb_prev + i_b H_prev - i_d D_prev - i_b A_prev
double bank_profits(const BankStocks& prev, const FinanceParams& params);

struct BankFlows {
  BankPortfolio portfolio;
  double profits = 0.0;
};

BankFlows bank_step(double deposits, double loans, const BankStocks& prev, const FinanceParams& params);

struct CentralBankFlows {
  double bills = 0.0;
  double profits = 0.0;
};

// Bcb = B - Bb, Pcb = i_b (Bcb_prev - H_prev + A_prev). Throws
// StructuralError when the bank holds more bills than exist.
CentralBankFlows central_bank_step(double bills_total, double bank_bills, double reserves_prev, double advances_prev,
                                   double cb_bills_prev, double bill_rate);

// c = (alpha_1 Yd_prev + alpha_2 Dh_prev) / p*
double real_consumption(double income_prev, double deposits_prev, double price, const FinanceParams& params);

// tax = tau WB_prev
double household_tax(double wage_prev, double tax_rate);

// Yd = WB + UB + Pf share + Pb share + i_d Dh_prev - tax
double disposable_income(double wage, double benefit, double firm_profit_share, double bank_profit_share,
                         double deposits_prev, double tax, double deposit_rate);

struct HouseholdFinanceInput {
  double wage = 0.0;
  double wage_prev = 0.0;
  double benefit = 0.0;
  double firm_profit_share = 0.0;
  double bank_profit_share = 0.0;
  double price = 0.0;
  double income_prev = 0.0;
  double deposits_prev = 0.0;
};

struct HouseholdFinance {
  double consumption_real = 0.0;
  double consumption_nominal = 0.0;
  double tax = 0.0;
  double disposable_income = 0.0;
  double deposits = 0.0;
};

// Spending is capped at deposits plus the part of current income known at
// the goods market (wage + benefit - tax), so deposits stay non-negative
// unless distributed profits are negative.
double consumption_cap(double deposits_prev, double wage, double benefit, double tax);

HouseholdFinance household_finance_step(const HouseholdFinanceInput& in, const FinanceParams& params);

}  // namespace ubsfc
