#pragma once

// Sectoral balance sheet, transaction-flow matrix and the stock-flow
// consistency checker that runs after every simulated step.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ubsfc {

// Columns of the transaction-flow matrix.
enum class Account {
  government,
  firms_current,
  firms_capital,
  households,
  bank_current,
  bank_capital,
  cb_current,
  cb_capital,
};
inline constexpr std::size_t kAccountCount = 8;

// Rows of the transaction-flow matrix.
enum class Flow {
  consumption,
  government_expenditure,
  change_in_inventories,
  wages,
  taxes,
  unemployment_benefits,
  interest_bills,
  interest_loans,
  interest_reserves,
  interest_advances,
  interest_deposits,
  profits_firms,
  profits_banks,
  profits_cb,
  change_bills,
  change_loans,
  change_deposits,
  change_reserves,
  change_advances,
};
inline constexpr std::size_t kFlowCount = 19;

enum class Instrument { inventories, loans, deposits, bills, high_powered_money, advances, balance };
inline constexpr std::size_t kInstrumentCount = 7;

enum class Holder { firms, households, bank, government, central_bank };
inline constexpr std::size_t kHolderCount = 5;

std::string_view to_string(Account a);
std::string_view to_string(Flow f);
std::string_view to_string(Instrument i);
std::string_view to_string(Holder h);
std::optional<Account> account_from_name(std::string_view name);
std::optional<Flow> flow_from_name(std::string_view name);

class FlowMatrix {
 public:
  // True when the cell exists in the transaction-flow matrix.
  static bool defined(Flow flow, Account account);

  // Accumulates into a cell. The counterpart entry is the caller's job;
  // check_consistency finds the ones that were forgotten.
  void record(Flow flow, Account account, double amount);
  void record(std::string_view flow, std::string_view account, double amount);

  double cell(Flow flow, Account account) const { return cells_[index(flow, account)]; }
  double row_sum(Flow flow) const;
  double row_gross(Flow flow) const;
  double column_sum(Account account) const;
  double column_gross(Account account) const;
  void clear() { cells_.fill(0.0); }

 private:
  static std::size_t index(Flow f, Account a) {
    return static_cast<std::size_t>(f) * kAccountCount + static_cast<std::size_t>(a);
  }
  std::array<double, kFlowCount * kAccountCount> cells_{};
};

// Signed entries as in the balance-sheet matrix: assets +, liabilities -,
// the balance row carries -NW (or +GD for the government).
class BalanceSheet {
 public:
  static bool defined(Instrument instrument, Holder holder);

  void set(Instrument instrument, Holder holder, double value);
  double cell(Instrument instrument, Holder holder) const { return cells_[index(instrument, holder)]; }
  double row_sum(Instrument instrument) const;
  double row_gross(Instrument instrument) const;
  double column_sum(Holder holder) const;
  double column_gross(Holder holder) const;

 private:
  static std::size_t index(Instrument i, Holder h) {
    return static_cast<std::size_t>(i) * kHolderCount + static_cast<std::size_t>(h);
  }
  std::array<double, kInstrumentCount * kHolderCount> cells_{};
};

struct Residual {
  std::string name;
  double residual = 0.0;
  double scale = 1.0;
  bool flagged = false;
};

struct ConsistencyReport {
  std::vector<Residual> entries;

  bool ok() const;
  std::size_t flagged_count() const;
  // Entry with the largest |residual| / scale, or nullptr when empty.
  const Residual* worst() const;
  const Residual* find(std::string_view name) const;
};

// Row and column residuals of both matrices. Inventories and balance rows
// of the balance sheet are checked jointly (their sum must vanish).
// A residual is flagged when |r| > tol_rel * max(1, gross volume).
ConsistencyReport check_consistency(const BalanceSheet& bs, const FlowMatrix& fm, double tol_rel);

// H - (Bcb + A). The central bank's capital account is the equation left
// out of the model, so this is computed, never imposed.
double redundant_identity(const BalanceSheet& bs);

// CSV rows "step,row,residual" for every entry of the report.
void write_consistency_csv(std::ostream& out, int step, const ConsistencyReport& report);

}  // namespace ubsfc
