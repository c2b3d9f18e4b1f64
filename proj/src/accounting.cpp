#include "ubsfc/accounting.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ubsfc/errors.hpp"

namespace ubsfc {
namespace {

constexpr std::array<std::string_view, kAccountCount> kAccountNames = {
    "government", "firms_current", "firms_capital", "households",
    "bank_current", "bank_capital", "cb_current", "cb_capital"};

constexpr std::array<std::string_view, kFlowCount> kFlowNames = {
    "consumption",       "government_expenditure", "change_in_inventories", "wages",
    "taxes",             "unemployment_benefits",  "interest_bills",        "interest_loans",
    "interest_reserves", "interest_advances",      "interest_deposits",     "profits_firms",
    "profits_banks",     "profits_cb",             "change_bills",          "change_loans",
    "change_deposits",   "change_reserves",        "change_advances"};

constexpr std::array<std::string_view, kInstrumentCount> kInstrumentNames = {
    "inventories", "loans", "deposits", "bills", "high_powered_money", "advances", "balance"};

constexpr std::array<std::string_view, kHolderCount> kHolderNames = {
    "firms", "households", "bank", "government", "central_bank"};

using A = Account;

// Non-empty cells of the transaction-flow matrix, one row per Flow.
const std::array<std::vector<Account>, kFlowCount>& flow_layout() {
  static const std::array<std::vector<Account>, kFlowCount> layout = {{
      {A::firms_current, A::households},                  // consumption
      {A::government, A::firms_current},                  // government expenditure
      {A::firms_current, A::firms_capital},               // change in inventories
      {A::firms_current, A::households},                  // wages
      {A::government, A::households},                     // taxes
      {A::government, A::households},                     // unemployment benefits
      {A::government, A::bank_current, A::cb_current},   // interest on bills
      {A::firms_current, A::bank_current},                // interest on loans
      {A::bank_current, A::cb_current},                   // interest on reserves
      {A::bank_current, A::cb_current},                   // interest on advances
      {A::households, A::bank_current},                   // interest on deposits
      {A::firms_current, A::households},                  // profits of firms
      {A::households, A::bank_current},                   // profits of banks
      {A::government, A::cb_current},                     // profits of central bank
      {A::government, A::bank_capital, A::cb_capital},   // change in bills
      {A::firms_capital, A::bank_capital},                // change in loans
      {A::households, A::bank_capital},                   // change in deposits
      {A::bank_capital, A::cb_capital},                   // change in high powered money
      {A::bank_capital, A::cb_capital},                   // change in advances
  }};
  return layout;
}

template <std::size_t N>
std::optional<std::size_t> lookup(const std::array<std::string_view, N>& names, std::string_view name) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

void push(ConsistencyReport& report, std::string name, double residual, double gross, double tol_rel) {
  const double scale = std::max(1.0, gross);
  report.entries.push_back({std::move(name), residual, scale, std::abs(residual) > tol_rel * scale});
}

}  // namespace

std::string_view to_string(Account a) { return kAccountNames[static_cast<std::size_t>(a)]; }
std::string_view to_string(Flow f) { return kFlowNames[static_cast<std::size_t>(f)]; }
std::string_view to_string(Instrument i) { return kInstrumentNames[static_cast<std::size_t>(i)]; }
std::string_view to_string(Holder h) { return kHolderNames[static_cast<std::size_t>(h)]; }

std::optional<Account> account_from_name(std::string_view name) {
  if (auto i = lookup(kAccountNames, name)) return static_cast<Account>(*i);
  return std::nullopt;
}

std::optional<Flow> flow_from_name(std::string_view name) {
  if (auto i = lookup(kFlowNames, name)) return static_cast<Flow>(*i);
  return std::nullopt;
}

bool FlowMatrix::defined(Flow flow, Account account) {
  const auto& cells = flow_layout()[static_cast<std::size_t>(flow)];
  return std::find(cells.begin(), cells.end(), account) != cells.end();
}

void FlowMatrix::record(Flow flow, Account account, double amount) {
  if (!defined(flow, account)) {
    throw ConfigError("flow matrix has no cell (" + std::string(to_string(flow)) + ", " +
                      std::string(to_string(account)) + ")");
  }
  cells_[index(flow, account)] += amount;
}

void FlowMatrix::record(std::string_view flow, std::string_view account, double amount) {
  const auto f = flow_from_name(flow);
  const auto a = account_from_name(account);
  if (!f || !a) {
    throw ConfigError("unknown flow matrix cell (" + std::string(flow) + ", " + std::string(account) + ")");
  }
  record(*f, *a, amount);
}

double FlowMatrix::row_sum(Flow flow) const {
  double sum = 0.0;
  for (std::size_t a = 0; a < kAccountCount; ++a) sum += cells_[index(flow, static_cast<Account>(a))];
  return sum;
}

double FlowMatrix::row_gross(Flow flow) const {
  double sum = 0.0;
  for (std::size_t a = 0; a < kAccountCount; ++a) sum += std::abs(cells_[index(flow, static_cast<Account>(a))]);
  return sum;
}

double FlowMatrix::column_sum(Account account) const {
  double sum = 0.0;
  for (std::size_t f = 0; f < kFlowCount; ++f) sum += cells_[index(static_cast<Flow>(f), account)];
  return sum;
}

double FlowMatrix::column_gross(Account account) const {
  double sum = 0.0;
  for (std::size_t f = 0; f < kFlowCount; ++f) sum += std::abs(cells_[index(static_cast<Flow>(f), account)]);
  return sum;
}

bool BalanceSheet::defined(Instrument instrument, Holder holder) {
  using I = Instrument;
  using H = Holder;
  switch (instrument) {
    case I::inventories: return holder == H::firms;
    case I::loans: return holder == H::firms || holder == H::bank;
    case I::deposits: return holder == H::households || holder == H::bank;
    case I::bills: return holder == H::bank || holder == H::government || holder == H::central_bank;
    case I::high_powered_money:
    case I::advances: return holder == H::bank || holder == H::central_bank;
    case I::balance: return holder != H::central_bank;
  }
  return false;
}

void BalanceSheet::set(Instrument instrument, Holder holder, double value) {
  if (!defined(instrument, holder)) {
    throw ConfigError("balance sheet has no cell (" + std::string(to_string(instrument)) + ", " +
                      std::string(to_string(holder)) + ")");
  }
  cells_[index(instrument, holder)] = value;
}

double BalanceSheet::row_sum(Instrument instrument) const {
  double sum = 0.0;
  for (std::size_t h = 0; h < kHolderCount; ++h) sum += cells_[index(instrument, static_cast<Holder>(h))];
  return sum;
}

double BalanceSheet::row_gross(Instrument instrument) const {
  double sum = 0.0;
  for (std::size_t h = 0; h < kHolderCount; ++h) sum += std::abs(cells_[index(instrument, static_cast<Holder>(h))]);
  return sum;
}

double BalanceSheet::column_sum(Holder holder) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < kInstrumentCount; ++i) sum += cells_[index(static_cast<Instrument>(i), holder)];
  return sum;
}

double BalanceSheet::column_gross(Holder holder) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < kInstrumentCount; ++i) sum += std::abs(cells_[index(static_cast<Instrument>(i), holder)]);
  return sum;
}

bool ConsistencyReport::ok() const { return flagged_count() == 0; }

std::size_t ConsistencyReport::flagged_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const Residual& r) { return r.flagged; }));
}

const Residual* ConsistencyReport::worst() const {
  const Residual* best = nullptr;
  double worst_ratio = -1.0;
  for (const auto& r : entries) {
    const double ratio = std::abs(r.residual) / r.scale;
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      best = &r;
    }
  }
  return best;
}

const Residual* ConsistencyReport::find(std::string_view name) const {
  for (const auto& r : entries)
    if (r.name == name) return &r;
  return nullptr;
}

ConsistencyReport check_consistency(const BalanceSheet& bs, const FlowMatrix& fm, double tol_rel) {
  ConsistencyReport report;
  report.entries.reserve(kFlowCount + kAccountCount + kInstrumentCount + kHolderCount + 1);

  for (std::size_t f = 0; f < kFlowCount; ++f) {
    const auto flow = static_cast<Flow>(f);
    push(report, "tfm_row:" + std::string(to_string(flow)), fm.row_sum(flow), fm.row_gross(flow), tol_rel);
  }
  for (std::size_t a = 0; a < kAccountCount; ++a) {
    const auto account = static_cast<Account>(a);
    push(report, "tfm_col:" + std::string(to_string(account)), fm.column_sum(account), fm.column_gross(account),
         tol_rel);
  }

  for (std::size_t i = 0; i < kInstrumentCount; ++i) {
    const auto instrument = static_cast<Instrument>(i);
    if (instrument == Instrument::inventories || instrument == Instrument::balance) continue;
    push(report, "bs_row:" + std::string(to_string(instrument)), bs.row_sum(instrument), bs.row_gross(instrument),
         tol_rel);
  }
  // Tangible inventories are the only net asset of the economy.
  push(report, "bs_row:inventories+balance", bs.row_sum(Instrument::inventories) + bs.row_sum(Instrument::balance),
       bs.row_gross(Instrument::inventories) + bs.row_gross(Instrument::balance), tol_rel);
  for (std::size_t h = 0; h < kHolderCount; ++h) {
    const auto holder = static_cast<Holder>(h);
    push(report, "bs_col:" + std::string(to_string(holder)), bs.column_sum(holder), bs.column_gross(holder), tol_rel);
  }

  const double h = bs.cell(Instrument::high_powered_money, Holder::bank);
  push(report, "redundant_identity", redundant_identity(bs), std::abs(h), tol_rel);
  return report;
}

double redundant_identity(const BalanceSheet& bs) {
  const double reserves = bs.cell(Instrument::high_powered_money, Holder::bank);
  const double cb_bills = bs.cell(Instrument::bills, Holder::central_bank);
  const double advances = bs.cell(Instrument::advances, Holder::central_bank);
  return reserves - (cb_bills + advances);
}

void write_consistency_csv(std::ostream& out, int step, const ConsistencyReport& report) {
  const auto old_precision = out.precision(17);
  for (const auto& r : report.entries) out << step << ',' << r.name << ',' << r.residual << '\n';
  out.precision(old_precision);
}

}  // namespace ubsfc
