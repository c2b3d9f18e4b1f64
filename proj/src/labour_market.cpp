#include "ubsfc/labour_market.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "ubsfc/errors.hpp"

namespace ubsfc {
namespace {

// Strictly below, ignoring float noise.
bool less_than(double a, double b) { return a < b - 1e-12 * std::max(1.0, std::abs(b)); }

void sort_by_spell(std::vector<HouseholdId>& ids, std::span<const Household> households) {
  std::sort(ids.begin(), ids.end(), [&](HouseholdId a, HouseholdId b) {
    const int sa = households[a].unemployment_spell;
    const int sb = households[b].unemployment_spell;
    if (sa != sb) return sa > sb;
    return a < b;
  });
}

}  // namespace

std::string_view to_string(MatchKind k) {
  switch (k) {
    case MatchKind::hire: return "hire";
    case MatchKind::fire: return "fire";
    case MatchKind::quit: return "quit";
    case MatchKind::signal_hire: return "signal-hire";
  }
  return "?";
}

bool in_hiring_pool(const Household& h, FirmId firm, int step) {
  if (h.employed()) return false;
  return !(h.last_employer == firm && h.separation_step == step - 1);
}

bool eligible_referrer(const Household& b, FirmId firm, int step) {
  if (b.employer != firm) return false;
  return !b.warned_at(step - 1) || b.contract_warnings() < 3;
}

std::vector<HouseholdId> referral_candidates(FirmId firm, std::span<const HouseholdId> pool,
                                             std::span<const Household> households, const FriendshipNetwork& network,
                                             int step) {
  std::vector<HouseholdId> out;
  for (auto i : pool) {
    const auto friends = network.friends(i);
    const bool referred = std::any_of(friends.begin(), friends.end(), [&](HouseholdId b) {
      return eligible_referrer(households[b], firm, step);
    });
    if (referred) out.push_back(i);
  }
  sort_by_spell(out, households);
  return out;
}

std::vector<HouseholdId> hire(FirmId firm, int n, std::span<const HouseholdId> pool,
                              std::span<const Household> households, const FriendshipNetwork& network, int step) {
  auto candidates = referral_candidates(firm, pool, households, network, step);
  if (n < 0) n = 0;
  if (candidates.size() > static_cast<std::size_t>(n)) candidates.resize(static_cast<std::size_t>(n));
  return candidates;
}

std::vector<HouseholdId> hire_signalling(int vacancies, std::span<const HouseholdId> expired,
                                         std::span<const Household> households) {
  std::vector<HouseholdId> out(expired.begin(), expired.end());
  sort_by_spell(out, households);
  if (vacancies < 0) vacancies = 0;
  if (out.size() > static_cast<std::size_t>(vacancies)) out.resize(static_cast<std::size_t>(vacancies));
  return out;
}

bool benefits_expired(const Household& h, const BenefitScheme& scheme, int step) {
  const int clock = scheme.mode == ExpiryMode::calendar ? step : h.unemployment_spell;
  return clock >= scheme.max_duration;
}

bool in_warning_set(const Household& h, int step, FiringRule rule) {
  const bool many = h.contract_warnings() >= 3;
  const bool recent = h.warned_at(step - 1);
  return rule == FiringRule::warnings_or_recent ? (many || recent) : (many && recent);
}

std::vector<HouseholdId> fire(int n, std::span<const HouseholdId> roster, std::span<const Household> households,
                              const InteractionMatrix& intensity, int step, FiringRule rule) {
  std::vector<HouseholdId> out;
  if (n <= 0 || roster.empty()) return out;
  const auto ebar = embeddedness(roster, intensity);
  const auto weak = weakly_embedded(ebar);
  for (std::size_t k = 0; k < roster.size(); ++k) {
    if (weak[k] && in_warning_set(households[roster[k]], step, rule)) out.push_back(roster[k]);
  }
  std::sort(out.begin(), out.end(), [&](HouseholdId a, HouseholdId b) {
    const int wa = households[a].contract_warnings();
    const int wb = households[b].contract_warnings();
    if (wa != wb) return wa > wb;
    return a < b;
  });
  if (out.size() > static_cast<std::size_t>(n)) out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<HouseholdId> quit(std::span<const Household> households,
                              std::span<const std::vector<HouseholdId>> rosters, const FriendshipNetwork& network,
                              const InteractionMatrix& intensity, int step) {
  std::vector<bool> weak(households.size(), false);
  for (const auto& roster : rosters) {
    const auto below = weakly_embedded(embeddedness(roster, intensity));
    for (std::size_t k = 0; k < roster.size(); ++k) weak[roster[k]] = below[k];
  }

  std::vector<HouseholdId> out;
  for (const auto& h : households) {
    if (!h.employed() || h.hire_step > step - 1) continue;
    if (!less_than(h.wage, h.wage_prev)) continue;
    if (!weak[h.id]) continue;
    double wage_sum = 0.0;
    double satisfaction_sum = 0.0;
    int count = 0;
    for (auto k : network.friends(h.id)) {
      const auto& f = households[k];
      if (!f.employed()) continue;
      wage_sum += f.wage;
      satisfaction_sum += f.satisfaction;
      ++count;
    }
    if (count == 0) continue;
    const double mean_wage = wage_sum / count;
    const double mean_satisfaction = satisfaction_sum / count;
    if (less_than(h.wage, mean_wage) || less_than(h.satisfaction, mean_satisfaction)) out.push_back(h.id);
  }
  return out;
}

double benefits(const Household& h, const BenefitScheme& scheme, double median_wage, int step) {
  const double floor = scheme.poverty_rate * median_wage;
  if (!h.ever_employed || benefits_expired(h, scheme, step)) return floor;
  return std::max(scheme.replacement_rate * h.last_wage, floor);
}

double median_wage(std::span<const Household> households) {
  std::vector<double> wages;
  wages.reserve(households.size());
  for (const auto& h : households)
    if (h.employed()) wages.push_back(h.wage);
  if (wages.empty()) return 0.0;
  const std::size_t mid = wages.size() / 2;
  std::nth_element(wages.begin(), wages.begin() + static_cast<std::ptrdiff_t>(mid), wages.end());
  const double upper = wages[mid];
  if (wages.size() % 2 == 1) return upper;
  const double lower = *std::max_element(wages.begin(), wages.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

void spell_accounting(std::span<Household> households) {
  for (auto& h : households) {
    if (h.employed()) {
      ++h.employment_spell;
      h.unemployment_spell = 0;
    } else {
      ++h.unemployment_spell;
      h.employment_spell = 0;
    }
  }
}

double normalized_unemployment_spell(std::span<const Household> households, int elapsed) {
  if (elapsed <= 0) return 0.0;
  double sum = 0.0;
  int count = 0;
  for (const auto& h : households) {
    if (h.employed()) continue;
    sum += h.unemployment_spell;
    ++count;
  }
  return count == 0 ? 0.0 : sum / count / elapsed;
}

double normalized_employment_spell(std::span<const Household> households, int elapsed) {
  if (elapsed <= 0) return 0.0;
  double sum = 0.0;
  int count = 0;
  for (const auto& h : households) {
    if (!h.employed()) continue;
    sum += h.employment_spell;
    ++count;
  }
  return count == 0 ? 0.0 : sum / count / elapsed;
}

void write_events_csv(std::ostream& out, std::span<const MatchEvent> events) {
  out << "step,kind,household,firm\n";
  for (const auto& e : events) out << e.step << ',' << to_string(e.kind) << ',' << e.household << ',' << e.firm << '\n';
}

std::vector<MatchEvent> read_events_csv(std::istream& in) {
  std::vector<MatchEvent> events;
  std::string line;
  if (!std::getline(in, line)) return events;
  if (line != "step,kind,household,firm") throw ConfigError("unexpected events header: " + line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string step, kind, household, firm;
    std::getline(row, step, ',');
    std::getline(row, kind, ',');
    std::getline(row, household, ',');
    std::getline(row, firm, ',');
    MatchEvent e;
    e.step = std::stoi(step);
    if (kind == "hire") e.kind = MatchKind::hire;
    else if (kind == "fire") e.kind = MatchKind::fire;
    else if (kind == "quit") e.kind = MatchKind::quit;
    else if (kind == "signal-hire") e.kind = MatchKind::signal_hire;
    else throw ConfigError("unknown event kind: " + kind);
    e.household = static_cast<HouseholdId>(std::stoul(household));
    e.firm = static_cast<FirmId>(std::stoi(firm));
    events.push_back(e);
  }
  return events;
}

}  // namespace ubsfc
