#pragma once

// Referral hiring, signalling hires, warning/embeddedness-based firing,
// social-comparison quitting, the unemployment-benefit schedule and spell
// accounting. Every selection function is a pure function of the household
// states it is handed, so tests can evaluate it on small fixtures.

#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "ubsfc/behavior.hpp"
#include "ubsfc/household.hpp"

namespace ubsfc {

enum class ExpiryMode { calendar, spell };
enum class FiringRule { warnings_or_recent, warnings_and_recent };

struct BenefitScheme {
  double replacement_rate = 0.52;
  double poverty_rate = 0.60;
  int max_duration = 360;
  ExpiryMode mode = ExpiryMode::calendar;
};

enum class MatchKind { hire, fire, quit, signal_hire };
std::string_view to_string(MatchKind k);

struct MatchEvent {
  int step = 0;
  MatchKind kind = MatchKind::hire;
  HouseholdId household = 0;
  FirmId firm = 0;

  bool operator==(const MatchEvent&) const = default;
};

// Unemployed and not employed by `firm` during step - 1.
bool in_hiring_pool(const Household& h, FirmId firm, int step);

// Employed at `firm` and either warning-free at step - 1 or below three
// warnings in the current contract.
bool eligible_referrer(const Household& b, FirmId firm, int step);

// Members of `pool` with at least one eligible referrer at `firm`, ordered
// by longest unemployment spell, then id. `pool` must already satisfy the
// hiring-pool rule.
std::vector<HouseholdId> referral_candidates(FirmId firm, std::span<const HouseholdId> pool,
                                             std::span<const Household> households, const FriendshipNetwork& network,
                                             int step);

// The first min(n, |candidates|) referral candidates.
std::vector<HouseholdId> hire(FirmId firm, int n, std::span<const HouseholdId> pool,
                              std::span<const Household> households, const FriendshipNetwork& network, int step);

// Fills vacancies from households whose benefits expired, longest spell
// first, no referral needed.
std::vector<HouseholdId> hire_signalling(int vacancies, std::span<const HouseholdId> expired,
                                         std::span<const Household> households);

bool benefits_expired(const Household& h, const BenefitScheme& scheme, int step);

// Set c: enough warnings in the contract and/or a warning at step - 1.
bool in_warning_set(const Household& h, int step, FiringRule rule);

// Roster members in the warning set whose embeddedness is below the mean of
// their colleagues; the first min(n, |set|) by most warnings, then id.
std::vector<HouseholdId> fire(int n, std::span<const HouseholdId> roster, std::span<const Household> households,
                              const InteractionMatrix& intensity, int step, FiringRule rule);

// Employees at the same firm at step and step - 1 whose wage fell and who
// earn less than, or are less satisfied than, their employed friends, and
// who are weakly embedded at their firm. rosters[f] lists firm f's staff.
std::vector<HouseholdId> quit(std::span<const Household> households,
                              std::span<const std::vector<HouseholdId>> rosters, const FriendshipNetwork& network,
                              const InteractionMatrix& intensity, int step);

// UB = max(delta_g W_{t-x}, delta_p W~) before expiry, delta_p W~ after.
// Never-employed households get the poverty floor only.
double benefits(const Household& h, const BenefitScheme& scheme, double median_wage, int step);

// Median of the wages of employed households; 0 when nobody is employed.
double median_wage(std::span<const Household> households);

// +1 to the spell matching the household's current status, reset the other.
void spell_accounting(std::span<Household> households);

// Mean current spell over the households it applies to, divided by the
// elapsed steps. 0 when the group is empty or no time has elapsed.
double normalized_unemployment_spell(std::span<const Household> households, int elapsed);
double normalized_employment_spell(std::span<const Household> households, int elapsed);

void write_events_csv(std::ostream& out, std::span<const MatchEvent> events);
std::vector<MatchEvent> read_events_csv(std::istream& in);

}  // namespace ubsfc
