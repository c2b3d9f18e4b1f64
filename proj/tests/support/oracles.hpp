#pragma once

// Brute-force reference evaluations of the labour-market selection rules on
// small random fixtures. Everything here is written from the rule
// definitions against dense data (adjacency matrix, raw warning lists) and
// shares no code with the library's selection functions.

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ubsfc/behavior.hpp"
#include "ubsfc/household.hpp"
#include "ubsfc/labour_market.hpp"
#include "ubsfc/rng.hpp"

namespace oracle {

using ubsfc::FirmId;
using ubsfc::HouseholdId;

struct Fixture {
  int step = 0;
  int firms = 0;
  std::vector<ubsfc::Household> households;
  std::vector<std::vector<bool>> adjacency;
  std::vector<std::pair<HouseholdId, HouseholdId>> edges;
  ubsfc::FriendshipNetwork network;
  ubsfc::InteractionMatrix intensity;
  std::vector<std::vector<HouseholdId>> rosters;
};

inline Fixture make_fixture(std::uint64_t seed, std::size_t max_agents = 20) {
  ubsfc::Rng rng(seed);
  Fixture fx;
  const std::size_t n = 6 + rng.index(max_agents - 5);
  fx.firms = 2 + static_cast<int>(rng.index(2));
  fx.step = 10 + static_cast<int>(rng.index(20));
  const int t = fx.step;
  fx.households.resize(n);
  fx.adjacency.assign(n, std::vector<bool>(n, false));
  fx.rosters.assign(static_cast<std::size_t>(fx.firms), {});
  fx.intensity = ubsfc::InteractionMatrix(n);

  for (std::size_t i = 0; i < n; ++i) {
    auto& h = fx.households[i];
    h.id = static_cast<HouseholdId>(i);
    const bool employed = rng.uniform() < 0.6;
    if (employed) {
      h.employer = static_cast<FirmId>(rng.index(static_cast<std::size_t>(fx.firms)));
      // Some contracts start this very step, most earlier.
      h.hire_step = rng.uniform() < 0.15 ? t : 1 + static_cast<int>(rng.index(static_cast<std::size_t>(t - 1)));
      h.employment_spell = t - h.hire_step + 1;
      fx.rosters[static_cast<std::size_t>(h.employer)].push_back(h.id);
    } else {
      h.unemployment_spell = 1 + static_cast<int>(rng.index(30));
      if (rng.uniform() < 0.7) {
        h.ever_employed = true;
        h.last_employer = static_cast<FirmId>(rng.index(static_cast<std::size_t>(fx.firms)));
        h.separation_step = rng.uniform() < 0.4 ? t - 1 : t - 1 - static_cast<int>(rng.index(8));
      }
    }
    // Warnings: a few scattered, sometimes one at t - 1, some before the contract.
    const int count = static_cast<int>(rng.index(6));
    std::set<int> at;
    for (int k = 0; k < count; ++k) at.insert(1 + static_cast<int>(rng.index(static_cast<std::size_t>(t - 2))));
    if (rng.uniform() < 0.35) at.insert(t - 1);
    h.warnings.assign(at.begin(), at.end());
    h.wage_prev = 8.0 + rng.uniform();
    h.wage = employed ? (rng.uniform() < 0.5 ? h.wage_prev - 0.5 * rng.uniform() - 1e-3 : h.wage_prev + rng.uniform())
                      : 0.0;
    h.satisfaction = rng.uniform();
  }

  const double p = 0.25;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform() < p) {
        fx.adjacency[i][j] = fx.adjacency[j][i] = true;
        fx.edges.emplace_back(static_cast<HouseholdId>(i), static_cast<HouseholdId>(j));
      }
    }
  }
  fx.network = ubsfc::FriendshipNetwork(n, fx.edges);

  for (const auto& roster : fx.rosters) {
    for (std::size_t a = 0; a < roster.size(); ++a) {
      for (std::size_t b = a + 1; b < roster.size(); ++b) {
        const auto i = roster[a];
        const auto j = roster[b];
        const bool fresh = fx.households[i].hire_step == t || fx.households[j].hire_step == t;
        fx.intensity.set(i, j, fresh ? 0.0 : rng.uniform());
      }
    }
  }
  return fx;
}

inline int contract_warning_count(const ubsfc::Household& h) {
  int c = 0;
  for (int s : h.warnings)
    if (s >= h.hire_step) ++c;
  return c;
}

inline bool warned_in_contract_at(const ubsfc::Household& h, int s) {
  return s >= h.hire_step && std::find(h.warnings.begin(), h.warnings.end(), s) != h.warnings.end();
}

inline std::vector<HouseholdId> by_spell(std::vector<HouseholdId> ids, const Fixture& fx) {
  std::stable_sort(ids.begin(), ids.end(), [&](HouseholdId a, HouseholdId b) {
    return fx.households[a].unemployment_spell > fx.households[b].unemployment_spell;
  });
  return ids;
}

// Referral hiring at `firm`: unemployed, not the firm's own leaver of t-1,
// with a friend working there who was not warned at t-1 or has fewer than
// three warnings.
inline std::vector<HouseholdId> hired(const Fixture& fx, FirmId firm, int n) {
  const int t = fx.step;
  std::vector<HouseholdId> a;
  for (const auto& h : fx.households) {
    if (h.employer != ubsfc::kNoFirm) continue;
    if (h.last_employer == firm && h.separation_step == t - 1) continue;
    bool referred = false;
    for (const auto& b : fx.households) {
      if (!fx.adjacency[h.id][b.id] || b.employer != firm) continue;
      if (!warned_in_contract_at(b, t - 1) || contract_warning_count(b) < 3) referred = true;
    }
    if (referred) a.push_back(h.id);
  }
  a = by_spell(a, fx);
  if (static_cast<int>(a.size()) > n) a.resize(static_cast<std::size_t>(std::max(n, 0)));
  return a;
}

inline double mean_tie(const Fixture& fx, HouseholdId i, const std::vector<HouseholdId>& roster) {
  double s = 0.0;
  int c = 0;
  for (auto j : roster) {
    if (j == i) continue;
    s += fx.intensity.get(i, j);
    ++c;
  }
  return c == 0 ? 0.0 : s / c;
}

// Below the roster-wide mean embeddedness (self included).
inline bool weak(const Fixture& fx, HouseholdId i, const std::vector<HouseholdId>& roster) {
  if (roster.size() < 2) return false;
  double total = 0.0;
  for (auto j : roster) total += mean_tie(fx, j, roster);
  const double mean = total / static_cast<double>(roster.size());
  const double own = mean_tie(fx, i, roster);
  return own < mean && mean - own > 1e-12;
}

inline std::vector<HouseholdId> fired(const Fixture& fx, FirmId firm, int n, ubsfc::FiringRule rule) {
  const int t = fx.step;
  const auto& roster = fx.rosters[static_cast<std::size_t>(firm)];
  std::vector<HouseholdId> cd;
  for (auto i : roster) {
    const auto& h = fx.households[i];
    const bool many = contract_warning_count(h) >= 3;
    const bool recent = warned_in_contract_at(h, t - 1);
    const bool c = rule == ubsfc::FiringRule::warnings_or_recent ? (many || recent) : (many && recent);
    if (c && weak(fx, i, roster)) cd.push_back(i);
  }
  std::sort(cd.begin(), cd.end());
  std::stable_sort(cd.begin(), cd.end(), [&](HouseholdId a, HouseholdId b) {
    return contract_warning_count(fx.households[a]) > contract_warning_count(fx.households[b]);
  });
  if (static_cast<int>(cd.size()) > n) cd.resize(static_cast<std::size_t>(std::max(n, 0)));
  return cd;
}

inline std::vector<HouseholdId> quitters(const Fixture& fx) {
  const int t = fx.step;
  std::vector<HouseholdId> out;
  for (const auto& h : fx.households) {
    if (h.employer == ubsfc::kNoFirm || h.hire_step > t - 1) continue;
    if (!(h.wage < h.wage_prev)) continue;
    double w = 0.0, s = 0.0;
    int c = 0;
    for (const auto& f : fx.households) {
      if (!fx.adjacency[h.id][f.id] || f.employer == ubsfc::kNoFirm) continue;
      w += f.wage;
      s += f.satisfaction;
      ++c;
    }
    if (c == 0) continue;
    const bool worse = h.wage < w / c || h.satisfaction < s / c;
    if (worse && weak(fx, h.id, fx.rosters[static_cast<std::size_t>(h.employer)])) out.push_back(h.id);
  }
  return out;
}

inline std::vector<HouseholdId> signalled(const Fixture& fx, int vacancies, const ubsfc::BenefitScheme& scheme) {
  std::vector<HouseholdId> expired;
  for (const auto& h : fx.households) {
    if (h.employer != ubsfc::kNoFirm) continue;
    const int clock = scheme.mode == ubsfc::ExpiryMode::calendar ? fx.step : h.unemployment_spell;
    if (clock >= scheme.max_duration) expired.push_back(h.id);
  }
  expired = by_spell(expired, fx);
  if (static_cast<int>(expired.size()) > vacancies) expired.resize(static_cast<std::size_t>(std::max(vacancies, 0)));
  return expired;
}

struct SetCheck {
  int fixtures = 0;
  int mismatches = 0;
  int hires = 0;
  int fires = 0;
  int quits = 0;
  int signals = 0;
  std::string first_failure;
};

// Library selections against the reference on `count` seeded fixtures.
inline SetCheck check_selection_sets(int count, std::uint64_t seed0 = 1000) {
  SetCheck out;
  for (int k = 0; k < count; ++k) {
    const auto fx = make_fixture(seed0 + static_cast<std::uint64_t>(k));
    ++out.fixtures;
    auto fail = [&](const std::string& what) {
      ++out.mismatches;
      if (out.first_failure.empty()) out.first_failure = "fixture " + std::to_string(k) + ": " + what;
    };
    std::vector<HouseholdId> pool;
    for (const auto& h : fx.households)
      if (h.employer == ubsfc::kNoFirm) pool.push_back(h.id);
    for (FirmId f = 0; f < fx.firms; ++f) {
      std::vector<HouseholdId> firm_pool;
      for (auto i : pool)
        if (ubsfc::in_hiring_pool(fx.households[i], f, fx.step)) firm_pool.push_back(i);
      for (int n : {1, 3, 100}) {
        const auto got = ubsfc::hire(f, n, firm_pool, fx.households, fx.network, fx.step);
        const auto want = hired(fx, f, n);
        if (got != want) fail("hire firm " + std::to_string(f));
        out.hires += static_cast<int>(want.size());
      }
      for (auto rule : {ubsfc::FiringRule::warnings_or_recent, ubsfc::FiringRule::warnings_and_recent}) {
        for (int n : {1, 2, 100}) {
          const auto got =
              ubsfc::fire(n, fx.rosters[static_cast<std::size_t>(f)], fx.households, fx.intensity, fx.step, rule);
          const auto want = fired(fx, f, n, rule);
          if (got != want) fail("fire firm " + std::to_string(f));
          out.fires += static_cast<int>(want.size());
        }
      }
    }
    const auto got_q = ubsfc::quit(fx.households, fx.rosters, fx.network, fx.intensity, fx.step);
    const auto want_q = quitters(fx);
    if (got_q != want_q) fail("quit");
    out.quits += static_cast<int>(want_q.size());

    for (auto mode : {ubsfc::ExpiryMode::calendar, ubsfc::ExpiryMode::spell}) {
      ubsfc::BenefitScheme scheme;
      scheme.mode = mode;
      scheme.max_duration = mode == ubsfc::ExpiryMode::calendar ? fx.step - 5 : 12;
      std::vector<HouseholdId> expired;
      for (auto i : pool)
        if (ubsfc::benefits_expired(fx.households[i], scheme, fx.step)) expired.push_back(i);
      for (int v : {0, 2, 100}) {
        const auto got = ubsfc::hire_signalling(v, expired, fx.households);
        const auto want = signalled(fx, v, scheme);
        if (got != want) fail("signalling");
        out.signals += static_cast<int>(want.size());
      }
    }
  }
  return out;
}

}  // namespace oracle
