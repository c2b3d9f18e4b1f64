#include "ubsfc/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ubsfc/errors.hpp"

namespace ubsfc {
namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

double step_lever(double value, int direction, double step, double upper) {
  return std::clamp(value + direction * step, 0.0, upper);
}

}  // namespace

std::string_view to_string(ValueType v) {
  switch (v) {
    case ValueType::openness: return "O";
    case ValueType::conservation: return "C";
    case ValueType::self_enhancement: return "SE";
    case ValueType::self_transcendence: return "ST";
  }
  return "?";
}

ValueProfile draw_value_profile(ValueType type, Rng& rng) {
  ValueProfile v;
  v.type = type;
  switch (type) {
    case ValueType::openness:
      v.autonomy_preference = 1.0;
      v.reward_individualism = rng.uniform();
      break;
    case ValueType::conservation:
      v.autonomy_preference = 0.0;
      v.reward_individualism = rng.uniform();
      break;
    case ValueType::self_enhancement:
      v.autonomy_preference = rng.uniform();
      v.reward_individualism = 1.0;
      break;
    case ValueType::self_transcendence:
      v.autonomy_preference = rng.uniform();
      v.reward_individualism = 0.0;
      break;
  }
  return v;
}

HomophilyMatrix default_homophily() {
  HomophilyMatrix w{};
  for (auto& row : w) row.fill(1.0);
  w[0][0] = 1.5;  // O
  w[1][1] = 0.5;  // C
  w[2][2] = 0.5;  // SE
  w[3][3] = 1.5;  // ST
  return w;
}

FriendshipNetwork::FriendshipNetwork(std::size_t n, const std::vector<std::pair<HouseholdId, HouseholdId>>& edges) {
  std::vector<std::vector<HouseholdId>> adj(n);
  for (const auto& [a, b] : edges) {
    if (a == b || a >= n || b >= n) throw ConfigError("friendship edge out of range or reflexive");
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& list = adj[i];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    offsets_[i + 1] = offsets_[i] + list.size();
  }
  neighbours_.reserve(offsets_[n]);
  for (const auto& list : adj) neighbours_.insert(neighbours_.end(), list.begin(), list.end());
}

double FriendshipNetwork::mean_degree() const {
  if (size() == 0) return 0.0;
  return static_cast<double>(neighbours_.size()) / static_cast<double>(size());
}

bool FriendshipNetwork::are_friends(HouseholdId i, HouseholdId j) const {
  const auto f = friends(i);
  return std::binary_search(f.begin(), f.end(), j);
}

FriendshipNetwork build_friendship_network(std::span<const ValueType> types, const HomophilyMatrix& homophily,
                                           double mean_degree, Rng& rng) {
  const std::size_t n = types.size();
  if (mean_degree < 0.0) throw ConfigError("mean_degree must be non-negative");
  if (n > 0 && mean_degree >= static_cast<double>(n)) {
    throw ConfigError("mean_degree must be below the number of households");
  }
  std::vector<std::pair<HouseholdId, HouseholdId>> edges;
  if (n < 2 || mean_degree == 0.0) return FriendshipNetwork(n, edges);

  HomophilyMatrix w{};
  for (std::size_t a = 0; a < kValueTypeCount; ++a)
    for (std::size_t b = 0; b < kValueTypeCount; ++b) w[a][b] = 0.5 * (homophily[a][b] + homophily[b][a]);

  std::array<double, kValueTypeCount> count{};
  for (auto t : types) count[static_cast<std::size_t>(t)] += 1.0;
  double weight_sum = 0.0;
  for (std::size_t a = 0; a < kValueTypeCount; ++a) {
    weight_sum += w[a][a] * count[a] * (count[a] - 1.0) / 2.0;
    for (std::size_t b = a + 1; b < kValueTypeCount; ++b) weight_sum += w[a][b] * count[a] * count[b];
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  const double mean_weight = weight_sum / pairs;
  if (!(mean_weight > 0.0)) throw ConfigError("homophily weights must have a positive mean");
  const double base = mean_degree / static_cast<double>(n - 1) / mean_weight;

  for (std::size_t i = 0; i < n; ++i) {
    const auto ti = static_cast<std::size_t>(types[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = base * w[ti][static_cast<std::size_t>(types[j])];
      if (rng.bernoulli(p)) edges.emplace_back(static_cast<HouseholdId>(i), static_cast<HouseholdId>(j));
    }
  }
  return FriendshipNetwork(n, edges);
}

TimeShares allocate_time(double satisfaction, const ManagementStrategy& strategy, double cooperation_norm,
                         const KernelParams& params) {
  const double s = clamp01(satisfaction);
  const double m = clamp01(strategy.monitoring);
  const double shirk =
      params.shirk_min + (params.shirk_max - params.shirk_min) * std::pow(1.0 - s, 1.0 + params.shirk_deterrence * m);
  const double drive = params.coop_weight_pfp * clamp01(strategy.pfp_mix) +
                       (1.0 - params.coop_weight_pfp) * clamp01(cooperation_norm);
  const double coop_share = params.coop_share_min + (params.coop_share_max - params.coop_share_min) * drive;
  const double effort = 1.0 - shirk;
  TimeShares shares;
  shares.shirking = shirk;
  shares.cooperative = effort * coop_share;
  shares.personal = effort - shares.cooperative;
  return shares;
}

double individual_output(double productivity, double personal, double team_cooperation, double kappa) {
  return productivity * std::pow(personal, 1.0 - kappa) * std::pow(team_cooperation, kappa);
}

double reward(double own_output, double team_mean_output, const ManagementStrategy& strategy) {
  const double bonus = (1.0 - strategy.pfp_mix) * own_output + strategy.pfp_mix * team_mean_output;
  return strategy.base_wage + strategy.bonus_rate * bonus;
}

double reward(double own_output, std::span<const double> team_outputs, const ManagementStrategy& strategy) {
  const double mean = team_outputs.empty()
                          ? own_output
                          : std::accumulate(team_outputs.begin(), team_outputs.end(), 0.0) /
                                static_cast<double>(team_outputs.size());
  return reward(own_output, mean, strategy);
}

double base_satisfaction(const ValueProfile& values, const ManagementStrategy& strategy, const KernelParams& params) {
  const double autonomy_gap = std::abs(values.autonomy_preference - (1.0 - strategy.monitoring));
  const double reward_gap = std::abs(values.reward_individualism - (1.0 - strategy.pfp_mix));
  return clamp01(1.0 - params.weight_autonomy * autonomy_gap - params.weight_reward * reward_gap);
}

SatisfactionUpdate update_satisfaction(double satisfaction, double base, bool warned, double productivity_max,
                                       const KernelParams& params) {
  double s = satisfaction + params.satisfaction_rate * (base - satisfaction);
  if (warned) s -= params.warning_penalty;
  s = clamp01(s);
  return {s, productivity_max * s};
}

std::vector<HouseholdId> monitor_and_warn(std::span<const HouseholdId> roster, std::span<const double> shirking,
                                          double monitoring, double tolerance, Rng& rng) {
  std::vector<HouseholdId> warned;
  for (std::size_t k = 0; k < roster.size(); ++k) {
    if (shirking[k] > tolerance && rng.bernoulli(monitoring)) warned.push_back(roster[k]);
  }
  return warned;
}

ManagementStrategy adapt_strategy(const ManagementStrategy& current, HillClimbState& state, double performance,
                                  const StrategyParams& params, int staffing_gap) {
  const bool improved = !state.has_previous || performance > state.previous_performance;
  state.has_previous = true;
  state.previous_performance = performance;
  const std::size_t levers = params.bonus_tracks_staffing ? 2 : 3;
  const double bonus_step = params.step * params.bonus_max;

  ManagementStrategy next = current;
  if (params.bonus_tracks_staffing && staffing_gap != 0) {
    next.bonus_rate = step_lever(current.bonus_rate, staffing_gap > 0 ? 1 : -1, bonus_step, params.bonus_max);
  }
  if (!improved) {
    // Reverse one lever per failed review, rotating, so the levers decouple.
    auto& d = state.direction[state.next_flip % levers];
    d = -d;
    state.next_flip = (state.next_flip + 1) % levers;
    return next;
  }
  next.monitoring = step_lever(current.monitoring, state.direction[0], params.step, 1.0);
  next.pfp_mix = step_lever(current.pfp_mix, state.direction[1], params.step, 1.0);
  if (!params.bonus_tracks_staffing) {
    next.bonus_rate = step_lever(current.bonus_rate, state.direction[2], bonus_step, params.bonus_max);
  }
  return next;
}

void InteractionMatrix::reset(HouseholdId i) {
  for (std::size_t j = 0; j < n_; ++j) {
    values_[i * n_ + j] = 0.0;
    values_[j * n_ + i] = 0.0;
  }
}

void InteractionMatrix::update(std::span<const FirmId> employer, std::span<const double> cooperation, double rate) {
  const double keep = 1.0 - rate;
  for (std::size_t i = 0; i < n_; ++i) {
    double* row = values_.data() + i * n_;
    const FirmId fi = employer[i];
    for (std::size_t j = i + 1; j < n_; ++j) {
      double v = keep * row[j];
      if (fi != kNoFirm && employer[j] == fi) v += rate * std::min(cooperation[i], cooperation[j]);
      row[j] = v;
      values_[j * n_ + i] = v;
    }
  }
}

double InteractionMatrix::mean_intensity(HouseholdId i, std::span<const HouseholdId> roster) const {
  double sum = 0.0;
  std::size_t count = 0;
  for (auto j : roster) {
    if (j == i) continue;
    sum += get(i, j);
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

std::vector<double> embeddedness(std::span<const HouseholdId> roster, const InteractionMatrix& intensity) {
  std::vector<double> ebar(roster.size());
  for (std::size_t k = 0; k < roster.size(); ++k) ebar[k] = intensity.mean_intensity(roster[k], roster);
  return ebar;
}

std::vector<bool> weakly_embedded(std::span<const double> ebar) {
  const std::size_t n = ebar.size();
  std::vector<bool> below(n, false);
  if (n < 2) return below;
  const double total = std::accumulate(ebar.begin(), ebar.end(), 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double others = (total - ebar[k]) / static_cast<double>(n - 1);
    // Summation noise must not split a roster of equal intensities.
    below[k] = ebar[k] < others - 1e-12 * std::max(1.0, std::abs(others));
  }
  return below;
}

}  // namespace ubsfc
