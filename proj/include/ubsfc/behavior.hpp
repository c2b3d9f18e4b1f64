#pragma once

// Worker-level kernel: value profiles, time allocation, output, rewards,
// satisfaction, warnings, the friendship network and within-firm
// interaction intensity; plus the firm's hill-climbing management strategy.

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "ubsfc/rng.hpp"
#include "ubsfc/types.hpp"

namespace ubsfc {

enum class ValueType : std::uint8_t { openness, conservation, self_enhancement, self_transcendence };
inline constexpr std::size_t kValueTypeCount = 4;

std::string_view to_string(ValueType v);  // "O", "C", "SE", "ST"

struct ValueProfile {
  ValueType type = ValueType::openness;
  double autonomy_preference = 0.5;   // 1 = wants no monitoring
  double reward_individualism = 0.5;  // 1 = wants purely individual pay
};

// O -> autonomy 1, C -> autonomy 0, SE -> individualism 1, ST -> individualism 0;
// the other coordinate is drawn uniform on [0, 1].
ValueProfile draw_value_profile(ValueType type, Rng& rng);

struct TimeShares {
  double personal = 1.0;
  double cooperative = 0.0;
  double shirking = 0.0;
};

struct ManagementStrategy {
  double monitoring = 0.5;  // m
  double pfp_mix = 0.5;     // lambda: 1 = fully cooperative pay
  double bonus_rate = 0.0;  // mu
  double base_wage = 8.0;   // omega_b
};

struct KernelParams {
  double shirk_min = 0.0;
  double shirk_max = 0.5;
  double shirk_tolerance = 0.2;
  double shirk_deterrence = 1.0;  // shirk curve exponent is 1 + deterrence * m
  // Cooperative fraction of non-shirking time.
  double coop_share_min = 0.1;
  double coop_share_max = 0.7;
  double coop_weight_pfp = 0.5;  // weight of lambda vs. the firm's cooperation norm
  double warning_penalty = 0.2;
  double satisfaction_rate = 0.1;
  double weight_autonomy = 0.5;
  double weight_reward = 0.5;
  double intensity_rate = 0.1;
};

struct StrategyParams {
  bool adapt = true;
  int review_period = 20;
  double step = 0.05;
  double bonus_max = 2.0;
  // false: the bonus rate is a third hill-climb lever; true: it rises when
  // the firm is short of staff and falls when it is overstaffed.
  bool bonus_tracks_staffing = false;
  // Each worker's bonus is reassessed every review_period steps after hire
  // and held in between; a new hire starts from the team's mean output.
  bool periodic_appraisal = true;
  double initial_monitoring = 0.5;
  double initial_pfp_mix = 0.5;
};

using HomophilyMatrix = std::array<std::array<double, kValueTypeCount>, kValueTypeCount>;

// Same-type weight 0.5 for SE and C, 1.5 for O and ST, 1.0 across types.
HomophilyMatrix default_homophily();

// Undirected, irreflexive, fixed for the whole run. Stored as CSR with
// sorted neighbour lists.
class FriendshipNetwork {
 public:
  FriendshipNetwork() = default;
  FriendshipNetwork(std::size_t n, const std::vector<std::pair<HouseholdId, HouseholdId>>& edges);

  std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::span<const HouseholdId> friends(HouseholdId i) const {
    return {neighbours_.data() + offsets_[i], neighbours_.data() + offsets_[i + 1]};
  }
  std::size_t degree(HouseholdId i) const { return offsets_[i + 1] - offsets_[i]; }
  std::size_t edge_count() const { return neighbours_.size() / 2; }
  double mean_degree() const;
  bool are_friends(HouseholdId i, HouseholdId j) const;

  bool operator==(const FriendshipNetwork&) const = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<HouseholdId> neighbours_;
};

// Pair i<j links with probability mean_degree/(n-1) * w(type_i, type_j) / w_bar,
// where w_bar is the mean symmetrised weight over all pairs, so the expected
// degree is mean_degree (up to probability clipping at 1).
FriendshipNetwork build_friendship_network(std::span<const ValueType> types, const HomophilyMatrix& homophily,
                                           double mean_degree, Rng& rng);

// shirk = shirk_min + (shirk_max - shirk_min) * (1 - S)^(1 + m); the rest of
// the endowment is split into cooperation and personal tasks by a share
// rising in lambda and in the firm's cooperation norm.
TimeShares allocate_time(double satisfaction, const ManagementStrategy& strategy, double cooperation_norm,
                         const KernelParams& params);

// O = pi * p^(1-kappa) * cbar^kappa
double individual_output(double productivity, double personal, double team_cooperation, double kappa);

// R = omega_b + mu * ((1 - lambda) * O_i + lambda * mean(O_team))
double reward(double own_output, double team_mean_output, const ManagementStrategy& strategy);
double reward(double own_output, std::span<const double> team_outputs, const ManagementStrategy& strategy);

// Person-organisation fit, in [0, 1].
double base_satisfaction(const ValueProfile& values, const ManagementStrategy& strategy, const KernelParams& params);

struct SatisfactionUpdate {
  double satisfaction;
  double productivity;
};

// Relax toward S0 at satisfaction_rate, then subtract the warning penalty
// (floored at 0). Productivity is productivity_max * S.
SatisfactionUpdate update_satisfaction(double satisfaction, double base, bool warned, double productivity_max,
                                       const KernelParams& params);

// Each member shirking above tolerance is caught with probability
// `monitoring`. Members are visited in the order given.
std::vector<HouseholdId> monitor_and_warn(std::span<const HouseholdId> roster, std::span<const double> shirking,
                                          double monitoring, double tolerance, Rng& rng);

struct HillClimbState {
  std::array<int, 3> direction{1, 1, 1};  // monitoring, pfp_mix, bonus_rate
  std::size_t next_flip = 0;
  bool has_previous = false;
  double previous_performance = 0.0;
  double window_output = 0.0;
  int window_samples = 0;
  int last_review_step = 0;
};

// One review. `performance` is the mean output per worker over the window
// just closed. If it beat the previous window every lever moves again in
// its current direction, otherwise one lever's direction flips (rotating)
// and the strategy is kept.
// The very first review only records a baseline and explores.
// `staffing_gap` is labour demand minus roster size, used only when the
// bonus tracks staffing.
ManagementStrategy adapt_strategy(const ManagementStrategy& current, HillClimbState& state, double performance,
                                  const StrategyParams& params, int staffing_gap = 0);

// Pairwise within-firm interaction intensity e_ij, dense and symmetric.
class InteractionMatrix {
 public:
  explicit InteractionMatrix(std::size_t n = 0) : n_(n), values_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double get(HouseholdId i, HouseholdId j) const { return values_[i * n_ + j]; }
  void set(HouseholdId i, HouseholdId j, double v) {
    values_[i * n_ + j] = v;
    values_[j * n_ + i] = v;
  }
  // Forget every tie of i (fresh contract).
  void reset(HouseholdId i);

  // e_ij <- (1 - rate) e_ij + rate * min(c_i, c_j) for colleagues,
  // e_ij <- (1 - rate) e_ij for every other pair.
  void update(std::span<const FirmId> employer, std::span<const double> cooperation, double rate);

  // Mean of e_ij over j != i in the roster; 0 for a lone worker.
  double mean_intensity(HouseholdId i, std::span<const HouseholdId> roster) const;

 private:
  std::size_t n_;
  std::vector<double> values_;
};

// ebar_i for each roster member, in roster order.
std::vector<double> embeddedness(std::span<const HouseholdId> roster, const InteractionMatrix& intensity);

// True for members whose ebar is strictly below the mean ebar of the other
// members. A lone worker is never below.
std::vector<bool> weakly_embedded(std::span<const double> ebar);

}  // namespace ubsfc
