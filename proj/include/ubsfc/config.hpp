#pragma once

// Scenario configuration: every exogenous parameter, the nine benefit
// presets, and the plain-text `key = value` file format.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ubsfc/aggregates.hpp"
#include "ubsfc/behavior.hpp"
#include "ubsfc/firms.hpp"
#include "ubsfc/labour_market.hpp"

namespace ubsfc {

enum class MatchingMode { random, balanced };

struct ScenarioConfig {
  std::string name = "baseline";
  BenefitScheme benefits;

  int households = 500;
  int firms = 5;
  int steps = 1080;
  int burn_in = 50;
  int replicates = 100;
  std::uint64_t seed = 42;

  // Stationary-state anchors.
  double initial_output = 558.787517;
  double debt_ratio = 502.9087653 / 5600.0;  // B / (p y)

  // Firms.
  double markup = 0.4;
  double sales_weight = 0.5;          // beta_exp
  ExpectationMode expectations = ExpectationMode::adaptive;
  double inventory_ratio = 1.0;       // sigma_inv
  double inventory_adjustment = 0.5;  // lambda_exp
  double interdependence = 0.5;       // kappa
  double base_wage = 8.0;

  FinanceParams finance;
  KernelParams kernel;
  StrategyParams strategy;
  FiringRule firing = FiringRule::warnings_or_recent;
  MatchingMode matching = MatchingMode::random;
  bool monitoring = true;
  bool quitting = true;

  std::array<double, kValueTypeCount> type_shares{0.25, 0.25, 0.25, 0.25};
  HomophilyMatrix homophily = default_homophily();
  double mean_degree = 5.0;

  bool strict_sfc = true;
  double sfc_tolerance = 1e-6;
  bool consistency_log = false;
  double hp_lambda = 1600.0;
};

// "baseline", "high", "low", "long", "short", "high-long", "high-short",
// "low-long", "low-short".
const std::vector<std::string>& scenario_names();
std::optional<ScenarioConfig> scenario_preset(std::string_view name);

// Throws ConfigError with a message naming the offending key.
void validate(const ScenarioConfig& config);

// Lines of `key = value`; `#` starts a comment. A `scenario = <name>` line
// resets every field to that preset before the following keys apply.
ScenarioConfig parse_config(std::istream& in, ScenarioConfig base = {});
ScenarioConfig parse_config_text(std::string_view text, ScenarioConfig base = {});
ScenarioConfig load_config(const std::string& path);

// Applies one key. Throws ConfigError on an unknown key or bad value.
void set_config_value(ScenarioConfig& config, std::string_view key, std::string_view value);

// Every key, in a fixed order, so the output parses back to the same config.
std::string serialize_config(const ScenarioConfig& config);

// FNV-1a over the serialized form, as 16 hex digits.
std::string config_hash(const ScenarioConfig& config);

// Default output root: $UBSFC_OUTPUT_ROOT, else "out".
std::string default_output_root();

}  // namespace ubsfc
