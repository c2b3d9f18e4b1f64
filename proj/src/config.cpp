#include "ubsfc/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "ubsfc/errors.hpp"

namespace ubsfc {
namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("key '" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
  }
  return out;
}

template <class Int>
Int parse_int(std::string_view key, std::string_view v) {
  Int out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("key '" + std::string(key) + "' expects an integer, got '" + std::string(v) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError("key '" + std::string(key) + "' expects true/false, got '" + std::string(v) + "'");
}

struct Field {
  std::string key;
  std::function<std::string(const ScenarioConfig&)> get;
  std::function<void(ScenarioConfig&, std::string_view)> set;
};

template <class Member>
Field number(std::string key, Member member) {
  return {key, [member](const ScenarioConfig& c) { return format_double(std::invoke(member, c)); },
          [member, key](ScenarioConfig& c, std::string_view v) { std::invoke(member, c) = parse_double(key, v); }};
}

template <class Member>
Field integer(std::string key, Member member) {
  return {key, [member](const ScenarioConfig& c) { return std::to_string(std::invoke(member, c)); },
          [member, key](ScenarioConfig& c, std::string_view v) {
            auto& ref = std::invoke(member, c);
            ref = parse_int<std::remove_reference_t<decltype(ref)>>(key, v);
          }};
}

template <class Member>
Field boolean(std::string key, Member member) {
  return {key, [member](const ScenarioConfig& c) { return std::string(std::invoke(member, c) ? "true" : "false"); },
          [member, key](ScenarioConfig& c, std::string_view v) { std::invoke(member, c) = parse_bool(key, v); }};
}

constexpr std::array<std::string_view, kValueTypeCount> kTypeKeys = {"O", "C", "SE", "ST"};

std::vector<Field> build_fields() {
  using C = ScenarioConfig;
  std::vector<Field> f;
  f.push_back({"name", [](const C& c) { return c.name; }, [](C& c, std::string_view v) { c.name = std::string(v); }});
  f.push_back(number("replacement_rate", [](auto& c) -> auto& { return c.benefits.replacement_rate; }));
  f.push_back(number("poverty_rate", [](auto& c) -> auto& { return c.benefits.poverty_rate; }));
  f.push_back(integer("max_duration", [](auto& c) -> auto& { return c.benefits.max_duration; }));
  f.push_back({"expiry_mode",
               [](const C& c) { return std::string(c.benefits.mode == ExpiryMode::calendar ? "calendar" : "spell"); },
               [](C& c, std::string_view v) {
                 if (v == "calendar") c.benefits.mode = ExpiryMode::calendar;
                 else if (v == "spell") c.benefits.mode = ExpiryMode::spell;
                 else throw ConfigError("expiry_mode must be 'calendar' or 'spell', got '" + std::string(v) + "'");
               }});
  f.push_back(integer("households", [](auto& c) -> auto& { return c.households; }));
  f.push_back(integer("firms", [](auto& c) -> auto& { return c.firms; }));
  f.push_back(integer("steps", [](auto& c) -> auto& { return c.steps; }));
  f.push_back(integer("burn_in", [](auto& c) -> auto& { return c.burn_in; }));
  f.push_back(integer("replicates", [](auto& c) -> auto& { return c.replicates; }));
  f.push_back(integer("seed", [](auto& c) -> auto& { return c.seed; }));
  f.push_back(number("initial_output", [](auto& c) -> auto& { return c.initial_output; }));
  f.push_back(number("debt_ratio", [](auto& c) -> auto& { return c.debt_ratio; }));
  f.push_back(number("markup", [](auto& c) -> auto& { return c.markup; }));
  f.push_back(number("sales_weight", [](auto& c) -> auto& { return c.sales_weight; }));
  f.push_back({"expectation_mode",
               [](const C& c) {
                 return std::string(c.expectations == ExpectationMode::adaptive ? "adaptive" : "as-written");
               },
               [](C& c, std::string_view v) {
                 if (v == "adaptive") c.expectations = ExpectationMode::adaptive;
                 else if (v == "as-written") c.expectations = ExpectationMode::as_written;
                 else throw ConfigError("expectation_mode must be 'adaptive' or 'as-written', got '" + std::string(v) + "'");
               }});
  f.push_back(number("inventory_ratio", [](auto& c) -> auto& { return c.inventory_ratio; }));
  f.push_back(number("inventory_adjustment", [](auto& c) -> auto& { return c.inventory_adjustment; }));
  f.push_back(number("interdependence", [](auto& c) -> auto& { return c.interdependence; }));
  f.push_back(number("base_wage", [](auto& c) -> auto& { return c.base_wage; }));

  f.push_back(number("gov_purchases", [](auto& c) -> auto& { return c.finance.gov_purchases; }));
  f.push_back(number("bill_rate", [](auto& c) -> auto& { return c.finance.bill_rate; }));
  f.push_back(number("loan_rate", [](auto& c) -> auto& { return c.finance.loan_rate; }));
  f.push_back(number("deposit_rate", [](auto& c) -> auto& { return c.finance.deposit_rate; }));
  f.push_back(number("reserve_ratio", [](auto& c) -> auto& { return c.finance.reserve_ratio; }));
  f.push_back(number("liquidity_ratio", [](auto& c) -> auto& { return c.finance.liquidity_ratio; }));
  f.push_back(number("propensity_income", [](auto& c) -> auto& { return c.finance.propensity_income; }));

  f.push_back(number("shirk_min", [](auto& c) -> auto& { return c.kernel.shirk_min; }));
  f.push_back(number("shirk_max", [](auto& c) -> auto& { return c.kernel.shirk_max; }));
  f.push_back(number("shirk_tolerance", [](auto& c) -> auto& { return c.kernel.shirk_tolerance; }));
  f.push_back(number("shirk_deterrence", [](auto& c) -> auto& { return c.kernel.shirk_deterrence; }));
  f.push_back(number("coop_share_min", [](auto& c) -> auto& { return c.kernel.coop_share_min; }));
  f.push_back(number("coop_share_max", [](auto& c) -> auto& { return c.kernel.coop_share_max; }));
  f.push_back(number("coop_weight_pfp", [](auto& c) -> auto& { return c.kernel.coop_weight_pfp; }));
  f.push_back(number("warning_penalty", [](auto& c) -> auto& { return c.kernel.warning_penalty; }));
  f.push_back(number("satisfaction_rate", [](auto& c) -> auto& { return c.kernel.satisfaction_rate; }));
  f.push_back(number("weight_autonomy", [](auto& c) -> auto& { return c.kernel.weight_autonomy; }));
  f.push_back(number("weight_reward", [](auto& c) -> auto& { return c.kernel.weight_reward; }));
  f.push_back(number("intensity_rate", [](auto& c) -> auto& { return c.kernel.intensity_rate; }));

  f.push_back(boolean("adaptation", [](auto& c) -> auto& { return c.strategy.adapt; }));
  f.push_back(integer("review_period", [](auto& c) -> auto& { return c.strategy.review_period; }));
  f.push_back(number("strategy_step", [](auto& c) -> auto& { return c.strategy.step; }));
  f.push_back(number("bonus_max", [](auto& c) -> auto& { return c.strategy.bonus_max; }));
  f.push_back(boolean("bonus_tracks_staffing", [](auto& c) -> auto& { return c.strategy.bonus_tracks_staffing; }));
  f.push_back(boolean("periodic_appraisal", [](auto& c) -> auto& { return c.strategy.periodic_appraisal; }));
  f.push_back(number("initial_monitoring", [](auto& c) -> auto& { return c.strategy.initial_monitoring; }));
  f.push_back(number("initial_pfp_mix", [](auto& c) -> auto& { return c.strategy.initial_pfp_mix; }));

  f.push_back({"firing_rule",
               [](const C& c) { return std::string(c.firing == FiringRule::warnings_or_recent ? "or" : "strict-and"); },
               [](C& c, std::string_view v) {
                 if (v == "or") c.firing = FiringRule::warnings_or_recent;
                 else if (v == "strict-and") c.firing = FiringRule::warnings_and_recent;
                 else throw ConfigError("firing_rule must be 'or' or 'strict-and', got '" + std::string(v) + "'");
               }});
  f.push_back({"matching",
               [](const C& c) { return std::string(c.matching == MatchingMode::random ? "random" : "balanced"); },
               [](C& c, std::string_view v) {
                 if (v == "random") c.matching = MatchingMode::random;
                 else if (v == "balanced") c.matching = MatchingMode::balanced;
                 else throw ConfigError("matching must be 'random' or 'balanced', got '" + std::string(v) + "'");
               }});
  f.push_back(boolean("monitoring", [](auto& c) -> auto& { return c.monitoring; }));
  f.push_back(boolean("quitting", [](auto& c) -> auto& { return c.quitting; }));

  for (std::size_t a = 0; a < kValueTypeCount; ++a) {
    f.push_back(number("share." + std::string(kTypeKeys[a]), [a](auto& c) -> auto& { return c.type_shares[a]; }));
  }
  for (std::size_t a = 0; a < kValueTypeCount; ++a) {
    for (std::size_t b = 0; b < kValueTypeCount; ++b) {
      f.push_back(number("homophily." + std::string(kTypeKeys[a]) + "." + std::string(kTypeKeys[b]),
                         [a, b](auto& c) -> auto& { return c.homophily[a][b]; }));
    }
  }
  f.push_back(number("mean_degree", [](auto& c) -> auto& { return c.mean_degree; }));

  f.push_back(boolean("strict_sfc", [](auto& c) -> auto& { return c.strict_sfc; }));
  f.push_back(number("sfc_tolerance", [](auto& c) -> auto& { return c.sfc_tolerance; }));
  f.push_back(boolean("consistency_log", [](auto& c) -> auto& { return c.consistency_log; }));
  f.push_back(number("hp_lambda", [](auto& c) -> auto& { return c.hp_lambda; }));
  return f;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = build_fields();
  return table;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void require_unit(double v, const std::string& key) {
  require(v >= 0.0 && v <= 1.0, key + " must lie in [0, 1], got " + format_double(v));
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"baseline", "high",       "low",      "long",     "short",
                                                 "high-long", "high-short", "low-long", "low-short"};
  return names;
}

std::optional<ScenarioConfig> scenario_preset(std::string_view name) {
  struct Row {
    std::string_view name;
    double rate;
    int duration;
  };
  static constexpr std::array<Row, 9> rows = {{{"baseline", 0.52, 360},
                                               {"high", 0.69, 360},
                                               {"low", 0.35, 360},
                                               {"long", 0.52, 540},
                                               {"short", 0.52, 180},
                                               {"high-long", 0.69, 540},
                                               {"high-short", 0.69, 180},
                                               {"low-long", 0.35, 540},
                                               {"low-short", 0.35, 180}}};
  for (const auto& r : rows) {
    if (r.name != name) continue;
    ScenarioConfig c;
    c.name = std::string(r.name);
    c.benefits.replacement_rate = r.rate;
    c.benefits.max_duration = r.duration;
    return c;
  }
  return std::nullopt;
}

void validate(const ScenarioConfig& c) {
  const double rate = c.benefits.replacement_rate;
  require(rate > 0.0 && rate < 1.0,
          "replacement_rate (delta_g) must lie in the open interval (0, 1), got " + format_double(rate));
  const double poverty = c.benefits.poverty_rate;
  require(poverty > 0.0 && poverty < 1.0,
          "poverty_rate must lie in the open interval (0, 1), got " + format_double(poverty));
  require(c.benefits.max_duration > 0, "max_duration (epsilon) must be positive");
  require(c.households >= 2, "households must be at least 2");
  require(c.firms >= 1, "firms must be at least 1");
  require(c.households >= c.firms, "households must be at least the number of firms");
  require(c.steps >= 1, "steps must be positive");
  require(c.burn_in >= 0, "burn_in must be non-negative");
  require(c.replicates >= 1, "replicates must be positive");
  require(c.initial_output > 0.0, "initial_output must be positive");
  require(c.debt_ratio >= 0.0, "debt_ratio must be non-negative");
  require(c.markup >= 0.0, "markup must be non-negative");
  require_unit(c.sales_weight, "sales_weight");
  require(c.inventory_ratio >= 0.0, "inventory_ratio must be non-negative");
  require_unit(c.inventory_adjustment, "inventory_adjustment");
  require_unit(c.interdependence, "interdependence");
  require(c.base_wage > 0.0, "base_wage must be positive");

  const auto& fin = c.finance;
  require(fin.gov_purchases >= 0.0, "gov_purchases must be non-negative");
  require(fin.bill_rate >= 0.0 && fin.loan_rate >= 0.0 && fin.deposit_rate >= 0.0,
          "interest rates must be non-negative");
  require(fin.reserve_ratio >= 0.0 && fin.liquidity_ratio >= 0.0, "reserve and liquidity ratios must be non-negative");
  require(fin.propensity_income > 0.0 && fin.propensity_income <= 1.0, "propensity_income must lie in (0, 1]");

  const auto& k = c.kernel;
  require_unit(k.shirk_min, "shirk_min");
  require_unit(k.shirk_max, "shirk_max");
  require(k.shirk_min <= k.shirk_max, "shirk_min must not exceed shirk_max");
  require_unit(k.shirk_tolerance, "shirk_tolerance");
  require(k.shirk_deterrence >= 0.0, "shirk_deterrence must be non-negative");
  require_unit(k.coop_share_min, "coop_share_min");
  require_unit(k.coop_share_max, "coop_share_max");
  require(k.coop_share_min <= k.coop_share_max, "coop_share_min must not exceed coop_share_max");
  require_unit(k.coop_weight_pfp, "coop_weight_pfp");
  require_unit(k.warning_penalty, "warning_penalty");
  require_unit(k.satisfaction_rate, "satisfaction_rate");
  require_unit(k.weight_autonomy, "weight_autonomy");
  require_unit(k.weight_reward, "weight_reward");
  require(std::abs(k.weight_autonomy + k.weight_reward - 1.0) < 1e-12, "weight_autonomy + weight_reward must equal 1");
  require_unit(k.intensity_rate, "intensity_rate");

  require(c.strategy.review_period >= 1, "review_period must be positive");
  require(c.strategy.step > 0.0, "strategy_step must be positive");
  require(c.strategy.bonus_max >= 0.0, "bonus_max must be non-negative");
  require_unit(c.strategy.initial_monitoring, "initial_monitoring");
  require_unit(c.strategy.initial_pfp_mix, "initial_pfp_mix");

  double share_sum = 0.0;
  for (double s : c.type_shares) {
    require(s >= 0.0, "value-type shares must be non-negative");
    share_sum += s;
  }
  require(share_sum > 0.0, "value-type shares must not all be zero");
  for (const auto& row : c.homophily)
    for (double w : row) require(w >= 0.0, "homophily weights must be non-negative");
  require(c.mean_degree >= 0.0, "mean_degree must be non-negative");
  require(c.mean_degree < c.households, "mean_degree must be below the number of households");
  require(c.sfc_tolerance > 0.0, "sfc_tolerance must be positive");
  require(c.hp_lambda > 0.0, "hp_lambda must be positive");
}

void set_config_value(ScenarioConfig& config, std::string_view key, std::string_view value) {
  if (key == "scenario") {
    auto preset = scenario_preset(value);
    if (!preset) throw ConfigError("unknown scenario '" + std::string(value) + "'");
    config = *preset;
    return;
  }
  for (const auto& field : fields()) {
    if (field.key == key) {
      field.set(config, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

ScenarioConfig parse_config(std::istream& in, ScenarioConfig base) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
    }
    set_config_value(base, trim(view.substr(0, eq)), trim(view.substr(eq + 1)));
  }
  return base;
}

ScenarioConfig parse_config_text(std::string_view text, ScenarioConfig base) {
  std::istringstream in{std::string(text)};
  return parse_config(in, std::move(base));
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

std::string serialize_config(const ScenarioConfig& config) {
  std::string out;
  for (const auto& field : fields()) out += field.key + " = " + field.get(config) + "\n";
  return out;
}

std::string config_hash(const ScenarioConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string default_output_root() {
  if (const char* env = std::getenv("UBSFC_OUTPUT_ROOT"); env != nullptr && *env != '\0') return env;
  return "out";
}

}  // namespace ubsfc
