#pragma once

#include <algorithm>
#include <vector>

#include "ubsfc/behavior.hpp"
#include "ubsfc/types.hpp"

namespace ubsfc {

struct Household {
  HouseholdId id = 0;
  ValueProfile values;

  FirmId employer = kNoFirm;
  FirmId last_employer = kNoFirm;
  int hire_step = 0;
  int separation_step = -1;
  bool ever_employed = false;
  std::vector<int> warnings;  // step indices, append only

  double satisfaction = 0.0;
  double base_satisfaction = 0.0;
  double productivity = 0.0;
  TimeShares shares{0.0, 0.0, 0.0};
  double output = 0.0;
  double bonus = 0.0;  // pay above the base wage, fixed at the last appraisal

  double wage = 0.0;       // reward received this step, 0 when unemployed
  double wage_prev = 0.0;  // reward received last step
  double last_wage = 0.0;  // wage when last employed, W_{t-x}
  int unemployment_spell = 0;
  int employment_spell = 0;

  double deposits = 0.0;
  double disposable_income = 0.0;
  double consumption_real = 0.0;
  double consumption_nominal = 0.0;
  double tax = 0.0;
  double benefit = 0.0;

  bool employed() const { return employer != kNoFirm; }

  // Warnings received during the current (or last) employment contract.
  int contract_warnings() const {
    return static_cast<int>(std::count_if(warnings.begin(), warnings.end(), [&](int s) { return s >= hire_step; }));
  }
  // Warned at `step` during the current contract.
  bool warned_at(int step) const { return step >= hire_step && !warnings.empty() && warnings.back() == step; }
};

}  // namespace ubsfc
