#pragma once

#include <stdexcept>
#include <string>

namespace ubsfc {

// Invalid parameter, unknown key, unknown matrix cell.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Stationary-state construction failed.
class InitializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A market cannot clear (e.g. negative central-bank bill holdings).
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Stock-flow consistency violated above tolerance.
class ConsistencyError : public std::runtime_error {
 public:
  ConsistencyError(int step, std::string row, double residual)
      : std::runtime_error("SFC violation at step " + std::to_string(step) + " in " + row +
                           ": residual " + std::to_string(residual)),
        step_(step),
        row_(std::move(row)),
        residual_(residual) {}

  int step() const noexcept { return step_; }
  const std::string& row() const noexcept { return row_; }
  double residual() const noexcept { return residual_; }

 private:
  int step_;
  std::string row_;
  double residual_;
};

}  // namespace ubsfc
