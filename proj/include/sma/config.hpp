#pragma once

// Run configuration and its line-oriented text format.
//
//   # comment
//   temperature = 37            initial temperature, °C
//   initial_phase = austenitic  austenitic | twinned-martensite | explicit
//   initial_lambda = 0.25 0.25 0.25 0.25   (explicit only)
//   initial_delta = 0.01
//   lambda_projection = unweighted-mean    | verbatim
//   frame_axis = 0 0 1          loading frame rotation, applied as ε_material = R ε Rᵀ
//   frame_angle = 45            degrees
//   output = run.csv
//   param.<name> = value        MaterialParams field, e.g. param.r_lambda
//   solver.<name> = value       SolverSettings field, e.g. solver.max_iterations
//
//   [step]
//   label = load
//   increments = 500
//   temperature = 37            target at the end of the step (default: unchanged)
//   eps_11 = 0.09               strain-controlled component, tensor shear for ij != ii
//   sig_22 = 0                  stress-controlled component, MPa
//
// Strains are measured from the stress-free configuration of the initial phase state.
// Targets ramp linearly over a step. Components not mentioned keep their control mode
// and target from the previous step; in the first step they default to eps_ij = 0, and
// stress targets of the first step apply from its first increment.

#include <array>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "sma/energy.hpp"
#include "sma/errors.hpp"
#include "sma/evolution.hpp"

namespace sma {

class ConfigError : public ValidationError {
 public:
  ConfigError(const std::string& message, std::string key, int line)
      : ValidationError(message), key_(std::move(key)), line_(line) {}
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

enum class Control { Strain, Stress };

struct ComponentTarget {
  Control mode = Control::Strain;
  double value = 0.0;
  friend bool operator==(const ComponentTarget&, const ComponentTarget&) = default;
};

struct LoadStep {
  std::string label;
  int increments = 1;
  double temperature = 0.0;
  std::array<ComponentTarget, 6> targets{};
};

enum class InitialPhase { Austenitic, TwinnedMartensite, Explicit };

struct RunConfig {
  MaterialParams params;
  SolverSettings solver;
  InitialPhase initial_phase = InitialPhase::Austenitic;
  Vec4 initial_lambda{0.25, 0.25, 0.25, 0.25};
  double initial_delta = 0.01;
  double initial_temperature = 37.0;
  /// ε_material = frame · ε · frameᵀ
  Mat3 frame = Mat3::identity();
  std::string output;
  std::vector<LoadStep> steps;

  MaterialState initial_state() const;
  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

/// Throws ConfigError naming the offending key and line.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

/// Component suffixes in storage order: 11, 22, 33, 12, 13, 23.
inline constexpr std::array<const char*, 6> kComponentNames{"11", "22", "33", "12", "13", "23"};

}  // namespace sma
