#pragma once

// Load-path engine: drives one material point through a sequence of mixed
// strain/stress-controlled steps and records every increment.

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "sma/config.hpp"
#include "sma/material_point.hpp"

namespace sma {

struct TraceRow {
  int index = 0;  ///< 0 is the initial state
  int step = -1;
  double theta = 0.0;
  /// Strain, stress and plastic strain in the loading frame. Strain is measured from the
  /// stress-free configuration of the initial phase state (row 0 has zero strain and stress).
  Sym3 strain;
  Sym3 stress;
  Sym3 eps_pl;
  /// Accumulated explicit-Euler stress, loading frame.
  Sym3 stress_incremental;
  MaterialState state;  ///< material frame
  DrivingForces forces;  ///< material frame, at the accepted state
  YieldValues phi;
  StepReport report;
  int control_iterations = 0;
};

struct Trace {
  std::vector<TraceRow> rows;

  /// Largest |σ_ij| over all rows.
  double peak_stress() const;
};

/// Failure while running a path. `increment` is the index of the increment that failed;
/// `last_good` holds the rows accepted before it.
class PathError : public Error {
 public:
  enum class Kind { NonConvergence, MixedControl, Other };

  PathError(Kind kind, const std::string& what, int increment, StepReport report, Trace last_good)
      : Error(what), kind_(kind), increment_(increment), report_(report), last_good_(std::move(last_good)) {}

  Kind kind() const { return kind_; }
  int increment() const { return increment_; }
  const StepReport& report() const { return report_; }
  const Trace& last_good() const { return last_good_; }

 private:
  Kind kind_;
  int increment_;
  StepReport report_;
  Trace last_good_;
};

/// Maximum Newton-Broyden iterations for stress-controlled components per increment.
inline constexpr int kMixedControlMaxIterations = 50;

Trace run_path(const RunConfig& cfg);

/// Fixed-schema CSV with a header row; numbers carry 17 significant digits.
void write_csv(std::ostream& out, const Trace& trace);
void write_csv(const std::filesystem::path& path, const Trace& trace);

/// `cfg` with every step's increment count multiplied by total / (current total).
/// Throws ConfigError if a step count would not be an integer.
RunConfig with_total_increments(const RunConfig& cfg, int total);

struct SweepLevel {
  int increments = 0;
  Trace trace;
  /// max_k |σ_k(N) - σ_k(N_ref)| on the common grid; N_ref is the largest count.
  double max_deviation = 0.0;
};

struct SweepResult {
  std::vector<SweepLevel> levels;  ///< in the requested order
  int reference = 0;
  double peak_stress = 0.0;  ///< of the reference trace
};

/// Runs `cfg` once per total increment count (concurrently) and compares the stress
/// traces on the grid common to all counts.
SweepResult sweep(const RunConfig& cfg, const std::vector<int>& totals);

}  // namespace sma
