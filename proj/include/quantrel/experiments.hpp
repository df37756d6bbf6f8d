#pragma once

#include "quantrel/incompatibility.hpp"
#include "quantrel/nonlocality.hpp"
#include "quantrel/scenario.hpp"
#include "quantrel/steering.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace quantrel {

enum class QuantifierFamily { incompatibility, steering, nonlocality };

/// A quantifier named by its kind string ("IR", "SR_c", "NLW", ...).
struct Quantifier {
  QuantifierFamily family = QuantifierFamily::incompatibility;
  IncompatKind incompat = IncompatKind::robustness;
  SteeringKind steering = SteeringKind::SR;
  NonlocalityKind nonlocality = NonlocalityKind::NLR;

  std::string name() const;
};

Quantifier parse_quantifier(const std::string& name);

/// Evaluates a quantifier on the objects derived from a state and measurement specs. Bob's
/// measurements are needed only for nonlocality kinds.
double evaluate_quantifier(const Quantifier& q, const BipartiteState& state,
                           const MeasurementSet& alice, const MeasurementSet* bob,
                           const NonlocalityOptions& nl = {});

// ---------------------------------------------------------------- sweeps

struct SweepSpec {
  std::string family = "werner";  // werner | werner_singlet | pure_theta
  std::vector<double> grid;
  std::string alice = "paulis:XYZ";
  std::string bob;
  std::vector<std::string> quantifiers;
  int level = 2;
  bool refine_threshold = true;
  double refine_tol = 1e-5;
  int threads = 0;  // 0: hardware concurrency

  /// Throws ValidationError unless the grid is strictly increasing with >= 2 points and all
  /// names parse.
  void validate() const;
  /// {"family", "grid": [..] | {"start", "stop", "points"}, "alice", "bob", "quantifiers",
  ///  "level", "refine_threshold", "threads"}
  static SweepSpec from_json(const nlohmann::json& j);
};

struct SweepPoint {
  double param = 0.0;
  std::string quantifier;
  double value = 0.0;
};

struct SweepSummary {
  std::string quantifier;
  /// Largest grid parameter with value < 1e-6 (nullopt when every value is above).
  std::optional<double> threshold;
  /// Bisection estimate between the threshold and the next grid point.
  std::optional<double> refined_threshold;
  double slope = 0.0, intercept = 0.0;
  /// Largest |value - fit| over grid points above threshold.
  double max_linear_deviation = 0.0;
  int fitted_points = 0;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepPoint> points;
  std::vector<SweepSummary> summaries;

  /// Columns: param, then one column per quantifier.
  std::string csv() const;
  std::string summary_markdown() const;
};

inline constexpr double kActivationThreshold = 1e-6;

SweepResult sweep(const SweepSpec& spec);

/// Threshold detection and linear fit on one curve (used by sweep).
SweepSummary summarize_curve(const std::string& name, const std::vector<double>& params,
                             const std::vector<double>& values);

// ---------------------------------------------------------------- see-saw

struct SeesawOptions {
  int restarts = 1;
  std::uint64_t seed = 1;
  int max_rounds = 100;
  double tol = 1e-7;
  int level = 2;
  int threads = 0;
};

/// One see-saw run.
struct SeesawState {
  MeasurementSet bob;
  std::vector<double> history;  // value after each accepted round, non-decreasing
  bool converged = false;
  int failed_solves = 0;  // candidates skipped because the solver did not converge
};

struct SeesawResult {
  MeasurementSet bob;
  double value = 0.0;
  std::vector<SeesawState> runs;
  int best_run = 0;
};

/// Optimizes Bob's two two-outcome qubit measurements for the state cos t |00> + sin t |11>
/// with Alice fixed at {X, Z}.
SeesawResult seesaw_optimize(double theta, NonlocalityKind kind, const SeesawOptions& opt = {});

/// Random projective qubit measurements with uniformly distributed Bloch vectors.
MeasurementSet random_projective_qubit(int inputs, std::uint64_t seed);

// ---------------------------------------------------------------- reproduction

struct ReproduceOptions {
  std::string outdir = ".";
  bool extended = false;
  double budget_seconds = 1800.0;
  int points = 51;         // fig1 / fig2 grid points
  int theta_points = 7;    // fig3 grid points
  int restarts = 2;        // fig3 see-saw restarts
  std::uint64_t seed = 1;
  /// Previous table1 deviations (JSON written by an earlier run); empty to skip the check.
  std::string baseline;
};

struct ComparisonRow {
  std::string experiment;
  std::string quantity;
  double computed = 0.0;
  double printed = 0.0;
  double deviation = 0.0;
};

struct ReproduceReport {
  std::string target;
  std::string status = "complete";  // complete | partial
  std::vector<ComparisonRow> rows;
  std::vector<std::string> files;
  std::vector<std::string> notes;
  /// table1 only: quantities whose deviation grew by more than 10x against the baseline.
  std::vector<std::string> regressions;
  std::string markdown;
};

/// Reproduces "table1", "fig1", "fig2" or "fig3" into opt.outdir. "table2" is refused with a
/// ValidationError.
ReproduceReport reproduce(const std::string& target, const ReproduceOptions& opt = {});

/// Printed table values used by the table1 target.
struct PrintedRow {
  std::string experiment;
  std::string quantity;
  double value;
};
const std::vector<PrintedRow>& printed_table1();

}  // namespace quantrel
