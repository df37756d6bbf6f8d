#pragma once

#include "quantrel/conic.hpp"
#include "quantrel/scenario.hpp"

#include <map>
#include <string>
#include <vector>

namespace quantrel {

/// Bell scenario sizes (inputs and outcomes of each party).
struct BellScenario {
  int mA = 2, nA = 2, mB = 2, nB = 2;
  bool operator==(const BellScenario&) const = default;
};

BellScenario scenario_of(const Behaviour& b);

/// Projector symbol Pi_{outcome|input} of one party.
struct Symbol {
  int input = 0;
  int outcome = 0;
  bool operator==(const Symbol&) const = default;
  auto operator<=>(const Symbol&) const = default;
};

/// Product of projectors, Alice's part first. Canonical words have no two adjacent symbols
/// with the same input inside a party.
struct OperatorWord {
  std::vector<Symbol> alice, bob;
  std::size_t length() const { return alice.size() + bob.size(); }
  bool operator==(const OperatorWord&) const = default;
  auto operator<=>(const OperatorWord&) const = default;
  std::string str() const;
};

/// Moment-matrix template: index words, and for every entry (i, j) the equivalence class
/// of w_i^dagger w_j (or -1 when the product vanishes).
struct MomentMatrix {
  BellScenario scenario;
  int level = 2;
  std::vector<OperatorWord> index;
  std::vector<int> entry_class;          // row-major index.size()^2
  std::vector<std::pair<int, int>> representative;  // first entry of each class
  int num_classes = 0;
  std::map<OperatorWord, int> classes;

  int size() const { return static_cast<int>(index.size()); }
  int cls(int i, int j) const { return entry_class[static_cast<std::size_t>(i) * size() + j]; }
  /// Class of the word with the given Alice/Bob projectors (outcome < n-1), or of identity.
  int class_of(const OperatorWord& w) const;
};

/// Builds the template. Only levels 1 and 2 are supported.
MomentMatrix build_npa_block(const BellScenario& s, int level);

/// A moment matrix placed in a conic program.
struct NpaBlock {
  MomentMatrix tmpl;
  int block = -1;

  /// Linear expression for the class value of a word, times coef.
  LinExpr word(const OperatorWord& w, double coef = 1.0) const;
  /// Linear expression for the full-table entry Gamma-derived Q(ab|xy) (Collins-Gisin
  /// reconstruction), times coef. Scales with Gamma[0,0].
  LinExpr probability(int a, int b, int x, int y, double coef = 1.0) const;
  /// Marginal of one party (scales with Gamma[0,0]).
  LinExpr marginal(Party party, int input, int outcome, double coef = 1.0) const;
  LinExpr normalization(double coef = 1.0) const;
};

/// Adds the PSD block with class-tying equalities and Gamma[0,0] - norm = norm_constant
/// (norm may be null, giving Gamma[0,0] = norm_constant).
NpaBlock add_npa_block(ConicProgram& p, const MomentMatrix& t, const ScalarVar* norm = nullptr,
                       double norm_constant = 1.0);

/// Gamma from a solution, averaged over each class so tied entries are exactly equal.
RMatrix npa_moment_matrix(const ConicSolution& s, const NpaBlock& b);
/// Full table Q(ab|xy) of a solved block (scaled by Gamma[0,0]).
std::vector<double> npa_table(const ConicSolution& s, const NpaBlock& b);

/// Bell functional sum_{abxy} B(ab|xy) P(ab|xy) with coefficients in the behaviour layout.
struct BellFunctional {
  BellScenario scenario;
  std::vector<double> coefficients;  // Behaviour::index layout
  double constant = 0.0;

  double evaluate(const Behaviour& b) const;
  double evaluate(const std::vector<double>& table) const;
  /// Largest value over deterministic local strategy pairs.
  double local_bound(std::int64_t cap = kDefaultStrategyCap) const;
};

BellFunctional chsh_functional();

struct NpaOptimum {
  double value = 0.0;
  RMatrix moment_matrix;
  std::vector<double> table;
};

/// Upper bound on the quantum value of a functional at the given level.
NpaOptimum npa_optimize(const BellFunctional& f, int level, const Tolerances& tol = {});

struct NpaMembership {
  bool feasible = false;
  RMatrix moment_matrix;        // feasible case
  BellFunctional functional;    // infeasible case: value on b exceeds `bound`
  double bound = 0.0;
  double violation = 0.0;
  double robustness = 0.0;      // white-noise robustness w.r.t. the level set
};

/// Decides membership via the white-noise robustness against the level set; values at most
/// `threshold` count as feasible.
NpaMembership npa_membership(const Behaviour& b, int level, double threshold = 1e-7,
                             const Tolerances& tol = {});

}  // namespace quantrel
