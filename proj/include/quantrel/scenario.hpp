#pragma once

#include "quantrel/operator_algebra.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace quantrel {

/// Default cap on n^m deterministic strategies.
inline constexpr std::int64_t kDefaultStrategyCap = 1'000'000;

/// A set of m POVMs with n outcomes each on a d-dimensional space; effect(x, a) = M_{a|x}.
///
/// Measurements with fewer outcomes are padded with zero effects at construction.
class MeasurementSet {
 public:
  MeasurementSet() = default;
  /// effects[x][a]; ragged outcome counts are padded with zero effects.
  explicit MeasurementSet(std::vector<std::vector<HermitianOperator>> effects, double tol = 1e-9);

  int inputs() const { return m_; }
  int outcomes() const { return n_; }
  int dim() const { return d_; }
  const HermitianOperator& effect(int x, int a) const { return effects_[x][a]; }
  const std::vector<std::vector<HermitianOperator>>& effects() const { return effects_; }
  bool is_real() const;

  /// Keep only the listed inputs, in the given order.
  MeasurementSet select(const std::vector<int>& inputs) const;
  /// Conjugate every effect by a unitary.
  MeasurementSet conjugated(const CMatrix& u) const;

 private:
  int m_ = 0, n_ = 0, d_ = 0;
  std::vector<std::vector<HermitianOperator>> effects_;
};

/// Bipartite density operator on C^dA (x) C^dB.
class BipartiteState {
 public:
  BipartiteState() = default;
  BipartiteState(int dA, int dB, HermitianOperator rho, double tol = 1e-9);

  int dim_a() const { return dA_; }
  int dim_b() const { return dB_; }
  const HermitianOperator& rho() const { return rho_; }

 private:
  int dA_ = 0, dB_ = 0;
  HermitianOperator rho_;
};

/// Subnormalized conditional states member(x, a) = sigma_{a|x} on Bob's space.
class Assemblage {
 public:
  Assemblage() = default;
  /// members[x][a]. Validates positivity, no-signalling to Bob and unit trace.
  explicit Assemblage(std::vector<std::vector<HermitianOperator>> members, double tol = 1e-9);

  int inputs() const { return m_; }
  int outcomes() const { return n_; }
  int dim() const { return d_; }
  const HermitianOperator& member(int x, int a) const { return members_[x][a]; }
  const std::vector<std::vector<HermitianOperator>>& members() const { return members_; }
  bool is_real() const;

  Assemblage conjugated(const CMatrix& u) const;

 private:
  int m_ = 0, n_ = 0, d_ = 0;
  std::vector<std::vector<HermitianOperator>> members_;
};

/// Joint conditional distribution P(ab|xy).
class Behaviour {
 public:
  Behaviour() = default;
  /// table indexed [x][y][a][b] flattened row-major. When allow_signalling is false,
  /// no-signalling deviations above ns_tol raise SignallingError; otherwise they set the
  /// signalling flag.
  Behaviour(int mA, int nA, int mB, int nB, std::vector<double> table,
            bool allow_signalling = false, double ns_tol = 1e-9);

  int inputs_a() const { return mA_; }
  int outcomes_a() const { return nA_; }
  int inputs_b() const { return mB_; }
  int outcomes_b() const { return nB_; }
  std::size_t index(int a, int b, int x, int y) const {
    return ((static_cast<std::size_t>(x) * mB_ + y) * nA_ + a) * nB_ + b;
  }
  double p(int a, int b, int x, int y) const { return table_[index(a, b, x, y)]; }
  const std::vector<double>& table() const { return table_; }

  /// Largest violation of the no-signalling equalities in either direction.
  double signalling_deviation() const;
  bool signalling() const { return signalling_; }

 private:
  int mA_ = 0, nA_ = 0, mB_ = 0, nB_ = 0;
  std::vector<double> table_;
  bool signalling_ = false;
};

/// Deterministic response function: input x -> outcome assignment[x].
struct DeterministicStrategy {
  std::vector<int> assignment;
  std::int64_t index = 0;
};

/// Lexicographic index of an outcome vector (first input most significant).
std::int64_t strategy_index(const std::vector<int>& assignment, int outcomes);
std::int64_t strategy_count(int inputs, int outcomes, std::int64_t cap = kDefaultStrategyCap);

/// All n^m deterministic strategies in lexicographic order. Raises ResourceError above cap.
std::vector<DeterministicStrategy> enumerate_strategies(int inputs, int outcomes,
                                                        std::int64_t cap = kDefaultStrategyCap);

/// Weights over pairs of deterministic strategies (mu for Alice, nu for Bob).
struct LocalModel {
  int mA = 0, nA = 0, mB = 0, nB = 0;
  RMatrix weights;  // rows: Alice strategy, cols: Bob strategy
  Behaviour behaviour() const;
};

/// One subnormalized state per deterministic strategy.
struct LhsModel {
  int inputs = 0, outcomes = 0;
  std::vector<HermitianOperator> states;
  Assemblage assemblage() const;
};

/// Parent measurement G over outcome vectors (lexicographic strategy order).
struct ParentPovm {
  int inputs = 0, outcomes = 0;
  std::vector<HermitianOperator> effects;
  /// sum over outcome vectors with entry x equal to a.
  HermitianOperator marginal(int x, int a) const;
};

enum class StateFamily { werner, pure_theta, max_entangled, singlet };

struct StateSpec {
  StateFamily family = StateFamily::max_entangled;
  double param = 1.0;          // visibility v or angle theta
  int dim = 2;                 // max_entangled dimension
  bool singlet_base = false;   // werner: mix the singlet instead of |phi+>

  static StateSpec werner(double v, bool singlet = false) {
    return {StateFamily::werner, v, 2, singlet};
  }
  static StateSpec pure_theta(double theta) { return {StateFamily::pure_theta, theta, 2, false}; }
  static StateSpec max_entangled(int d) { return {StateFamily::max_entangled, 1.0, d, false}; }
  static StateSpec singlet() { return {StateFamily::singlet, 1.0, 2, false}; }
};

BipartiteState make_state(const StateSpec& spec);
/// Parses "werner:V", "werner_singlet:V", "pure_theta:T", "max_entangled:D", "singlet".
StateSpec parse_state_spec(const std::string& text);

/// Unit Bloch vector measurements (I + s n.sigma)/2, outcome 0 for s = +1.
MeasurementSet bloch_measurements(const std::vector<std::array<double, 3>>& directions);
/// Pauli measurements from a string over {X, Y, Z}, e.g. "XYZ".
MeasurementSet pauli_measurements(const std::string& axes);
/// Lossy version with a no-click outcome: (eta Pi_0, eta Pi_1, ..., (1 - eta) I).
MeasurementSet lossy_measurements(const MeasurementSet& base, const std::vector<double>& eta);
/// Ten projective qubit measurements along antipodal dodecahedron vertex pairs.
MeasurementSet dodecahedron_measurements();
std::vector<std::array<double, 3>> dodecahedron_directions();

/// Parses "paulis:XYZ", "lossy_paulis:XYZ:e0,e1,e2", "dodecahedron", "lossy_dodecahedron:eta",
/// "bloch:x,y,z;x,y,z", "chsh_bob" ((X+Z)/sqrt2 and (X-Z)/sqrt2).
MeasurementSet parse_measurement_spec(const std::string& text);

/// sigma_{a|x} = tr_A[(M_{a|x} (x) I) rho].
Assemblage steer(const BipartiteState& state, const MeasurementSet& measurements);
/// P(ab|xy) = tr[M'_{b|y} sigma_{a|x}].
Behaviour measure(const Assemblage& assemblage, const MeasurementSet& bob);
/// P(ab|xy) = tr[(M_{a|x} (x) M'_{b|y}) rho].
Behaviour measure(const BipartiteState& state, const MeasurementSet& alice,
                  const MeasurementSet& bob);

/// rho_B = sum_a sigma_{a|x}; raises InconsistentAssemblageError if it depends on x.
HermitianOperator reduced_state(const Assemblage& assemblage, double tol = 1e-9);

enum class Party { alice, bob };

/// Marginal table [input][outcome] of `party`. When the behaviour signals above tolerance,
/// either raise SignallingError or, with average_inputs, average over the other party's inputs.
std::vector<std::vector<double>> behaviour_marginal(const Behaviour& b, Party party,
                                                    bool average_inputs = false,
                                                    double tol = 1e-9);

/// Isotropic CHSH behaviour v*PR_Tsirelson + (1 - v)/4 for the optimal qubit settings.
Behaviour isotropic_chsh(double v);
/// Uniform distribution over outcomes in every setting.
Behaviour uniform_behaviour(int mA, int nA, int mB, int nB);

}  // namespace quantrel
