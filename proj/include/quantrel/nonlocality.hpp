#pragma once

#include "quantrel/conic.hpp"
#include "quantrel/npa.hpp"
#include "quantrel/scenario.hpp"

#include <optional>
#include <string>
#include <vector>

namespace quantrel {

enum class NonlocalityKind { NLR, NLR_mar, NLR_lhv, NLW, NLR_c, NLR_c_lhv, NLW_c };

std::string to_string(NonlocalityKind k);
NonlocalityKind parse_nonlocality_kind(const std::string& s);

/// True for kinds whose noise set is a polytope (the LP value is exact). The others relax the
/// quantum set to an NPA level and give lower bounds.
bool is_lp_exact(NonlocalityKind k);

struct NonlocalityOptions {
  int level = 2;
  /// Party whose marginal is held fixed by the consistent kinds (and whose uniform noise
  /// defines NLR_mar's partner term).
  Party pinned = Party::bob;
  Tolerances tol;
  std::int64_t strategy_cap = kDefaultStrategyCap;
};

/// Bell functional with a bound valid for all local behaviours. `bound` comes from the dual
/// program; `enumerated_bound` is the maximum over deterministic strategy pairs (never larger,
/// and strictly smaller for the weight kinds).
struct BellCertificate {
  BellFunctional functional;
  double bound = 0.0;
  double enumerated_bound = 0.0;
  double value = 0.0;
  double violation = 0.0;
  bool level_relaxed = false;  // derived from an NPA relaxation
};

struct NonlocalityResult {
  NonlocalityKind kind = NonlocalityKind::NLR;
  double value = 0.0;
  bool exact = true;  // false: value is a lower bound at `level`
  int level = 0;
  /// Local part as scaled weights (sum 1 + r for robustness, 1 - r for weight kinds).
  RMatrix local_scaled;
  /// Noise (or nonlocal part) table, scaled by r, in the Behaviour layout.
  std::vector<double> noise_scaled;
  /// Averaged moment matrix of the noise block (relaxed kinds only), scaled by r.
  RMatrix noise_moment_matrix;
  BellCertificate certificate;
  /// Sensitivity of the optimal value to the pinned party's marginal [input][outcome], with
  /// the table held fixed (nonzero for NLR_mar and the consistent kinds). Together with the
  /// certificate coefficients this is a first-order model of the value in the data.
  std::vector<std::vector<double>> marginal_gradient;
  double gap = 0.0;
  int iterations = 0;

  LocalModel local_model(const Behaviour& b) const;
};

NonlocalityResult nonlocality_quantifier(const Behaviour& b, NonlocalityKind kind,
                                         const NonlocalityOptions& opt = {});

struct LocalMembership {
  bool local = false;
  LocalModel model;             // local case
  BellCertificate certificate;  // nonlocal case
  double robustness = 0.0;
};

/// Local-polytope membership from the local-noise robustness (values <= threshold count as
/// local).
LocalMembership is_local(const Behaviour& b, double threshold = 1e-7,
                         const Tolerances& tol = {},
                         std::int64_t strategy_cap = kDefaultStrategyCap);

/// Re-evaluates a result's functional on b and fills the enumerated local maximum.
BellCertificate bell_certificate(const NonlocalityResult& r, const Behaviour& b,
                                 std::int64_t strategy_cap = kDefaultStrategyCap);

std::string format_inequality(const BellCertificate& c);

struct NsProjectOptions {
  /// Weight per setting pair [x * mB + y]; empty means uniform 1 / (mA mB).
  std::vector<double> weights;
  double epsilon = 1e-12;
  int max_iter = 200;
  double kkt_tol = 1e-10;
};

struct NsProjection {
  Behaviour behaviour;
  /// sum_xy w_xy sum_ab P log(P / Q) against the raw table.
  double divergence = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  int floored_entries = 0;  // raw zeros lifted to epsilon
};

/// Relative-entropy projection of a (possibly signalling) behaviour onto the no-signalling
/// set, by damped Newton in Collins-Gisin coordinates.
NsProjection ns_project(const Behaviour& raw, const NsProjectOptions& opt = {});

}  // namespace quantrel
