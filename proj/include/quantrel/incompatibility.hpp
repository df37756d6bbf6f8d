#pragma once

#include "quantrel/conic.hpp"
#include "quantrel/scenario.hpp"

#include <string>
#include <vector>

namespace quantrel {

enum class IncompatKind { robustness, random_robustness, jm_robustness, weight };

std::string to_string(IncompatKind k);
IncompatKind parse_incompat_kind(const std::string& s);

/// Linear functional sum_{a,x} tr[F_{a|x} M_{a|x}] with sum_x F_{l(x)|x} <= Y for every
/// outcome vector l, so that every jointly measurable set scores at most tr Y.
struct IncompatCertificate {
  std::vector<std::vector<HermitianOperator>> coefficients;  // [x][a]
  HermitianOperator y;
  double bound = 0.0;      // tr Y
  double value = 0.0;      // sum tr[F M] on the input
  double violation = 0.0;  // value - bound
};

/// Scaled program variables: noise_scaled = t N (or t O for the weight), parent_scaled is
/// (1 + t) G for the robustnesses and (1 - t) G for the weight, noise_parent_scaled = t H.
struct IncompatResult {
  IncompatKind kind = IncompatKind::robustness;
  double value = 0.0;
  std::vector<std::vector<HermitianOperator>> noise_scaled;
  std::vector<HermitianOperator> parent_scaled;
  std::vector<HermitianOperator> noise_parent_scaled;
  IncompatCertificate certificate;
  double gap = 0.0;
  int iterations = 0;

  /// Normalized parent POVM G.
  ParentPovm parent(int inputs, int outcomes) const;
};

IncompatResult incompatibility_quantifier(const MeasurementSet& m, IncompatKind kind,
                                          const Tolerances& tol = {},
                                          std::int64_t strategy_cap = kDefaultStrategyCap);

struct JointMeasurability {
  bool jointly_measurable = false;
  ParentPovm parent;                 // set when jointly measurable
  IncompatCertificate certificate;   // set otherwise
  double robustness = 0.0;
};

/// Decides joint measurability from the incompatibility robustness: values at most
/// `threshold` count as jointly measurable.
JointMeasurability is_jointly_measurable(const MeasurementSet& m, double threshold = 1e-7,
                                         const Tolerances& tol = {},
                                         std::int64_t strategy_cap = kDefaultStrategyCap);

/// Largest lambda_max(sum_x F_{l(x)|x} - Y) over all outcome vectors l.
double certificate_margin(const IncompatCertificate& c, int outcomes,
                          std::int64_t strategy_cap = kDefaultStrategyCap);

/// sum_{a,x} Re tr[F_{a|x} M_{a|x}].
double certificate_value(const IncompatCertificate& c, const MeasurementSet& m);

}  // namespace quantrel
