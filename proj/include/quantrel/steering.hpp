#pragma once

#include "quantrel/conic.hpp"
#include "quantrel/scenario.hpp"

#include <string>
#include <vector>

namespace quantrel {

enum class SteeringKind { SR, SR_red, SR_lhs, SW, SR_c, SR_c_lhs, SW_c };

std::string to_string(SteeringKind k);
SteeringKind parse_steering_kind(const std::string& s);

/// Steering functional sum_{a,x} tr[F_{a|x} sigma_{a|x}] <= bound for every LHS assemblage.
/// The bound comes from the dual program; the enumerated LHS maximum
/// max_l lambda_max(sum_x F_{l(x)|x}) never exceeds it.
struct SteeringCertificate {
  std::vector<std::vector<HermitianOperator>> coefficients;  // [x][a]
  double bound = 0.0;
  double enumerated_bound = 0.0;  // filled by steering_certificate
  double value = 0.0;      // functional on the input assemblage
  double violation = 0.0;  // value - bound; equals the quantifier at optimum
};

/// Scaled program variables. Robustness kinds: model_scaled = (1 + s) sigma_l, noise_scaled
/// = s pi_{a|x}, noise_model_scaled = s gamma_l. Weight kinds: model_scaled = (1 - s) sigma_l,
/// noise_scaled = s pi_{a|x}.
struct SteeringResult {
  SteeringKind kind = SteeringKind::SR;
  double value = 0.0;
  std::vector<HermitianOperator> model_scaled;
  std::vector<std::vector<HermitianOperator>> noise_scaled;
  std::vector<HermitianOperator> noise_model_scaled;
  SteeringCertificate certificate;
  double gap = 0.0;
  int iterations = 0;

  /// Normalized LHS model of the local part.
  LhsModel model(int inputs, int outcomes) const;
};

SteeringResult steering_quantifier(const Assemblage& a, SteeringKind kind,
                                   const Tolerances& tol = {},
                                   std::int64_t strategy_cap = kDefaultStrategyCap);

struct LhsMembership {
  bool has_model = false;
  LhsModel model;                   // set when an LHS model exists
  SteeringCertificate certificate;  // set otherwise
  double robustness = 0.0;
};

/// Decides LHS membership from the steering robustness (values <= threshold count as LHS).
LhsMembership has_lhs_model(const Assemblage& a, double threshold = 1e-7,
                            const Tolerances& tol = {},
                            std::int64_t strategy_cap = kDefaultStrategyCap);

/// max_l lambda_max(sum_x F_{l(x)|x}): the largest functional value over unit-trace LHS
/// assemblages.
double lhs_bound(const SteeringCertificate& c, int outcomes,
                 std::int64_t strategy_cap = kDefaultStrategyCap);

double certificate_value(const SteeringCertificate& c, const Assemblage& a);

/// Recomputes the certificate's value and violation for an assemblage and fills the
/// enumerated LHS maximum.
SteeringCertificate steering_certificate(const SteeringResult& r, const Assemblage& a,
                                         std::int64_t strategy_cap = kDefaultStrategyCap);

/// Human-readable inequality text.
std::string format_inequality(const SteeringCertificate& c);

}  // namespace quantrel
