#pragma once

// Closed-form false-alarm and delay approximations for the max-eigenvalue
// procedure.

#include "rankwatch/numerics.hpp"

namespace rankwatch {

struct BoundInputs {
  double b = 1.0;
  double d = 1.0;
  double eps = 0.25;
  Index p = 1;
  double rho_sq = 0.0;  // ||Sigma||, or ||A^T Sigma A|| for sketched data
  double sigma0_sq = 1.0;

  void validate() const;
};

/// Root in (0, 1) of log(theta) + d (1 - theta)(1 - 2 eps) = 0, by bisection.
/// Requires eps in [0, 1/2); throws kNoRoot when d (1 - 2 eps) <= 1.
double solve_theta(double d, double eps);

struct ArlBound {
  double theta = 0.0;
  double exponent = 0.0;     // b (1/2 - eps)(1 - theta)
  double denominator = 0.0;  // (1 - theta)/2 + log(theta)/2, negative on (0, 1)
  double covering = 0.0;     // (1 + 2/eps)^p
  double literal = 0.0;      // exp(exponent) / (denominator * covering)
  double magnitude = 0.0;    // |literal|
};

/// exp(b (1/2 - eps)(1 - theta)) / (|(1 - theta)/2 + log(theta)/2| (1 + 2/eps)^p),
/// with every factor and the signed value alongside.
ArlBound arl_lower_bound(const BoundInputs& in);

enum class LogArgument {
  kSquared,  // log(1 + rho^2 / sigma0^2)
  kPrinted,  // log(1 + rho / sigma0)
};

/// (b + e^{-b} - 1) / ([2 (1 + x)]^{-1} + log(1 + y) / 2), x = rho^2/sigma0^2,
/// y = x or sqrt(x) per `arg`.
double edd_approx(const BoundInputs& in, LogArgument arg = LogArgument::kSquared);

}  // namespace rankwatch
