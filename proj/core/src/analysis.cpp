#include "rankwatch/analysis.hpp"

#include <cmath>

#include "rankwatch/error.hpp"
#include "rankwatch/stream_io.hpp"

namespace rankwatch {

void BoundInputs::validate() const {
  if (!(b > 0.0) || !std::isfinite(b)) throw Error(ErrorKind::kInvalidConfig, "b must be positive");
  if (!(d > 0.0) || !std::isfinite(d)) throw Error(ErrorKind::kInvalidConfig, "d must be positive");
  if (!(eps > 0.0 && eps < 0.5)) throw Error(ErrorKind::kInvalidConfig, "eps must lie in (0, 0.5)");
  if (p < 1) throw Error(ErrorKind::kInvalidConfig, "p must be >= 1");
  if (!(rho_sq >= 0.0) || !std::isfinite(rho_sq)) {
    throw Error(ErrorKind::kInvalidConfig, "rho_sq must be non-negative");
  }
  if (!(sigma0_sq > 0.0) || !std::isfinite(sigma0_sq)) {
    throw Error(ErrorKind::kInvalidConfig, "sigma0_sq must be positive");
  }
}

double solve_theta(double d, double eps) {
  if (!(eps >= 0.0 && eps < 0.5)) throw Error(ErrorKind::kInvalidConfig, "eps must lie in [0, 0.5)");
  if (!std::isfinite(d)) throw Error(ErrorKind::kInvalidConfig, "d must be finite");
  const double c = d * (1.0 - 2.0 * eps);
  if (!(c > 1.0)) {
    throw Error(ErrorKind::kNoRoot, "no root in (0, 1): d(1 - 2 eps) = " + format_double(c) + " <= 1");
  }
  // f(theta) = log(theta) + c (1 - theta) is -inf at 0+, positive just left of
  // its maximum at 1/c, and zero at 1; the interior root lies in (0, 1/c).
  const auto f = [c](double th) { return std::log(th) + c * (1.0 - th); };
  double lo = 0.0;
  double hi = 1.0 / c;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (f(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

ArlBound arl_lower_bound(const BoundInputs& in) {
  in.validate();
  ArlBound out;
  out.theta = solve_theta(in.d, in.eps);
  out.exponent = in.b * (0.5 - in.eps) * (1.0 - out.theta);
  out.denominator = 0.5 * (1.0 - out.theta) + 0.5 * std::log(out.theta);
  out.covering = std::pow(1.0 + 2.0 / in.eps, static_cast<double>(in.p));
  out.literal = std::exp(out.exponent) / (out.denominator * out.covering);
  out.magnitude = std::abs(out.literal);
  return out;
}

double edd_approx(const BoundInputs& in, LogArgument arg) {
  if (!(in.b > 0.0) || !std::isfinite(in.b)) throw Error(ErrorKind::kInvalidConfig, "b must be positive");
  if (!(in.rho_sq >= 0.0)) throw Error(ErrorKind::kInvalidConfig, "rho_sq must be non-negative");
  if (!(in.sigma0_sq > 0.0)) throw Error(ErrorKind::kInvalidConfig, "sigma0_sq must be positive");
  const double x = in.rho_sq / in.sigma0_sq;
  const double y = arg == LogArgument::kSquared ? x : std::sqrt(x);
  const double num = in.b + std::exp(-in.b) - 1.0;
  return num / (0.5 / (1.0 + x) + 0.5 * std::log1p(y));
}

}  // namespace rankwatch
