#pragma once

#include <cstdint>

#include "rankwatch/numerics.hpp"

namespace rankwatch {

/// Finite subset of the unit sphere S^{p-1}; columns of `points` are unit vectors.
struct EpsNet {
  double eps = 0.0;
  Index dim = 0;
  Matrix points;           // dim x size
  bool certified = false;  // covering radius <= eps verified
  double covering_estimate = 0.0;  // largest probe-to-net distance seen

  Index size() const noexcept { return points.cols(); }
};

/// (1 + 2/eps)^p, the covering-number bound.
double covering_number_bound(Index p, double eps);

/// p = 2: uniform angular grid with spacing <= 2 asin(eps/2), certified
/// analytically. p = 3, 4: greedy farthest-point selection over a dense random
/// sphere sample, certified by a probe check with 10^4 fresh uniform points.
/// Other p throw kUnsupportedDimension; eps outside (0, 1/2] throws kInvalidConfig.
EpsNet build_eps_net(Index p, double eps, std::uint64_t seed = 1);

/// Largest distance from `probes` uniform sphere points to their nearest net point.
double probe_covering_radius(const EpsNet& net, int probes, std::uint64_t seed);

/// Uniformly random unit directions (dim x count), for banks where no
/// certified net is practical.
Matrix random_directions(Index dim, Index count, std::uint64_t seed);

struct EigenBound {
  double lhs = 0.0;  // lambda_1(m)
  double rhs = 0.0;  // (1 - 2 eps)^{-1} max_{q in net} |q^T m q|
};

/// Both sides of lambda_1(m) <= (1 - 2 eps)^{-1} max_q |q^T m q|.
/// Requires a certified net of matching dimension.
EigenBound eigen_bound_check(const SymMatrix& m, const EpsNet& net);

}  // namespace rankwatch
