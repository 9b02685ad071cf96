#include "rankwatch/eps_net.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rankwatch/error.hpp"
#include "rankwatch/random.hpp"

namespace rankwatch {

namespace {

constexpr int kProbeCount = 10000;

Matrix uniform_sphere(Index dim, Index count, Rng& rng) {
  Matrix pts(dim, count);
  for (Index j = 0; j < count; ++j) {
    Vector v = rng.normal_vector(dim);
    double n = v.norm();
    while (n == 0.0) {
      v = rng.normal_vector(dim);
      n = v.norm();
    }
    pts.col(j) = v / n;
  }
  return pts;
}

double chord_from_dot(double dot) { return std::sqrt(std::max(0.0, 2.0 - 2.0 * dot)); }

EpsNet circle_net(double eps) {
  const double step = 2.0 * std::asin(eps / 2.0);
  const auto count = static_cast<Index>(std::ceil(2.0 * std::numbers::pi / step));
  EpsNet net;
  net.eps = eps;
  net.dim = 2;
  net.points.resize(2, count);
  for (Index i = 0; i < count; ++i) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
    net.points(0, i) = std::cos(a);
    net.points(1, i) = std::sin(a);
  }
  // Every angle is within step/2 of a grid angle, i.e. chord <= 2 sin(step/4) < eps.
  net.certified = true;
  net.covering_estimate = 2.0 * std::sin(std::numbers::pi / static_cast<double>(count) / 2.0);
  return net;
}

// Greedy farthest-point selection until every sample point is within
// `target` (chord) of the net.
Matrix greedy_net(const Matrix& sample, double target) {
  const Index n = sample.cols();
  const double min_dot = 1.0 - 0.5 * target * target;
  Vector best_dot = Vector::Constant(n, -2.0);
  std::vector<Index> chosen;
  Index next = 0;
  while (true) {
    chosen.push_back(next);
    best_dot = best_dot.cwiseMax(sample.transpose() * sample.col(next));
    Index worst = 0;
    const double worst_dot = best_dot.minCoeff(&worst);
    if (worst_dot >= min_dot) break;
    next = worst;
  }
  Matrix pts(sample.rows(), static_cast<Index>(chosen.size()));
  for (std::size_t i = 0; i < chosen.size(); ++i) pts.col(static_cast<Index>(i)) = sample.col(chosen[i]);
  return pts;
}

}  // namespace

double covering_number_bound(Index p, double eps) {
  return std::pow(1.0 + 2.0 / eps, static_cast<double>(p));
}

double probe_covering_radius(const EpsNet& net, int probes, std::uint64_t seed) {
  Rng rng(seed);
  const Matrix probe = uniform_sphere(net.dim, probes, rng);
  double worst = 0.0;
  constexpr Index kBlock = 512;
  for (Index start = 0; start < probe.cols(); start += kBlock) {
    const Index len = std::min(kBlock, probe.cols() - start);
    const Matrix dots = net.points.transpose() * probe.middleCols(start, len);
    for (Index j = 0; j < len; ++j) worst = std::max(worst, chord_from_dot(dots.col(j).maxCoeff()));
  }
  return worst;
}

EpsNet build_eps_net(Index p, double eps, std::uint64_t seed) {
  if (!(eps > 0.0 && eps <= 0.5)) throw Error(ErrorKind::kInvalidConfig, "eps must lie in (0, 1/2]");
  if (p == 2) return circle_net(eps);
  if (p != 3 && p != 4) {
    throw Error(ErrorKind::kUnsupportedDimension,
                "certified nets are built for p in {2, 3, 4}; use a direction bank");
  }

  Rng rng(seed);
  EpsNet net;
  net.eps = eps;
  net.dim = p;
  double factor = 0.75;
  double density = 40.0;
  for (int attempt = 0; attempt < 4; ++attempt) {
    const auto count = static_cast<Index>(density * std::pow(2.0 / eps, static_cast<double>(p - 1)));
    const Matrix sample = uniform_sphere(p, count, rng);
    net.points = greedy_net(sample, factor * eps);
    net.covering_estimate = probe_covering_radius(net, kProbeCount, mix64(seed + 17 + attempt));
    if (net.covering_estimate <= eps) {
      net.certified = true;
      return net;
    }
    factor *= 0.85;
    density *= 2.0;
  }
  net.certified = false;
  return net;
}

Matrix random_directions(Index dim, Index count, std::uint64_t seed) {
  Rng rng(seed);
  return uniform_sphere(dim, count, rng);
}

EigenBound eigen_bound_check(const SymMatrix& m, const EpsNet& net) {
  if (m.dim() != net.dim) throw Error(ErrorKind::kInvalidInput, "net dimension does not match matrix");
  if (!net.certified) throw Error(ErrorKind::kInvalidInput, "eigen bound requires a certified net");
  if (!(net.eps < 0.5)) throw Error(ErrorKind::kInvalidConfig, "eigen bound needs eps < 1/2");
  const Matrix mq = m.dense() * net.points;
  double sup = 0.0;
  for (Index j = 0; j < net.size(); ++j) sup = std::max(sup, std::abs(net.points.col(j).dot(mq.col(j))));
  return {largest_eigenvalue(m), sup / (1.0 - 2.0 * net.eps)};
}

}  // namespace rankwatch
