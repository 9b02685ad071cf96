#include "rankwatch/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rankwatch/error.hpp"

namespace rankwatch {

bool StreamSample::fully_observed() const {
  return !mask || std::all_of(mask->begin(), mask->end(), [](bool b) { return b; });
}

Index StreamSample::observed_count() const {
  if (!mask) return x.size();
  return static_cast<Index>(std::count(mask->begin(), mask->end(), true));
}

void ScenarioConfig::validate() const {
  if (p < 1) throw Error(ErrorKind::kInvalidConfig, "p must be >= 1");
  if (!(sigma0_sq > 0.0) || !std::isfinite(sigma0_sq)) {
    throw Error(ErrorKind::kInvalidConfig, "sigma0_sq must be positive");
  }
  if (s < 0 || s > p) throw Error(ErrorKind::kInvalidConfig, "signal rank s must lie in [0, p]");
  if (!(rho >= 0.0) || !std::isfinite(rho)) {
    throw Error(ErrorKind::kInvalidConfig, "rho must be non-negative");
  }
  if (kappa && *kappa < 0) throw Error(ErrorKind::kInvalidConfig, "kappa must be >= 0");
  if (horizon < 0) throw Error(ErrorKind::kInvalidConfig, "horizon must be >= 0");
  if (!(missing_fraction >= 0.0 && missing_fraction < 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "missing fraction must lie in [0, 1)");
  }
  if (signal_norm && !(*signal_norm >= 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "signal norm must be non-negative");
  }
}

SignalCovariance make_signal_covariance(Index p, Index s, double rho, std::uint64_t seed) {
  if (p < 1) throw Error(ErrorKind::kInvalidConfig, "p must be >= 1");
  if (s < 0 || s > p) throw Error(ErrorKind::kInvalidConfig, "signal rank exceeds dimension");
  if (!(rho >= 0.0)) throw Error(ErrorKind::kInvalidConfig, "rho must be non-negative");

  SignalCovariance out{SymMatrix(p), Matrix(p, 0), Vector(0)};
  if (s == 0 || rho == 0.0) return out;

  Rng rng(seed);
  const Matrix g = rng.normal_matrix(p, s);
  const double c = rho / static_cast<double>(s);

  // sigma is built from G directly; the basis comes from G = Q R and
  // R R^T = W diag(lambda) W^T, so Sigma = (Q W) diag(c lambda) (Q W)^T.
  out.sigma = SymMatrix::from_dense(c * (g * g.transpose()));
  const Matrix q = orthonormalize(g);
  const Matrix r = q.transpose() * g;
  const EigResult small = sym_eig(SymMatrix::from_dense(r * r.transpose()));
  out.basis = q * (*small.eigenvectors);
  out.scales = c * small.eigenvalues;
  return out;
}

SignalCovariance rescale_to_norm(const SignalCovariance& signal, double norm) {
  SignalCovariance out = signal;
  const double current = signal.spectral_norm();
  if (current == 0.0) {
    if (norm != 0.0) throw Error(ErrorKind::kInvalidConfig, "cannot rescale a zero signal");
    return out;
  }
  const double factor = norm / current;
  out.sigma *= factor;
  out.scales *= factor;
  return out;
}

SignalCovariance scenario_signal(const ScenarioConfig& cfg) {
  cfg.validate();
  SignalCovariance signal = make_signal_covariance(cfg.p, cfg.s, cfg.rho, child_seed(cfg.seed, 0));
  if (cfg.signal_norm && signal.rank() > 0) signal = rescale_to_norm(signal, *cfg.signal_norm);
  return signal;
}

StreamGenerator::StreamGenerator(const ScenarioConfig& cfg)
    : StreamGenerator(cfg, scenario_signal(cfg), child_seed(cfg.seed, 1)) {}

StreamGenerator::StreamGenerator(const ScenarioConfig& cfg, SignalCovariance signal,
                                 std::uint64_t sample_seed)
    : cfg_(cfg), signal_(std::move(signal)), rng_(sample_seed) {
  cfg_.validate();
  if (signal_.sigma.dim() != cfg_.p) {
    throw Error(ErrorKind::kInvalidConfig, "signal covariance dimension does not match p");
  }
  sigma0_ = std::sqrt(cfg_.sigma0_sq);
  factor_ = signal_.basis * signal_.scales.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

StreamSample StreamGenerator::next() {
  ++t_;
  StreamSample sample;
  sample.t = t_;
  sample.x = sigma0_ * rng_.normal_vector(cfg_.p);
  if (factor_.cols() > 0) {
    const Vector xi = rng_.normal_vector(factor_.cols());
    const bool post_change = cfg_.kappa && t_ > *cfg_.kappa;
    if (post_change) sample.x.noalias() += factor_ * xi;
  }
  if (cfg_.missing_fraction > 0.0) {
    Mask mask(static_cast<std::size_t>(cfg_.p));
    for (Index i = 0; i < cfg_.p; ++i) {
      const bool seen = rng_.uniform() >= cfg_.missing_fraction;
      mask[static_cast<std::size_t>(i)] = seen;
      if (!seen) sample.x[i] = std::numeric_limits<double>::quiet_NaN();
    }
    sample.mask = std::move(mask);
  }
  return sample;
}

Stream generate_stream(const ScenarioConfig& cfg) {
  StreamGenerator gen(cfg);
  Stream out;
  out.reserve(static_cast<std::size_t>(cfg.horizon));
  for (std::int64_t i = 0; i < cfg.horizon; ++i) out.push_back(gen.next());
  return out;
}

}  // namespace rankwatch
