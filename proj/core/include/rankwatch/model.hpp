#pragma once

// Observation streams and the pre/post-change Gaussian generators.

#include <cstdint>
#include <optional>
#include <vector>

#include "rankwatch/numerics.hpp"
#include "rankwatch/random.hpp"

namespace rankwatch {

using Mask = std::vector<bool>;

/// One observation. Unobserved entries (mask false) hold NaN.
struct StreamSample {
  std::int64_t t = 0;  // 1-based
  Vector x;
  std::optional<Mask> mask;  // absent: every entry observed

  Index dim() const noexcept { return x.size(); }
  bool fully_observed() const;
  Index observed_count() const;
  bool observed(Index i) const { return !mask || (*mask)[static_cast<std::size_t>(i)]; }
};

using Stream = std::vector<StreamSample>;

struct ScenarioConfig {
  Index p = 1;
  double sigma0_sq = 1.0;
  Index s = 0;
  double rho = 0.0;
  /// Last pre-change index; samples kappa+1.. are post-change. nullopt: no change.
  std::optional<std::int64_t> kappa;
  std::int64_t horizon = 0;
  double missing_fraction = 0.0;
  std::uint64_t seed = 0;
  /// When set, the signal covariance is rescaled so that ||Sigma|| equals it.
  std::optional<double> signal_norm;

  void validate() const;
};

/// Sigma = U diag(scales) U^T with U (p x s) orthonormal.
struct SignalCovariance {
  SymMatrix sigma;
  Matrix basis;
  Vector scales;

  Index rank() const noexcept { return scales.size(); }
  double spectral_norm() const { return scales.size() == 0 ? 0.0 : scales.maxCoeff(); }
};

/// Sigma = rho * G G^T / s with G (p x s) iid standard normal drawn from
/// Rng(seed). rho == 0 or s == 0 gives the zero matrix with empty basis.
SignalCovariance make_signal_covariance(Index p, Index s, double rho, std::uint64_t seed);

/// Same basis, scales multiplied so that ||Sigma|| == norm.
SignalCovariance rescale_to_norm(const SignalCovariance& signal, double norm);

/// Signal covariance a scenario uses: make_signal_covariance with
/// child_seed(cfg.seed, 0), then rescale_to_norm when cfg.signal_norm is set.
SignalCovariance scenario_signal(const ScenarioConfig& cfg);

/// Lazily draws the samples of one scenario. Every sample consumes p noise
/// normals, then s signal normals, then (when missing_fraction > 0) p mask
/// uniforms, whether or not it is post-change, so streams that differ only in
/// kappa or signal scale are coupled draw-for-draw.
class StreamGenerator {
 public:
  /// Uses scenario_signal(cfg) and sample seed child_seed(cfg.seed, 1).
  explicit StreamGenerator(const ScenarioConfig& cfg);
  StreamGenerator(const ScenarioConfig& cfg, SignalCovariance signal, std::uint64_t sample_seed);

  /// Ignores cfg.horizon; callers decide when to stop.
  StreamSample next();

  std::int64_t produced() const noexcept { return t_; }
  const SignalCovariance& signal() const noexcept { return signal_; }
  const ScenarioConfig& config() const noexcept { return cfg_; }

 private:
  ScenarioConfig cfg_;
  SignalCovariance signal_;
  Matrix factor_;  // U diag(sqrt(scales))
  double sigma0_ = 1.0;
  Rng rng_;
  std::int64_t t_ = 0;
};

/// All `cfg.horizon` samples of a scenario.
Stream generate_stream(const ScenarioConfig& cfg);

}  // namespace rankwatch
