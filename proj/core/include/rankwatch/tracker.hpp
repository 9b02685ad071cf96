#pragma once

// Online subspace tracking on the Grassmannian (rank-one geodesic steps that
// tolerate missing entries) and the matched-subspace statistics
// max_i |beta_i| and ||beta||^2.

#include <cstdint>
#include <optional>
#include <vector>

#include "rankwatch/model.hpp"
#include "rankwatch/numerics.hpp"

namespace rankwatch {

/// eta_t = eta0 / (1 + t / t0)
struct StepSchedule {
  double eta0 = 0.1;
  double t0 = 100.0;

  double operator()(std::int64_t t) const;
  void validate() const;
};

struct GrouseState {
  Matrix u;  // p x s, orthonormal columns
  StepSchedule schedule;
  double step = 0.0;    // eta used by the most recent update
  std::int64_t t = 0;   // number of updates applied
};

/// Orthonormalised p x s Gaussian basis drawn from Rng(seed).
GrouseState make_grouse_state(Index p, Index s, const StepSchedule& schedule, std::uint64_t seed);

struct WeightEstimate {
  bool ok = false;   // false: too few observed entries or rank-deficient rows
  Vector beta;       // s
  Vector residual;   // p, zero off the observed set
};

/// Least squares fit of the observed entries onto the rows of U they select.
/// Fully observed samples take the direct projection U^T x.
WeightEstimate estimate_weights(const GrouseState& state, const StreamSample& sample);

/// One geodesic step with q = U beta, sigma = ||r|| ||q||:
///   U += [(cos(sigma eta) - 1) q/||q|| + sin(sigma eta) r/||r||] (beta/||beta||)^T.
/// The rotation angle sigma*eta is capped at atan(||r|| / ||q||), the angle at
/// which the sample lies in the updated span. Zero beta or zero residual leave
/// U unchanged (the counter still advances).
GrouseState grouse_update(GrouseState state, const WeightEstimate& w);

enum class TrackerStatistic { kNorm, kMax };

struct AlarmRule {
  enum class Kind { kPersistence, kCusum };
  Kind kind = Kind::kPersistence;
  TrackerStatistic statistic = TrackerStatistic::kNorm;
  double threshold = 0.0;
  int persistence = 5;   // kPersistence: consecutive exceedances required
  double drift = 0.0;    // kCusum: S = max(0, S + stat - drift), alarm at S >= threshold

  void validate() const;
};

struct TrackerStats {
  std::int64_t t = 0;
  Vector beta;
  double stat_max = 0.0;   // NaN when skipped
  double stat_norm = 0.0;  // NaN when skipped
  Index observed_count = 0;
  bool skipped = false;
};

struct TrackerConfig {
  Index s = 1;
  StepSchedule schedule;
  std::optional<AlarmRule> alarm;
  std::uint64_t seed = 0;
  bool stop_at_alarm = false;
  bool keep_beta = false;  // store beta in every trace entry

  void validate() const;
};

/// Streaming tracker: estimate weights with U_{t-1}, record statistics, then
/// update U.
class SubspaceTracker {
 public:
  SubspaceTracker(Index p, const TrackerConfig& cfg);

  TrackerStats push(const StreamSample& sample);

  const GrouseState& state() const noexcept { return state_; }
  std::optional<std::int64_t> alarm_time() const noexcept { return alarm_time_; }

 private:
  void update_alarm(const TrackerStats& st);

  TrackerConfig cfg_;
  GrouseState state_;
  int run_ = 0;
  double cusum_ = 0.0;
  std::optional<std::int64_t> alarm_time_;
};

struct TrackerReport {
  std::vector<TrackerStats> trace;
  std::optional<std::int64_t> alarm_time;
  Matrix basis;
};

TrackerReport run_tracker(const Stream& stream, const TrackerConfig& cfg);

/// ||(I - U U^T) V|| for orthonormal U, V of equal row count.
double subspace_distance(const Matrix& u, const Matrix& v);

}  // namespace rankwatch
