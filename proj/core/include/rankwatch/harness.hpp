#pragma once

// Monte Carlo run-length estimation, threshold calibration and sweeps.
//
// Seeding: replicate r of a run with master seed m draws its samples from
// child_seed(m, r); the signal covariance comes from the scenario's own seed,
// so runs that differ only in threshold, signal scale or sketch size share
// their noise draw for draw. Results never depend on the worker count.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "rankwatch/detector.hpp"
#include "rankwatch/model.hpp"
#include "rankwatch/sketch.hpp"
#include "rankwatch/tracker.hpp"

namespace rankwatch {

/// Calls fn(i) for every i in [0, n) on up to `workers` threads (0 means
/// hardware concurrency). Exceptions are rethrown on the calling thread.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

/// A stream source (scenario, optionally sketched) feeding one detector.
struct Experiment {
  ScenarioConfig scenario;  // horizon is ignored
  std::optional<SketchOperator> sketch;
  DetectorConfig detector;

  Index detector_dim() const;
  void validate() const;
};

struct RunLengthEstimate {
  double mean = 0.0;
  double std_err = 0.0;
  std::size_t replicates = 0;
  std::size_t censored = 0;  // runs that hit the cap; counted at the cap
  std::int64_t cap = 0;
  std::vector<std::int64_t> times;
};

RunLengthEstimate estimate_run_length(const Experiment& e, std::size_t replicates,
                                      std::uint64_t seed, std::int64_t cap, int workers = 1);

/// Null streams only (scenario.kappa unset).
RunLengthEstimate estimate_arl(const Experiment& e, std::size_t replicates, std::uint64_t seed,
                               std::int64_t cap, int workers = 1);

/// Change at time zero only (scenario.kappa == 0).
RunLengthEstimate estimate_edd(const Experiment& e, std::size_t replicates, std::uint64_t seed,
                               std::int64_t cap, int workers = 1);

struct CalibrationSpec {
  double target_arl = 5000.0;
  Experiment experiment;  // detector.threshold is ignored; null scenario
  std::size_t replicates = 200;
  double b_lo = 0.0;
  double b_hi = 1.0;
  bool expand_upper = false;  // double b_hi (at most 16 times) until it brackets the target
  std::uint64_t seed = 0;
  double tolerance = 0.1;  // relative
  int max_bisections = 12;
  double cap_factor = 20.0;
  int workers = 1;

  void validate() const;
};

struct CalibrationResult {
  double threshold = 0.0;
  double achieved_arl = 0.0;
  double std_err = 0.0;
  std::size_t censored = 0;
  bool converged = false;
  int bisections = 0;
  double b_lo = 0.0;
  double b_hi = 0.0;
  std::int64_t simulated_steps = 0;
};

/// Bisection on b over paired replicates. Each replicate keeps its detector
/// alive and is only advanced as far as the current question needs: until it
/// crosses the candidate b, or until the partial mean already exceeds the
/// acceptance band. Throws kBracket when the bracket does not contain the target.
CalibrationResult calibrate_threshold(const CalibrationSpec& spec);

struct SweepSpec {
  ScenarioConfig scenario;  // p, s, rho, sigma0_sq, seed (signal); kappa ignored
  Index window = 100;
  Index stride = 4;
  std::optional<double> drift;  // unset: default_drift(detector dim, window)

  /// Sketch sweep: one row per sketch dimension (nested operators).
  std::vector<Index> sketch_dims;
  /// Signal sweep (used when sketch_dims is empty): one row per rho^2 / sigma0^2,
  /// realised by rescaling the signal to ||Sigma|| = value * sigma0_sq.
  std::vector<double> snr_grid;

  /// Fixed threshold; unset means calibrate to target_arl per row (sketch
  /// sweep) or once (signal sweep).
  std::optional<double> threshold;
  double target_arl = 5000.0;
  std::size_t calibration_replicates = 200;
  std::size_t edd_replicates = 500;
  double tolerance = 0.1;
  double cap_factor = 20.0;
  std::int64_t edd_cap = 100000;
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const;
};

struct SweepRow {
  double param = 0.0;  // sketch dimension or rho^2 / sigma0^2
  Index dim = 0;
  double drift = 0.0;
  double threshold = 0.0;
  double achieved_arl = 0.0;  // NaN when the threshold was fixed
  double arl_std_err = 0.0;
  std::size_t arl_censored = 0;
  bool converged = true;
  double edd = 0.0;
  double edd_std_err = 0.0;
  std::size_t edd_replicates = 0;
  std::size_t edd_censored = 0;
  double snr = 0.0;         // lambda_1 of the (sketched) signal over sigma0^2
  double edd_approx = 0.0;  // closed form at (threshold, snr)
};

struct SweepResult {
  std::string kind;  // "sketch" or "snr"
  std::vector<SweepRow> rows;
};

/// Seeds: calibration replicates child_seed(seed, 0), delay replicates
/// child_seed(seed, 1), sketch operator child_seed(seed, 2).
SweepResult run_sweep(const SweepSpec& spec);

struct TrackerRunSpec {
  ScenarioConfig scenario;
  TrackerConfig tracker;  // tracker.seed is ignored
  std::int64_t horizon = 1000;
  std::size_t replicates = 50;
  std::uint64_t seed = 0;
  int workers = 1;
};

/// Replicate r draws samples from child_seed(seed, 2r) and its initial basis
/// from child_seed(seed, 2r + 1).
std::vector<TrackerReport> run_tracker_replicates(const TrackerRunSpec& spec);

struct TrackerCalibration {
  double threshold = 0.0;
  std::vector<double> maxima;  // per replicate
};

/// Threshold for the tracker alarm rule on null streams: per replicate, the
/// largest value of the statistic's running minimum over `persistence`
/// consecutive steps, then its `level` quantile across replicates. A
/// persistence alarm on a null replicate fires exactly when that maximum
/// exceeds the threshold.
TrackerCalibration calibrate_tracker_threshold(const TrackerRunSpec& spec, double level);

}  // namespace rankwatch
