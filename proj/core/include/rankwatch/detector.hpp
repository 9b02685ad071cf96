#pragma once

// Sliding-window maximum-eigenvalue change detector.
//
// At time t the statistic is
//   max over t-w < k < t of  (t-k) * [ lambda_1(Sigma_hat_{t,k}) / sigma0^2 - d ]
// with Sigma_hat_{t,k} the (uncentred) covariance of samples k+1..t, and the
// procedure stops the first time it reaches b.

#include <cstdint>
#include <optional>
#include <vector>

#include "rankwatch/model.hpp"
#include "rankwatch/numerics.hpp"
#include "rankwatch/window.hpp"

namespace rankwatch {

struct DetectorConfig {
  Index window = 100;     // w
  double drift = 1.0;     // d
  double threshold = 1.0; // b
  double sigma0_sq = 1.0;
  Index stride = 1;       // evaluate k = t-1, t-1-stride, ...

  void validate() const;
};

/// (1 + sqrt(p / w))^2 + 0.1: just above where the null window-w largest
/// eigenvalue ratio concentrates, so the statistic drifts down before a change.
double default_drift(Index p, Index window);

struct ScanValue {
  double value = 0.0;
  std::int64_t k_hat = 0;
};

struct TraceEntry {
  std::int64_t t = 0;
  double value = 0.0;
  std::int64_t k_hat = 0;
};

struct DetectionReport {
  bool stopped = false;
  std::optional<std::int64_t> stopping_time;
  std::optional<std::int64_t> k_hat;
  std::vector<TraceEntry> trace;
};

/// Scan statistic of the current window. Requires at least one sample.
/// Ties go to the largest k.
ScanValue scan_statistic(const WindowState& state, const DetectorConfig& cfg);

/// Evaluates the scan statistic over a window, reusing one warm-start
/// eigenvector per candidate offset between calls so consecutive scans of a
/// sliding window converge in a handful of Lanczos steps.
class WindowScanner {
 public:
  ScanValue scan(const WindowState& state, const DetectorConfig& cfg);

 private:
  double top_eigenvalue(const WindowState& state, Index n, std::size_t slot);

  LanczosSolver lanczos_;
  std::vector<Vector> warm_;
  Matrix scratch_;
};

/// Streaming detector: a window plus a scanner.
class MaxEigDetector {
 public:
  MaxEigDetector(Index dim, const DetectorConfig& cfg);

  /// Consumes one fully observed sample and returns the statistic at the new t.
  TraceEntry push(const Vector& x);

  const WindowState& window() const noexcept { return window_; }
  const DetectorConfig& config() const noexcept { return cfg_; }

 private:
  DetectorConfig cfg_;
  WindowState window_;
  WindowScanner scanner_;
};

/// Runs the detector over a stream, stopping at the first t whose statistic
/// reaches cfg.threshold. Throws kStream on masked samples or a dimension change.
DetectionReport run_detector(const Stream& stream, const DetectorConfig& cfg);

}  // namespace rankwatch
