#include "rankwatch/detector.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rankwatch/error.hpp"

namespace rankwatch {

namespace {

constexpr Index kSmallDim = 3;
constexpr double kScanTol = 1e-8;
constexpr double kWarmJitter = 1e-4;

template <typename M>
double small_top(const M& m) {
  if (m.rows() == 1) return m(0, 0);
  if (m.rows() == 2) {
    const double mean = 0.5 * (m(0, 0) + m(1, 1));
    const double half = 0.5 * (m(0, 0) - m(1, 1));
    return mean + std::hypot(half, 0.5 * (m(0, 1) + m(1, 0)));
  }
  return sym_eig(SymMatrix::from_dense(m, 1e-9), {.want_vectors = false}).eigenvalues[0];
}

}  // namespace

void DetectorConfig::validate() const {
  if (window < 2) throw Error(ErrorKind::kInvalidConfig, "window must be >= 2");
  if (stride < 1 || stride >= window) {
    throw Error(ErrorKind::kInvalidConfig, "stride must satisfy 1 <= stride < window");
  }
  if (!(threshold >= 0.0) || !std::isfinite(threshold)) {
    throw Error(ErrorKind::kInvalidConfig, "threshold must be finite and >= 0");
  }
  if (!(drift >= 0.0) || !std::isfinite(drift)) {
    throw Error(ErrorKind::kInvalidConfig, "drift must be finite and >= 0");
  }
  if (!(sigma0_sq > 0.0) || !std::isfinite(sigma0_sq)) {
    throw Error(ErrorKind::kInvalidConfig, "sigma0_sq must be positive");
  }
}

double default_drift(Index p, Index window) {
  const double r = 1.0 + std::sqrt(static_cast<double>(p) / static_cast<double>(window));
  return r * r + 0.1;
}

double WindowScanner::top_eigenvalue(const WindowState& state, Index n, std::size_t slot) {
  const Index dim = state.dim();
  if (n == 1) {
    const auto x = state.recent(1);
    return x.col(0).squaredNorm();
  }
  if (warm_.size() <= slot) warm_.resize(slot + 1);
  Vector& warm = warm_[slot];

  if (n >= dim) {
    state.suffix_sum_into(n, scratch_);
    if (dim <= kSmallDim) return small_top(scratch_);
    Vector start = default_start_vector(dim);
    if (warm.size() == dim) start = warm + kWarmJitter * start;
    const Matrix& d = scratch_;
    const auto apply = [&d](const Vector& x, Vector& y) { y.noalias() = d * x; };
    LanczosResult r = lanczos_.largest(apply, dim, start, {.tol = kScanTol});
    warm = std::move(r.vector);
    return r.value;
  }

  if (n <= kSmallDim) {
    if (state.tracks_gram()) return small_top(Matrix(state.recent_gram(n)));
    const auto x = state.recent(n);
    return small_top(Matrix(x.transpose() * x));
  }

  // Sample space: the nonzero spectrum of X^T X equals that of X X^T.
  const auto x = state.recent(n);
  Vector start = default_start_vector(n);
  if (warm.size() == dim) {
    Vector projected = x.transpose() * warm;
    const double norm = projected.norm();
    if (norm > 0.0) start = projected / norm + kWarmJitter * start;
  }
  LanczosResult r;
  if (state.tracks_gram()) {
    const auto g = state.recent_gram(n);
    const auto apply = [&g](const Vector& u, Vector& y) { y.noalias() = g * u; };
    r = lanczos_.largest(apply, n, start, {.tol = kScanTol});
  } else {
    scratch_.noalias() = x.transpose() * x;
    const Matrix& g = scratch_;
    const auto apply = [&g](const Vector& u, Vector& y) { y.noalias() = g * u; };
    r = lanczos_.largest(apply, n, start, {.tol = kScanTol});
  }
  Vector v = x * r.vector;
  const double vn = v.norm();
  if (vn > 0.0) warm = v / vn;
  return r.value;
}

ScanValue WindowScanner::scan(const WindowState& state, const DetectorConfig& cfg) {
  const Index n_max = state.max_suffix();
  if (n_max < 1) throw Error(ErrorKind::kRange, "scan requires at least one sample");
  ScanValue best{-std::numeric_limits<double>::infinity(), 0};
  std::size_t slot = 0;
  for (Index n = 1; n <= n_max; n += cfg.stride, ++slot) {
    const double lambda = top_eigenvalue(state, n, slot);
    const double value = lambda / cfg.sigma0_sq - cfg.drift * static_cast<double>(n);
    // Strict comparison with n ascending keeps the largest k on ties.
    if (value > best.value) best = {value, state.t() - n};
  }
  return best;
}

ScanValue scan_statistic(const WindowState& state, const DetectorConfig& cfg) {
  cfg.validate();
  WindowScanner scanner;
  return scanner.scan(state, cfg);
}

MaxEigDetector::MaxEigDetector(Index dim, const DetectorConfig& cfg)
    : cfg_(cfg), window_((cfg.validate(), dim), cfg.window, dim <= cfg.window - 1, true) {}

TraceEntry MaxEigDetector::push(const Vector& x) {
  if (!x.allFinite()) throw Error(ErrorKind::kStream, "detector requires finite samples");
  window_.push(x);
  const ScanValue v = scanner_.scan(window_, cfg_);
  return {window_.t(), v.value, v.k_hat};
}

DetectionReport run_detector(const Stream& stream, const DetectorConfig& cfg) {
  cfg.validate();
  DetectionReport report;
  if (stream.empty()) return report;
  const Index dim = stream.front().dim();
  MaxEigDetector detector(dim, cfg);
  for (const StreamSample& sample : stream) {
    if (sample.dim() != dim) {
      throw Error(ErrorKind::kStream, "sample at t=" + std::to_string(sample.t) + " has dimension " +
                                          std::to_string(sample.dim()) + ", expected " +
                                          std::to_string(dim));
    }
    if (!sample.fully_observed()) {
      throw Error(ErrorKind::kStream, "sample at t=" + std::to_string(sample.t) +
                                          " has missing entries; use the subspace tracker");
    }
    TraceEntry entry = detector.push(sample.x);
    entry.t = sample.t;
    entry.k_hat = sample.t - (detector.window().t() - entry.k_hat);
    report.trace.push_back(entry);
    if (entry.value >= cfg.threshold) {
      report.stopped = true;
      report.stopping_time = entry.t;
      report.k_hat = entry.k_hat;
      break;
    }
  }
  return report;
}

}  // namespace rankwatch
