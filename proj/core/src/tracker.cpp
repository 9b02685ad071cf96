#include "rankwatch/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rankwatch/error.hpp"
#include "rankwatch/random.hpp"

namespace rankwatch {

namespace {

constexpr double kOrthoDrift = 1e-8;
constexpr double kRankTol = 1e-10;

double statistic_of(const TrackerStats& st, TrackerStatistic which) {
  return which == TrackerStatistic::kNorm ? st.stat_norm : st.stat_max;
}

}  // namespace

double StepSchedule::operator()(std::int64_t t) const {
  return eta0 / (1.0 + static_cast<double>(t) / t0);
}

void StepSchedule::validate() const {
  if (!(eta0 > 0.0) || !std::isfinite(eta0)) throw Error(ErrorKind::kInvalidConfig, "eta0 must be positive");
  if (!(t0 > 0.0) || !std::isfinite(t0)) throw Error(ErrorKind::kInvalidConfig, "t0 must be positive");
}

GrouseState make_grouse_state(Index p, Index s, const StepSchedule& schedule, std::uint64_t seed) {
  if (s < 1 || s > p) throw Error(ErrorKind::kInvalidConfig, "tracker rank must lie in [1, p]");
  schedule.validate();
  Rng rng(seed);
  GrouseState st;
  st.u = orthonormalize(rng.normal_matrix(p, s));
  st.schedule = schedule;
  return st;
}

WeightEstimate estimate_weights(const GrouseState& state, const StreamSample& sample) {
  const Matrix& u = state.u;
  const Index p = u.rows();
  const Index s = u.cols();
  if (sample.dim() != p) {
    throw Error(ErrorKind::kStream, "sample dimension " + std::to_string(sample.dim()) +
                                        " does not match tracker dimension " + std::to_string(p));
  }
  WeightEstimate w;
  if (sample.fully_observed()) {
    w.beta = u.transpose() * sample.x;
    w.residual = sample.x - u * w.beta;
    w.ok = true;
    return w;
  }

  const Index n_obs = sample.observed_count();
  if (n_obs < s) return w;
  Matrix g = Matrix::Zero(s, s);
  Vector rhs = Vector::Zero(s);
  for (Index i = 0; i < p; ++i) {
    if (!sample.observed(i)) continue;
    const auto row = u.row(i);
    g.noalias() += row.transpose() * row;
    rhs.noalias() += sample.x[i] * row.transpose();
  }
  const EigResult eig = sym_eig(SymMatrix::from_dense(g, 1e-8));
  const double top = eig.eigenvalues[0];
  if (!(eig.eigenvalues[s - 1] > kRankTol * std::max(top, 1.0))) return w;
  const Matrix& v = *eig.eigenvectors;
  w.beta = v * (v.transpose() * rhs).cwiseQuotient(eig.eigenvalues);
  w.residual = Vector::Zero(p);
  const Vector fit = u * w.beta;
  for (Index i = 0; i < p; ++i) {
    if (sample.observed(i)) w.residual[i] = sample.x[i] - fit[i];
  }
  w.ok = true;
  return w;
}

GrouseState grouse_update(GrouseState state, const WeightEstimate& w) {
  if (!w.ok) return state;
  const double eta = state.schedule(state.t);
  ++state.t;
  state.step = eta;
  const double beta_norm = w.beta.norm();
  const double r_norm = w.residual.norm();
  if (beta_norm == 0.0 || r_norm == 0.0) return state;
  const Vector q = state.u * w.beta;
  const double q_norm = q.norm();
  if (q_norm == 0.0) return state;

  const double angle = std::min(r_norm * q_norm * eta, std::atan2(r_norm, q_norm));
  const Vector dir = (std::cos(angle) - 1.0) / q_norm * q + std::sin(angle) / r_norm * w.residual;
  state.u.noalias() += dir * (w.beta / beta_norm).transpose();

  const Index s = state.u.cols();
  const Matrix gram = state.u.transpose() * state.u;
  if ((gram - Matrix::Identity(s, s)).cwiseAbs().maxCoeff() > kOrthoDrift) {
    state.u = orthonormalize(state.u);
  }
  return state;
}

void AlarmRule::validate() const {
  if (!std::isfinite(threshold)) throw Error(ErrorKind::kInvalidConfig, "alarm threshold must be finite");
  if (kind == Kind::kPersistence && persistence < 1) {
    throw Error(ErrorKind::kInvalidConfig, "persistence must be >= 1");
  }
  if (kind == Kind::kCusum && !(drift >= 0.0 && std::isfinite(drift))) {
    throw Error(ErrorKind::kInvalidConfig, "cusum drift must be finite and >= 0");
  }
}

void TrackerConfig::validate() const {
  if (s < 1) throw Error(ErrorKind::kInvalidConfig, "tracker rank must be >= 1");
  schedule.validate();
  if (alarm) alarm->validate();
}

SubspaceTracker::SubspaceTracker(Index p, const TrackerConfig& cfg)
    : cfg_((cfg.validate(), cfg)), state_(make_grouse_state(p, cfg.s, cfg.schedule, cfg.seed)) {}

TrackerStats SubspaceTracker::push(const StreamSample& sample) {
  TrackerStats st;
  st.t = sample.t;
  st.observed_count = sample.observed_count();
  const WeightEstimate w = estimate_weights(state_, sample);
  if (!w.ok) {
    st.skipped = true;
    st.stat_max = std::numeric_limits<double>::quiet_NaN();
    st.stat_norm = std::numeric_limits<double>::quiet_NaN();
    update_alarm(st);
    return st;
  }
  st.stat_max = w.beta.cwiseAbs().maxCoeff();
  st.stat_norm = w.beta.squaredNorm();
  if (cfg_.keep_beta) st.beta = w.beta;
  update_alarm(st);
  state_ = grouse_update(std::move(state_), w);
  return st;
}

void SubspaceTracker::update_alarm(const TrackerStats& st) {
  if (!cfg_.alarm || alarm_time_ || st.skipped) return;
  const AlarmRule& rule = *cfg_.alarm;
  const double value = statistic_of(st, rule.statistic);
  if (rule.kind == AlarmRule::Kind::kPersistence) {
    run_ = value > rule.threshold ? run_ + 1 : 0;
    if (run_ >= rule.persistence) alarm_time_ = st.t;
  } else {
    cusum_ = std::max(0.0, cusum_ + value - rule.drift);
    if (cusum_ >= rule.threshold) alarm_time_ = st.t;
  }
}

TrackerReport run_tracker(const Stream& stream, const TrackerConfig& cfg) {
  cfg.validate();
  TrackerReport report;
  if (stream.empty()) return report;
  SubspaceTracker tracker(stream.front().dim(), cfg);
  report.trace.reserve(stream.size());
  for (const StreamSample& sample : stream) {
    report.trace.push_back(tracker.push(sample));
    if (cfg.stop_at_alarm && tracker.alarm_time()) break;
  }
  report.alarm_time = tracker.alarm_time();
  report.basis = tracker.state().u;
  return report;
}

double subspace_distance(const Matrix& u, const Matrix& v) {
  if (u.rows() != v.rows()) throw Error(ErrorKind::kInvalidInput, "subspace dimension mismatch");
  const Matrix resid = v - u * (u.transpose() * v);
  return spectral_norm(resid);
}

}  // namespace rankwatch
