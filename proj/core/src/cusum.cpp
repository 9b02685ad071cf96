#include "rankwatch/cusum.hpp"

#include <cmath>
#include <string>

#include "rankwatch/error.hpp"
#include "rankwatch/stream_io.hpp"

namespace rankwatch {

namespace {

void require_unit(const Matrix& directions) {
  for (Index j = 0; j < directions.cols(); ++j) {
    if (std::abs(directions.col(j).norm() - 1.0) > 1e-9) {
      throw Error(ErrorKind::kInvalidInput, "direction " + std::to_string(j) + " is not unit norm");
    }
  }
}

}  // namespace

CusumState make_cusum(const Vector& q, double drift, double threshold) {
  require_unit(q);
  CusumState s;
  s.q = q;
  s.drift = drift;
  s.threshold = threshold;
  return s;
}

CusumState cusum_step(CusumState state, const Vector& x, double sigma0_sq) {
  if (x.size() != state.q.size()) throw Error(ErrorKind::kStream, "cusum: dimension mismatch");
  const double proj = state.q.dot(x);
  state.stat = std::max(0.0, state.stat + proj * proj / sigma0_sq - state.drift);
  ++state.t;
  if (!state.alarm_time && state.stat >= state.threshold) state.alarm_time = state.t;
  return state;
}

CusumBank::CusumBank(Matrix directions, double drift, double threshold, double sigma0_sq)
    : directions_(std::move(directions)),
      drift_(drift),
      threshold_(threshold),
      sigma0_sq_(sigma0_sq),
      stats_(Vector::Zero(directions_.cols())),
      alarms_(static_cast<std::size_t>(directions_.cols())) {
  require_unit(directions_);
}

double CusumBank::push(const Vector& x) {
  if (x.size() != directions_.rows()) throw Error(ErrorKind::kStream, "cusum bank: dimension mismatch");
  ++t_;
  proj_.noalias() = directions_.transpose() * x;
  stats_ = (stats_.array() + proj_.array().square() / sigma0_sq_ - drift_).cwiseMax(0.0);
  for (Index j = 0; j < stats_.size(); ++j) {
    auto& alarm = alarms_[static_cast<std::size_t>(j)];
    if (!alarm && stats_[j] >= threshold_) alarm = t_;
  }
  return stats_.size() == 0 ? 0.0 : stats_.maxCoeff();
}

BankResult run_cusum_bank(const Stream& stream, const Matrix& directions, double drift,
                          double threshold, double sigma0_sq) {
  CusumBank bank(directions, drift, threshold, sigma0_sq);
  for (const StreamSample& s : stream) {
    if (!s.fully_observed()) throw Error(ErrorKind::kStream, "cusum bank requires full observations");
    bank.push(s.x);
  }
  BankResult out;
  out.alarm_times = bank.alarm_times();
  for (std::size_t j = 0; j < out.alarm_times.size(); ++j) {
    const auto& a = out.alarm_times[j];
    if (a && (!out.first_alarm || *a < *out.first_alarm)) {
      out.first_alarm = a;
      out.first_direction = static_cast<Index>(j);
    }
  }
  // Report stream time rather than bank step count.
  if (!stream.empty()) {
    const std::int64_t offset = stream.front().t - 1;
    for (auto& a : out.alarm_times) {
      if (a) *a += offset;
    }
    if (out.first_alarm) *out.first_alarm += offset;
  }
  return out;
}

Matrix load_direction_bank(const std::filesystem::path& path) {
  Matrix directions = read_matrix_rows(path).transpose();
  require_unit(directions);
  return directions;
}

void save_direction_bank(const Matrix& directions, const std::filesystem::path& path) {
  require_unit(directions);
  write_matrix_rows(directions.transpose(), path,
                    "directions dim=" + std::to_string(directions.rows()) +
                        " count=" + std::to_string(directions.cols()));
}

}  // namespace rankwatch
