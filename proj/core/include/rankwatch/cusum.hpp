#pragma once

// Per-direction chi-square CUSUM procedures: for a unit direction q,
//   S_t = max(0, S_{t-1} + (q^T x_t)^2 / sigma0^2 - drift),
// alarming the first time S_t >= threshold.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "rankwatch/model.hpp"
#include "rankwatch/numerics.hpp"

namespace rankwatch {

struct CusumState {
  Vector q;
  double drift = 0.0;
  double threshold = 0.0;
  double stat = 0.0;
  std::int64_t t = 0;
  std::optional<std::int64_t> alarm_time;
};

CusumState make_cusum(const Vector& q, double drift, double threshold);

/// One recursion step. The alarm time is kept once set.
CusumState cusum_step(CusumState state, const Vector& x, double sigma0_sq);

/// Streaming bank of CUSUMs sharing drift and threshold; directions are the
/// columns of a dim x K matrix.
class CusumBank {
 public:
  CusumBank(Matrix directions, double drift, double threshold, double sigma0_sq);

  /// Advances every direction; returns the largest statistic after the step.
  double push(const Vector& x);

  const Vector& stats() const noexcept { return stats_; }
  const std::vector<std::optional<std::int64_t>>& alarm_times() const noexcept { return alarms_; }
  std::int64_t t() const noexcept { return t_; }

 private:
  Matrix directions_;
  double drift_;
  double threshold_;
  double sigma0_sq_;
  Vector stats_;
  Vector proj_;
  std::vector<std::optional<std::int64_t>> alarms_;
  std::int64_t t_ = 0;
};

struct BankResult {
  std::vector<std::optional<std::int64_t>> alarm_times;  // per direction
  std::optional<std::int64_t> first_alarm;                // min over the bank
  std::optional<Index> first_direction;
};

/// Processes the whole stream once through every direction. Directions must
/// be unit norm (kInvalidInput otherwise); samples must be fully observed.
BankResult run_cusum_bank(const Stream& stream, const Matrix& directions, double drift,
                          double threshold, double sigma0_sq);

/// Direction banks on disk: one unit direction per row.
Matrix load_direction_bank(const std::filesystem::path& path);
void save_direction_bank(const Matrix& directions, const std::filesystem::path& path);

}  // namespace rankwatch
