#pragma once

#include <cstdint>
#include <vector>

#include "rankwatch/numerics.hpp"

namespace rankwatch {

/// Sliding window over the most recent samples with constant-time access to
/// any suffix sum S_t - S_k = sum_{i=k+1}^t x_i x_i^T, t - w < k < t.
///
/// Samples live in a linear buffer of 2w columns; when it fills, the newest
/// w-1 samples move to the front and the prefix checkpoints are rebuilt from
/// them, so checkpoint magnitudes stay bounded by ~2w outer products however
/// long the stream runs. The pairwise Gram matrix of retained samples is kept
/// alongside so short suffixes can be handled in sample space.
class WindowState {
 public:
  /// `track_prefix` false skips the dim x dim checkpoints (suffix sums are
  /// then summed directly); `track_gram` false skips the Gram matrix.
  WindowState(Index dim, Index window, bool track_prefix = true, bool track_gram = true);

  void push(const Vector& x);

  Index dim() const noexcept { return dim_; }
  Index window() const noexcept { return window_; }
  std::int64_t t() const noexcept { return t_; }
  /// Number of retained samples: min(t, w - 1).
  Index size() const noexcept { return end_ - start_; }
  /// Largest admissible suffix length min(t, w - 1).
  Index max_suffix() const noexcept { return size(); }

  /// S_t - S_k. Throws kRange unless t - w < k < t and k >= 0.
  SymMatrix suffix_sum(std::int64_t k) const;
  /// (S_t - S_k) / (t - k).
  SymMatrix suffix_covariance(std::int64_t k) const;

  /// dim x n block of the newest n samples, oldest first.
  auto recent(Index n) const { return samples_.middleCols(end_ - n, n); }
  /// n x n Gram block of the newest n samples.
  auto recent_gram(Index n) const { return gram_.block(end_ - n, end_ - n, n, n); }

  /// Writes S_t - S_{t-n} into `out`: a checkpoint difference when prefix
  /// tracking is on, a direct sum over the retained samples otherwise.
  void suffix_sum_into(Index n, Matrix& out) const;

  bool tracks_prefix() const noexcept { return track_prefix_; }
  bool tracks_gram() const noexcept { return track_gram_; }

 private:
  Index slot(Index pos) const noexcept { return pos % window_; }
  void compact();

  Index dim_;
  Index window_;
  bool track_prefix_;
  bool track_gram_;
  std::int64_t t_ = 0;
  Index start_ = 0;
  Index end_ = 0;
  Matrix samples_;             // dim x 2w
  Matrix gram_;                // 2w x 2w
  std::vector<Matrix> prefix_; // ring of w checkpoints, slot(pos)
};

}  // namespace rankwatch
