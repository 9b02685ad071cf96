#include "rankwatch/window.hpp"

#include <string>

#include "rankwatch/error.hpp"

namespace rankwatch {

WindowState::WindowState(Index dim, Index window, bool track_prefix, bool track_gram)
    : dim_(dim), window_(window), track_prefix_(track_prefix), track_gram_(track_gram) {
  if (dim < 1) throw Error(ErrorKind::kInvalidConfig, "window: dimension must be >= 1");
  if (window < 2) throw Error(ErrorKind::kInvalidConfig, "window: size must be >= 2");
  samples_.resize(dim, 2 * window);
  if (track_gram_) gram_.resize(2 * window, 2 * window);
  if (track_prefix_) prefix_.assign(static_cast<std::size_t>(window), Matrix::Zero(dim, dim));
}

void WindowState::push(const Vector& x) {
  if (x.size() != dim_) {
    throw Error(ErrorKind::kStream, "sample dimension " + std::to_string(x.size()) +
                                        " does not match window dimension " +
                                        std::to_string(dim_));
  }
  if (end_ == samples_.cols()) compact();

  const Index pos = end_;
  samples_.col(pos) = x;
  ++end_;
  ++t_;
  if (end_ - start_ > window_ - 1) ++start_;

  if (track_gram_) {
    const Index len = end_ - start_;
    gram_.col(pos).segment(start_, len).noalias() =
        samples_.middleCols(start_, len).transpose() * x;
    gram_.row(pos).segment(start_, len) = gram_.col(pos).segment(start_, len).transpose();
  }
  if (track_prefix_) {
    Matrix& next = prefix_[static_cast<std::size_t>(slot(pos + 1))];
    next = prefix_[static_cast<std::size_t>(slot(pos))];
    next.noalias() += x * x.transpose();
  }
}

void WindowState::compact() {
  const Index keep = end_ - start_;
  samples_.leftCols(keep) = samples_.middleCols(start_, keep).eval();
  if (track_gram_) {
    gram_.topLeftCorner(keep, keep) = gram_.block(start_, start_, keep, keep).eval();
  }
  start_ = 0;
  end_ = keep;
  if (track_prefix_) {
    prefix_[static_cast<std::size_t>(slot(0))].setZero();
    for (Index i = 0; i < keep; ++i) {
      Matrix& next = prefix_[static_cast<std::size_t>(slot(i + 1))];
      next = prefix_[static_cast<std::size_t>(slot(i))];
      next.noalias() += samples_.col(i) * samples_.col(i).transpose();
    }
  }
}

void WindowState::suffix_sum_into(Index n, Matrix& out) const {
  if (n < 1 || n > size()) throw Error(ErrorKind::kRange, "suffix length outside window");
  if (track_prefix_ && n > 1) {
    out = prefix_[static_cast<std::size_t>(slot(end_))] -
          prefix_[static_cast<std::size_t>(slot(end_ - n))];
  } else {
    const auto block = recent(n);
    out.noalias() = block * block.transpose();
  }
}

SymMatrix WindowState::suffix_sum(std::int64_t k) const {
  if (!(k > t_ - window_ && k < t_ && k >= 0)) {
    throw Error(ErrorKind::kRange, "candidate k=" + std::to_string(k) +
                                       " outside (t-w, t) at t=" + std::to_string(t_));
  }
  Matrix out;
  suffix_sum_into(static_cast<Index>(t_ - k), out);
  return SymMatrix::from_dense(out, 1e-9);
}

SymMatrix WindowState::suffix_covariance(std::int64_t k) const {
  SymMatrix s = suffix_sum(k);
  s *= 1.0 / static_cast<double>(t_ - k);
  return s;
}

}  // namespace rankwatch
