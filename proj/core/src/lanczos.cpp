#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "rankwatch/error.hpp"
#include "rankwatch/numerics.hpp"

namespace rankwatch {

namespace {

// Number of eigenvalues of T strictly below x (Sturm sequence).
std::size_t count_below(const std::vector<double>& alpha, const std::vector<double>& beta,
                        std::size_t n, double x) {
  constexpr double kTiny = 1e-300;
  std::size_t count = 0;
  double q = alpha[0] - x;
  if (q == 0.0) q = -kTiny;
  if (q < 0.0) ++count;
  for (std::size_t i = 1; i < n; ++i) {
    q = alpha[i] - x - beta[i - 1] * beta[i - 1] / q;
    if (q == 0.0) q = -kTiny;
    if (q < 0.0) ++count;
  }
  return count;
}

// Solves (T - shift I) x = b in place (b -> x); tridiagonal Gaussian
// elimination with partial pivoting. Zero pivots are nudged.
void tridiagonal_shifted_solve(const std::vector<double>& alpha, const std::vector<double>& beta,
                               std::size_t n, double shift, double tiny, Vector& b) {
  std::vector<double> d(n), dl(n > 1 ? n - 1 : 0), du(n > 1 ? n - 1 : 0), du2(n > 2 ? n - 2 : 0);
  for (std::size_t i = 0; i < n; ++i) d[i] = alpha[i] - shift;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    dl[i] = beta[i];
    du[i] = beta[i];
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (d[i] == 0.0) d[i] = tiny;
      const double fact = dl[i] / d[i];
      d[i + 1] -= fact * du[i];
      b[static_cast<Index>(i + 1)] -= fact * b[static_cast<Index>(i)];
      if (i + 2 < n) du2[i] = 0.0;
    } else {
      const double fact = d[i] / dl[i];
      d[i] = dl[i];
      const double temp = d[i + 1];
      d[i + 1] = du[i] - fact * temp;
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -fact * du2[i];
      }
      du[i] = temp;
      const double bi = b[static_cast<Index>(i)];
      b[static_cast<Index>(i)] = b[static_cast<Index>(i + 1)];
      b[static_cast<Index>(i + 1)] = bi - fact * b[static_cast<Index>(i + 1)];
    }
  }
  if (d[n - 1] == 0.0) d[n - 1] = tiny;
  for (std::size_t k = n; k-- > 0;) {
    double acc = b[static_cast<Index>(k)];
    if (k + 1 < n) acc -= du[k] * b[static_cast<Index>(k + 1)];
    if (k + 2 < n) acc -= du2[k] * b[static_cast<Index>(k + 2)];
    b[static_cast<Index>(k)] = acc / d[k];
  }
}

// Unit eigenvector of T for an (accurate) eigenvalue theta by inverse iteration.
Vector tridiagonal_eigenvector(const std::vector<double>& alpha, const std::vector<double>& beta,
                               std::size_t n, double theta, double scale, int sweeps) {
  const double tiny = std::max(std::numeric_limits<double>::epsilon() * scale,
                               std::numeric_limits<double>::min());
  Vector y = Vector::Ones(static_cast<Index>(n));
  for (int it = 0; it < sweeps; ++it) {
    tridiagonal_shifted_solve(alpha, beta, n, theta, tiny, y);
    const double norm = y.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      y = Vector::Ones(static_cast<Index>(n));
      continue;
    }
    y /= norm;
  }
  return y;
}

// Largest eigenvalue of the leading n x n block of T by Newton's method on
// det(x I - T), started above the spectrum so the iterates decrease
// monotonically onto the top root. `upper` must bound the spectrum from
// above. Also returns y_n^2, the squared last component of the unit
// eigenvector, as 1 / r_n'(theta) with r_i = P_i / P_{i-1}. Empty when an
// iterate falls inside the spectrum through rounding.
struct TopRitz {
  double theta;
  double last_sq;
};

std::optional<TopRitz> newton_top(const std::vector<double>& alpha, const std::vector<double>& beta,
                                  std::size_t n, double upper) {
  const double eps = std::numeric_limits<double>::epsilon();
  double x = upper;
  for (int it = 0; it < 100; ++it) {
    double r = x - alpha[0];
    double dr = 1.0;
    if (!(r > 0.0)) return std::nullopt;
    double dlog = dr / r;
    for (std::size_t i = 1; i < n; ++i) {
      const double b2 = beta[i - 1] * beta[i - 1];
      const double r_next = x - alpha[i] - b2 / r;
      dr = 1.0 + b2 * dr / (r * r);
      r = r_next;
      if (!(r > 0.0)) {
        // Rounding can push the last ratio through zero at the root itself.
        if (i + 1 == n && it > 0) return TopRitz{x, 1.0 / dr};
        return std::nullopt;
      }
      dlog += dr / r;
    }
    const double step = 1.0 / dlog;
    if (step <= 4.0 * eps * std::abs(x) || step <= std::numeric_limits<double>::min()) {
      return TopRitz{x, 1.0 / dr};
    }
    x -= step;
  }
  return std::nullopt;
}

}  // namespace

std::pair<double, Vector> tridiagonal_top_eigenpair(const std::vector<double>& alpha,
                                                    const std::vector<double>& beta,
                                                    std::size_t n) {
  if (n == 0) throw Error(ErrorKind::kInvalidInput, "empty tridiagonal matrix");
  if (n == 1) return {alpha[0], Vector::Ones(1)};

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    double radius = 0.0;
    if (i > 0) radius += std::abs(beta[i - 1]);
    if (i + 1 < n) radius += std::abs(beta[i]);
    lo = std::min(lo, alpha[i] - radius);
    hi = std::max(hi, alpha[i] + radius);
  }
  const double scale = std::max(std::abs(lo), std::abs(hi));
  const double eps = std::numeric_limits<double>::epsilon();
  // Invariant: count_below(lo) <= n-1 (top eigenvalue >= lo), count_below(hi) == n.
  hi += eps * scale + std::numeric_limits<double>::min();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (hi - lo <= 2.0 * eps * std::max(std::abs(lo), std::abs(hi))) break;
    if (count_below(alpha, beta, n, mid) == n) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const double theta = 0.5 * (lo + hi);
  return {theta, tridiagonal_eigenvector(alpha, beta, n, theta, scale, 3)};
}

LanczosResult LanczosSolver::largest(const MatVec& apply, Index dim, const Vector& start,
                                     const LanczosOptions& opts) {
  if (dim <= 0) throw Error(ErrorKind::kInvalidInput, "lanczos: empty operator");
  const Index kmax = opts.max_iter > 0 ? std::min<Index>(opts.max_iter, dim) : dim;
  if (basis_.rows() != dim || basis_.cols() < kmax) basis_.resize(dim, kmax);
  alpha_.clear();
  beta_.clear();
  w_.resize(dim);

  Vector q = start.size() == dim ? start : default_start_vector(dim);
  double norm = q.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    q = default_start_vector(dim);
    norm = 1.0;
  }
  basis_.col(0) = q / norm;

  double tnorm = 0.0;
  double prev_theta = 0.0;
  LanczosResult result;
  for (Index j = 0; j < kmax; ++j) {
    q = basis_.col(j);
    apply(q, w_);
    const double a = q.dot(w_);
    w_ -= a * q;
    if (j > 0) w_ -= beta_[static_cast<std::size_t>(j - 1)] * basis_.col(j - 1);
    for (int pass = 0; pass < 2; ++pass) {
      coeff_.noalias() = basis_.leftCols(j + 1).transpose() * w_;
      w_.noalias() -= basis_.leftCols(j + 1) * coeff_;
    }
    alpha_.push_back(a);
    const double b = w_.norm();
    tnorm = std::max(tnorm, std::abs(a) + b + (j > 0 ? beta_[static_cast<std::size_t>(j - 1)] : 0.0));

    const auto n = static_cast<std::size_t>(j + 1);
    double theta = a;
    double last_sq = 1.0;
    if (j > 0) {
      // lambda_max(T_n) <= max(lambda_max(T_{n-1}), alpha_n) + beta_{n-1}.
      const double beta_prev = std::abs(beta_[static_cast<std::size_t>(j - 1)]);
      double upper = std::max(prev_theta, a) + beta_prev;
      upper += 8.0 * std::numeric_limits<double>::epsilon() * (std::abs(upper) + tnorm);
      if (const auto top = newton_top(alpha_, beta_, n, upper)) {
        theta = top->theta;
        last_sq = top->last_sq;
      } else {
        auto [th, y] = tridiagonal_top_eigenpair(alpha_, beta_, n);
        theta = th;
        last_sq = y[j] * y[j];
      }
    }
    prev_theta = theta;
    const double resid = b * std::sqrt(std::max(last_sq, 0.0));
    const bool breakdown = b <= 1e-14 * std::max(tnorm, std::numeric_limits<double>::min());
    if (resid <= opts.tol * tnorm || breakdown || j + 1 == kmax) {
      const Vector y = n == 1 ? Vector::Ones(1)
                              : tridiagonal_eigenvector(alpha_, beta_, n, theta, tnorm, 2);
      result.value = theta;
      result.vector = basis_.leftCols(j + 1) * y;
      const double vn = result.vector.norm();
      if (vn > 0.0) result.vector /= vn;
      result.iterations = static_cast<int>(j + 1);
      result.residual = resid;
      return result;
    }
    beta_.push_back(b);
    basis_.col(j + 1) = w_ / b;
  }
  return result;
}

}  // namespace rankwatch
