#include "rankwatch/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rankwatch/error.hpp"

namespace rankwatch {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid input";
    case ErrorKind::kDegenerateInput: return "degenerate input";
    case ErrorKind::kInvalidConfig: return "invalid config";
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kRange: return "range error";
    case ErrorKind::kStream: return "stream error";
    case ErrorKind::kNoRoot: return "no root";
    case ErrorKind::kBracket: return "bracket error";
    case ErrorKind::kUnsupportedDimension: return "unsupported dimension";
  }
  return "unknown";
}

namespace {

constexpr Index kJacobiMaxDim = 8;

void require_finite(const SymMatrix& m) {
  if (!m.all_finite()) {
    throw Error(ErrorKind::kInvalidInput, "matrix has non-finite entries");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// SymMatrix

SymMatrix::SymMatrix(Index dim) : m_(Matrix::Zero(dim, dim)) {}

SymMatrix SymMatrix::from_dense(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorKind::kInvalidInput, "symmetric matrix must be square and non-empty");
  }
  if (!m.allFinite()) {
    throw Error(ErrorKind::kInvalidInput, "matrix has non-finite entries");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > rel_tol * scale) {
    throw Error(ErrorKind::kInvalidInput, "matrix is not symmetric");
  }
  Matrix sym = 0.5 * (m + m.transpose());
  return SymMatrix(std::move(sym));
}

SymMatrix SymMatrix::identity(Index dim) { return SymMatrix(Matrix::Identity(dim, dim)); }

SymMatrix SymMatrix::diagonal(const Vector& diag) {
  return SymMatrix(Matrix(diag.asDiagonal()));
}

SymMatrix SymMatrix::outer(const Vector& x) {
  SymMatrix s(x.size());
  s.add_outer(x);
  return s;
}

SymMatrix SymMatrix::congruence(const Matrix& a, const SymMatrix& s) {
  if (a.rows() != s.dim()) {
    throw Error(ErrorKind::kInvalidInput, "congruence: dimension mismatch");
  }
  Matrix prod = a.transpose() * s.dense() * a;
  Matrix sym = 0.5 * (prod + prod.transpose());
  return SymMatrix(std::move(sym));
}

void SymMatrix::add_outer(const Vector& x, double scale) {
  // x_i * x_j == x_j * x_i exactly, so the update is symmetric bit-for-bit.
  const Index n = dim();
  for (Index j = 0; j < n; ++j) {
    const double xj = scale * x[j];
    for (Index i = 0; i < n; ++i) m_(i, j) += x[i] * xj;
  }
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 1; i < n; ++i) m_(j, i) = m_(i, j);
  }
}

void SymMatrix::set(Index i, Index j, double value) {
  m_(i, j) = value;
  m_(j, i) = value;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& other) {
  m_ += other.m_;
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& other) {
  m_ -= other.m_;
  return *this;
}

SymMatrix& SymMatrix::operator*=(double c) {
  m_ *= c;
  return *this;
}

// ---------------------------------------------------------------------------
// Jacobi

EigResult sym_eig(const SymMatrix& m, const JacobiOptions& opts) {
  require_finite(m);
  const Index n = m.dim();
  Matrix a = m.dense();
  Matrix v;
  if (opts.want_vectors) v = Matrix::Identity(n, n);

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double off = 0.0;
    for (Index q = 1; q < n; ++q) {
      for (Index p = 0; p < q; ++p) off += std::abs(a(p, q));
    }
    if (off == 0.0) break;

    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        const double g = 100.0 * std::abs(apq);
        // After a few sweeps, drop elements that no longer change the diagonal.
        if (sweep > 3 && std::abs(a(p, p)) + g == std::abs(a(p, p)) &&
            std::abs(a(q, q)) + g == std::abs(a(q, q))) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        if (apq == 0.0) continue;

        const double h = a(q, q) - a(p, p);
        double t;
        if (std::abs(h) + g == std::abs(h)) {
          t = apq / h;
        } else {
          const double theta = 0.5 * h / apq;
          t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Index r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p);
          const double arq = a(r, q);
          const double new_rp = arp - s * (arq + arp * tau);
          const double new_rq = arq + s * (arp - arq * tau);
          a(r, p) = new_rp;
          a(p, r) = new_rp;
          a(r, q) = new_rq;
          a(q, r) = new_rq;
        }
        if (opts.want_vectors) {
          for (Index r = 0; r < n; ++r) {
            const double vrp = v(r, p);
            const double vrq = v(r, q);
            v(r, p) = vrp - s * (vrq + vrp * tau);
            v(r, q) = vrq + s * (vrp - vrq * tau);
          }
        }
      }
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return a(i, i) > a(j, j); });

  EigResult out;
  out.eigenvalues.resize(n);
  if (opts.want_vectors) out.eigenvectors = Matrix(n, n);
  for (Index k = 0; k < n; ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    out.eigenvalues[k] = a(src, src);
    if (opts.want_vectors) out.eigenvectors->col(k) = v.col(src);
  }
  return out;
}

double largest_eigenvalue(const SymMatrix& m) {
  require_finite(m);
  const Index n = m.dim();
  if (n == 0) throw Error(ErrorKind::kInvalidInput, "empty matrix");
  if (n <= kJacobiMaxDim) {
    return sym_eig(m, {.want_vectors = false}).eigenvalues[0];
  }
  LanczosSolver solver;
  const Matrix& dense = m.dense();
  const auto apply = [&dense](const Vector& x, Vector& y) { y.noalias() = dense * x; };
  return solver.largest(apply, n, default_start_vector(n), {.tol = 1e-13}).value;
}

int numerical_rank(const SymMatrix& m, double rel_tol) {
  const EigResult eig = sym_eig(m, {.want_vectors = false});
  const double top = std::max(eig.eigenvalues[0], std::numeric_limits<double>::min());
  const double cut = rel_tol * top;
  return static_cast<int>((eig.eigenvalues.array() > cut).count());
}

Matrix orthonormalize(const Matrix& cols) {
  if (!cols.allFinite()) {
    throw Error(ErrorKind::kInvalidInput, "orthonormalize: non-finite entries");
  }
  const Index p = cols.rows();
  const Index m = cols.cols();
  if (m > p) {
    throw Error(ErrorKind::kDegenerateInput, "orthonormalize: more columns than rows");
  }
  Matrix q(p, m);
  for (Index j = 0; j < m; ++j) {
    Vector v = cols.col(j);
    const double norm0 = v.norm();
    if (norm0 == 0.0) {
      throw Error(ErrorKind::kDegenerateInput, "orthonormalize: zero column");
    }
    for (int pass = 0; pass < 2; ++pass) {
      for (Index i = 0; i < j; ++i) v -= q.col(i).dot(v) * q.col(i);
    }
    const double norm = v.norm();
    if (norm <= 1e-10 * norm0) {
      throw Error(ErrorKind::kDegenerateInput, "orthonormalize: columns are linearly dependent");
    }
    q.col(j) = v / norm;
  }
  return q;
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  const Matrix gram = a.rows() < a.cols() ? Matrix(a * a.transpose())
                                          : Matrix(a.transpose() * a);
  const double top = largest_eigenvalue(SymMatrix::from_dense(gram));
  return std::sqrt(std::max(top, 0.0));
}

Vector default_start_vector(Index dim) {
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) {
    v[i] = 1.0 + 0.25 * std::sin(1.0 + 1.7 * static_cast<double>(i));
  }
  return v / v.norm();
}

}  // namespace rankwatch
