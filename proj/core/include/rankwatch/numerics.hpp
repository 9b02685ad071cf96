#pragma once

// Small dense symmetric linear algebra used throughout the library.

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace rankwatch {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dense real symmetric matrix. Symmetry is structural: every constructor
/// and mutator leaves entries(i, j) == entries(j, i) bit-for-bit.
class SymMatrix {
 public:
  SymMatrix() = default;

  /// dim x dim zero matrix.
  explicit SymMatrix(Index dim);

  /// Wraps a dense matrix that is symmetric up to `rel_tol` (relative to its
  /// largest entry); the two triangles are averaged. Throws kInvalidInput
  /// otherwise, and for empty or non-square input.
  static SymMatrix from_dense(const Matrix& m, double rel_tol = 1e-10);

  static SymMatrix identity(Index dim);
  static SymMatrix diagonal(const Vector& diag);
  /// x x^T
  static SymMatrix outer(const Vector& x);
  /// A^T S A, symmetrised.
  static SymMatrix congruence(const Matrix& a, const SymMatrix& s);

  Index dim() const noexcept { return m_.rows(); }
  double operator()(Index i, Index j) const { return m_(i, j); }
  const Matrix& dense() const noexcept { return m_; }

  /// this += scale * x x^T
  void add_outer(const Vector& x, double scale = 1.0);
  void set(Index i, Index j, double value);

  SymMatrix& operator+=(const SymMatrix& other);
  SymMatrix& operator-=(const SymMatrix& other);
  SymMatrix& operator*=(double c);

  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(SymMatrix a, double c) { return a *= c; }
  friend SymMatrix operator*(double c, SymMatrix a) { return a *= c; }

  bool all_finite() const { return m_.allFinite(); }
  double max_abs() const { return m_.size() == 0 ? 0.0 : m_.cwiseAbs().maxCoeff(); }

 private:
  explicit SymMatrix(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

struct EigResult {
  Vector eigenvalues;                  // non-increasing
  std::optional<Matrix> eigenvectors;  // column i pairs with eigenvalues[i]
};

struct JacobiOptions {
  bool want_vectors = true;
  int max_sweeps = 100;
};

/// Full eigendecomposition by cyclic Jacobi rotations.
EigResult sym_eig(const SymMatrix& m, const JacobiOptions& opts = {});

/// Largest (most positive) eigenvalue. Jacobi for small dimensions, Lanczos
/// from a fixed deterministic start otherwise.
double largest_eigenvalue(const SymMatrix& m);

/// Number of eigenvalues above rel_tol * max(lambda_1, tiny).
int numerical_rank(const SymMatrix& m, double rel_tol = 1e-8);

/// Modified Gram-Schmidt with one reorthogonalisation pass. Columns must be
/// linearly independent; throws kDegenerateInput otherwise.
Matrix orthonormalize(const Matrix& cols);

/// Spectral norm of a general (rectangular) matrix.
double spectral_norm(const Matrix& a);

/// The deterministic Lanczos start vector: normalised ones plus a fixed
/// non-uniform perturbation.
Vector default_start_vector(Index dim);

// ---------------------------------------------------------------------------
// Lanczos

struct LanczosOptions {
  /// Stop when the Ritz residual ||A v - theta v|| <= tol * ||T||.
  double tol = 1e-12;
  /// Krylov dimension cap; 0 means the operator dimension.
  int max_iter = 0;
};

struct LanczosResult {
  double value = 0.0;
  Vector vector;
  int iterations = 0;
  double residual = 0.0;
};

/// y = A x for a symmetric operator A.
using MatVec = std::function<void(const Vector& x, Vector& y)>;

/// Largest eigenpair of a symmetric operator by Lanczos with full
/// reorthogonalisation. Holds its Krylov basis between calls so repeated
/// solves do not reallocate.
class LanczosSolver {
 public:
  LanczosResult largest(const MatVec& apply, Index dim, const Vector& start,
                        const LanczosOptions& opts = {});

 private:
  Matrix basis_;
  std::vector<double> alpha_;
  std::vector<double> beta_;
  Vector w_;
  Vector coeff_;
};

/// Largest eigenvalue of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta` (size n-1), and its unit eigenvector.
std::pair<double, Vector> tridiagonal_top_eigenpair(const std::vector<double>& alpha,
                                                    const std::vector<double>& beta,
                                                    std::size_t n);

}  // namespace rankwatch
