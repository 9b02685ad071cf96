#pragma once

// Random orthonormal sketches y = A^T x.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rankwatch/model.hpp"
#include "rankwatch/numerics.hpp"

namespace rankwatch {

struct SketchOperator {
  Index p = 0;
  Index m = 0;
  Matrix a;  // p x m, orthonormal columns
  std::uint64_t seed = 0;
};

/// A = orthonormalize(G), G p x m iid N(0, 1) drawn column by column from
/// Rng(seed). Since column j of A only depends on columns 0..j of G, the
/// operators for one seed are nested: make(p, m1, s).a equals the first m1
/// columns of make(p, m2, s).a for m1 <= m2.
SketchOperator make_sketch_operator(Index p, Index m, std::uint64_t seed);

/// First m columns of a wider operator.
SketchOperator sketch_prefix(const SketchOperator& op, Index m);

Vector sketch_sample(const SketchOperator& op, const Vector& x);

/// Sketches every sample. Masked samples are rejected (kStream).
Stream sketch_stream(const SketchOperator& op, const Stream& stream);

struct CovariancePair {
  SymMatrix lhs;  // covariance of the sketched samples
  SymMatrix rhs;  // A^T (covariance of the raw samples) A
};

/// Both sides of the sketched covariance identity over a set of samples
/// (columns of `samples`, p x n, n >= 1).
CovariancePair sketched_covariance_identity(const SketchOperator& op, const Matrix& samples);

struct RankPair {
  int raw = 0;
  int sketched = 0;
};

RankPair rank_preservation_check(const SketchOperator& op, const SignalCovariance& signal,
                                 double rel_tol = 1e-8);

/// ||A^T U||, spectral norm of the m x s matrix. U must be orthonormal.
double subspace_alignment(const SketchOperator& op, const Matrix& basis);

/// lambda_1(A^T Sigma A).
double sketched_snr(const SketchOperator& op, const SignalCovariance& signal);

/// Operator files hold m rows of p values (row i = a_i). Loading checks
/// A^T A = I to 1e-10 (kInvalidInput otherwise).
SketchOperator load_sketch_operator(const std::filesystem::path& path);
void save_sketch_operator(const SketchOperator& op, const std::filesystem::path& path);

}  // namespace rankwatch
