#include "rankwatch/sketch.hpp"

#include <string>

#include "rankwatch/error.hpp"
#include "rankwatch/random.hpp"
#include "rankwatch/stream_io.hpp"

namespace rankwatch {

namespace {

constexpr double kOrthoTol = 1e-10;

void check_operator(const SketchOperator& op) {
  if (op.a.rows() != op.p || op.a.cols() != op.m) {
    throw Error(ErrorKind::kInvalidInput, "sketch operator shape does not match (p, m)");
  }
  const Matrix gram = op.a.transpose() * op.a;
  const double dev = (gram - Matrix::Identity(op.m, op.m)).cwiseAbs().maxCoeff();
  if (!(dev <= kOrthoTol)) {
    throw Error(ErrorKind::kInvalidInput,
                "sketch operator columns are not orthonormal (max deviation " +
                    format_double(dev) + ")");
  }
}

}  // namespace

SketchOperator make_sketch_operator(Index p, Index m, std::uint64_t seed) {
  if (p < 1 || m < 1) throw Error(ErrorKind::kInvalidConfig, "sketch needs p >= 1 and m >= 1");
  if (m > p) {
    throw Error(ErrorKind::kInvalidConfig,
                "sketch dimension " + std::to_string(m) + " exceeds p = " + std::to_string(p));
  }
  Rng rng(seed);
  return {p, m, orthonormalize(rng.normal_matrix(p, m)), seed};
}

SketchOperator sketch_prefix(const SketchOperator& op, Index m) {
  if (m < 1 || m > op.m) throw Error(ErrorKind::kInvalidConfig, "sketch prefix out of range");
  return {op.p, m, op.a.leftCols(m), op.seed};
}

Vector sketch_sample(const SketchOperator& op, const Vector& x) {
  if (x.size() != op.p) {
    throw Error(ErrorKind::kStream, "sample dimension " + std::to_string(x.size()) +
                                        " does not match sketch input dimension " +
                                        std::to_string(op.p));
  }
  return op.a.transpose() * x;
}

Stream sketch_stream(const SketchOperator& op, const Stream& stream) {
  Stream out;
  out.reserve(stream.size());
  for (const StreamSample& s : stream) {
    if (!s.fully_observed()) {
      throw Error(ErrorKind::kStream,
                  "sample at t=" + std::to_string(s.t) + " has missing entries; cannot sketch");
    }
    out.push_back({s.t, sketch_sample(op, s.x), std::nullopt});
  }
  return out;
}

CovariancePair sketched_covariance_identity(const SketchOperator& op, const Matrix& samples) {
  if (samples.cols() < 1) throw Error(ErrorKind::kInvalidInput, "need at least one sample");
  if (samples.rows() != op.p) throw Error(ErrorKind::kInvalidInput, "sample dimension mismatch");
  const double n = static_cast<double>(samples.cols());
  const Matrix y = op.a.transpose() * samples;
  const SymMatrix raw = SymMatrix::from_dense(samples * samples.transpose() / n);
  return {SymMatrix::from_dense(y * y.transpose() / n), SymMatrix::congruence(op.a, raw)};
}

RankPair rank_preservation_check(const SketchOperator& op, const SignalCovariance& signal,
                                 double rel_tol) {
  if (signal.sigma.dim() != op.p) throw Error(ErrorKind::kInvalidInput, "signal dimension mismatch");
  return {numerical_rank(signal.sigma, rel_tol),
          numerical_rank(SymMatrix::congruence(op.a, signal.sigma), rel_tol)};
}

double subspace_alignment(const SketchOperator& op, const Matrix& basis) {
  if (basis.rows() != op.p) throw Error(ErrorKind::kInvalidInput, "basis dimension mismatch");
  return spectral_norm(op.a.transpose() * basis);
}

double sketched_snr(const SketchOperator& op, const SignalCovariance& signal) {
  if (signal.sigma.dim() != op.p) throw Error(ErrorKind::kInvalidInput, "signal dimension mismatch");
  if (signal.rank() == 0) return 0.0;
  return largest_eigenvalue(SymMatrix::congruence(op.a, signal.sigma));
}

SketchOperator load_sketch_operator(const std::filesystem::path& path) {
  const Matrix rows = read_matrix_rows(path);
  if (rows.size() == 0) throw Error(ErrorKind::kInvalidInput, "sketch operator file is empty");
  SketchOperator op{rows.cols(), rows.rows(), rows.transpose(), 0};
  if (op.m > op.p) throw Error(ErrorKind::kInvalidInput, "sketch operator has more rows than columns");
  check_operator(op);
  return op;
}

void save_sketch_operator(const SketchOperator& op, const std::filesystem::path& path) {
  write_matrix_rows(op.a.transpose(), path,
                    "sketch p=" + std::to_string(op.p) + " m=" + std::to_string(op.m) +
                        " seed=" + std::to_string(op.seed));
}

}  // namespace rankwatch
