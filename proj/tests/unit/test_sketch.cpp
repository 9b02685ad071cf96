#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "rankwatch/error.hpp"
#include "rankwatch/model.hpp"
#include "rankwatch/sketch.hpp"
#include "rankwatch/stats.hpp"

using namespace rankwatch;

TEST(SketchOperator, Orthonormal) {
  for (Index m : {1, 5, 10}) {
    const SketchOperator op = make_sketch_operator(10, m, 3);
    EXPECT_EQ(op.p, 10);
    EXPECT_EQ(op.m, m);
    EXPECT_LE(oracle::max_abs_diff(op.a.transpose() * op.a, Matrix::Identity(m, m)), 1e-10);
  }
}

TEST(SketchOperator, SquareIsOrthogonal) {
  const SketchOperator op = make_sketch_operator(12, 12, 4);
  EXPECT_LE(oracle::max_abs_diff(op.a * op.a.transpose(), Matrix::Identity(12, 12)), 1e-10);
}

TEST(SketchOperator, Deterministic) {
  const SketchOperator a = make_sketch_operator(100, 10, 77), b = make_sketch_operator(100, 10, 77);
  EXPECT_TRUE(a.a == b.a);
  EXPECT_FALSE(make_sketch_operator(100, 10, 78).a == a.a);
}

TEST(SketchOperator, TooWideRejected) {
  try {
    make_sketch_operator(5, 6, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidConfig);
  }
}

TEST(SketchOperator, NestedPrefixes) {
  const SketchOperator wide = make_sketch_operator(30, 20, 5);
  for (Index m : {1, 4, 13}) {
    const SketchOperator narrow = make_sketch_operator(30, m, 5);
    EXPECT_LE(oracle::max_abs_diff(narrow.a, wide.a.leftCols(m)), 1e-14);
    EXPECT_TRUE(sketch_prefix(wide, m).a == wide.a.leftCols(m));
  }
}

TEST(SketchOperator, Contraction) {
  std::mt19937_64 gen(6);
  const SketchOperator op = make_sketch_operator(20, 7, 6);
  for (int i = 0; i < 100; ++i) {
    Vector u = oracle::random_gaussian(20, 1, gen).col(0);
    u.normalize();
    EXPECT_LE(sketch_sample(op, u).norm(), 1.0 + 1e-12);
  }
}

TEST(SketchSample, NullSpaceMapsToZero) {
  const SketchOperator op = make_sketch_operator(8, 3, 7);
  std::mt19937_64 gen(7);
  Vector x = oracle::random_gaussian(8, 1, gen).col(0);
  x -= op.a * (op.a.transpose() * x);
  EXPECT_LE(sketch_sample(op, x).norm(), 1e-12);
}

TEST(SketchSample, IsometryWhenSquare) {
  const SketchOperator op = make_sketch_operator(9, 9, 8);
  std::mt19937_64 gen(8);
  const Vector x = oracle::random_gaussian(9, 1, gen).col(0);
  EXPECT_NEAR(sketch_sample(op, x).norm(), x.norm(), 1e-10);
}

TEST(SketchSample, MatchesExplicitProduct) {
  const SketchOperator op = make_sketch_operator(15, 4, 9);
  std::mt19937_64 gen(9);
  const Vector x = oracle::random_gaussian(15, 1, gen).col(0);
  const Vector y = sketch_sample(op, x);
  for (Index j = 0; j < 4; ++j) {
    double acc = 0.0;
    for (Index i = 0; i < 15; ++i) acc += op.a(i, j) * x(i);
    EXPECT_NEAR(y(j), acc, 1e-12);
  }
}

TEST(SketchSample, DimensionMismatch) {
  const SketchOperator op = make_sketch_operator(5, 2, 1);
  EXPECT_THROW(sketch_sample(op, Vector::Ones(4)), Error);
}

TEST(SketchStream, RejectsMasks) {
  ScenarioConfig cfg;
  cfg.p = 5;
  cfg.horizon = 20;
  cfg.missing_fraction = 0.3;
  cfg.seed = 1;
  const SketchOperator op = make_sketch_operator(5, 2, 1);
  EXPECT_THROW(sketch_stream(op, generate_stream(cfg)), Error);
  cfg.missing_fraction = 0.0;
  const Stream y = sketch_stream(op, generate_stream(cfg));
  ASSERT_EQ(y.size(), 20u);
  EXPECT_EQ(y.front().dim(), 2);
  EXPECT_EQ(y.back().t, 20);
}

TEST(CovarianceIdentity, SingleSample) {
  const SketchOperator op = make_sketch_operator(6, 3, 10);
  std::mt19937_64 gen(10);
  const Matrix x = oracle::random_gaussian(6, 1, gen);
  const CovariancePair c = sketched_covariance_identity(op, x);
  const Vector y = op.a.transpose() * x.col(0);
  EXPECT_LE(oracle::max_abs_diff(c.lhs.dense(), y * y.transpose()), 1e-14);
  EXPECT_LE(oracle::max_abs_diff(c.lhs.dense(), c.rhs.dense()), 1e-14);
}

TEST(CovarianceIdentity, FiftySamples) {
  const SketchOperator op = make_sketch_operator(20, 5, 11);
  std::mt19937_64 gen(11);
  const Matrix x = oracle::random_gaussian(20, 50, gen);
  const CovariancePair c = sketched_covariance_identity(op, x);
  EXPECT_LE(oracle::max_abs_diff(c.lhs.dense(), c.rhs.dense()), 1e-10);
  const Matrix direct = op.a.transpose() * oracle::direct_covariance(x, 0, 50) * op.a;
  EXPECT_LE(oracle::max_abs_diff(c.rhs.dense(), direct), 1e-10);
}

TEST(CovarianceIdentity, ZeroSamples) {
  const SketchOperator op = make_sketch_operator(6, 2, 12);
  const CovariancePair c = sketched_covariance_identity(op, Matrix::Zero(6, 17));
  EXPECT_EQ(c.lhs.max_abs(), 0.0);
  EXPECT_EQ(c.rhs.max_abs(), 0.0);
}

TEST(RankPreservation, MinOfSketchAndSignalRank) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SignalCovariance sig = make_signal_covariance(10, 2, 1.0, seed);
    const RankPair r = rank_preservation_check(make_sketch_operator(10, 3, 1000 + seed), sig);
    ASSERT_EQ(r.raw, 2);
    ASSERT_EQ(r.sketched, 2);
  }
  const SignalCovariance sig = make_signal_covariance(10, 2, 1.0, 1);
  EXPECT_EQ(rank_preservation_check(make_sketch_operator(10, 1, 2), sig).sketched, 1);
  const SignalCovariance zero = make_signal_covariance(10, 0, 1.0, 1);
  EXPECT_EQ(rank_preservation_check(make_sketch_operator(10, 4, 2), zero).sketched, 0);
}

TEST(Alignment, ContainedSubspace) {
  const SketchOperator op = make_sketch_operator(12, 5, 13);
  const Matrix u = op.a.leftCols(2);
  EXPECT_NEAR(subspace_alignment(op, u), 1.0, 1e-12);
}

TEST(Alignment, NonDecreasingUnderNesting) {
  std::mt19937_64 gen(14);
  const Matrix u = oracle::random_orthonormal(40, 3, gen);
  const SketchOperator wide = make_sketch_operator(40, 40, 14);
  double prev = 0.0;
  for (Index m = 1; m <= 40; ++m) {
    const double a = subspace_alignment(sketch_prefix(wide, m), u);
    EXPECT_GE(a, prev - 1e-12);
    prev = a;
  }
  EXPECT_NEAR(prev, 1.0, 1e-10);
}

TEST(Alignment, SquaredNormMeanIsRatio) {
  const Index p = 100, m = 50;
  Vector u = Vector::Zero(p);
  u(0) = 1.0;
  std::vector<double> sq;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const double a = subspace_alignment(make_sketch_operator(p, m, seed), u);
    sq.push_back(a * a);
  }
  const Summary s = summarize(sq);
  EXPECT_NEAR(s.mean, 0.5, 3.0 * s.std_err);
  const double ks = ks_statistic(sq, [](double x) { return beta_cdf(x, 25.0, 25.0); });
  EXPECT_LT(ks, ks_critical_value(sq.size(), 0.01));
}

TEST(SketchedSnr, SquareEqualsNorm) {
  const SignalCovariance sig = make_signal_covariance(15, 3, 2.0, 15);
  const SketchOperator op = make_sketch_operator(15, 15, 16);
  EXPECT_NEAR(sketched_snr(op, sig), sig.spectral_norm(), 1e-10 * sig.spectral_norm());
}

TEST(SketchedSnr, InterlacingAndNestedMonotone) {
  const SignalCovariance sig = make_signal_covariance(100, 3, 1.0, 17);
  const SketchOperator wide = make_sketch_operator(100, 64, 18);
  double prev = 0.0;
  for (Index m : {2, 4, 8, 16, 32, 64}) {
    const double v = sketched_snr(sketch_prefix(wide, m), sig);
    EXPECT_LE(v, sig.spectral_norm() * (1 + 1e-12));
    EXPECT_GE(v, prev - 1e-12);
    prev = v;
  }
  std::mt19937_64 gen(19);
  for (int rep = 0; rep < 50; ++rep) {
    const SignalCovariance s = make_signal_covariance(20, 1 + rep % 5, 1.0, 500 + rep);
    const double top = sketched_snr(make_sketch_operator(20, 1 + rep % 10, 900 + rep), s);
    EXPECT_LE(top, s.spectral_norm() * (1 + 1e-12));
  }
  EXPECT_EQ(sketched_snr(wide, make_signal_covariance(100, 0, 1.0, 1)), 0.0);
}

TEST(SketchIo, RoundTripAndValidation) {
  const SketchOperator op = make_sketch_operator(9, 4, 20);
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "rankwatch_op.csv";
  save_sketch_operator(op, path);
  const SketchOperator back = load_sketch_operator(path);
  EXPECT_EQ(back.p, 9);
  EXPECT_EQ(back.m, 4);
  EXPECT_TRUE(back.a == op.a);

  const auto bad = dir / "rankwatch_op_bad.csv";
  std::ofstream(bad) << "1,0,0\n1,0,0\n";
  EXPECT_THROW(load_sketch_operator(bad), Error);
  const auto empty = dir / "rankwatch_op_empty.csv";
  std::ofstream(empty) << "";
  EXPECT_THROW(load_sketch_operator(empty), Error);
  for (const auto& f : {path, bad, empty}) std::filesystem::remove(f);
}
