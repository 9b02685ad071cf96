#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rankwatch/error.hpp"
#include "rankwatch/harness.hpp"
#include "rankwatch/model.hpp"
#include "rankwatch/tracker.hpp"

using namespace rankwatch;

namespace {

StreamSample full(const Vector& x, std::int64_t t = 1) {
  StreamSample s;
  s.t = t;
  s.x = x;
  return s;
}

StreamSample masked(Vector x, const Mask& mask, std::int64_t t = 1) {
  for (Index i = 0; i < x.size(); ++i)
    if (!mask[static_cast<std::size_t>(i)]) x(i) = std::nan("");
  StreamSample s;
  s.t = t;
  s.x = std::move(x);
  s.mask = mask;
  return s;
}

double ortho_error(const Matrix& u) {
  return oracle::max_abs_diff(u.transpose() * u, Matrix::Identity(u.cols(), u.cols()));
}

ScenarioConfig grouse_scenario(std::uint64_t seed, std::optional<std::int64_t> kappa) {
  ScenarioConfig c;
  c.p = 100;
  c.s = 10;
  c.rho = 1.0;
  c.sigma0_sq = 0.01;
  c.kappa = kappa;
  c.missing_fraction = 0.3;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Schedule, Decay) {
  const StepSchedule s{0.1, 100.0};
  EXPECT_DOUBLE_EQ(s(0), 0.1);
  EXPECT_DOUBLE_EQ(s(100), 0.05);
  EXPECT_THROW((StepSchedule{0.0, 1.0}).validate(), Error);
  EXPECT_THROW((StepSchedule{0.1, 0.0}).validate(), Error);
}

TEST(GrouseState, InitialBasisOrthonormal) {
  const GrouseState st = make_grouse_state(30, 4, {}, 5);
  EXPECT_EQ(st.u.rows(), 30);
  EXPECT_EQ(st.u.cols(), 4);
  EXPECT_LE(ortho_error(st.u), 1e-12);
}

TEST(EstimateWeights, ExactRepresentation) {
  const GrouseState st = make_grouse_state(12, 3, {}, 1);
  Vector b(3);
  b << 0.5, -2.0, 1.25;
  const WeightEstimate w = estimate_weights(st, full(st.u * b));
  ASSERT_TRUE(w.ok);
  EXPECT_LE((w.beta - b).norm(), 1e-12);
  EXPECT_LE(w.residual.norm(), 1e-12);
}

TEST(EstimateWeights, OrthogonalSample) {
  const GrouseState st = make_grouse_state(12, 3, {}, 2);
  std::mt19937_64 gen(2);
  Vector x = oracle::random_gaussian(12, 1, gen).col(0);
  x -= st.u * (st.u.transpose() * x);
  const WeightEstimate w = estimate_weights(st, full(x));
  ASSERT_TRUE(w.ok);
  EXPECT_LE(w.beta.norm(), 1e-12);
  EXPECT_LE((w.residual - x).norm(), 1e-12);
}

TEST(EstimateWeights, FullObservationIsProjection) {
  std::mt19937_64 gen(3);
  const GrouseState st = make_grouse_state(20, 5, {}, 3);
  for (int i = 0; i < 20; ++i) {
    const Vector x = oracle::random_gaussian(20, 1, gen).col(0);
    const WeightEstimate w = estimate_weights(st, full(x));
    EXPECT_LE((w.beta - st.u.transpose() * x).cwiseAbs().maxCoeff(), 1e-12);
    // an all-true mask gives the same answer
    const WeightEstimate wm = estimate_weights(st, masked(x, Mask(20, true)));
    EXPECT_LE((wm.beta - w.beta).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(EstimateWeights, MaskedLeastSquares) {
  std::mt19937_64 gen(4);
  std::bernoulli_distribution keep(0.7);
  std::normal_distribution<double> noise(0.0, 0.1);
  // basis and weight scale of the tracking figure's post-change signal
  const SignalCovariance sig = make_signal_covariance(100, 10, 1.0, 4);
  GrouseState st = make_grouse_state(100, 10, {}, 4);
  st.u = sig.basis;
  for (int rep = 0; rep < 20; ++rep) {
    const Vector b = sig.scales.cwiseSqrt().cwiseProduct(oracle::random_gaussian(10, 1, gen).col(0));
    Vector x = st.u * b;
    for (Index i = 0; i < 100; ++i) x(i) += noise(gen);
    Mask mask(100);
    for (auto&& m : mask) m = keep(gen);
    const WeightEstimate w = estimate_weights(st, masked(x, mask));
    ASSERT_TRUE(w.ok);
    EXPECT_LE((w.beta - b).norm() / b.norm(), 0.1);

    // least-squares oracle on the observed rows
    std::vector<Index> rows;
    for (Index i = 0; i < 100; ++i)
      if (mask[static_cast<std::size_t>(i)]) rows.push_back(i);
    Matrix uo(static_cast<Index>(rows.size()), 10);
    Vector xo(static_cast<Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      uo.row(static_cast<Index>(k)) = st.u.row(rows[k]);
      xo(static_cast<Index>(k)) = x(rows[k]);
    }
    const Vector ref = uo.colPivHouseholderQr().solve(xo);
    EXPECT_LE((w.beta - ref).norm(), 1e-10 * std::max(1.0, ref.norm()));
    for (Index i = 0; i < 100; ++i) {
      if (mask[static_cast<std::size_t>(i)]) {
        EXPECT_NEAR(w.residual(i), x(i) - st.u.row(i).dot(w.beta), 1e-10);
      } else {
        EXPECT_EQ(w.residual(i), 0.0);
      }
    }
  }
}

TEST(EstimateWeights, TooFewObservedIsSkipped) {
  const GrouseState st = make_grouse_state(10, 4, {}, 5);
  Mask mask(10, false);
  mask[0] = mask[3] = mask[7] = true;
  EXPECT_FALSE(estimate_weights(st, masked(Vector::Ones(10), mask)).ok);
}

TEST(EstimateWeights, RankDeficientRowsSkipped) {
  GrouseState st = make_grouse_state(6, 2, {}, 6);
  st.u.setZero();
  st.u(0, 0) = 1.0;
  st.u(1, 1) = 1.0;
  Mask mask{false, false, true, true, true, true};
  EXPECT_FALSE(estimate_weights(st, masked(Vector::Ones(6), mask)).ok);
}

TEST(GrouseUpdate, NoOpCases) {
  const GrouseState st = make_grouse_state(12, 3, {}, 7);
  Vector b(3);
  b << 1, 2, 3;
  const GrouseState a = grouse_update(st, estimate_weights(st, full(st.u * b)));
  EXPECT_LE(oracle::max_abs_diff(a.u, st.u), 1e-12);

  std::mt19937_64 gen(7);
  Vector x = oracle::random_gaussian(12, 1, gen).col(0);
  x -= st.u * (st.u.transpose() * x);
  const GrouseState c = grouse_update(st, estimate_weights(st, full(x)));
  EXPECT_LE(oracle::max_abs_diff(c.u, st.u), 1e-12);
  EXPECT_EQ(c.t, st.t + 1);
}

TEST(GrouseUpdate, OrthonormalityAndRankPreserved) {
  const ScenarioConfig cfg = grouse_scenario(8, 0);
  StreamGenerator gen(cfg);
  GrouseState st = make_grouse_state(100, 10, {0.5, 100.0}, 8);
  for (int t = 0; t < 2000; ++t) {
    const WeightEstimate w = estimate_weights(st, gen.next());
    if (!w.ok) continue;
    st = grouse_update(std::move(st), w);
    ASSERT_LE(ortho_error(st.u), 1e-8) << t;
  }
  EXPECT_EQ(numerical_rank(SymMatrix::from_dense(st.u.transpose() * st.u)), 10);
}

TEST(GrouseUpdate, SmallStepReducesResidual) {
  std::mt19937_64 gen(9);
  for (int rep = 0; rep < 50; ++rep) {
    GrouseState st = make_grouse_state(15, 3, {1e-4, 1e12}, 100 + rep);
    const Vector x = oracle::random_gaussian(15, 1, gen).col(0);
    const StreamSample s = full(x);
    const WeightEstimate before = estimate_weights(st, s);
    const GrouseState next = grouse_update(st, before);
    const WeightEstimate after = estimate_weights(next, s);
    EXPECT_LE(after.residual.norm(), before.residual.norm() + 1e-15) << rep;
  }
}

TEST(GrouseUpdate, ConvergesAtTrackingFigureSettings) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    StreamGenerator gen(grouse_scenario(seed, 0));
    GrouseState st = make_grouse_state(100, 10, {}, 50 + seed);
    for (int t = 0; t < 2000; ++t) {
      const WeightEstimate w = estimate_weights(st, gen.next());
      if (w.ok) st = grouse_update(std::move(st), w);
    }
    EXPECT_LT(subspace_distance(st.u, gen.signal().basis), 0.1) << seed;
  }
}

TEST(SubspaceDistance, Basics) {
  std::mt19937_64 gen(10);
  const Matrix u = oracle::random_orthonormal(10, 3, gen);
  EXPECT_NEAR(subspace_distance(u, u), 0.0, 1e-12);
  Matrix v = oracle::random_gaussian(10, 1, gen);
  v -= u * (u.transpose() * v);
  v.normalize();
  EXPECT_NEAR(subspace_distance(u, v), 1.0, 1e-12);
}

TEST(Tracker, StatisticInvariants) {
  StreamGenerator gen(grouse_scenario(11, 100));
  TrackerConfig cfg;
  cfg.s = 10;
  cfg.keep_beta = true;
  SubspaceTracker tr(100, cfg);
  for (int t = 0; t < 400; ++t) {
    const TrackerStats st = tr.push(gen.next());
    if (st.skipped) continue;
    const double norm = std::sqrt(st.stat_norm);
    EXPECT_LE(st.stat_max, norm + 1e-12);
    EXPECT_LE(norm, std::sqrt(10.0) * st.stat_max + 1e-12);
    EXPECT_NEAR(st.stat_norm, st.beta.squaredNorm(), 1e-12);
    EXPECT_NEAR(st.stat_max, st.beta.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Tracker, FullRankIsIsometry) {
  ScenarioConfig c;
  c.p = 6;
  c.horizon = 50;
  c.seed = 12;
  TrackerConfig cfg;
  cfg.s = 6;
  const TrackerReport r = run_tracker(generate_stream(c), cfg);
  const Stream s = generate_stream(c);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(r.trace[i].stat_norm, s[i].x.squaredNorm(), 1e-10);
}

TEST(Tracker, SkippedSamplesAreGaps) {
  Stream s;
  for (int t = 1; t <= 5; ++t) {
    Mask m(8, t != 3);
    if (t == 3) m[0] = true;
    s.push_back(masked(Vector::Ones(8), m, t));
  }
  TrackerConfig cfg;
  cfg.s = 2;
  const TrackerReport r = run_tracker(s, cfg);
  ASSERT_EQ(r.trace.size(), 5u);
  EXPECT_TRUE(r.trace[2].skipped);
  EXPECT_TRUE(std::isnan(r.trace[2].stat_norm));
  EXPECT_EQ(r.trace[2].observed_count, 1);
  EXPECT_FALSE(r.trace[3].skipped);
}

TEST(Tracker, PersistenceRule) {
  // s = p and full observation: stat_norm = ||x||^2 exactly
  Stream s;
  const std::vector<double> sq{1, 9, 9, 1, 9, 9, 9, 1, 1};
  for (std::size_t i = 0; i < sq.size(); ++i)
    s.push_back(full(Vector::Constant(1, std::sqrt(sq[i])), static_cast<std::int64_t>(i + 1)));
  TrackerConfig cfg;
  cfg.s = 1;
  AlarmRule rule;
  rule.threshold = 4.0;
  rule.persistence = 3;
  cfg.alarm = rule;
  EXPECT_EQ(run_tracker(s, cfg).alarm_time, std::optional<std::int64_t>(7));
  cfg.alarm->persistence = 1;
  EXPECT_EQ(run_tracker(s, cfg).alarm_time, std::optional<std::int64_t>(2));
  cfg.alarm->persistence = 4;
  EXPECT_FALSE(run_tracker(s, cfg).alarm_time.has_value());
}

TEST(Tracker, CusumRule) {
  Stream s;
  const std::vector<double> sq{1, 3, 3, 0, 3};
  for (std::size_t i = 0; i < sq.size(); ++i)
    s.push_back(full(Vector::Constant(1, std::sqrt(sq[i])), static_cast<std::int64_t>(i + 1)));
  TrackerConfig cfg;
  cfg.s = 1;
  AlarmRule rule;
  rule.kind = AlarmRule::Kind::kCusum;
  rule.drift = 1.0;
  rule.threshold = 3.9;
  cfg.alarm = rule;
  // S: 0, 2, 4 -> alarm at t=3
  EXPECT_NEAR(run_tracker(s, cfg).trace[2].stat_norm, 3.0, 1e-12);
  EXPECT_EQ(run_tracker(s, cfg).alarm_time, std::optional<std::int64_t>(3));
}

TEST(Tracker, StopAtAlarm) {
  Stream s;
  for (int t = 1; t <= 10; ++t) s.push_back(full(Vector::Constant(1, 3.0), t));
  TrackerConfig cfg;
  cfg.s = 1;
  cfg.stop_at_alarm = true;
  AlarmRule rule;
  rule.threshold = 1.0;
  rule.persistence = 2;
  cfg.alarm = rule;
  const TrackerReport r = run_tracker(s, cfg);
  EXPECT_EQ(r.alarm_time, std::optional<std::int64_t>(2));
  EXPECT_EQ(r.trace.size(), 2u);
}

TEST(Tracker, CalibratedNullRunHasNoAlarm) {
  TrackerRunSpec spec;
  spec.scenario = grouse_scenario(13, std::nullopt);
  spec.tracker.s = 10;
  AlarmRule rule;
  rule.persistence = 5;
  spec.tracker.alarm = rule;
  spec.horizon = 1000;
  spec.replicates = 40;
  spec.seed = 14;
  const TrackerCalibration cal = calibrate_tracker_threshold(spec, 0.99);

  TrackerRunSpec run = spec;
  run.horizon = 5000;
  run.replicates = 1;
  run.seed = 15;
  run.tracker.alarm->threshold = cal.threshold * 1.5;
  const std::vector<TrackerReport> reps = run_tracker_replicates(run);
  EXPECT_FALSE(reps[0].alarm_time.has_value());
}

TEST(Tracker, DetectsChangeAtTrackingFigureSettings) {
  TrackerRunSpec spec;
  spec.scenario = grouse_scenario(16, std::nullopt);
  spec.tracker.s = 10;
  AlarmRule rule;
  spec.tracker.alarm = rule;
  spec.horizon = 500;
  spec.replicates = 30;
  spec.seed = 17;
  const TrackerCalibration cal = calibrate_tracker_threshold(spec, 0.99);

  TrackerRunSpec run = spec;
  run.scenario.kappa = 500;
  run.horizon = 1000;
  run.replicates = 10;
  run.seed = 18;
  run.tracker.alarm->threshold = cal.threshold;
  int hits = 0;
  for (const TrackerReport& r : run_tracker_replicates(run))
    if (r.alarm_time && *r.alarm_time > 500 && *r.alarm_time <= 700) ++hits;
  EXPECT_GE(hits, 9);
}

TEST(Tracker, ReplicatesIndependentOfWorkers) {
  TrackerRunSpec spec;
  spec.scenario = grouse_scenario(19, 50);
  spec.tracker.s = 10;
  spec.horizon = 100;
  spec.replicates = 6;
  spec.seed = 20;
  spec.workers = 1;
  const auto a = run_tracker_replicates(spec);
  spec.workers = 3;
  const auto b = run_tracker_replicates(spec);
  for (std::size_t r = 0; r < a.size(); ++r) {
    for (std::size_t i = 0; i < a[r].trace.size(); ++i) {
      const double x = a[r].trace[i].stat_norm, y = b[r].trace[i].stat_norm;
      ASSERT_TRUE(x == y || (std::isnan(x) && std::isnan(y)));
    }
  }
}
