#include "rankwatch/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "rankwatch/analysis.hpp"
#include "rankwatch/error.hpp"
#include "rankwatch/random.hpp"
#include "rankwatch/stats.hpp"
#include "rankwatch/stream_io.hpp"

namespace rankwatch {

namespace {

constexpr int kMaxExpansions = 16;

/// One replicate stream feeding one detector, advanced on demand. Keeps the
/// record values of the running maximum of the statistic so first passage
/// times below the current maximum can be read off without rerunning.
class ReplicateRun {
 public:
  ReplicateRun(const Experiment& e, const SignalCovariance& signal, std::uint64_t seed)
      : gen_(e.scenario, signal, seed),
        sketch_(e.sketch ? &*e.sketch : nullptr),
        detector_(e.detector_dim(), e.detector) {}

  /// Runs until the statistic reaches b or t == limit; true when it reached b.
  bool advance(double b, std::int64_t limit) {
    if (max_ >= b) return true;
    while (t_ < limit) {
      const StreamSample sample = gen_.next();
      const TraceEntry entry =
          sketch_ ? detector_.push(sketch_->a.transpose() * sample.x) : detector_.push(sample.x);
      ++t_;
      if (entry.value > max_) {
        max_ = entry.value;
        records_.push_back({max_, t_});
      }
      if (entry.value >= b) return true;
    }
    return false;
  }

  std::optional<std::int64_t> first_passage(double b) const {
    if (!(max_ >= b)) return std::nullopt;
    const auto it = std::lower_bound(records_.begin(), records_.end(), b,
                                     [](const Record& r, double v) { return r.value < v; });
    return it->t;
  }

  std::int64_t t() const noexcept { return t_; }

 private:
  struct Record {
    double value;
    std::int64_t t;
  };

  StreamGenerator gen_;
  const SketchOperator* sketch_;
  MaxEigDetector detector_;
  std::int64_t t_ = 0;
  double max_ = -std::numeric_limits<double>::infinity();
  std::vector<Record> records_;
};

RunLengthEstimate summarize_times(std::vector<std::int64_t> times, std::size_t censored,
                                  std::int64_t cap) {
  RunLengthEstimate out;
  std::vector<double> values(times.begin(), times.end());
  const Summary s = summarize(values);
  out.mean = s.mean;
  out.std_err = s.std_err;
  out.replicates = times.size();
  out.censored = censored;
  out.cap = cap;
  out.times = std::move(times);
  return out;
}

/// Replicates of a calibration, advanced lazily in fixed chunks.
class ReplicatePool {
 public:
  struct Eval {
    double mean = 0.0;
    bool exact = false;  // false: mean is a lower bound that reached stop_above
  };

  ReplicatePool(const Experiment& e, std::size_t replicates, std::uint64_t seed, std::int64_t cap,
                std::int64_t chunk, int workers)
      : cap_(cap), chunk_(chunk), workers_(workers) {
    const SignalCovariance signal = scenario_signal(e.scenario);
    runs_.reserve(replicates);
    for (std::size_t r = 0; r < replicates; ++r) runs_.emplace_back(e, signal, child_seed(seed, r));
  }

  Eval evaluate(double b, double stop_above) {
    std::vector<std::size_t> pending;
    for (;;) {
      pending.clear();
      double sum = 0.0;
      for (std::size_t r = 0; r < runs_.size(); ++r) {
        if (const auto fp = runs_[r].first_passage(b)) {
          sum += static_cast<double>(*fp);
        } else {
          sum += static_cast<double>(runs_[r].t());
          if (runs_[r].t() < cap_) pending.push_back(r);
        }
      }
      const double mean = sum / static_cast<double>(runs_.size());
      if (pending.empty()) return {mean, true};
      if (mean >= stop_above) return {mean, false};
      parallel_for(pending.size(), workers_, [&](std::size_t i) {
        ReplicateRun& run = runs_[pending[i]];
        run.advance(b, std::min(run.t() + chunk_, cap_));
      });
    }
  }

  RunLengthEstimate exact(double b) {
    evaluate(b, std::numeric_limits<double>::infinity());
    std::vector<std::int64_t> times;
    std::size_t censored = 0;
    for (const ReplicateRun& run : runs_) {
      const auto fp = run.first_passage(b);
      times.push_back(fp ? *fp : cap_);
      if (!fp) ++censored;
    }
    return summarize_times(std::move(times), censored, cap_);
  }

  std::int64_t simulated_steps() const {
    std::int64_t total = 0;
    for (const ReplicateRun& run : runs_) total += run.t();
    return total;
  }

 private:
  std::vector<ReplicateRun> runs_;
  std::int64_t cap_;
  std::int64_t chunk_;
  int workers_;
};

}  // namespace

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t k = 0; k < threads; ++k) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(n);
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Index Experiment::detector_dim() const { return sketch ? sketch->m : scenario.p; }

void Experiment::validate() const {
  scenario.validate();
  detector.validate();
  if (scenario.missing_fraction > 0.0) {
    throw Error(ErrorKind::kInvalidConfig, "the max-eigenvalue detector needs fully observed samples");
  }
  if (sketch && sketch->p != scenario.p) {
    throw Error(ErrorKind::kInvalidConfig, "sketch input dimension does not match the scenario");
  }
}

RunLengthEstimate estimate_run_length(const Experiment& e, std::size_t replicates,
                                      std::uint64_t seed, std::int64_t cap, int workers) {
  e.validate();
  if (replicates < 1) throw Error(ErrorKind::kInvalidConfig, "need at least one replicate");
  if (cap < 1) throw Error(ErrorKind::kInvalidConfig, "cap must be >= 1");
  const SignalCovariance signal = scenario_signal(e.scenario);
  std::vector<std::int64_t> times(replicates);
  std::vector<char> stopped(replicates, 0);
  parallel_for(replicates, workers, [&](std::size_t r) {
    ReplicateRun run(e, signal, child_seed(seed, r));
    stopped[r] = run.advance(e.detector.threshold, cap) ? 1 : 0;
    times[r] = run.t();
  });
  const auto censored = static_cast<std::size_t>(std::count(stopped.begin(), stopped.end(), 0));
  return summarize_times(std::move(times), censored, cap);
}

RunLengthEstimate estimate_arl(const Experiment& e, std::size_t replicates, std::uint64_t seed,
                               std::int64_t cap, int workers) {
  if (e.scenario.kappa) throw Error(ErrorKind::kInvalidConfig, "ARL estimation needs a null scenario");
  return estimate_run_length(e, replicates, seed, cap, workers);
}

RunLengthEstimate estimate_edd(const Experiment& e, std::size_t replicates, std::uint64_t seed,
                               std::int64_t cap, int workers) {
  if (!e.scenario.kappa || *e.scenario.kappa != 0) {
    throw Error(ErrorKind::kInvalidConfig, "delay estimation needs a change at time zero");
  }
  return estimate_run_length(e, replicates, seed, cap, workers);
}

void CalibrationSpec::validate() const {
  experiment.validate();
  if (experiment.scenario.kappa) throw Error(ErrorKind::kInvalidConfig, "calibration needs a null scenario");
  if (!(target_arl >= 1.0) || !std::isfinite(target_arl)) {
    throw Error(ErrorKind::kInvalidConfig, "target ARL must be finite and >= 1");
  }
  if (replicates < 100) throw Error(ErrorKind::kInvalidConfig, "calibration needs at least 100 replicates");
  if (!(b_lo < b_hi) || !std::isfinite(b_lo) || !std::isfinite(b_hi) || b_lo < 0.0) {
    throw Error(ErrorKind::kInvalidConfig, "threshold bracket must satisfy 0 <= b_lo < b_hi");
  }
  if (!(tolerance > 0.0 && tolerance < 1.0)) throw Error(ErrorKind::kInvalidConfig, "tolerance must lie in (0, 1)");
  if (max_bisections < 0) throw Error(ErrorKind::kInvalidConfig, "max_bisections must be >= 0");
  if (!(cap_factor >= 1.0)) throw Error(ErrorKind::kInvalidConfig, "cap factor must be >= 1");
}

CalibrationResult calibrate_threshold(const CalibrationSpec& spec) {
  spec.validate();
  const double target = spec.target_arl;
  const auto cap = static_cast<std::int64_t>(std::ceil(spec.cap_factor * target));
  const std::int64_t chunk = std::max<std::int64_t>(64, static_cast<std::int64_t>(target / 20.0));
  ReplicatePool pool(spec.experiment, spec.replicates, spec.seed, cap, chunk, spec.workers);

  CalibrationResult out;
  double lo = spec.b_lo;
  double hi = spec.b_hi;

  const auto lo_eval = pool.evaluate(lo, target);
  if (lo_eval.mean >= target) {
    throw Error(ErrorKind::kBracket, "ARL at b_lo = " + format_double(lo) + " is already " +
                                         format_double(lo_eval.mean) + " >= target " +
                                         format_double(target));
  }
  auto hi_eval = pool.evaluate(hi, target);
  for (int k = 0; hi_eval.mean < target; ++k) {
    if (!spec.expand_upper || k >= kMaxExpansions) {
      throw Error(ErrorKind::kBracket, "ARL at b_hi = " + format_double(hi) + " is only " +
                                           format_double(hi_eval.mean) + " < target " +
                                           format_double(target) + " (ARL at b_lo = " +
                                           format_double(lo_eval.mean) + ")");
    }
    lo = hi;
    hi *= 2.0;
    hi_eval = pool.evaluate(hi, target);
  }

  const double band_hi = target * (1.0 + spec.tolerance);
  const double band_lo = target * (1.0 - spec.tolerance);
  std::optional<double> accepted;
  for (int i = 0; i < spec.max_bisections; ++i) {
    const double mid = 0.5 * (lo + hi);
    const auto ev = pool.evaluate(mid, band_hi);
    ++out.bisections;
    if (ev.exact && ev.mean >= band_lo && ev.mean <= band_hi) {
      accepted = mid;
      break;
    }
    if (ev.mean >= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }

  out.converged = accepted.has_value();
  out.threshold = accepted ? *accepted : 0.5 * (lo + hi);
  const RunLengthEstimate final_est = pool.exact(out.threshold);
  out.achieved_arl = final_est.mean;
  out.std_err = final_est.std_err;
  out.censored = final_est.censored;
  out.b_lo = lo;
  out.b_hi = hi;
  out.simulated_steps = pool.simulated_steps();
  return out;
}

void SweepSpec::validate() const {
  scenario.validate();
  if (window < 2 || stride < 1 || stride >= window) {
    throw Error(ErrorKind::kInvalidConfig, "need window >= 2 and 1 <= stride < window");
  }
  if (drift && !(*drift >= 0.0)) throw Error(ErrorKind::kInvalidConfig, "drift must be >= 0");
  if (sketch_dims.empty() && snr_grid.empty()) {
    throw Error(ErrorKind::kInvalidConfig, "sweep needs sketch dimensions or an SNR grid");
  }
  for (Index m : sketch_dims) {
    if (m < 1 || m > scenario.p) throw Error(ErrorKind::kInvalidConfig, "sketch dimension must lie in [1, p]");
  }
  for (double x : snr_grid) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw Error(ErrorKind::kInvalidConfig, "SNR values must be >= 0");
  }
  if (sketch_dims.empty() && (scenario.s < 1 || !(scenario.rho > 0.0))) {
    throw Error(ErrorKind::kInvalidConfig, "an SNR sweep needs a nonzero signal (s >= 1, rho > 0)");
  }
  if (threshold && !(*threshold >= 0.0)) throw Error(ErrorKind::kInvalidConfig, "threshold must be >= 0");
  if (edd_replicates < 1) throw Error(ErrorKind::kInvalidConfig, "need at least one delay replicate");
  if (edd_cap < 1) throw Error(ErrorKind::kInvalidConfig, "delay cap must be >= 1");
}

namespace {

struct Calibrated {
  double threshold = 0.0;
  double arl = std::numeric_limits<double>::quiet_NaN();
  double arl_std_err = std::numeric_limits<double>::quiet_NaN();
  std::size_t censored = 0;
  bool converged = true;
};

Calibrated threshold_for(const SweepSpec& spec, Experiment null_experiment) {
  if (spec.threshold) return {*spec.threshold};
  CalibrationSpec cs;
  cs.target_arl = spec.target_arl;
  null_experiment.scenario.kappa.reset();
  cs.experiment = std::move(null_experiment);
  cs.replicates = spec.calibration_replicates;
  cs.b_lo = 0.0;
  cs.b_hi = 2.0 * static_cast<double>(cs.experiment.detector_dim()) + 20.0;
  cs.expand_upper = true;
  cs.seed = child_seed(spec.seed, 0);
  cs.tolerance = spec.tolerance;
  cs.cap_factor = spec.cap_factor;
  cs.workers = spec.workers;
  const CalibrationResult r = calibrate_threshold(cs);
  return {r.threshold, r.achieved_arl, r.std_err, r.censored, r.converged};
}

SweepRow measure_row(const SweepSpec& spec, Experiment e, const Calibrated& cal, double param,
                     double snr) {
  e.detector.threshold = cal.threshold;
  e.scenario.kappa = 0;
  const RunLengthEstimate edd =
      estimate_edd(e, spec.edd_replicates, child_seed(spec.seed, 1), spec.edd_cap, spec.workers);
  SweepRow row;
  row.param = param;
  row.dim = e.detector_dim();
  row.drift = e.detector.drift;
  row.threshold = cal.threshold;
  row.achieved_arl = cal.arl;
  row.arl_std_err = cal.arl_std_err;
  row.arl_censored = cal.censored;
  row.converged = cal.converged;
  row.edd = edd.mean;
  row.edd_std_err = edd.std_err;
  row.edd_replicates = edd.replicates;
  row.edd_censored = edd.censored;
  row.snr = snr;
  if (cal.threshold > 0.0) {
    BoundInputs in;
    in.b = cal.threshold;
    in.rho_sq = snr * e.scenario.sigma0_sq;
    in.sigma0_sq = e.scenario.sigma0_sq;
    row.edd_approx = edd_approx(in);
  } else {
    row.edd_approx = std::numeric_limits<double>::quiet_NaN();
  }
  return row;
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  SweepResult out;
  ScenarioConfig scenario = spec.scenario;
  scenario.kappa.reset();
  scenario.horizon = 0;
  const SignalCovariance signal = scenario_signal(scenario);

  const auto make_experiment = [&](Index dim) {
    Experiment e;
    e.scenario = scenario;
    e.detector.window = spec.window;
    e.detector.stride = spec.stride;
    e.detector.sigma0_sq = scenario.sigma0_sq;
    e.detector.drift = spec.drift ? *spec.drift : default_drift(dim, spec.window);
    return e;
  };

  if (!spec.sketch_dims.empty()) {
    out.kind = "sketch";
    const Index m_max = *std::max_element(spec.sketch_dims.begin(), spec.sketch_dims.end());
    const SketchOperator full = make_sketch_operator(scenario.p, m_max, child_seed(spec.seed, 2));
    for (Index m : spec.sketch_dims) {
      Experiment e = make_experiment(m);
      e.sketch = sketch_prefix(full, m);
      const Calibrated cal = threshold_for(spec, e);
      const double snr = sketched_snr(*e.sketch, signal) / scenario.sigma0_sq;
      out.rows.push_back(measure_row(spec, e, cal, static_cast<double>(m), snr));
    }
    return out;
  }

  out.kind = "snr";
  Experiment base = make_experiment(scenario.p);
  const Calibrated cal = threshold_for(spec, base);
  for (double x : spec.snr_grid) {
    Experiment e = base;
    e.scenario.signal_norm = x * scenario.sigma0_sq;
    out.rows.push_back(measure_row(spec, e, cal, x, x));
  }
  return out;
}

std::vector<TrackerReport> run_tracker_replicates(const TrackerRunSpec& spec) {
  spec.scenario.validate();
  spec.tracker.validate();
  if (spec.horizon < 1) throw Error(ErrorKind::kInvalidConfig, "tracker horizon must be >= 1");
  const SignalCovariance signal = scenario_signal(spec.scenario);
  std::vector<TrackerReport> reports(spec.replicates);
  parallel_for(spec.replicates, spec.workers, [&](std::size_t r) {
    StreamGenerator gen(spec.scenario, signal, child_seed(spec.seed, 2 * r));
    TrackerConfig cfg = spec.tracker;
    cfg.seed = child_seed(spec.seed, 2 * r + 1);
    SubspaceTracker tracker(spec.scenario.p, cfg);
    TrackerReport& rep = reports[r];
    rep.trace.reserve(static_cast<std::size_t>(spec.horizon));
    for (std::int64_t t = 0; t < spec.horizon; ++t) {
      rep.trace.push_back(tracker.push(gen.next()));
      if (cfg.stop_at_alarm && tracker.alarm_time()) break;
    }
    rep.alarm_time = tracker.alarm_time();
    rep.basis = tracker.state().u;
  });
  return reports;
}

TrackerCalibration calibrate_tracker_threshold(const TrackerRunSpec& spec, double level) {
  if (spec.scenario.kappa) throw Error(ErrorKind::kInvalidConfig, "tracker calibration needs a null scenario");
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::kInvalidConfig, "level must lie in (0, 1)");
  const AlarmRule rule = spec.tracker.alarm.value_or(AlarmRule{});
  if (rule.kind != AlarmRule::Kind::kPersistence) {
    throw Error(ErrorKind::kInvalidConfig, "tracker calibration supports the persistence rule only");
  }
  TrackerRunSpec run = spec;
  run.tracker.alarm.reset();
  run.tracker.stop_at_alarm = false;
  const std::vector<TrackerReport> reports = run_tracker_replicates(run);

  TrackerCalibration out;
  for (const TrackerReport& rep : reports) {
    std::deque<double> window;
    double best = -std::numeric_limits<double>::infinity();
    for (const TrackerStats& st : rep.trace) {
      if (st.skipped) continue;
      window.push_back(rule.statistic == TrackerStatistic::kNorm ? st.stat_norm : st.stat_max);
      if (window.size() > static_cast<std::size_t>(rule.persistence)) window.pop_front();
      if (window.size() == static_cast<std::size_t>(rule.persistence)) {
        best = std::max(best, *std::min_element(window.begin(), window.end()));
      }
    }
    out.maxima.push_back(best);
  }
  out.threshold = quantile(out.maxima, level);
  return out;
}

}  // namespace rankwatch
