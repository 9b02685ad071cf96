// rankwatch: command-line front end.
//
// Exit codes: 0 success (an absent alarm is still success), 2 usage or
// configuration error, 3 data error, 4 analysis error.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rankwatch/analysis.hpp"
#include "rankwatch/detector.hpp"
#include "rankwatch/error.hpp"
#include "rankwatch/harness.hpp"
#include "rankwatch/model.hpp"
#include "rankwatch/report.hpp"
#include "rankwatch/sketch.hpp"
#include "rankwatch/stream_io.hpp"
#include "rankwatch/tracker.hpp"

namespace fs = std::filesystem;
using namespace rankwatch;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitAnalysis = 4;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidConfig:
    case ErrorKind::kUnsupportedDimension:
      return kExitUsage;
    case ErrorKind::kNoRoot:
    case ErrorKind::kBracket:
      return kExitAnalysis;
    default:
      return kExitData;
  }
}

/// Every option of a subcommand as key=value, in declaration order.
Metadata describe(const CLI::App& sub) {
  Metadata meta{{"version", version_string()}, {"command", sub.get_name()}};
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& results = opt->results();
      for (std::size_t i = 0; i < results.size(); ++i) value += (i ? "," : "") + results[i];
    } else {
      value = opt->get_default_str();
    }
    meta.emplace_back(name, value);
  }
  return meta;
}

void emit(const CsvTable& table, const fs::path& out, Metadata meta) {
  table.write(out);
  write_metadata(meta, sidecar_path(out));
}

struct ScenarioFlags {
  Index p = 100;
  Index s = 0;
  double rho = 0.0;
  double sigma0_sq = 1.0;
  std::optional<std::int64_t> kappa;
  std::optional<double> signal_norm;
  double missing = 0.0;
  std::uint64_t seed = 0;

  void add(CLI::App* sub, bool with_missing) {
    sub->add_option("--p", p, "ambient dimension")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--s", s, "signal rank")->check(CLI::NonNegativeNumber)->capture_default_str();
    sub->add_option("--rho", rho, "signal scale")->check(CLI::NonNegativeNumber)->capture_default_str();
    sub->add_option("--sigma0sq", sigma0_sq, "noise variance")->capture_default_str();
    sub->add_option("--signal-norm", signal_norm, "rescale the signal so that ||Sigma|| equals this");
    sub->add_option("--seed", seed, "master seed")->capture_default_str();
    if (with_missing) {
      sub->add_option("--kappa", kappa, "last pre-change index (omit for no change)");
      sub->add_option("--missing", missing, "fraction of entries left unobserved")->capture_default_str();
    }
  }

  ScenarioConfig config() const {
    ScenarioConfig c;
    c.p = p;
    c.s = s;
    c.rho = rho;
    c.sigma0_sq = sigma0_sq;
    c.kappa = kappa;
    c.signal_norm = signal_norm;
    c.missing_fraction = missing;
    c.seed = seed;
    return c;
  }
};

// ---------------------------------------------------------------------------

struct SimulateCmd {
  ScenarioFlags scenario;
  std::int64_t horizon = 1000;
  fs::path out;

  void add(CLI::App& app) {
    CLI::App* sub = app.add_subcommand("simulate", "write a synthetic stream");
    scenario.add(sub, true);
    sub->add_option("--horizon", horizon, "number of samples")->check(CLI::NonNegativeNumber)->capture_default_str();
    sub->add_option("--out", out, "stream file")->required();
    sub->callback([this, sub] { run(*sub); });
  }

  void run(const CLI::App& sub) const {
    ScenarioConfig cfg = scenario.config();
    cfg.horizon = horizon;
    const Stream stream = generate_stream(cfg);
    write_stream(stream, out, "rankwatch simulate p=" + std::to_string(cfg.p));
    write_metadata(describe(sub), sidecar_path(out));
  }
};

struct SketchFlags {
  std::optional<Index> m;
  std::uint64_t seed = 0;
  std::optional<fs::path> operator_in;

  void add(CLI::App* sub) {
    sub->add_option("--sketch-dim", m, "sketch the stream to this many dimensions first");
    sub->add_option("--sketch-seed", seed, "seed of the sketch operator")->capture_default_str();
    sub->add_option("--sketch-in", operator_in, "load the sketch operator from a file");
  }

  std::optional<SketchOperator> make(Index p) const {
    if (operator_in) {
      SketchOperator op = load_sketch_operator(*operator_in);
      if (op.p != p) throw Error(ErrorKind::kInvalidInput, "sketch operator does not match the stream dimension");
      return op;
    }
    if (m) return make_sketch_operator(p, *m, seed);
    return std::nullopt;
  }
};

struct DetectCmd {
  fs::path in;
  fs::path out;
  Index window = 100;
  std::optional<double> drift;
  double threshold = 0.0;
  double sigma0_sq = 1.0;
  Index stride = 1;
  SketchFlags sketch;

  void add(CLI::App& app) {
    CLI::App* sub = app.add_subcommand("detect", "run the max-eigenvalue detector over a stream");
    sub->add_option("--in", in, "stream file")->required()->check(CLI::ExistingFile);
    sub->add_option("--window", window, "window size w")->capture_default_str();
    sub->add_option("--drift", drift, "drift d (default (1 + sqrt(p/w))^2 + 0.1)");
    sub->add_option("--threshold", threshold, "threshold b")->required();
    sub->add_option("--sigma0sq", sigma0_sq, "noise variance")->capture_default_str();
    sub->add_option("--stride", stride, "candidate stride")->capture_default_str();
    sketch.add(sub);
    sub->add_option("--out", out, "trace CSV")->required();
    sub->callback([this, sub] { run(*sub); });
  }

  void run(const CLI::App& sub) const {
    Stream stream = read_stream(in);
    Index p = stream.empty() ? 0 : stream.front().dim();
    if (const auto op = sketch.make(p)) {
      stream = sketch_stream(*op, stream);
      p = op->m;
    }
    DetectorConfig cfg;
    cfg.window = window;
    cfg.drift = drift ? *drift : default_drift(std::max<Index>(p, 1), window);
    cfg.threshold = threshold;
    cfg.sigma0_sq = sigma0_sq;
    cfg.stride = stride;
    const DetectionReport report = run_detector(stream, cfg);

    Metadata meta = describe(sub);
    meta.emplace_back("effective_drift", format_double(cfg.drift));
    meta.emplace_back("stopped", report.stopped ? "true" : "false");
    meta.emplace_back("stopping_time", report.stopping_time ? std::to_string(*report.stopping_time) : "none");
    meta.emplace_back("k_hat", report.k_hat ? std::to_string(*report.k_hat) : "none");
    emit(detection_trace_table(report), out, meta);

    std::cout << "stopped=" << (report.stopped ? "true" : "false");
    if (report.stopped) {
      std::cout << " stopping_time=" << *report.stopping_time << " k_hat=" << *report.k_hat;
    }
    std::cout << " samples=" << report.trace.size() << '\n';
  }
};

struct SketchCmd {
  fs::path in;
  std::optional<fs::path> out;
  std::optional<fs::path> operator_out;
  SketchFlags sketch;

  void add(CLI::App& app) {
    CLI::App* sub = app.add_subcommand("sketch", "project a stream with a random orthonormal sketch");
    sub->add_option("--in", in, "stream file")->required()->check(CLI::ExistingFile);
    sketch.add(sub);
    sub->add_option("--out", out, "sketched stream file");
    sub->add_option("--operator-out", operator_out, "write the operator (one row per column)");
    sub->callback([this, sub] { run(*sub); });
  }

  void run(const CLI::App& sub) const {
    if (!out && !operator_out) throw CLI::ValidationError("sketch", "need --out and/or --operator-out");
    const Stream stream = read_stream(in);
    if (stream.empty()) throw Error(ErrorKind::kInvalidInput, "empty stream");
    const auto op = sketch.make(stream.front().dim());
    if (!op) throw CLI::ValidationError("sketch", "need --sketch-dim or --sketch-in");
    Metadata meta = describe(sub);
    if (out) {
      write_stream(sketch_stream(*op, stream), *out, "rankwatch sketch m=" + std::to_string(op->m));
      write_metadata(meta, sidecar_path(*out));
    }
    if (operator_out) {
      save_sketch_operator(*op, *operator_out);
      write_metadata(meta, sidecar_path(*operator_out));
    }
  }
};

struct TrackCmd {
  fs::path in;
  fs::path out;
  Index rank = 1;
  double eta0 = 0.1;
  double t0 = 100.0;
  std::string statistic = "norm";
  std::string rule = "persistence";
  std::optional<double> threshold;
  int persistence = 5;
  double cusum_drift = 0.0;
  std::uint64_t seed = 0;

  void add(CLI::App& app) {
    CLI::App* sub = app.add_subcommand("track", "subspace tracking statistics over a (possibly masked) stream");
    sub->add_option("--in", in, "stream file")->required()->check(CLI::ExistingFile);
    sub->add_option("--rank", rank, "subspace rank s")->capture_default_str();
    sub->add_option("--eta0", eta0, "initial step size")->capture_default_str();
    sub->add_option("--t0", t0, "step decay scale")->capture_default_str();
    sub->add_option("--statistic", statistic, "alarm statistic")
        ->check(CLI::IsMember({"norm", "max"}))->capture_default_str();
    sub->add_option("--rule", rule, "alarm rule")
        ->check(CLI::IsMember({"persistence", "cusum"}))->capture_default_str();
    sub->add_option("--threshold", threshold, "alarm threshold (omit for no alarm)");
    sub->add_option("--persistence", persistence, "consecutive exceedances")->capture_default_str();
    sub->add_option("--cusum-drift", cusum_drift, "drift of the CUSUM rule")->capture_default_str();
    sub->add_option("--seed", seed, "seed of the initial basis")->capture_default_str();
    sub->add_option("--out", out, "trace CSV")->required();
    sub->callback([this, sub] { run(*sub); });
  }

  void run(const CLI::App& sub) const {
    const Stream stream = read_stream(in);
    TrackerConfig cfg;
    cfg.s = rank;
    cfg.schedule = {eta0, t0};
    cfg.seed = seed;
    if (threshold) {
      AlarmRule a;
      a.kind = rule == "cusum" ? AlarmRule::Kind::kCusum : AlarmRule::Kind::kPersistence;
      a.statistic = statistic == "max" ? TrackerStatistic::kMax : TrackerStatistic::kNorm;
      a.threshold = *threshold;
      a.persistence = persistence;
      a.drift = cusum_drift;
      cfg.alarm = a;
    }
    const TrackerReport report = run_tracker(stream, cfg);
    Metadata meta = describe(sub);
    meta.emplace_back("alarm_time", report.alarm_time ? std::to_string(*report.alarm_time) : "none");
    emit(tracker_trace_table(report), out, meta);
    std::cout << "alarm=" << (report.alarm_time ? std::to_string(*report.alarm_time) : "none")
              << " samples=" << report.trace.size() << '\n';
  }
};

struct DetectorFlags {
  Index window = 100;
  std::optional<double> drift;
  Index stride = 4;

  void add(CLI::App* sub) {
    sub->add_option("--window", window, "window size w")->capture_default_str();
    sub->add_option("--drift", drift, "drift d (default (1 + sqrt(dim/w))^2 + 0.1)");
    sub->add_option("--stride", stride, "candidate stride")->capture_default_str();
  }
};

struct CalibrateCmd {
  ScenarioFlags scenario;
  DetectorFlags detector;
  SketchFlags sketch;
  double target = 5000.0;
  std::size_t replicates = 200;
  double b_lo = 0.0;
  std::optional<double> b_hi;
  double tolerance = 0.1;
  double cap_factor = 20.0;
  int workers = 1;
  fs::path out;

  void add(CLI::App& app) {
    CLI::App* sub = app.add_subcommand("calibrate", "find the threshold with a target ARL on null streams");
    scenario.add(sub, false);
    detector.add(sub);
    sketch.add(sub);
    sub->add_option("--target-arl", target, "target average run length")->capture_default_str();
    sub->add_option("--replicates", replicates, "null replicates")->capture_default_str();
    sub->add_option("--b-lo", b_lo, "lower end of the threshold bracket")->capture_default_str();
    sub->add_option("--b-hi", b_hi, "upper end (omit to search upward from 2 dim + 20)");
    sub->add_option("--tolerance", tolerance, "relative ARL tolerance")->capture_default_str();
    sub->add_option("--cap-factor", cap_factor, "null runs stop at cap-factor * target")->capture_default_str();
    sub->add_option("--workers", workers, "threads (0: all cores)")->capture_default_str();
    sub->add_option("--out", out, "result CSV")->required();
    sub->callback([this, sub] { run(*sub); });
  }

  void run(const CLI::App& sub) const {
    CalibrationSpec spec;
    spec.experiment.scenario = scenario.config();
    spec.experiment.scenario.kappa.reset();
    spec.experiment.sketch = sketch.make(scenario.p);
    const Index dim = spec.experiment.detector_dim();
    spec.experiment.detector.window = detector.window;
    spec.experiment.detector.stride = detector.stride;
    spec.experiment.detector.sigma0_sq = scenario.sigma0_sq;
    spec.experiment.detector.drift = detector.drift ? *detector.drift : default_drift(dim, detector.window);
    spec.target_arl = target;
    spec.replicates = replicates;
    spec.b_lo = b_lo;
    spec.b_hi = b_hi ? *b_hi : 2.0 * static_cast<double>(dim) + 20.0;
    spec.expand_upper = !b_hi;
    spec.seed = scenario.seed;
    spec.tolerance = tolerance;
    spec.cap_factor = cap_factor;
    spec.workers = workers;
    const CalibrationResult r = calibrate_threshold(spec);

    CsvTable table({"threshold", "achieved_arl", "arl_stderr", "censored", "converged", "bisections",
                    "b_lo", "b_hi", "drift", "dim", "simulated_steps"});
    table.add_row({cell(r.threshold), cell(r.achieved_arl), cell(r.std_err),
                   cell(static_cast<std::int64_t>(r.censored)), cell(r.converged),
                   cell(static_cast<std::int64_t>(r.bisections)), cell(r.b_lo), cell(r.b_hi),
                   cell(spec.experiment.detector.drift), cell(static_cast<std::int64_t>(dim)),
                   cell(r.simulated_steps)});
    emit(table, out, describe(sub));
    std::cout << "threshold=" << format_double(r.threshold) << " achieved_arl=" << format_double(r.achieved_arl)
              << " converged=" << (r.converged ? "true" : "false") << '\n';
  }
};

struct SweepCmd {
  ScenarioFlags scenario;
  DetectorFlags detector;
  std::string over = "m";
  std::vector<Index> ms{2, 4, 8, 16, 32, 64};
  std::vector<double> snr{0.5, 1, 2, 4, 8};
  std::optional<double> threshold;
  double target = 5000.0;
  std::size_t calibration_replicates = 200;
  std::size_t edd_replicates = 500;
  std::int64_t edd_cap = 100000;
  double tolerance = 0.1;
  double cap_factor = 20.0;
  int workers = 1;
  fs::path out;

  void add(CLI::App& app) {
    CLI::App* sub = app.add_subcommand("sweep", "detection delay versus sketch size or signal strength");
    scenario.add(sub, false);
    detector.add(sub);
    sub->add_option("--over", over, "swept quantity")->check(CLI::IsMember({"m", "snr"}))->capture_default_str();
    sub->add_option("--ms", ms, "sketch dimensions")->delimiter(',')->capture_default_str();
    sub->add_option("--snr", snr, "rho^2 / sigma0^2 grid")->delimiter(',')->capture_default_str();
    sub->add_option("--threshold", threshold, "fixed threshold (omit to calibrate)");
    sub->add_option("--target-arl", target, "target ARL for calibration")->capture_default_str();
    sub->add_option("--calibration-replicates", calibration_replicates, "null replicates")->capture_default_str();
    sub->add_option("--edd-replicates", edd_replicates, "delay replicates")->capture_default_str();
    sub->add_option("--edd-cap", edd_cap, "delay runs stop here")->capture_default_str();
    sub->add_option("--tolerance", tolerance, "relative ARL tolerance")->capture_default_str();
    sub->add_option("--cap-factor", cap_factor, "null runs stop at cap-factor * target")->capture_default_str();
    sub->add_option("--workers", workers, "threads (0: all cores)")->capture_default_str();
    sub->add_option("--out", out, "sweep CSV")->required();
    sub->callback([this, sub] { run(*sub); });
  }

  void run(const CLI::App& sub) const {
    SweepSpec spec;
    spec.scenario = scenario.config();
    spec.window = detector.window;
    spec.stride = detector.stride;
    spec.drift = detector.drift;
    if (over == "m") {
      spec.sketch_dims = ms;
    } else {
      spec.snr_grid = snr;
    }
    spec.threshold = threshold;
    spec.target_arl = target;
    spec.calibration_replicates = calibration_replicates;
    spec.edd_replicates = edd_replicates;
    spec.edd_cap = edd_cap;
    spec.tolerance = tolerance;
    spec.cap_factor = cap_factor;
    spec.seed = scenario.seed;
    spec.workers = workers;
    emit(sweep_table(run_sweep(spec)), out, describe(sub));
  }
};

struct BoundsCmd {
  std::vector<double> b{10, 20, 50};
  std::vector<double> d{4};
  std::vector<double> eps{0.1, 0.2, 0.3};
  Index p = 2;
  std::vector<double> rho_sq{1};
  double sigma0_sq = 1.0;
  std::string log_arg = "squared";
  fs::path out;

  void add(CLI::App& app) {
    CLI::App* sub = app.add_subcommand("bounds", "tabulate the ARL lower bound and the delay approximation");
    sub->add_option("--b", b, "thresholds")->delimiter(',')->capture_default_str();
    sub->add_option("--d", d, "drifts")->delimiter(',')->capture_default_str();
    sub->add_option("--eps", eps, "net radii in (0, 0.5)")->delimiter(',')->capture_default_str();
    sub->add_option("--p", p, "dimension")->capture_default_str();
    sub->add_option("--rho-sq", rho_sq, "||Sigma|| values")->delimiter(',')->capture_default_str();
    sub->add_option("--sigma0sq", sigma0_sq, "noise variance")->capture_default_str();
    sub->add_option("--log-arg", log_arg, "delay formula log argument: 1 + rho^2/sigma0^2 or 1 + rho/sigma0")
        ->check(CLI::IsMember({"squared", "printed"}))->capture_default_str();
    sub->add_option("--out", out, "table CSV")->required();
    sub->callback([this, sub] { run(*sub); });
  }

  void run(const CLI::App& sub) const {
    const LogArgument arg = log_arg == "printed" ? LogArgument::kPrinted : LogArgument::kSquared;
    CsvTable table({"b", "d", "eps", "p", "rho_sq", "theta", "exponent", "denominator", "covering",
                    "arl_literal", "arl_magnitude", "edd"});
    for (double bv : b) {
      for (double dv : d) {
        for (double ev : eps) {
          for (double rv : rho_sq) {
            BoundInputs in{bv, dv, ev, p, rv, sigma0_sq};
            const ArlBound bound = arl_lower_bound(in);
            table.add_row({cell(bv), cell(dv), cell(ev), cell(static_cast<std::int64_t>(p)), cell(rv),
                           cell(bound.theta), cell(bound.exponent), cell(bound.denominator),
                           cell(bound.covering), cell(bound.literal), cell(bound.magnitude),
                           cell(edd_approx(in, arg))});
          }
        }
      }
    }
    emit(table, out, describe(sub));
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rankwatch: low-rank covariance change detection"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  SimulateCmd simulate;
  DetectCmd detect;
  SketchCmd sketch;
  TrackCmd track;
  CalibrateCmd calibrate;
  SweepCmd sweep;
  BoundsCmd bounds;
  simulate.add(app);
  detect.add(app);
  sketch.add(app);
  track.add(app);
  calibrate.add(app);
  sweep.add(app);
  bounds.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "rankwatch: parse error: " << e.what() << '\n';
    return kExitData;
  } catch (const Error& e) {
    std::cerr << "rankwatch: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "rankwatch: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
