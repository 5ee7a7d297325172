#include "wmr/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <vector>

namespace wmr {

namespace fs = std::filesystem;

namespace {

ControllerKind synthesis_kind(const RunConfig& config) {
  return config.controller == ControllerKind::kType2 ? ControllerKind::kType2
                                                     : ControllerKind::kType1;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create output directory " + dir.string());
}

PdcSynthesis import_synthesis(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::kIo, "cannot open synthesis file " + file.string());
  return read_synthesis(in);
}

void write_summary_metrics(std::ostream& out, const std::string& label, const Metrics& m) {
  out << std::setprecision(6) << label << ": ISE " << m.ise_total << " (x " << m.ise.x()
      << ", y " << m.ise.y() << ", theta " << m.ise.z() << "), settling ";
  if (m.settling_time) {
    out << *m.settling_time << " s";
  } else {
    out << "not settled";
  }
  out << ", max command rate " << m.max_command_rate << '\n';
}

}  // namespace

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig: return kExitConfig;
    case ErrorCode::kInvalidSpec:
    case ErrorCode::kSingularPath:
    case ErrorCode::kDomain: return kExitInvalidPath;
    case ErrorCode::kDegenerateZoning:
    case ErrorCode::kDegenerateFiring:
    case ErrorCode::kUncertaintyTooWide: return kExitDegenerateZoning;
    case ErrorCode::kInfeasible: return kExitInfeasible;
    case ErrorCode::kDivergence: return kExitDivergence;
    case ErrorCode::kIllConditioned: return kExitIllConditioned;
    case ErrorCode::kIo: return kExitFailure;
  }
  return kExitFailure;
}

void write_atomic(const fs::path& file, const std::function<void(std::ostream&)>& body) {
  fs::path tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    body(out);
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, file, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot move " + tmp.string() + " to " + file.string());
  }
}

ReferenceTrajectory build_reference(const RunConfig& config) {
  return reference_trajectory(polygon_from_spec(config.path), config.path.duration,
                              config.samples);
}

FuzzyDesign design_fuzzy(const RunConfig& config, const ReferenceTrajectory& traj,
                         ControllerKind kind) {
  if (kind == ControllerKind::kClassic) {
    throw Error(ErrorCode::kConfig, "the classic controller has no fuzzy design");
  }
  FuzzyDesign d;
  d.kind = kind;
  d.model = build_rules(compute_bounds(traj, config.fuzzy.box), config.fuzzy.box);
  if (kind == ControllerKind::kType2) {
    d.interval = interval_bounds(config.type2, config.path, config.samples, config.fuzzy.box);
  }
  d.problem = build_pdc_lmi(d.model);
  const FeasibilityResult r = solve_feasibility(*d.problem, config.solver);
  if (!r.feasible || !r.synthesis) {
    std::ostringstream msg;
    msg << "LMI problem infeasible (best margin " << r.margin << ", tolerance "
        << config.solver.tol_feas << ")";
    throw Error(ErrorCode::kInfeasible, msg.str());
  }
  d.synthesis = *r.synthesis;
  return d;
}

std::unique_ptr<TrackingController> make_controller(const RunConfig& config,
                                                    const ReferenceTrajectory& traj,
                                                    ControllerKind kind, const CommandIo& io) {
  if (kind == ControllerKind::kClassic) return std::make_unique<ClassicTracker>(config.classic);

  FuzzyDesign d;
  if (config.sim.synthesis) {
    d.kind = kind;
    d.model = build_rules(compute_bounds(traj, config.fuzzy.box), config.fuzzy.box);
    if (kind == ControllerKind::kType2) {
      d.interval = interval_bounds(config.type2, config.path, config.samples, config.fuzzy.box);
    }
    d.synthesis = import_synthesis(*config.sim.synthesis);
    if (io.verbose) io.log << "imported synthesis from " << config.sim.synthesis->string() << '\n';
  } else {
    d = design_fuzzy(config, traj, kind);
    if (io.verbose) {
      io.log << to_string(kind) << " synthesis margin " << d.synthesis.margin << " after "
             << d.synthesis.iterations << " iterations\n";
    }
  }
  const Mat3 P = d.synthesis.P;
  if (kind == ControllerKind::kType2) {
    if (io.verbose) write_interval_summary(io.log, *d.interval);
    if (d.interval->skipped > 0) {
      io.log << "warning: " << d.interval->skipped
             << " uncertainty grid paths were singular and skipped\n";
    }
    return std::make_unique<Type2Tracker>(*d.interval, config.fuzzy.box, d.synthesis.gains(), P,
                                          config.fuzzy.clamp);
  }
  return std::make_unique<Type1Tracker>(d.model, d.synthesis.gains(), P, config.fuzzy.clamp);
}

int cmd_path(const RunConfig& config, const CommandIo& io) {
  const ControlPolygon cp = polygon_from_spec(config.path);
  const ReferenceTrajectory traj = reference_trajectory(cp, config.path.duration, config.samples);
  const VelocityExtrema ex = velocity_extrema(traj);
  const double length = arc_length(cp);

  ensure_dir(config.output_dir);
  write_atomic(config.output_dir / "trajectory.csv",
               [&](std::ostream& out) { write_trajectory_csv(out, traj); });
  const auto summary = [&](std::ostream& out) {
    out << std::setprecision(9) << "arc_length " << length << "\ntotal_time "
        << config.path.duration << "\nv_min " << ex.v_min << "\nv_max " << ex.v_max
        << "\nomega_min " << ex.omega_min << "\nomega_max " << ex.omega_max << '\n';
  };
  write_atomic(config.output_dir / "path_summary.txt", summary);
  summary(io.out);
  return kExitOk;
}

int cmd_synth(const RunConfig& config, const CommandIo& io) {
  const ReferenceTrajectory traj = build_reference(config);
  const ControllerKind kind = synthesis_kind(config);
  const FuzzyDesign d = design_fuzzy(config, traj, kind);
  const LmiProblem& problem = *d.problem;
  const LyapunovReport report = verify_lyapunov(d.synthesis.P, problem, d.synthesis.F);
  const std::vector<ClosedLoopPole> poles = closed_loop_poles(problem, d.synthesis.F);

  ensure_dir(config.output_dir);
  write_atomic(config.output_dir / "synthesis.json",
               [&](std::ostream& out) { write_synthesis(out, d.synthesis); });
  write_atomic(config.output_dir / "poles.csv",
               [&](std::ostream& out) { write_pole_csv(out, poles); });
  write_atomic(config.output_dir / "lyapunov.txt",
               [&](std::ostream& out) { write_lyapunov_report(out, report); });
  write_atomic(config.output_dir / "model.txt", [&](std::ostream& out) {
    write_model_summary(out, d.model);
    if (d.interval) write_interval_summary(out, *d.interval);
  });

  double re_min = INFINITY, re_max = -INFINITY;
  for (const auto& p : poles) {
    re_min = std::min(re_min, p.value.real());
    re_max = std::max(re_max, p.value.real());
  }
  io.out << std::setprecision(6) << to_string(kind) << " synthesis: " << problem.size()
         << " LMIs, margin " << d.synthesis.margin << ", " << poles.size()
         << " closed-loop poles with Re in [" << re_min << ", " << re_max << "], Lyapunov check "
         << (report.passed ? "passed" : "FAILED") << '\n';
  if (!report.passed) {
    throw Error(ErrorCode::kInfeasible, "synthesized gains failed Lyapunov verification");
  }
  return kExitOk;
}

int cmd_simulate(const RunConfig& config, const CommandIo& io) {
  const ReferenceTrajectory traj = build_reference(config);
  const auto controller = make_controller(config, traj, config.controller, io);
  const SimTrace trace =
      run_closed_loop(traj, *controller, config.sim.e0, config.sim.dt, config.sim.horizon);

  ensure_dir(config.output_dir);
  write_atomic(config.output_dir / "trace.csv",
               [&](std::ostream& out) { write_trace_csv(out, trace); });
  if (trace.out_of_box_steps > 0) {
    io.log << "warning: " << trace.out_of_box_steps
           << " steps had premises outside the modeling box (memberships clamped)\n";
  }
  if (trace.diverged_step) {
    throw Error(ErrorCode::kDivergence,
                "simulation diverged at step " + std::to_string(*trace.diverged_step));
  }
  const Metrics m = compute_metrics(trace, traj.duration(), controller->lyapunov_matrix());
  write_atomic(config.output_dir / "metrics.csv", [&](std::ostream& out) {
    write_metrics_header(out);
    write_metrics_row(out, to_string(config.controller), m, "ok");
  });
  write_summary_metrics(io.out, to_string(config.controller), m);
  return kExitOk;
}

int cmd_compare(const RunConfig& config, const CommandIo& io) {
  const ReferenceTrajectory traj = build_reference(config);
  const ControllerKind kinds[] = {ControllerKind::kClassic, ControllerKind::kType1,
                                  ControllerKind::kType2};

  std::vector<ComparisonRow> rows;
  int status = kExitOk;
  for (ControllerKind kind : kinds) {
    RunConfig run = config;
    run.controller = kind;
    try {
      const auto controller = make_controller(run, traj, kind, io);
      const TrackingController* list[] = {controller.get()};
      rows.push_back(compare_controllers(traj, list, run.sim.e0, run.sim.dt, run.sim.horizon)[0]);
    } catch (const Error& e) {
      ComparisonRow failed;
      failed.kind = kind;
      failed.failure = e.what();
      rows.push_back(failed);
      if (status == kExitOk) status = exit_code(e.code());
    }
    if (!rows.back().metrics && status == kExitOk) status = kExitDivergence;
  }

  ensure_dir(config.output_dir);
  write_atomic(config.output_dir / "comparison.csv", [&](std::ostream& out) {
    write_metrics_header(out);
    for (const auto& r : rows) {
      write_metrics_row(out, to_string(r.kind), r.metrics, r.failure.empty() ? "ok" : "failed");
    }
  });

  for (const auto& r : rows) {
    if (r.metrics) {
      write_summary_metrics(io.out, to_string(r.kind), *r.metrics);
    } else {
      io.out << to_string(r.kind) << ": failed: " << r.failure << '\n';
    }
  }
  const auto& classic = rows[0].metrics;
  const auto& type1 = rows[1].metrics;
  const auto& type2 = rows[2].metrics;
  if (classic && type1 && !(type1->ise_total < classic->ise_total)) {
    io.log << "warning: type1 ISE is not below classic ISE\n";
  }
  if (type1 && type2 && type2->max_command_rate > type1->max_command_rate) {
    io.log << "warning: type2 max command rate " << type2->max_command_rate
           << " exceeds type1 " << type1->max_command_rate << '\n';
  }
  return status;
}

}  // namespace wmr
