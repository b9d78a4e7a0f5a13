// difq — deterministic toolkit for a direct series-injection power
// flow/quality controller: time-domain runs of the shipped studies,
// closed-form coverage envelopes, and loss/protection arithmetic.
//
// Exit codes:
//   0  success (run completed, all built-in checks pass)
//   1  run completed but at least one built-in check failed
//   2  input/validation error (bad scenario, unknown case, unwritable output)
//   3  numerical divergence during integration
//   4  internal invariant breach

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "difq/csv.hpp"
#include "difq/envelope.hpp"
#include "difq/loss.hpp"
#include "difq/manifest.hpp"
#include "difq/metrics.hpp"
#include "difq/network.hpp"
#include "difq/scenario_json.hpp"
#include "difq/sim.hpp"
#include "difq/svg.hpp"

namespace {

using namespace difq;

constexpr const char* kPhaseName[3] = {"a", "b", "c"};

std::string out_root() {
  if (const char* env = std::getenv("DIFQ_OUT_ROOT"); env != nullptr && *env)
    return env;
  return "out";
}

std::string join(const std::string& dir, const std::string& leaf) {
  return (std::filesystem::path(dir) / leaf).string();
}

std::string fmt(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

struct RunOptions {
  std::string scenario_path;
  std::string out_dir;       // empty = <root>/<scenario name>
  std::string fidelity;      // "", "averaged" or "switched"
  double dt = 0.0;           // 0 = keep scenario value
  double t_end = 0.0;        // 0 = keep scenario value
  int decimation = 0;        // 0 = keep / auto
  bool charts = false;
};

/// Fold command-line overrides into a loaded scenario. When the flags refine
/// the time step (explicitly or by flipping to switched fidelity), the record
/// decimation is scaled to keep the original sample spacing so the sampling
/// grid still divides the fundamental period.
void apply_overrides(Scenario& sc, const RunOptions& opt) {
  const double dt0 = sc.sim.dt;
  if (opt.fidelity == "averaged") sc.sim.fidelity = Fidelity::Averaged;
  if (opt.fidelity == "switched") sc.sim.fidelity = Fidelity::Switched;
  if (opt.dt > 0.0) sc.sim.dt = opt.dt;
  if (opt.t_end > 0.0) {
    sc.sim.t_end = opt.t_end;
    // A shortened horizon makes late schedule entries dead weight that
    // validation would reject; drop them so truncated runs stay well-formed.
    std::erase_if(sc.schedule, [&](const ScheduleEntry& e) {
      return e.t >= sc.sim.t_end;
    });
  }
  if (sc.sim.fidelity == Fidelity::Switched && opt.dt <= 0.0 &&
      sc.module.f_sw_hz > 0.0) {
    // A switched run needs several steps per switching period; refine the
    // step automatically when the flag alone flipped the fidelity.
    const double coarsest = 1.0 / (5.0 * sc.module.f_sw_hz);
    if (sc.sim.dt > coarsest) sc.sim.dt = 1.0 / (10.0 * sc.module.f_sw_hz);
  }
  if (opt.decimation > 0) {
    sc.sim.record_decimation = opt.decimation;
  } else if (sc.sim.dt < dt0 && sc.sim.dt > 0.0) {
    const double factor = dt0 / sc.sim.dt;
    sc.sim.record_decimation = static_cast<int>(std::max<long long>(
        1, std::llround(sc.sim.record_decimation * factor)));
  }
}

std::vector<SvgPanel> run_chart_panels(const TraceSet& tr) {
  auto three = [&](const std::array<std::vector<double>, 3>& v,
                   const std::string& base) {
    std::vector<SvgSeries> s;
    for (int p = 0; p < 3; ++p)
      s.push_back({base + "_" + kPhaseName[p], tr.t, v[static_cast<size_t>(p)]});
    return s;
  };
  std::vector<SvgPanel> panels;
  panels.push_back({"line currents", "t [s]", "i [A]", three(tr.i_line, "i")});
  panels.push_back(
      {"module terminal voltages", "t [s]", "v_m [V]", three(tr.v_m, "vm")});
  panels.push_back({"source power", "t [s]", "[W] / [var]",
                    {{"p_src", tr.t, tr.p_src}, {"q_src", tr.t, tr.q_src}}});
  panels.push_back(
      {"module dc links", "t [s]", "v [V]", three(tr.v_dcm, "vdcm")});
  panels.push_back({"shared dc link", "t [s]", "v [V]",
                    {{"vdc_shared", tr.t, tr.v_dc_shared}}});
  return panels;
}

RunManifest build_manifest(const Scenario& sc, const RunResult& rr,
                           const Metrics& m, const AnalyticReport& ar,
                           std::vector<std::string> outputs) {
  RunManifest man;
  man.scenario_name = sc.name;
  man.scenario_hash = scenario_hash_hex(sc);
  man.fidelity =
      sc.sim.fidelity == Fidelity::Switched ? "switched" : "averaged";
  man.dt = sc.sim.dt;
  man.t_end = sc.sim.t_end;
  man.trace_schema = kTraceSchema;
  man.metrics_schema = kMetricsSchema;
  man.outputs = std::move(outputs);

  const bool settled = m.intervals.empty() ? false : m.intervals.back().settled;
  man.checks.push_back({"energy_balance", rr.energy.ok,
                        "relative residual " +
                            format_sig9(rr.energy.residual_rel)});
  man.checks.push_back({"final_interval_settled", settled,
                        "trailing current phasor stable"});
  man.checks.push_back({"analytic_current", ar.worst_i_err <= 0.01,
                        "worst relative error " + format_sig9(ar.worst_i_err)});
  man.checks.push_back({"analytic_power", ar.worst_s_err <= 0.02,
                        "worst relative error " + format_sig9(ar.worst_s_err)});
  man.pass = true;
  for (const auto& c : man.checks) man.pass = man.pass && c.pass;
  return man;
}

void print_interval_summary(const Metrics& m) {
  for (const auto& im : m.intervals) {
    std::printf("  interval %d  [%s, %s] s\n", im.index,
                fmt("%.4g", im.t_start).c_str(), fmt("%.4g", im.t_end).c_str());
    for (int p = 0; p < 3; ++p) {
      const auto u = static_cast<size_t>(p);
      std::printf(
          "    %s %-16s |I|=%8.3f A  ang %7.2f deg  thd %5.2f%%  P_mod %9.2f W"
          "  settle %s\n",
          kPhaseName[p], im.command[u].c_str(), im.i[u].mag(),
          im.i[u].angle_deg(), 100.0 * im.thd_i[u], im.p_mod_w[u],
          im.settle_s[u] < 0 ? "never" : fmt("%.3fs", im.settle_s[u]).c_str());
    }
    std::printf("    source P = %10.2f W   Q = %10.2f var   settled: %s\n",
                im.p_src_w, im.q_src_var, im.settled ? "yes" : "no");
  }
}

/// Run one scenario into out_dir; returns the manifest (written last).
RunManifest run_one(Scenario sc, const std::string& out_dir, bool charts) {
  std::filesystem::create_directories(out_dir);
  const RunResult rr = run(sc);
  const Metrics m = compute_metrics(rr.trace, rr.scenario);
  const AnalyticReport ar = compare_to_analytic(rr, m);

  std::vector<std::string> outputs = {"trace.csv", "metrics.csv"};
  write_trace_csv(join(out_dir, "trace.csv"), rr.trace);
  write_metrics_csv(join(out_dir, "metrics.csv"), m);
  if (charts) {
    write_text_atomic(join(out_dir, "charts.svg"),
                      render_svg(run_chart_panels(rr.trace)));
    outputs.push_back("charts.svg");
  }
  outputs.push_back("manifest.json");
  RunManifest man = build_manifest(rr.scenario, rr, m, ar, std::move(outputs));
  write_manifest(join(out_dir, "manifest.json"), man);

  std::printf("scenario %s (%s, dt=%s s, t_end=%s s)\n",
              rr.scenario.name.c_str(), man.fidelity.c_str(),
              format_sig9(man.dt).c_str(), format_sig9(man.t_end).c_str());
  print_interval_summary(m);
  if (rr.any_overmod)
    std::printf("  note: over-modulation range entered during the run\n");
  if (rr.any_saturated)
    std::printf("  note: commanded voltage exceeded the bridge ceiling\n");
  for (const auto& c : man.checks)
    std::printf("  check %-24s %s  (%s)\n", c.name.c_str(),
                c.pass ? "PASS" : "FAIL", c.note.c_str());
  std::printf("  wrote %s\n", out_dir.c_str());
  return man;
}

int cmd_run(const RunOptions& opt) {
  Scenario sc = load_scenario_file(opt.scenario_path);
  apply_overrides(sc, opt);
  std::string out = opt.out_dir;
  if (out.empty()) out = join(out_root(), sc.name);
  const RunManifest man = run_one(std::move(sc), out, opt.charts);
  return man.pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// cases
// ---------------------------------------------------------------------------

int cmd_cases_list() {
  for (char id : shipped_case_ids())
    std::printf("%c  %s\n", id, case_summary(id).c_str());
  return 0;
}

int cmd_cases_run_all(const RunOptions& opt) {
  std::string root = opt.out_dir;
  if (root.empty()) root = join(out_root(), "cases");
  bool any_check_failed = false;
  bool any_diverged = false;
  std::vector<std::string> lines;
  for (char id : shipped_case_ids()) {
    Scenario sc = build_case(id);
    apply_overrides(sc, opt);
    const std::string dir = join(root, std::string("case_") + id);
    try {
      const RunManifest man = run_one(std::move(sc), dir, opt.charts);
      any_check_failed = any_check_failed || !man.pass;
      lines.push_back(std::string("case ") + id + ": " +
                      (man.pass ? "PASS" : "FAIL (built-in checks)"));
    } catch (const SimAbort& ex) {
      any_diverged = true;
      lines.push_back(std::string("case ") + id + ": FAIL (diverged: " +
                      ex.what() + ")");
    }
    std::printf("\n");
  }
  std::printf("summary:\n");
  for (const auto& l : lines) std::printf("  %s\n", l.c_str());
  if (any_diverged) return 3;
  return any_check_failed ? 1 : 0;
}

// ---------------------------------------------------------------------------
// envelope
// ---------------------------------------------------------------------------

struct EnvelopeOptions {
  EnvelopeQuery q;
  int points = 181;
  std::string out_dir;
};

int cmd_envelope(const EnvelopeOptions& opt) {
  const EnvelopeQuery& q = opt.q;
  const double dv = max_inphase_diff(q.v_dc, q.allow_overmod);
  const double beta = parity_max_phase(q.v1_rms, q.v_dc, q.allow_overmod);
  const double gamma = global_max_phase(q.v1_rms, q.v_dc, q.allow_overmod);
  const RegulationCircle circle = regulation_circle(q);

  std::printf("coverage limits (v1=%s V, v2=%s V, vdc=%s V, x=%s ohm, %s)\n",
              fmt("%.6g", q.v1_rms).c_str(), fmt("%.6g", q.v2_rms).c_str(),
              fmt("%.6g", q.v_dc).c_str(), fmt("%.6g", q.x_line).c_str(),
              q.allow_overmod ? "over-modulation allowed" : "linear range");
  std::printf("  max in-phase difference   dV_max = %8.3f V rms\n", dv);
  std::printf("  equal-magnitude max angle beta   = %8.4f deg\n", beta);
  std::printf("  global max angle          gamma  = %8.4f deg\n", gamma);
  std::printf("  regulation radius per phase      = %8.1f VA "
              "(center P=%.1f W, Q=%.1f var)\n",
              circle.radius_va, circle.center.p_w, circle.center.q_var);

  std::string out = opt.out_dir;
  if (out.empty()) out = join(out_root(), "envelope");
  std::filesystem::create_directories(out);

  std::string limits;
  limits += "# difq envelope limits schema 1\n";
  limits += "name,value,unit\n";
  limits += "dv_max," + format_sig9(dv) + ",V\n";
  limits += "beta_max," + format_sig9(beta) + ",deg\n";
  limits += "gamma_max," + format_sig9(gamma) + ",deg\n";
  limits += "regulation_radius," + format_sig9(circle.radius_va) + ",VA\n";
  limits += "regulation_center_p," + format_sig9(circle.center.p_w) + ",W\n";
  limits += "regulation_center_q," + format_sig9(circle.center.q_var) + ",var\n";
  write_text_atomic(join(out, "limits.csv"), limits);

  const std::pair<RegionKind, const char*> regions[] = {
      {RegionKind::ReactiveComp, "region_reactive_comp.csv"},
      {RegionKind::ActiveComp, "region_active_comp.csv"},
      {RegionKind::TwoGridLimits, "region_two_grid_limits.csv"},
      {RegionKind::Regulation, "region_regulation.csv"},
  };
  std::vector<SvgPanel> panels;
  for (const auto& [kind, leaf] : regions) {
    const RegionBoundary rb = sample_region(kind, q, opt.points);
    write_region_csv(join(out, leaf), rb);
    SvgPanel panel;
    panel.title = std::string(leaf).substr(7,
        std::string(leaf).size() - 7 - 4);  // strip "region_" and ".csv"
    panel.x_label = rb.x_label;
    panel.y_label = rb.y_label;
    SvgSeries s;
    s.label = "boundary";
    for (const auto& pt : rb.points) {
      s.x.push_back(pt[0]);
      s.y.push_back(pt[1]);
    }
    panel.series.push_back(std::move(s));
    panels.push_back(std::move(panel));
  }
  write_text_atomic(join(out, "regions.svg"), render_svg(panels));
  std::printf("  wrote %s\n", out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// loss
// ---------------------------------------------------------------------------

struct LossOptions {
  double i_rms = 100.0;
  double p_inject_w = 10e3;
  double b_peak = 1.5;
  std::string sweep = "10:10000:61";
  bool amplitude_3db = false;
  std::string out_dir;
};

void parse_sweep(const std::string& text, double& lo, double& hi, int& n) {
  double a = 0.0, b = 0.0;
  int k = 0;
  const int got = std::sscanf(text.c_str(), "%lf:%lf:%d", &a, &b, &k);
  if (got < 2)
    throw std::invalid_argument("loss: --sweep expects lo:hi[:n], got '" +
                                text + "'");
  lo = a;
  hi = b;
  if (got >= 3) n = k;
}

int cmd_loss(const LossOptions& opt) {
  BertottiParams bp;
  bp.b_peak = opt.b_peak;
  double f_lo = 10.0, f_hi = 10e3;
  int n = 61;
  parse_sweep(opt.sweep, f_lo, f_hi, n);

  const CoreLoss at50 = bertotti_loss(bp, 50.0);
  std::printf("core loss at 50 Hz: hysteresis %.1f W, eddy %.1f W, "
              "total %.1f W\n",
              at50.hysteresis_w, at50.eddy_w, at50.total());

  const BandwidthResult bw =
      bandwidth_3db(opt.p_inject_w, bp, opt.amplitude_3db);
  std::printf("injection-path bandwidth at P=%s W (threshold H=%s): ",
              fmt("%.6g", opt.p_inject_w).c_str(),
              opt.amplitude_3db ? "0.707" : "0.5");
  if (bw.converged)
    std::printf("%.0f Hz\n", bw.f_hz);
  else
    std::printf("not reached below the search ceiling\n");

  const LossTable table = loss_lineup(LossLineup::shipped_default(), opt.i_rms);
  std::printf("conduction/semiconductor lineup at %.1f A rms:\n", opt.i_rms);
  for (const auto& row : table.rows) {
    std::printf("  %-28s %-11s %8.2f W", row.name.c_str(),
                row.path == LossPath::Direct ? "direct" : "transformer",
                row.watts);
    if (row.check_watts >= 0.0)
      std::printf("  (cross-check %.2f W%s)", row.check_watts,
                  row.check_disagrees ? ", DISAGREES" : "");
    std::printf("\n");
  }
  std::printf("  direct chain total      %8.2f W\n", table.direct_total_w);
  std::printf("  transformer chain total %8.2f W\n", table.transformer_total_w);

  const FaultRatings fr = fault_ratings(FaultSpec{});
  std::printf("protection sizing: nominal %.1f A, prospective short %.1f A, "
              "I2t %.4g A^2 s\n",
              fr.i_nominal_a, fr.i_short_a, fr.i2t_a2s);

  std::string out = opt.out_dir;
  if (out.empty()) out = join(out_root(), "loss");
  std::filesystem::create_directories(out);
  write_text_atomic(join(out, "bertotti_sweep.csv"),
                    bertotti_sweep_csv(bp, opt.p_inject_w, f_lo, f_hi, n));
  write_text_atomic(join(out, "lineup.csv"), loss_table_csv(table));
  write_text_atomic(join(out, "fault.csv"), fault_csv(fr));
  std::printf("  wrote %s\n", out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "difq: series-injection power controller simulator and analyzer"};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run_cmd = app.add_subcommand(
      "run", "Simulate a scenario file (or cases/<ID>) and write artifacts");
  run_cmd->add_option("scenario", run_opt.scenario_path,
                      "Scenario document path, or cases/<ID> for a shipped study")
      ->required();
  run_cmd->add_option("--out", run_opt.out_dir,
                      "Output directory (default <root>/<scenario name>)");
  run_cmd->add_option("--fidelity", run_opt.fidelity,
                      "averaged | switched (switched refines dt automatically)")
      ->check(CLI::IsMember({"averaged", "switched"}));
  run_cmd->add_option("--dt", run_opt.dt, "Integration step override [s]");
  run_cmd->add_option("--t-end", run_opt.t_end, "Stop time override [s]");
  run_cmd->add_option("--decimation", run_opt.decimation,
                      "Record every Nth step (default: keep sample spacing)");
  run_cmd->add_flag("--charts", run_opt.charts, "Also render charts.svg");

  RunOptions cases_opt;
  CLI::App* cases_cmd =
      app.add_subcommand("cases", "List or batch-run the shipped studies");
  cases_cmd->require_subcommand(1);
  CLI::App* cases_list =
      cases_cmd->add_subcommand("list", "One line per shipped study");
  CLI::App* cases_run_all = cases_cmd->add_subcommand(
      "run-all", "Run every shipped study into per-case directories");
  cases_run_all->add_option("--out", cases_opt.out_dir,
                            "Output root (default <root>/cases)");
  cases_run_all->add_option("--fidelity", cases_opt.fidelity,
                            "averaged | switched")
      ->check(CLI::IsMember({"averaged", "switched"}));
  cases_run_all->add_option("--t-end", cases_opt.t_end,
                            "Stop time override [s]");
  cases_run_all->add_flag("--charts", cases_opt.charts,
                          "Also render charts.svg per case");

  EnvelopeOptions env_opt;
  CLI::App* env_cmd = app.add_subcommand(
      "envelope", "Closed-form coverage limits and region boundaries");
  env_cmd->add_option("--v1", env_opt.q.v1_rms, "Sending phase voltage [V rms]");
  env_cmd->add_option("--v2", env_opt.q.v2_rms,
                      "Receiving phase voltage [V rms]");
  env_cmd->add_option("--vdc", env_opt.q.v_dc, "Module dc-link voltage [V]");
  env_cmd->add_option("--xline", env_opt.q.x_line, "Line reactance [ohm]");
  env_cmd->add_option("--theta", env_opt.q.theta_deg,
                      "Grid angle difference [deg]");
  env_cmd->add_flag("--overmod", env_opt.q.allow_overmod,
                    "Use the over-modulation injection ceiling");
  env_cmd->add_option("--points", env_opt.points, "Boundary samples (>= 16)");
  env_cmd->add_option("--out", env_opt.out_dir,
                      "Output directory (default <root>/envelope)");

  LossOptions loss_opt;
  CLI::App* loss_cmd = app.add_subcommand(
      "loss", "Core-loss sweep, conduction lineup and protection sizing");
  loss_cmd->add_option("--i-rms", loss_opt.i_rms, "Lineup rms current [A]");
  loss_cmd->add_option("--p-inject", loss_opt.p_inject_w,
                       "Injected power for the transfer-gain column [W]");
  loss_cmd->add_option("--b-peak", loss_opt.b_peak, "Peak flux density [T]");
  loss_cmd->add_option("--sweep", loss_opt.sweep,
                       "Core-loss sweep range lo:hi[:n] [Hz]");
  loss_cmd->add_flag("--amplitude-3db", loss_opt.amplitude_3db,
                     "Bandwidth threshold H=1/sqrt(2) instead of H=0.5");
  loss_cmd->add_option("--out", loss_opt.out_dir,
                       "Output directory (default <root>/loss)");

  try {
    app.parse(argc, argv);
    if (run_cmd->parsed()) return cmd_run(run_opt);
    if (cases_cmd->parsed()) {
      if (cases_list->parsed()) return cmd_cases_list();
      if (cases_run_all->parsed()) return cmd_cases_run_all(cases_opt);
    }
    if (env_cmd->parsed()) return cmd_envelope(env_opt);
    if (loss_cmd->parsed()) return cmd_loss(loss_opt);
    std::fprintf(stderr, "error: no subcommand selected\n");
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const SimAbort& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 4;
  } catch (...) {
    std::fprintf(stderr, "internal error: unknown exception\n");
    return 4;
  }
}
