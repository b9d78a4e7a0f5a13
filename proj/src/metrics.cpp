#include "difq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace difq {

namespace {

/// phasor_of_trace references its angle to the first sample of the window;
/// rotate back by the window start time to get the absolute (t = 0) frame.
Phasor to_absolute(const Phasor& win, double t0, double f_hz) {
  const double cyc = t0 * f_hz;
  const double frac = cyc - std::floor(cyc);
  const double ang = -kTwoPi * frac;
  return Phasor(win.c() * Complex{std::cos(ang), std::sin(ang)});
}

double rms_of(std::span<const double> w) {
  if (w.empty()) return 0.0;
  double acc = 0.0;
  for (double x : w) acc += x * x;
  return std::sqrt(acc / static_cast<double>(w.size()));
}

double mean_of(std::span<const double> w) {
  if (w.empty()) return 0.0;
  double acc = 0.0;
  for (double x : w) acc += x;
  return acc / static_cast<double>(w.size());
}

/// Settling comparison: < 1% magnitude and < 1 degree angle drift, with an
/// absolute floor for near-zero targets where angles are meaningless.
bool phasors_close(const Phasor& x, const Phasor& tgt) {
  const double m = tgt.mag();
  if (m < 0.5) return std::abs(x.c() - tgt.c()) < 0.05;
  if (std::abs(x.mag() - m) > 0.01 * m) return false;
  return std::abs(wrap_angle(x.angle() - tgt.angle())) <= kPi / 180.0;
}

}  // namespace

double thd_of_trace(std::span<const double> samples, double dt, double f_hz,
                    int cycles, int max_order) {
  const double fund = phasor_of_trace(samples, dt, f_hz, cycles).mag();
  if (fund < 1e-9) return 0.0;
  const double nyquist = 0.5 / dt;
  double acc = 0.0;
  for (int h = 2; h <= max_order; ++h) {
    const double fh = f_hz * static_cast<double>(h);
    if (fh >= 0.95 * nyquist) break;
    const double mag = phasor_of_trace(samples, dt, fh, cycles * h).mag();
    acc += mag * mag;
  }
  return std::sqrt(acc) / fund;
}

Phasor harmonic_of_trace(std::span<const double> samples, double dt,
                         double f_hz, int order, int cycles) {
  if (order < 1) throw std::invalid_argument("harmonic_of_trace: order >= 1");
  return phasor_of_trace(samples, dt, f_hz * order, cycles * order);
}

std::string command_name(const Command& c) {
  if (std::holds_alternative<Bypass>(c)) return "bypass";
  if (std::holds_alternative<RegulateCurrent>(c)) return "regulate_current";
  if (std::holds_alternative<InjectVoltage>(c)) return "inject_voltage";
  if (std::holds_alternative<CompensateQ>(c)) return "compensate_q";
  if (std::holds_alternative<CompensateP>(c)) return "compensate_p";
  return "block_harmonics";
}

std::vector<std::pair<double, double>> schedule_intervals(const Scenario& sc) {
  // Entries at or beyond the simulated horizon never take effect; the last
  // live interval is truncated to t_end so a shortened run still reports.
  std::vector<std::pair<double, double>> out;
  const double t_end = sc.sim.t_end;
  for (std::size_t k = 0; k < sc.schedule.size(); ++k) {
    const double ta = sc.schedule[k].t;
    if (ta >= t_end) break;
    const double tb = std::min(
        k + 1 < sc.schedule.size() ? sc.schedule[k + 1].t : t_end, t_end);
    out.emplace_back(ta, tb);
  }
  return out;
}

Metrics compute_metrics(const TraceSet& tr, const Scenario& sc) {
  Metrics m;
  m.f_hz = tr.f_hz > 0.0 ? tr.f_hz : sc.left.freq_hz;
  const double dt_s = tr.dt_sample;
  if (!(dt_s > 0.0) || tr.size() < 2)
    throw std::invalid_argument("metrics: empty or unsampled trace");
  const double exact_spc = 1.0 / (m.f_hz * dt_s);
  const auto spc = static_cast<long>(std::llround(exact_spc));
  if (spc < 8 ||
      std::abs(exact_spc - static_cast<double>(spc)) > 1e-6 * exact_spc) {
    throw std::invalid_argument(
        "metrics: sampling step does not divide the fundamental period");
  }
  const auto idx_of = [&](double t) {
    const auto i = static_cast<long>(std::llround(t / dt_s));
    return std::clamp<long>(i, 0, static_cast<long>(tr.size()) - 1);
  };
  const auto window = [&](const std::vector<double>& v, long start, long n) {
    return std::span<const double>(v.data() + start,
                                   static_cast<std::size_t>(n));
  };

  int index = 0;
  for (const auto& [ta, tb] : schedule_intervals(sc)) {
    IntervalMetrics im;
    im.index = index;
    im.t_start = ta;
    im.t_end = tb;
    const long ia = idx_of(ta);
    const long ie = idx_of(tb);  // inclusive end sample
    const long cyc_avail = (ie - ia) / spc;
    if (cyc_avail < 1) {
      throw std::invalid_argument(
          "metrics: schedule interval starting at t=" + std::to_string(ta) +
          " s holds less than one fundamental cycle");
    }
    const int wc = static_cast<int>(std::min<long>(2, cyc_avail));
    im.window_cycles = wc;
    const long n_win = static_cast<long>(wc) * spc;
    const long w0 = ie + 1 - n_win;
    const double t0 = tr.t[static_cast<std::size_t>(w0)];

    for (int ph = 0; ph < 3; ++ph) {
      const auto u = static_cast<std::size_t>(ph);
      im.command[u] =
          command_name(sc.schedule[static_cast<std::size_t>(index)].cmd[u]);
      const auto w_v1 = window(tr.v_left[u], w0, n_win);
      const auto w_i = window(tr.i_line[u], w0, n_win);
      const auto w_vm = window(tr.v_m[u], w0, n_win);
      im.v1[u] = to_absolute(phasor_of_trace(w_v1, dt_s, m.f_hz, wc), t0, m.f_hz);
      im.i[u] = to_absolute(phasor_of_trace(w_i, dt_s, m.f_hz, wc), t0, m.f_hz);
      im.vm[u] = to_absolute(phasor_of_trace(w_vm, dt_s, m.f_hz, wc), t0, m.f_hz);
      im.i_rms[u] = rms_of(w_i);
      im.thd_i[u] = thd_of_trace(w_i, dt_s, m.f_hz, wc);
      // The per-module power channel is a full-rate mean over each sample
      // gap, so it stays alias-free when the bridge voltage is switched.
      im.p_mod_w[u] = mean_of(window(tr.p_m[u], w0, n_win));
    }
    im.p_src_w = mean_of(window(tr.p_src, w0, n_win));
    im.q_src_var = mean_of(window(tr.q_src, w0, n_win));

    // Drift check on the interval's tail: the last two single-cycle phasors
    // must agree. Earlier cycles are excluded on purpose — they hold the
    // command-switch transient, which says nothing about where the interval
    // ends up.
    if (cyc_avail >= 2) {
      bool ok = true;
      for (int ph = 0; ph < 3; ++ph) {
        const auto u = static_cast<std::size_t>(ph);
        const long wl = ie + 1 - spc;
        const long wp = wl - spc;
        const Phasor last = to_absolute(
            phasor_of_trace(window(tr.i_line[u], wl, spc), dt_s, m.f_hz, 1),
            tr.t[static_cast<std::size_t>(wl)], m.f_hz);
        const Phasor prev = to_absolute(
            phasor_of_trace(window(tr.i_line[u], wp, spc), dt_s, m.f_hz, 1),
            tr.t[static_cast<std::size_t>(wp)], m.f_hz);
        ok = ok && phasors_close(prev, last);
      }
      im.settled = ok;
    }

    // Earliest window from which the sliding phasor stays at the final value.
    const long j_max = cyc_avail - wc;
    for (int ph = 0; ph < 3; ++ph) {
      const auto u = static_cast<std::size_t>(ph);
      long earliest = -1;
      for (long j = j_max; j >= 0; --j) {
        const long we = ia + (wc + j) * spc;
        const long ws = we + 1 - n_win;
        const Phasor x = to_absolute(
            phasor_of_trace(window(tr.i_line[u], ws, n_win), dt_s, m.f_hz, wc),
            tr.t[static_cast<std::size_t>(ws)], m.f_hz);
        if (phasors_close(x, im.i[u])) {
          earliest = j;
        } else {
          break;
        }
      }
      if (earliest >= 0) {
        im.settle_s[u] =
            static_cast<double>((wc + earliest) * spc) * dt_s;
      }
    }
    m.intervals.push_back(im);
    ++index;
  }
  return m;
}

AnalyticReport compare_to_analytic(const RunResult& rr, const Metrics& m,
                                   int interval) {
  if (m.intervals.empty())
    throw std::invalid_argument("compare_to_analytic: no intervals");
  const int idx =
      interval < 0 ? static_cast<int>(m.intervals.size()) - 1 : interval;
  if (idx < 0 || idx >= static_cast<int>(m.intervals.size()))
    throw std::invalid_argument("compare_to_analytic: interval out of range");
  const Scenario& sc = rr.scenario;
  const IntervalMetrics& im = m.intervals[static_cast<std::size_t>(idx)];

  AnalyticReport rep;
  rep.interval_index = idx;
  rep.settled = im.settled;
  for (int ph = 0; ph < 3; ++ph) {
    const auto u = static_cast<std::size_t>(ph);
    PhaseComparison& pc = rep.phase[u];
    const Command& cmd = sc.schedule[static_cast<std::size_t>(idx)].cmd[u];
    pc.pred = predict_phase(sc, cmd, ph);
    pc.i_meas = im.i[u];
    pc.vm_meas = im.vm[u];
    pc.s_meas = pc.vm_meas.c() * std::conj(pc.i_meas.c());

    // Error scales: currents above the dead-band are judged against the
    // command itself; a near-zero command is judged against the current the
    // circuit would carry uncontrolled (how dead is the line, relatively).
    // Powers are scaled by the same current against the phase voltage.
    const double i_unctl = predict_phase(sc, Bypass{}, ph).i.mag();
    const double i_scale =
        pc.pred.i.mag() >= 0.5
            ? pc.pred.i.mag()
            : std::max({i_unctl, pc.pred.i.mag(), 1e-6});
    pc.i_err_rel = std::abs(pc.i_meas.c() - pc.pred.i.c()) / i_scale;
    const double v1m = sc.left.phase_rms(ph);
    const double s_den =
        std::max(std::abs(pc.pred.s_m), 0.02 * v1m * std::max(i_scale, 1e-3));
    pc.s_err_rel = std::abs(pc.s_meas - pc.pred.s_m) / s_den;
    rep.worst_i_err = std::max(rep.worst_i_err, pc.i_err_rel);
    rep.worst_s_err = std::max(rep.worst_s_err, pc.s_err_rel);
  }
  return rep;
}

}  // namespace difq
