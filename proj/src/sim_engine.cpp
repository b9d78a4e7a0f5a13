#include "difq/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <variant>

#include "difq/control.hpp"
#include "difq/converters.hpp"

namespace difq {

namespace {

std::string fmt_t(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", t);
  return buf;
}

constexpr std::array<const char*, 3> kPhaseName{"a", "b", "c"};

}  // namespace

SimAbort::SimAbort(double t_abort, std::string state, const std::string& detail)
    : std::runtime_error("simulation aborted at t=" + fmt_t(t_abort) +
                         " s, state " + state + ": " + detail),
      t_(t_abort),
      state_(std::move(state)) {}

namespace {

struct EngineState {
  std::array<double, 3> i{};     // series loop currents
  std::array<double, 3> vdcm{};  // module links
  double ia = 0.0, ib = 0.0;     // front-end current, stationary pair
  double vsh = 0.0;              // shared link
};

struct EngineCtx {
  const Scenario* sc = nullptr;
  bool two_grid = false;
  bool averaged = true;
  double r_loop = 0.0, l_loop = 0.0;  // series loop totals (load folded in)
  double r_load = 0.0, l_load = 0.0;  // split back out for the right terminal
  double c_m = 0.0, c_sh = 0.0;
  double l_afe = 0.0, r_afe = 0.0;
  double f_sw = 0.0;
};

/// One derivative evaluation plus every instantaneous quantity the trace
/// and the energy ledger need at that point.
struct Derivs {
  std::array<double, 3> di{};
  std::array<double, 3> dvdcm{};
  double dia = 0.0, dib = 0.0, dvsh = 0.0;

  std::array<double, 3> e1{}, vm{}, v_right{};
  double p_src_series = 0.0;
  double p_src_afe = 0.0;
  double p_right = 0.0;
  double p_res = 0.0;
  double p_llc_loss = 0.0;
  double p_mod = 0.0;
  double q_src = 0.0;
  double q_mod = 0.0;
};

Derivs eval(const EngineCtx& cx, double t, const EngineState& s,
            const std::array<double, 3>& gate,
            const std::array<double, 2>& u_ab) {
  Derivs d;
  const Scenario& sc = *cx.sc;
  double llc_draw = 0.0;
  for (int ph = 0; ph < 3; ++ph) {
    const auto u = static_cast<std::size_t>(ph);
    const double i = s.i[u];
    d.e1[u] = sc.left.instantaneous(ph, t);
    d.vm[u] = gate[u] * s.vdcm[u];
    if (cx.two_grid) {
      const double e2 = sc.right->instantaneous(ph, t);
      d.di[u] = (d.e1[u] - e2 - cx.r_loop * i - d.vm[u]) / cx.l_loop;
      d.v_right[u] = e2;
      d.p_right += e2 * i;
    } else {
      d.di[u] = (d.e1[u] - cx.r_loop * i - d.vm[u]) / cx.l_loop;
      // The load terminal is reconstructed from the same derivative, so no
      // algebraic loop appears.
      d.v_right[u] = cx.r_load * i + cx.l_load * d.di[u];
    }
    const LlcFlows llc = llc_transfer(sc.module.llc, s.vsh, s.vdcm[u]);
    d.dvdcm[u] =
        module_vdc_derivative(gate[u], i, llc.p_module, s.vdcm[u], cx.c_m);
    llc_draw += llc.p_shared;
    d.p_src_series += d.e1[u] * i;
    d.p_res += i * i * cx.r_loop;
    d.p_llc_loss += llc.p_shared - llc.p_module;
    d.p_mod += d.vm[u] * i;
  }

  const auto v_ab = clarke(d.e1[0], d.e1[1], d.e1[2]);
  d.dia = (v_ab[0] - cx.r_afe * s.ia - u_ab[0]) / cx.l_afe;
  d.dib = (v_ab[1] - cx.r_afe * s.ib - u_ab[1]) / cx.l_afe;
  const double p_afe_dc = 1.5 * (u_ab[0] * s.ia + u_ab[1] * s.ib);
  d.p_src_afe = 1.5 * (v_ab[0] * s.ia + v_ab[1] * s.ib);
  d.p_res += 1.5 * cx.r_afe * (s.ia * s.ia + s.ib * s.ib);
  d.dvsh = shared_link_derivative(p_afe_dc, llc_draw, s.vsh, cx.c_sh);

  const auto i_ab = clarke(s.i[0], s.i[1], s.i[2]);
  d.q_src = 1.5 * (v_ab[1] * i_ab[0] - v_ab[0] * i_ab[1]);
  const auto vm_ab = clarke(d.vm[0], d.vm[1], d.vm[2]);
  d.q_mod = 1.5 * (vm_ab[1] * i_ab[0] - vm_ab[0] * i_ab[1]);
  return d;
}

double stored_energy(const EngineCtx& cx, const EngineState& s) {
  double e = 0.0;
  for (int ph = 0; ph < 3; ++ph) {
    const auto u = static_cast<std::size_t>(ph);
    e += 0.5 * cx.l_loop * s.i[u] * s.i[u];
    e += 0.5 * cx.c_m * s.vdcm[u] * s.vdcm[u];
  }
  // amplitude-invariant pair carries 3/2 of the per-phase energy sum
  e += 0.75 * cx.l_afe * (s.ia * s.ia + s.ib * s.ib);
  e += 0.5 * cx.c_sh * s.vsh * s.vsh;
  return e;
}

void check_state(const EngineCtx& cx, const EngineState& s, double t) {
  const Scenario& sc = *cx.sc;
  for (int ph = 0; ph < 3; ++ph) {
    const auto u = static_cast<std::size_t>(ph);
    const std::string suffix = std::string("[") + kPhaseName[u] + "]";
    if (!std::isfinite(s.i[u]))
      throw SimAbort(t, "i_line" + suffix, "non-finite value");
    if (std::abs(s.i[u]) > 1e4)
      throw SimAbort(t, "i_line" + suffix, "current diverged beyond 10 kA");
    if (!std::isfinite(s.vdcm[u]))
      throw SimAbort(t, "v_dc_module" + suffix, "non-finite value");
    if (s.vdcm[u] < sc.module.v_dc_min)
      throw SimAbort(t, "v_dc_module" + suffix,
                     "module dc link collapsed below " +
                         fmt_t(sc.module.v_dc_min) + " V");
  }
  if (!std::isfinite(s.ia) || !std::isfinite(s.ib))
    throw SimAbort(t, "i_afe", "non-finite value");
  if (std::abs(s.ia) > 1e4 || std::abs(s.ib) > 1e4)
    throw SimAbort(t, "i_afe", "current diverged beyond 10 kA");
  if (!std::isfinite(s.vsh))
    throw SimAbort(t, "v_dc_shared", "non-finite value");
  if (s.vsh < 0.2 * sc.shared_link.v_ref)
    throw SimAbort(t, "v_dc_shared", "shared dc link collapsed");
  if (s.vsh > 3.0 * sc.shared_link.v_ref)
    throw SimAbort(t, "v_dc_shared", "shared dc link overvoltage");
}

}  // namespace

RunResult run(const Scenario& scenario) {
  Scenario sc = scenario;
  sc.validate();

  EngineCtx cx;
  cx.sc = &sc;
  cx.two_grid = sc.topology == Topology::TwoGrid;
  cx.averaged = sc.sim.fidelity == Fidelity::Averaged;
  cx.r_load = (!cx.two_grid && sc.load) ? sc.load->r_ohm : 0.0;
  cx.l_load = (!cx.two_grid && sc.load) ? sc.load->x_ohm / sc.omega() : 0.0;
  cx.r_loop = sc.line.r_ohm + cx.r_load;
  cx.l_loop = sc.series_l() + cx.l_load;
  cx.c_m = sc.module.c_dc_f;
  cx.c_sh = sc.shared_link.c_f;
  cx.l_afe = sc.afe.l_h;
  cx.r_afe = sc.afe.r_ohm;
  cx.f_sw = sc.module.f_sw_hz;

  const double dt = sc.sim.dt;
  const auto n_steps = static_cast<long>(std::llround(sc.sim.t_end / dt));
  if (n_steps < 1)
    throw std::invalid_argument("sim: t_end is shorter than one step");
  const auto decim = static_cast<long>(sc.sim.record_decimation);
  const auto ctl_div = std::max<long>(
      1, std::llround(1.0 / (sc.module.f_sw_hz * dt)));
  if (!cx.averaged && ctl_div < 5) {
    throw std::invalid_argument(
        "sim: switched fidelity needs at least 5 steps per switching period "
        "(reduce dt)");
  }
  const double dt_ctl = static_cast<double>(ctl_div) * dt;

  // --- warm start at the analytic steady state of the first command ---
  std::array<SeriesController, 3> ctl;
  AfeController afe;
  afe.configure(sc);
  EngineState s;
  std::array<double, 3> duty{};
  ThreePhaseSet v_left_set;
  for (int ph = 0; ph < 3; ++ph) {
    const auto u = static_cast<std::size_t>(ph);
    ctl[u].configure(sc, ph);
    ctl[u].apply_command(sc.schedule.front().cmd[u], sc);
    const PhasePrediction pred =
        predict_phase(sc, sc.schedule.front().cmd[u], ph);
    const Phasor v1 = Phasor::from_polar(sc.left.phase_rms(ph),
                                         sc.left.phase_angle(ph));
    s.i[u] = pred.defined ? pred.i.instantaneous(0.0) : 0.0;
    s.vdcm[u] = sc.module.v_dc_nom;
    ctl[u].init_locked(v1, pred.i);
    duty[u] = pred.defined
                  ? std::clamp(pred.v_m.instantaneous(0.0) / s.vdcm[u], -1.0, 1.0)
                  : 0.0;
    Phasor* slot[3] = {&v_left_set.a, &v_left_set.b, &v_left_set.c};
    *slot[u] = v1;
  }
  s.vsh = sc.shared_link.v_ref;
  afe.init_locked(sequence_decompose(v_left_set));
  std::array<double, 2> u_ab =
      clarke(sc.left.instantaneous(0, 0.0), sc.left.instantaneous(1, 0.0),
             sc.left.instantaneous(2, 0.0));

  RunResult rr;
  rr.scenario = sc;
  TraceSet& tr = rr.trace;
  tr.dt_sample = dt * static_cast<double>(decim);
  tr.f_hz = sc.left.freq_hz;
  const auto reserve = static_cast<std::size_t>(n_steps / decim + 2);
  tr.t.reserve(reserve);
  for (auto& ch : tr.v_left) ch.reserve(reserve);
  for (auto& ch : tr.v_right) ch.reserve(reserve);
  for (auto& ch : tr.i_line) ch.reserve(reserve);
  for (auto& ch : tr.v_m) ch.reserve(reserve);
  for (auto& ch : tr.v_dcm) ch.reserve(reserve);
  for (auto& ch : tr.p_m) ch.reserve(reserve);
  tr.p_src.reserve(reserve);
  tr.q_src.reserve(reserve);
  tr.p_mod.reserve(reserve);
  tr.q_mod.reserve(reserve);
  tr.v_dc_shared.reserve(reserve);

  // Module-side channels are also integrated at the full step rate between
  // records: an instantaneous sample of the switched bridge voltage taken
  // every few carrier periods is stroboscopic, so the decimated trace would
  // alias the PWM into the fundamental band. The means over each sample gap
  // are alias-free in both fidelities.
  std::array<double, 3> vm_acc{}, pm_acc{};
  double qmod_acc = 0.0;
  long acc_steps = 0;

  const auto record = [&](double t, const Derivs& d, const EngineState& st) {
    const bool have_gap = acc_steps > 0;
    const double inv =
        have_gap ? 1.0 / (static_cast<double>(acc_steps) * dt) : 0.0;
    tr.t.push_back(t);
    for (std::size_t u = 0; u < 3; ++u) {
      tr.v_left[u].push_back(d.e1[u]);
      tr.v_right[u].push_back(d.v_right[u]);
      tr.i_line[u].push_back(st.i[u]);
      // Averaged runs keep the instantaneous sample (the waveform is smooth
      // and the sample marks the record instant exactly).
      tr.v_m[u].push_back(cx.averaged || !have_gap ? d.vm[u]
                                                   : vm_acc[u] * inv);
      tr.v_dcm[u].push_back(st.vdcm[u]);
      tr.p_m[u].push_back(have_gap ? pm_acc[u] * inv : d.vm[u] * st.i[u]);
    }
    tr.p_src.push_back(d.p_src_series);
    tr.q_src.push_back(d.q_src);
    if (cx.averaged || !have_gap) {
      tr.p_mod.push_back(d.p_mod);
      tr.q_mod.push_back(d.q_mod);
    } else {
      tr.p_mod.push_back((pm_acc[0] + pm_acc[1] + pm_acc[2]) * inv);
      tr.q_mod.push_back(qmod_acc * inv);
    }
    tr.v_dc_shared.push_back(st.vsh);
    vm_acc = {};
    pm_acc = {};
    qmod_acc = 0.0;
    acc_steps = 0;
  };

  // Switched fidelity applies the step-mean of the PWM comparator, which
  // keeps the volt-seconds of every pulse exact instead of quantising pulse
  // widths to the integration step.
  const auto sample_gates = [&](double t) {
    std::array<double, 3> g;
    for (std::size_t u = 0; u < 3; ++u) {
      g[u] = cx.averaged ? duty[u]
                         : module_gate_mean(duty[u], t, t + dt, cx.f_sw);
    }
    return g;
  };

  double e_src = 0.0, e_right = 0.0, e_res = 0.0, e_llc = 0.0;
  const double e_stored_0 = stored_energy(cx, s);
  std::size_t sched_idx = 0;

  for (long k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    std::array<double, 3> gate = sample_gates(t);
    Derivs d1 = eval(cx, t, s, gate, u_ab);
    if (k % decim == 0) record(t, d1, s);

    if (k % ctl_div == 0) {
      while (sched_idx + 1 < sc.schedule.size() &&
             t >= sc.schedule[sched_idx + 1].t - 1e-12) {
        ++sched_idx;
        for (std::size_t u = 0; u < 3; ++u) {
          ctl[u].apply_command(sc.schedule[sched_idx].cmd[u], sc);
        }
      }
      bool inputs_dirty = false;
      for (std::size_t u = 0; u < 3; ++u) {
        const SeriesMeas sm{d1.e1[u], d1.v_right[u], s.i[u], s.vdcm[u]};
        const ModulatorOutput mo =
            ctl[u].step(sm, dt_ctl);
        rr.any_overmod |= mo.overmod_active || ctl[u].limited();
        rr.any_saturated |= mo.saturated;
        inputs_dirty |= mo.duty != duty[u];
        duty[u] = mo.duty;
      }
      AfeMeas am;
      am.v_abc = {d1.e1[0], d1.e1[1], d1.e1[2]};
      am.i_abc = dq_to_abc(s.ia, s.ib, 0.0);
      am.v_dc = s.vsh;
      const auto u_abc = afe.step(am, dt_ctl);
      const auto u_new = clarke(u_abc[0], u_abc[1], u_abc[2]);
      inputs_dirty |= u_new != u_ab;
      u_ab = u_new;
      if (inputs_dirty) {
        gate = sample_gates(t);
        d1 = eval(cx, t, s, gate, u_ab);
      }
    }

    // explicit trapezoid with the step's inputs held
    EngineState sp = s;
    for (std::size_t u = 0; u < 3; ++u) {
      sp.i[u] += dt * d1.di[u];
      sp.vdcm[u] += dt * d1.dvdcm[u];
    }
    sp.ia += dt * d1.dia;
    sp.ib += dt * d1.dib;
    sp.vsh += dt * d1.dvsh;
    const Derivs d2 = eval(cx, t + dt, sp, gate, u_ab);
    const double h2 = 0.5 * dt;
    for (std::size_t u = 0; u < 3; ++u) {
      vm_acc[u] += h2 * (d1.vm[u] + d2.vm[u]);
      pm_acc[u] += h2 * (d1.vm[u] * s.i[u] + d2.vm[u] * sp.i[u]);
    }
    qmod_acc += h2 * (d1.q_mod + d2.q_mod);
    ++acc_steps;
    for (std::size_t u = 0; u < 3; ++u) {
      s.i[u] += h2 * (d1.di[u] + d2.di[u]);
      s.vdcm[u] += h2 * (d1.dvdcm[u] + d2.dvdcm[u]);
    }
    s.ia += h2 * (d1.dia + d2.dia);
    s.ib += h2 * (d1.dib + d2.dib);
    s.vsh += h2 * (d1.dvsh + d2.dvsh);

    e_src += h2 * (d1.p_src_series + d1.p_src_afe + d2.p_src_series +
                   d2.p_src_afe);
    e_right += h2 * (d1.p_right + d2.p_right);
    e_res += h2 * (d1.p_res + d2.p_res);
    e_llc += h2 * (d1.p_llc_loss + d2.p_llc_loss);

    check_state(cx, s, t + dt);
  }

  if (n_steps % decim == 0) {
    const double t = static_cast<double>(n_steps) * dt;
    const std::array<double, 3> gate = sample_gates(t);
    const Derivs df = eval(cx, t, s, gate, u_ab);
    record(t, df, s);
  }

  EnergyReport& er = rr.energy;
  er.delta_stored_j = stored_energy(cx, s) - e_stored_0;
  er.source_j = e_src;
  er.right_j = e_right;
  er.resistive_j = e_res;
  er.llc_loss_j = e_llc;
  const double balance =
      er.delta_stored_j - (e_src - e_right - e_res - e_llc);
  const double denom =
      std::max(1.0, std::abs(e_src) + std::abs(e_right) + std::abs(e_res) +
                        std::abs(e_llc) + std::abs(er.delta_stored_j));
  er.residual_rel = std::abs(balance) / denom;
  er.ok = er.residual_rel < 1e-4;
  return rr;
}

}  // namespace difq
