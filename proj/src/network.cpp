#include "difq/network.hpp"

#include <cmath>
#include <stdexcept>

namespace difq {

double GridSegment::phase_rms(int ph) const {
  const double o = per_phase_v_rms[static_cast<std::size_t>(ph)];
  return o >= 0.0 ? o : v_ll_rms / kSqrt3;
}

double GridSegment::phase_angle(int ph) const {
  return phase_offset - static_cast<double>(ph) * kTwoPi / 3.0;
}

double GridSegment::instantaneous(int ph, double t) const {
  const double theta = kTwoPi * freq_hz * t + phase_angle(ph);
  const double base = phase_rms(ph);
  double v = kSqrt2 * base * std::cos(theta);
  for (const auto& h : harmonics) {
    v += kSqrt2 * base * h.magnitude_pu *
         std::cos(static_cast<double>(h.order) * theta + h.phase_rad);
  }
  return v;
}

ScheduleEntry ScheduleEntry::uniform(double t, Command c) {
  ScheduleEntry e;
  e.t = t;
  e.cmd = {c, c, c};
  return e;
}

double Scenario::series_l() const {
  return line.x_ohm / omega() + filter_l_h;
}

Complex Scenario::series_z() const {
  return {line.r_ohm, line.x_ohm + omega() * filter_l_h};
}

void Scenario::validate() const {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("scenario: " + msg);
  };
  if (!(left.freq_hz > 0.0)) fail("left.freq_hz must be > 0");
  if (!(left.v_ll_rms > 0.0)) fail("left.v_ll_rms must be > 0");
  if (topology == Topology::TwoGrid) {
    if (!right) fail("two_grid topology needs a right segment");
    if (load) fail("two_grid topology must not carry a load");
    if (right->freq_hz != left.freq_hz) fail("segments must share a frequency");
  } else {
    if (!load) fail("load_case topology needs a load");
    if (right) fail("load_case topology must not carry a right segment");
    if (load->r_ohm < 0.0 || load->x_ohm < 0.0) fail("load impedance must be >= 0");
    if (load->r_ohm == 0.0 && load->x_ohm == 0.0) fail("load impedance must be nonzero");
  }
  if (line.r_ohm < 0.0 || line.x_ohm < 0.0) fail("line impedance must be >= 0");
  if (!(filter_l_h > 0.0)) fail("filter_l_h must be > 0");
  if (!(module.v_dc_nom > 0.0)) fail("module.v_dc_nom must be > 0");
  if (!(module.c_dc_f > 0.0)) fail("module.c_dc_f must be > 0");
  if (!(module.f_sw_hz > 0.0)) fail("module.f_sw_hz must be > 0");
  if (!(module.llc.efficiency > 0.0) || module.llc.efficiency > 1.0) {
    fail("module.llc.efficiency must lie in (0, 1]");
  }
  if (!(module.llc.ratio > 0.0)) fail("module.llc.ratio must be > 0");
  if (!(shared_link.v_ref > 0.0) || !(shared_link.c_f > 0.0)) {
    fail("shared link parameters must be > 0");
  }
  if (!(afe.l_h > 0.0)) fail("afe.l_h must be > 0");
  if (schedule.empty()) fail("schedule must not be empty");
  if (schedule.front().t != 0.0) fail("schedule must start at t = 0");
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (schedule[i].t <= schedule[i - 1].t) fail("schedule times must increase");
  }
  for (const auto& e : schedule) {
    if (e.t < 0.0 || e.t >= sim.t_end) fail("schedule time outside [0, t_end)");
    for (const auto& c : e.cmd) {
      if (const auto* bh = std::get_if<BlockHarmonics>(&c)) {
        for (int o : bh->orders) {
          if (o < 2) fail("harmonic-null order must be >= 2");
        }
      }
      if (const auto* rc = std::get_if<RegulateCurrent>(&c)) {
        if (rc->i_rms < 0.0) fail("current reference must be >= 0");
      }
      if (const auto* iv = std::get_if<InjectVoltage>(&c)) {
        if (iv->v_rms < 0.0) fail("voltage reference must be >= 0");
      }
      if (std::holds_alternative<CompensateQ>(c) ||
          std::holds_alternative<CompensateP>(c)) {
        if (topology != Topology::LoadCase) {
          fail("compensation commands need a load topology");
        }
      }
    }
  }
  for (const auto& h : left.harmonics) {
    if (h.order < 2) fail("harmonic order must be >= 2");
    if (h.magnitude_pu < 0.0) fail("harmonic magnitude must be >= 0");
  }
  if (control.damping_r_ohm < 0.0) fail("damping_r_ohm must be >= 0");
  if (!(sim.dt > 0.0)) fail("sim.dt must be > 0");
  if (!(sim.t_end > sim.dt)) fail("sim.t_end must exceed dt");
  if (sim.record_decimation < 1) fail("sim.record_decimation must be >= 1");
  if (sim.dt * omega() >= 0.05) fail("sim.dt too coarse for the fundamental");
}

Phasor steady_state_current(const Phasor& v1, const Phasor& v2,
                            const Phasor& vm, Complex z) {
  if (std::abs(z) < 1e-12) {
    throw std::invalid_argument("steady_state_current: impedance is ~0");
  }
  return Phasor((v2.c() - v1.c() - vm.c()) / z);
}

Complex module_apparent_power(const Phasor& vm, const Phasor& v1,
                              const Phasor& v2, Complex z) {
  const Phasor i = steady_state_current(v1, v2, vm, z);
  return vm.c() * std::conj(i.c());
}

LoadFlowResult load_flow(const RlLoad& load, const Phasor& v_source,
                         const LineImpedance& z, const Phasor& vm) {
  const Complex zt = z.z() + load.z();
  if (std::abs(zt) < 1e-12) {
    throw std::invalid_argument("load_flow: total impedance is ~0");
  }
  LoadFlowResult r;
  r.i = Phasor((v_source.c() - vm.c()) / zt);
  const Complex s = 3.0 * v_source.c() * std::conj(r.i.c());
  r.p_source_w = s.real();
  r.q_source_var = s.imag();
  return r;
}

namespace {

Scenario common_scaffold() {
  Scenario sc;
  sc.left.v_ll_rms = 400.0;
  sc.left.phase_offset = 0.0;
  sc.left.freq_hz = 50.0;
  sc.line = {0.02, 0.01};
  sc.filter_l_h = 200e-6;
  sc.sim.dt = 10e-6;
  sc.sim.t_end = 0.6;
  sc.sim.record_decimation = 2;
  return sc;
}

constexpr double kEnable = 0.38;
constexpr double kStep2 = 0.46;
constexpr double kStep3 = 0.54;

}  // namespace

Scenario build_case(char id) {
  Scenario sc = common_scaffold();
  const double v_nom = 400.0 / kSqrt3;
  switch (id) {
    case 'A': {
      sc.name = "case_A";
      sc.topology = Topology::LoadCase;
      sc.load = RlLoad{22.0, 4.0};
      // Full reactive shielding of this load needs ~42 V rms of injection,
      // beyond the 34 V linear ceiling of a 48 V link.
      sc.control.allow_overmod = true;
      sc.schedule.push_back(ScheduleEntry::uniform(0.0, Bypass{}));
      sc.schedule.push_back(ScheduleEntry::uniform(kEnable, CompensateQ{}));
      break;
    }
    case 'B': {
      sc.name = "case_B";
      sc.topology = Topology::LoadCase;
      sc.load = RlLoad{4.0, 22.0};
      sc.control.allow_overmod = true;
      sc.schedule.push_back(ScheduleEntry::uniform(0.0, Bypass{}));
      sc.schedule.push_back(ScheduleEntry::uniform(kEnable, CompensateP{}));
      break;
    }
    case 'C': {
      sc.name = "case_C";
      sc.topology = Topology::TwoGrid;
      sc.right = sc.left;
      sc.right->v_ll_rms = 390.0;
      // Hold zero exchange, then 20 A at unity power factor toward the weak
      // side, rotate to purely reactive, then reverse the active flow.
      sc.schedule.push_back(ScheduleEntry::uniform(0.0, RegulateCurrent{0.0, 0.0}));
      sc.schedule.push_back(ScheduleEntry::uniform(kEnable, RegulateCurrent{20.0, 0.0}));
      sc.schedule.push_back(
          ScheduleEntry::uniform(kStep2, RegulateCurrent{20.0, -kPi / 2.0}));
      sc.schedule.push_back(ScheduleEntry::uniform(kStep3, RegulateCurrent{20.0, kPi}));
      break;
    }
    case 'D': {
      sc.name = "case_D";
      sc.topology = Topology::TwoGrid;
      sc.right = sc.left;
      sc.right->phase_offset = 8.0 * kPi / 180.0;
      sc.schedule.push_back(ScheduleEntry::uniform(0.0, RegulateCurrent{0.0, 0.0}));
      sc.schedule.push_back(ScheduleEntry::uniform(kEnable, RegulateCurrent{20.0, 0.0}));
      sc.schedule.push_back(ScheduleEntry::uniform(kStep2, RegulateCurrent{20.0, kPi}));
      sc.schedule.push_back(
          ScheduleEntry::uniform(kStep3, RegulateCurrent{20.0, -kPi / 2.0}));
      break;
    }
    case 'E': {
      sc.name = "case_E";
      sc.topology = Topology::LoadCase;
      sc.load = RlLoad{22.0, 0.0};  // resistive: distortion maps 1:1 to current
      sc.left.harmonics.push_back({3, 0.10, -25.0 * kPi / 180.0});
      sc.left.harmonics.push_back({5, 0.05, 35.0 * kPi / 180.0});
      sc.schedule.push_back(ScheduleEntry::uniform(0.0, Bypass{}));
      sc.schedule.push_back(
          ScheduleEntry::uniform(kEnable, BlockHarmonics{{3, 5}}));
      break;
    }
    case 'F': {
      sc.name = "case_F";
      sc.topology = Topology::LoadCase;
      sc.load = RlLoad{5.0, 0.0};
      sc.left.per_phase_v_rms = {245.0, 230.0, 200.0};
      sc.schedule.push_back(ScheduleEntry::uniform(0.0, Bypass{}));
      // Each module injects its own phase's deviation from nominal,
      // collinear with the phase voltage (bucking above, boosting below).
      ScheduleEntry e;
      e.t = kEnable;
      for (int ph = 0; ph < 3; ++ph) {
        const double dev = sc.left.per_phase_v_rms[static_cast<std::size_t>(ph)] - v_nom;
        e.cmd[static_cast<std::size_t>(ph)] =
            InjectVoltage{std::abs(dev), dev >= 0.0 ? 0.0 : kPi};
      }
      sc.schedule.push_back(e);
      break;
    }
    default:
      throw std::invalid_argument(std::string("build_case: unknown case id '") +
                                  id + "'");
  }
  sc.validate();
  return sc;
}

PhasePrediction predict_phase(const Scenario& sc, const Command& cmd,
                              int phase) {
  PhasePrediction out;
  const Phasor v1 = Phasor::from_polar(sc.left.phase_rms(phase),
                                       sc.left.phase_angle(phase));
  const bool two_grid = sc.topology == Topology::TwoGrid;
  const Phasor v2 = (two_grid && sc.right)
                        ? Phasor::from_polar(sc.right->phase_rms(phase),
                                             sc.right->phase_angle(phase))
                        : Phasor{};
  const Complex z_load =
      (!two_grid && sc.load) ? sc.load->z() : Complex{0.0, 0.0};
  const Complex z_path = sc.series_z() + z_load;
  if (std::abs(z_path) < 1e-12) {
    out.defined = false;
    return out;
  }

  const auto solve_current = [&](const Phasor& vm) {
    return Phasor((v1.c() - v2.c() - vm.c()) / z_path);
  };

  if (std::holds_alternative<Bypass>(cmd) ||
      std::holds_alternative<BlockHarmonics>(cmd)) {
    // Harmonic nulling leaves the fundamental untouched.
    out.v_m = Phasor{};
    out.i = solve_current(out.v_m);
  } else if (const auto* rc = std::get_if<RegulateCurrent>(&cmd)) {
    out.i = Phasor::from_polar(rc->i_rms, v1.angle() + rc->phase_rad);
    out.v_m = Phasor(v1.c() - v2.c() - out.i.c() * z_path);
  } else if (const auto* iv = std::get_if<InjectVoltage>(&cmd)) {
    out.v_m = Phasor::from_polar(iv->v_rms, v1.angle() + iv->phase_rad);
    out.i = solve_current(out.v_m);
  } else {
    // Compensation commands exist for load topology only.
    if (!sc.load) {
      out.defined = false;
      return out;
    }
    const Complex i0 = v1.c() / z_path;          // pre-command current
    const Complex s0 = v1.c() * std::conj(i0);   // pre-command phase power
    if (std::holds_alternative<CompensateQ>(cmd)) {
      out.i = Phasor::from_polar(s0.real() / v1.mag(), v1.angle());
    } else {
      out.i = Phasor::from_polar(s0.imag() / v1.mag(), v1.angle() - kPi / 2.0);
    }
    out.v_m = Phasor(v1.c() - out.i.c() * z_path);
  }
  out.s_m = out.v_m.c() * std::conj(out.i.c());
  return out;
}

std::vector<char> shipped_case_ids() { return {'A', 'B', 'C', 'D', 'E', 'F'}; }

std::string case_summary(char id) {
  switch (id) {
    case 'A':
      return "mixed RL load, reactive power shielded from the source";
    case 'B':
      return "mostly reactive load, active power shielded from the source";
    case 'C':
      return "400V/390V segments: zero hold, 20A active, reactive, reversed";
    case 'D':
      return "equal magnitude segments 8deg apart: bidirectional P and Q";
    case 'E':
      return "distorted source: 3rd/5th harmonic currents nulled";
    case 'F':
      return "unbalanced phases 245/230/200V: per-phase deviation injection";
    default:
      throw std::invalid_argument(std::string("case_summary: unknown case id '") +
                                  id + "'");
  }
}

}  // namespace difq
