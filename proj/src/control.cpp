#include "difq/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace difq {

namespace {

// Trim authority of the series current loops. Generous against the residual
// the PI pair has to cover, small against the analytic feedforward so a
// wound-up trim can never dominate the injection.
constexpr double kSeriesPiLimitV = 150.0;
// Bandwidth of the frequency estimate feeding the resonant bank (~2 Hz).
constexpr double kBankFreqLpfRad = 12.6;
// Feedback-part authority of the shunt current loops.
constexpr double kAfePiLimitV = 300.0;
constexpr double kDutyEps = 1e-12;

}  // namespace

double PiController::step(double err, double dt) {
  integ += ki * err * dt;
  const double u = kp * err + integ;
  const double u_lim = std::clamp(u, out_min, out_max);
  integ -= u - u_lim;  // back-calculation: keep the unlimited sum in bounds
  return u_lim;
}

ModulatorOutput modulate(double v_cmd, double v_dc, bool allow_overmod) {
  if (!(v_dc > 0.0)) {
    throw std::invalid_argument("modulate: v_dc must be > 0");
  }
  ModulatorOutput out;
  const double m = v_cmd / v_dc;
  out.duty = std::clamp(m, -1.0, 1.0);
  const bool clipped = std::abs(m) > 1.0;
  out.overmod_active = clipped;
  out.saturated = clipped && !allow_overmod;
  if (out.duty > kDutyEps) {
    out.mode = BridgeMode::SeriesPos;
  } else if (out.duty < -kDutyEps) {
    out.mode = BridgeMode::SeriesNeg;
  } else {
    out.mode = BridgeMode::Bypass;
  }
  return out;
}

double overmod_fundamental(double m) {
  if (m <= 1.0) return m;
  const double thc = std::acos(1.0 / m);  // clipping onset angle
  return (4.0 / kPi) *
         (std::sin(thc) +
          m * (kPi / 4.0 - 0.5 * thc - 0.25 * std::sin(2.0 * thc)));
}

double overmod_index(double b1) {
  if (b1 <= 1.0) return b1;
  const double cap = overmod_fundamental(kOvermodCap);
  if (b1 >= cap) return kOvermodCap;
  // Newton on b1(m) - target; derivative has the closed form below (the
  // clipping-angle terms cancel). b1 is concave increasing, so iterates
  // stay tame once clamped to the bracket.
  double m = 1.0 + 2.0 * (b1 - 1.0);
  for (int it = 0; it < 60; ++it) {
    m = std::clamp(m, 1.0 + 1e-15, kOvermodCap);
    const double thc = std::acos(1.0 / m);
    const double slope =
        (4.0 / kPi) * (kPi / 4.0 - 0.5 * thc - 0.25 * std::sin(2.0 * thc));
    const double f = overmod_fundamental(m) - b1;
    if (std::abs(f) < 1e-13 || slope <= 0.0) break;
    m -= f / slope;
  }
  return std::clamp(m, 1.0, kOvermodCap);
}

double Resonator::step(double err, double omega1, double dt) {
  const double w = static_cast<double>(order) * omega1;
  const double a = 0.5 * dt * w;
  const double det = 1.0 + a * a;
  const double r1 = s1 - a * s2 + 0.5 * dt * kr * (e_prev + err);
  const double r2 = a * s1 + s2;
  s1 = (r1 - a * r2) / det;
  s2 = (a * r1 + r2) / det;
  e_prev = err;
  return s1;
}

void Resonator::reset() {
  s1 = s2 = e_prev = 0.0;
}

void SeriesController::configure(const Scenario& sc, int phase) {
  phase_ = phase;
  prm_ = sc.control;
  omega_nom_ = sc.omega();
  omega_bank_ = omega_nom_;

  pll_ = SogiPll::with_bandwidth(prm_.pll_bw_hz, omega_nom_);
  pll_.sogi.k_gain = prm_.sogi_k;
  i_sogi_ = SogiState{};
  i_sogi_.omega = omega_nom_;
  i_sogi_.k_gain = prm_.sogi_k;

  pi_d_ = PiController{prm_.kp, prm_.ki, -kSeriesPiLimitV, kSeriesPiLimitV};
  pi_q_ = pi_d_;
  bank_.clear();
  mode_ = Mode::Bypass;
  active_ = Bypass{};
  i_ref_d_ = i_ref_q_ = 0.0;
  vm_ff_d_ = vm_ff_q_ = 0.0;
  v_inj_rms_ = v_inj_phase_ = 0.0;
  limited_ = false;
}

void SeriesController::init_locked(const Phasor& v_left, const Phasor& i_line) {
  pll_.init_locked(v_left.angle(), kSqrt2 * v_left.mag());
  sogi_init(i_sogi_, kSqrt2 * i_line.mag(), i_line.angle());
}

void SeriesController::apply_command(const Command& c, const Scenario& sc) {
  active_ = c;
  limited_ = false;
  vm_ff_d_ = vm_ff_q_ = 0.0;
  // The trim belongs to the command it trimmed: error integrated through the
  // previous interval (and through the switch transient) would otherwise
  // hold the new equilibrium off its reference for a long PI time constant.
  pi_d_.reset();
  pi_q_.reset();
  if (std::holds_alternative<Bypass>(c)) {
    mode_ = Mode::Bypass;
    bank_.clear();
    return;
  }
  if (const auto* iv = std::get_if<InjectVoltage>(&c)) {
    mode_ = Mode::Voltage;
    v_inj_rms_ = iv->v_rms;
    v_inj_phase_ = iv->phase_rad;
    return;
  }
  if (const auto* bh = std::get_if<BlockHarmonics>(&c)) {
    mode_ = Mode::Harmonic;
    bank_.clear();
    bank_.reserve(bh->orders.size());
    for (int o : bh->orders) {
      Resonator r;
      r.order = o;
      r.kr = prm_.harmonic_kr;
      bank_.push_back(r);
    }
    return;
  }
  if (std::holds_alternative<RegulateCurrent>(c) ||
      std::holds_alternative<CompensateQ>(c) ||
      std::holds_alternative<CompensateP>(c)) {
    if (!sc.load && (std::holds_alternative<CompensateQ>(c) ||
                     std::holds_alternative<CompensateP>(c))) {
      throw std::invalid_argument("compensation command without a load");
    }
    mode_ = Mode::Current;
    // Resolve the reference current and the steady-state injection voltage
    // from the circuit solution, rotated into the local synchronous frame.
    // The PI pair then only trims measurement and model error around the
    // feedforward instead of having to build up the injection itself.
    const PhasePrediction pred = predict_phase(sc, c, phase_);
    const Complex rot = std::polar(1.0, -sc.left.phase_angle(phase_));
    const Complex i_dq = kSqrt2 * pred.i.c() * rot;
    const Complex v_dq = kSqrt2 * pred.v_m.c() * rot;
    i_ref_d_ = i_dq.real();
    i_ref_q_ = i_dq.imag();
    vm_ff_d_ = v_dq.real();
    vm_ff_q_ = v_dq.imag();
    return;
  }
  throw std::logic_error("apply_command: unhandled command alternative");
}

DqSample SeriesController::series_current_control(const DqSample& i_dq,
                                                  const DqSample& i_ref,
                                                  double dt) {
  DqSample u;
  u.d = pi_d_.step(i_ref.d - i_dq.d, dt);
  u.q = pi_q_.step(i_ref.q - i_dq.q, dt);
  return u;
}

double SeriesController::harmonic_block_step(double i_meas, double dt) {
  const double residual = i_meas - i_sogi_.v_filt;
  double out = 0.0;
  for (auto& r : bank_) {
    out += r.step(residual, omega_bank_, dt);
  }
  return out;
}

double SeriesController::synthesize_fundamental(double vm_d, double vm_q,
                                                double theta, double v_dcm) {
  const double amp = std::hypot(vm_d, vm_q);
  if (amp < 1e-12 || v_dcm <= 1e-9) return 0.0;
  const double unit = (vm_d * std::cos(theta) - vm_q * std::sin(theta)) / amp;
  const double b1_req = amp / v_dcm;
  const double b1_cap =
      prm_.allow_overmod ? overmod_fundamental(kOvermodCap) : 1.0;
  double b1_eff = b1_req;
  if (b1_req > b1_cap) {
    b1_eff = b1_cap;
    limited_ = true;
  }
  // Beyond the linear region the command is stretched so that the clipped
  // waveform's fundamental equals the requested amplitude.
  const double a_inst =
      (b1_eff <= 1.0 ? b1_eff : overmod_index(b1_eff)) * v_dcm;
  return a_inst * unit;
}

ModulatorOutput SeriesController::step(const SeriesMeas& m, double dt) {
  const double theta = pll_.step(m.v_left, dt);
  sogi_step(i_sogi_, m.i_line, dt);
  // Resonator centers follow the grid frequency only quasi-statically: the
  // raw estimate ripples under voltage distortion, and a rippling center
  // frequency intermodulates the blocking voltages into other orders.
  omega_bank_ += (pll_.omega_hat - omega_bank_) *
                 std::min(1.0, kBankFreqLpfRad * dt);

  const double v_dcm = std::max(m.v_dcm, 1e-6);
  // The command is held for one control period, so evaluate the waveform at
  // the window centre: without the half-step advance the applied fundamental
  // lags the intent, which shows up as a current bias on low-impedance paths.
  const double th_syn = theta + 0.5 * pll_.omega_hat * dt;
  double v_cmd = 0.0;
  switch (mode_) {
    case Mode::Bypass:
      break;
    case Mode::Current: {
      // Freeze the integrators for the step after the fundamental request
      // hit the ceiling, so an unreachable reference cannot wind them up.
      const double dt_pi = limited_ ? 0.0 : dt;
      limited_ = false;
      const DqSample i_dq = sogi_dq(i_sogi_, theta);
      const DqSample u =
          series_current_control(i_dq, {i_ref_d_, i_ref_q_}, dt_pi);
      v_cmd = synthesize_fundamental(vm_ff_d_ - u.d, vm_ff_q_ - u.q, th_syn,
                                     v_dcm);
      // Virtual series resistance on the instantaneous tracking error: adds
      // damping during transients and vanishes once the line current rides
      // the reference.
      const double i_ref_inst =
          i_ref_d_ * std::cos(th_syn) - i_ref_q_ * std::sin(th_syn);
      v_cmd += prm_.damping_r_ohm * (m.i_line - i_ref_inst);
      break;
    }
    case Mode::Voltage: {
      limited_ = false;
      const double amp = kSqrt2 * v_inj_rms_;
      v_cmd = synthesize_fundamental(amp * std::cos(v_inj_phase_),
                                     amp * std::sin(v_inj_phase_), th_syn,
                                     v_dcm);
      break;
    }
    case Mode::Harmonic:
      v_cmd = harmonic_block_step(m.i_line, dt);
      break;
  }
  return modulate(v_cmd, v_dcm, prm_.allow_overmod);
}

DqSample SeriesController::current_dq() const {
  return sogi_dq(i_sogi_, pll_.theta);
}

Phasor SeriesController::current_reference() const {
  return Phasor::from_polar(std::hypot(i_ref_d_, i_ref_q_) / kSqrt2,
                            std::atan2(i_ref_q_, i_ref_d_));
}

void AfeController::configure(const Scenario& sc) {
  prm_ = sc.afe;
  omega_nom_ = sc.omega();
  v_ref_ = sc.shared_link.v_ref;

  sogi_a_ = SogiState{};
  sogi_a_.omega = omega_nom_;
  sogi_b_ = sogi_a_;

  const double wn_pll = kTwoPi * 20.0;
  pll_pi_ = PiController{2.0 * 0.707 * wn_pll, wn_pll * wn_pll, -0.5 * omega_nom_,
                         0.5 * omega_nom_};
  theta_ = 0.0;
  omega_hat_ = omega_nom_;

  const double w_i = kTwoPi * prm_.current_bw_hz;
  const double kp_i = prm_.l_h * w_i;
  const double ki_i = kp_i * (prm_.r_ohm / prm_.l_h);
  pi_pd_ = PiController{kp_i, ki_i, -kAfePiLimitV, kAfePiLimitV};
  pi_pq_ = pi_pd_;
  pi_nd_ = pi_pd_;
  pi_nq_ = pi_pd_;

  const double w_v = kTwoPi * prm_.vdc_bw_hz;
  const double v_pk = kSqrt2 * sc.left.v_ll_rms / kSqrt3;
  const double kp_v = w_v * sc.shared_link.c_f * v_ref_ / (1.5 * v_pk);
  pi_v_ = PiController{kp_v, kp_v * w_v / 4.0, -prm_.i_limit_a, prm_.i_limit_a};

  ip_filt_ = in_filt_ = Complex{0.0, 0.0};
  id_ref_ = iq_ref_ = 0.0;
}

void AfeController::init_locked(const SequenceSet& v_seq) {
  theta_ = v_seq.pos.angle();
  omega_hat_ = omega_nom_;
  pll_pi_.reset();
  const Complex vp = kSqrt2 * v_seq.pos.c();
  const Complex vn = kSqrt2 * v_seq.neg.c();
  const Complex va = vp + vn;                      // alpha-channel phasor
  const Complex vb = Complex{0.0, -1.0} * (vp - vn);  // beta-channel phasor
  sogi_init(sogi_a_, std::abs(va), std::arg(va));
  sogi_init(sogi_b_, std::abs(vb), std::arg(vb));
  ip_filt_ = in_filt_ = Complex{0.0, 0.0};
  pi_pd_.reset();
  pi_pq_.reset();
  pi_nd_.reset();
  pi_nq_.reset();
  pi_v_.reset();
}

std::array<double, 3> AfeController::step(const AfeMeas& m, double dt) {
  const auto vab = clarke(m.v_abc[0], m.v_abc[1], m.v_abc[2]);
  sogi_a_.omega = omega_hat_;
  sogi_b_.omega = omega_hat_;
  sogi_step(sogi_a_, vab[0], dt);
  sogi_step(sogi_b_, vab[1], dt);

  // Sequence split of the filtered voltage: quadrature = 90 degrees lag.
  const double vpa = 0.5 * (sogi_a_.v_filt - sogi_b_.v_quad);
  const double vpb = 0.5 * (sogi_a_.v_quad + sogi_b_.v_filt);
  const double vna = 0.5 * (sogi_a_.v_filt + sogi_b_.v_quad);
  const double vnb = 0.5 * (sogi_b_.v_filt - sogi_a_.v_quad);

  const double vamp = std::max(std::hypot(vpa, vpb), 1e-9);
  const double vq = -vpa * std::sin(theta_) + vpb * std::cos(theta_);
  omega_hat_ = omega_nom_ + pll_pi_.step(vq / vamp, dt);
  theta_ = wrap_angle(theta_ + omega_hat_ * dt);

  const auto iab = clarke(m.i_abc[0], m.i_abc[1], m.i_abc[2]);
  const Complex i_ab{iab[0], iab[1]};
  const Complex e_jt = std::polar(1.0, theta_);
  const Complex rot2 = e_jt * e_jt;
  // Double-frame separation: each frame sees the other sequence at 2w;
  // subtracting the low-passed opposite estimate decouples them.
  const Complex dec_p = i_ab * std::conj(e_jt) - in_filt_ * std::conj(rot2);
  const Complex dec_n = i_ab * e_jt - ip_filt_ * rot2;
  const double a_f = std::min(1.0, kTwoPi * prm_.seq_filter_hz * dt);
  ip_filt_ += a_f * (dec_p - ip_filt_);
  in_filt_ += a_f * (dec_n - in_filt_);

  id_ref_ = pi_v_.step(v_ref_ - m.v_dc, dt);
  iq_ref_ = std::clamp(-2.0 * prm_.q_ref_var / (3.0 * vamp), -prm_.i_limit_a,
                       prm_.i_limit_a);

  const Complex v_p_dq = Complex{vpa, vpb} * std::conj(e_jt);
  const Complex v_n_dq = Complex{vna, vnb} * e_jt;
  const double wl = omega_hat_ * prm_.l_h;

  const double upd = v_p_dq.real() - pi_pd_.step(id_ref_ - ip_filt_.real(), dt) +
                     wl * ip_filt_.imag();
  const double upq = v_p_dq.imag() - pi_pq_.step(iq_ref_ - ip_filt_.imag(), dt) -
                     wl * ip_filt_.real();
  const double und = v_n_dq.real() - pi_nd_.step(0.0 - in_filt_.real(), dt) -
                     wl * in_filt_.imag();
  const double unq = v_n_dq.imag() - pi_nq_.step(0.0 - in_filt_.imag(), dt) +
                     wl * in_filt_.real();

  const Complex u_ab = Complex{upd, upq} * e_jt + Complex{und, unq} * std::conj(e_jt);
  return dq_to_abc(u_ab.real(), u_ab.imag(), 0.0);
}

}  // namespace difq
