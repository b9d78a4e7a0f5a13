#include "difq/sogi.hpp"

#include <cmath>
#include <stdexcept>

namespace difq {

namespace {

// Refresh the cached trapezoidal step for x' = A x + B v with
//   A = [[-k*w, -w], [w, 0]],  B = [k*w, 0]^T.
// The implicit step (I - h/2 A) x+ = (I + h/2 A) x + h/2 B (v_prev + v_new)
// is solved with a closed-form 2x2 inverse.
void refresh_coeffs(SogiState& s, double h) {
  const double w = s.omega, k = s.k_gain;
  const double a11 = -k * w, a12 = -w, a21 = w;  // a22 = 0
  const double p = 0.5 * h;
  // I - p*A
  const double l11 = 1.0 - p * a11, l12 = -p * a12;
  const double l21 = -p * a21, l22 = 1.0;
  const double det = l11 * l22 - l12 * l21;
  const double i11 = l22 / det, i12 = -l12 / det;
  const double i21 = -l21 / det, i22 = l11 / det;
  // R = I + p*A
  const double r11 = 1.0 + p * a11, r12 = p * a12;
  const double r21 = p * a21, r22 = 1.0;
  s.m11 = i11 * r11 + i12 * r21;
  s.m12 = i11 * r12 + i12 * r22;
  s.m21 = i21 * r11 + i22 * r21;
  s.m22 = i21 * r12 + i22 * r22;
  // input gain: inv(L) * p * B
  s.g1 = i11 * p * k * w;
  s.g2 = i21 * p * k * w;
  s.c_h = h;
  s.c_w = w;
  s.c_k = k;
}

}  // namespace

void sogi_step(SogiState& s, double v_in, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("sogi_step: dt must be > 0");
  if (dt * s.omega >= 0.5) {
    throw std::domain_error("sogi_step: dt*omega >= 0.5, step too coarse");
  }
  if (dt != s.c_h || s.omega != s.c_w || s.k_gain != s.c_k) {
    refresh_coeffs(s, dt);
  }
  const double vsum = s.v_prev + v_in;
  const double x1 = s.m11 * s.v_filt + s.m12 * s.v_quad + s.g1 * vsum;
  const double x2 = s.m21 * s.v_filt + s.m22 * s.v_quad + s.g2 * vsum;
  s.v_filt = x1;
  s.v_quad = x2;
  s.v_prev = v_in;
}

void sogi_init(SogiState& s, double amp_peak, double phase) {
  s.v_filt = amp_peak * std::cos(phase);
  s.v_quad = amp_peak * std::sin(phase);
  s.v_prev = s.v_filt;
}

DqSample sogi_dq(const SogiState& s, double theta) {
  return park(s.v_filt, s.v_quad, theta);
}

SogiPll SogiPll::with_bandwidth(double bw_hz, double omega_nom_) {
  if (!(bw_hz > 0.0)) throw std::invalid_argument("SogiPll: bandwidth must be > 0");
  SogiPll p;
  p.omega_nom = omega_nom_;
  p.sogi.omega = omega_nom_;
  p.omega_hat = omega_nom_;
  const double wn = kTwoPi * bw_hz;
  p.kp = 2.0 * 0.707 * wn;
  p.ki = wn * wn;
  return p;
}

void SogiPll::init_locked(double phase, double amp_peak) {
  theta = wrap_angle(phase);
  omega_hat = omega_nom;
  integ = 0.0;
  sogi_init(sogi, amp_peak, phase);
}

double SogiPll::step(double v_in, double dt) {
  sogi_step(sogi, v_in, dt);
  const double amp = std::hypot(sogi.v_filt, sogi.v_quad);
  const DqSample dq = sogi_dq(sogi, theta);
  // q > 0 means the estimate lags the signal; push omega up.
  const double err = dq.q / (amp > 1e-9 ? amp : 1e-9);
  integ += ki * err * dt;
  omega_hat = omega_nom + kp * err + integ;
  theta = wrap_angle(theta + omega_hat * dt);
  return theta;
}

}  // namespace difq
