#pragma once
/**
 * @file sogi.hpp
 * @brief Second-order generalized integrator (band-pass + quadrature
 *        generator) and the single-phase PLL built on top of it.
 *
 * Continuous-time model, tuned at omega with gain k:
 *
 *     d(v_filt)/dt = k*omega*(v_in - v_filt) - omega*v_quad
 *     d(v_quad)/dt = omega*v_filt
 *
 * which gives the classic transfer functions
 *     v_filt/v_in = k*w*s   / (s^2 + k*w*s + w^2)   (band-pass, unity at w)
 *     v_quad/v_in = k*w^2   / (s^2 + k*w*s + w^2)   (low-pass, lags 90 deg at w)
 *
 * Discretization is trapezoidal on both integrators; the 2x2 implicit step is
 * solved in closed form and the coefficients are cached per (dt, omega, k).
 */

#include "difq/phasor.hpp"

namespace difq {

struct SogiState {
  double v_filt = 0.0;  ///< band-pass output (fundamental estimate)
  double v_quad = 0.0;  ///< quadrature output, lags v_filt by 90 degrees
  double omega = kTwoPi * 50.0;  ///< tuned angular frequency [rad/s]
  double k_gain = kSqrt2;        ///< damping gain (sqrt(2) = classic choice)

  // -- implementation detail: previous input and cached step coefficients --
  double v_prev = 0.0;
  double c_h = -1.0, c_w = 0.0, c_k = 0.0;  // cache keys
  double m11 = 0, m12 = 0, m21 = 0, m22 = 0, g1 = 0, g2 = 0;
};

/**
 * Advance one fixed step. Throws std::invalid_argument for dt <= 0 and
 * std::domain_error when dt*omega >= 0.5 (discretization no longer trustworthy).
 */
void sogi_step(SogiState& s, double v_in, double dt);

/**
 * Warm-start the filter as if it had been tracking
 * amp_peak*cos(omega*t + phase) forever, evaluated at t = 0.
 */
void sogi_init(SogiState& s, double amp_peak, double phase);

/// dq projection of the SOGI outputs at angle theta (single-phase Park).
DqSample sogi_dq(const SogiState& s, double theta);

/**
 * Single-phase PLL: SOGI orthogonal pair, atan2-equivalent phase detector
 * (normalized q error) and a PI frequency trim around omega_nom.
 */
struct SogiPll {
  SogiState sogi;
  double omega_nom = kTwoPi * 50.0;
  double kp = 0.0;
  double ki = 0.0;
  double theta = 0.0;      ///< current phase estimate, wrapped to (-pi, pi]
  double omega_hat = 0.0;  ///< current frequency estimate [rad/s]
  double integ = 0.0;

  /// Configure gains for a given closed-loop bandwidth (zeta = 0.707).
  static SogiPll with_bandwidth(double bw_hz, double omega_nom);

  /// Lock the estimate to a known phase (deterministic start-up).
  void init_locked(double phase, double amp_peak);

  /// Feed one input sample; returns the updated phase estimate.
  double step(double v_in, double dt);
};

}  // namespace difq
