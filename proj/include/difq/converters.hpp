#pragma once
/**
 * @file converters.hpp
 * @brief Power-stage models: the floating series H-bridge with its dc-link
 *        capacitor, the fixed-ratio isolated dc/dc channel feeding it, and
 *        the shared dc link behind the shunt front end.
 *
 * These are pure evaluation helpers; the engine owns the states and
 * integrates them (explicit trapezoidal), so every function here is either
 * a terminal-quantity map or a time derivative.
 */

#include "difq/network.hpp"

namespace difq {

struct FloatingModuleState {
  double v_dc = 48.0;
  double c_dc = 20e-3;
  double duty = 0.0;  ///< latest commanded leg-difference duty
};

/// Averaged-fidelity terminal voltage.
inline double module_terminal_averaged(double duty, double v_dc) {
  return duty * v_dc;
}

/**
 * Switched-fidelity gate state in {-1, 0, +1}: unipolar PWM, both legs
 * compared against one triangular carrier of period 1/f_sw starting at zero
 * (rising) at t = 0. Constant duty d yields pulses of average exactly d and
 * ripple at twice the switching rate. Multiply by v_dc for terminal volts.
 */
int module_gate_switched(double duty, double t, double f_sw);

/**
 * Mean of module_gate_switched over [t0, t1], evaluated in closed form from
 * the comparator geometry. A fixed-step integrator that point-samples the
 * gate and holds it quantises every pulse width to the step size (10 steps
 * per carrier period resolve the duty in increments of 0.2); applying the
 * interval mean instead keeps the volt-seconds of each step exact at any
 * step size, while steps that contain no switching edge still see the full
 * ±1/0 gate.
 */
double module_gate_mean(double duty, double t0, double t1, double f_sw);

/**
 * dc-link voltage derivative: C dv/dt = gate*i_line + p_llc/v_dc, i.e. the
 * bridge commutates the absorbed line current onto the capacitor and the
 * dc/dc channel contributes its power. v_dc is floored away from zero; the
 * engine aborts on collapse before the floor matters.
 */
double module_vdc_derivative(double gate_or_duty, double i_line, double p_llc,
                             double v_dc, double c_dc);

/// Power moved by the isolated dc/dc channel, module side and shared side.
/// p_shared is what the shared link must source (signed the same way).
struct LlcFlows {
  double p_module = 0.0;  ///< positive: power flowing into the module link
  double p_shared = 0.0;  ///< positive: power drawn from the shared link
};

/**
 * Droop channel: p_module = g*(v_shared/ratio - v_module). Efficiency is
 * applied in the direction of flow, so the shared side pays p/eta when
 * exporting to the module and receives p*eta when the module pushes back.
 * Antisymmetric in the voltage error.
 */
LlcFlows llc_transfer(const LlcParams& llc, double v_shared, double v_module);

/// Shared-link voltage derivative from the front-end import and the summed
/// dc/dc draw: C dv/dt = (p_afe - p_llc_total)/v.
double shared_link_derivative(double p_afe, double p_llc_total, double v_dc,
                              double c_f);

}  // namespace difq
