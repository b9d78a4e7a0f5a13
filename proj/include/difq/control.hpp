#pragma once
/**
 * @file control.hpp
 * @brief Closed-loop controllers: the shunt front end's dual-sequence dq
 *        current control with dc-link outer loop, the per-phase series
 *        module's synchronous current/voltage control with harmonic-nulling
 *        resonators, and the three-state bridge modulator.
 *
 * Phase controllers are fully independent objects: nothing is shared between
 * phases, so asymmetric grids and per-phase commands need no coordination.
 */

#include <array>
#include <vector>

#include "difq/network.hpp"
#include "difq/phasor.hpp"
#include "difq/sogi.hpp"

namespace difq {

/// PI with back-calculation anti-windup: after limiting, the integrator is
/// bled by the excess so the unlimited sum re-enters the bounds immediately.
struct PiController {
  double kp = 0.0;
  double ki = 0.0;  // [1/s]
  double out_min = -1e30;
  double out_max = 1e30;
  double integ = 0.0;

  double step(double err, double dt);
  void reset() { integ = 0.0; }
};

enum class BridgeMode { Bypass, SeriesPos, SeriesNeg };

struct ModulatorOutput {
  double duty = 0.0;  ///< leg-difference duty in [-1, 1]
  BridgeMode mode = BridgeMode::Bypass;
  bool overmod_active = false;  ///< instantaneous command beyond +-v_dc, clipped
  bool saturated = false;       ///< clipped where overmodulation was not allowed
};

/// duty = clamp(v_cmd/v_dc, -1, 1). Averaged fidelity outputs duty*v_dc
/// directly; switched fidelity realizes the duty with unipolar PWM.
/// Throws std::invalid_argument for v_dc <= 0.
ModulatorOutput modulate(double v_cmd, double v_dc, bool allow_overmod);

/// Fundamental amplitude (per unit of v_dc) of clamp(m*cos(theta), -1, 1)
/// for m >= 1: rises from 1 at m = 1 toward 4/pi as m grows.
double overmod_fundamental(double m);

/// Inverse of overmod_fundamental via Newton iteration; input is capped to
/// the value reachable at kOvermodCap. b1 <= 1 returns b1 (linear region).
double overmod_index(double b1);

inline constexpr double kOvermodCap = 10.0;

/// Resonant stage k_r*s/(s^2 + (h*omega1)^2), trapezoidally discretized.
/// Infinite dc gain at the target order nulls that order's current.
struct Resonator {
  int order = 3;
  double kr = 1500.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double e_prev = 0.0;

  double step(double err, double omega1, double dt);
  void reset();
};

/// Per-sample measurements handed to one phase's series controller.
struct SeriesMeas {
  double v_left = 0.0;   ///< instantaneous left-terminal (source-side) voltage
  double v_right = 0.0;  ///< instantaneous right-terminal voltage (grid or load)
  double i_line = 0.0;   ///< instantaneous line current (left -> right positive)
  double v_dcm = 0.0;    ///< module dc-link voltage
};

/**
 * One phase of the series injection control: SOGI-PLL on the local source
 * voltage, SOGI fundamental extraction of the line current, dq PI current
 * loops trimming around an analytic injection-voltage feedforward (resolved
 * once per command from the circuit solution), per-order resonant harmonic
 * nulling, and overmodulation-aware synthesis of the instantaneous voltage
 * command.
 */
class SeriesController {
 public:
  void configure(const Scenario& sc, int phase);

  /// Lock the synchronization and measurement filters to known phasors
  /// (absolute, t = 0) so a run starts from its analytic steady state.
  void init_locked(const Phasor& v_left, const Phasor& i_line);

  /// Switch the active command; references are resolved here (compensation
  /// commands resolve against the scenario's load analytically).
  void apply_command(const Command& c, const Scenario& sc);

  /// One control period: advances synchronization and filters, runs the
  /// active loops, and returns the modulator result for the bridge.
  ModulatorOutput step(const SeriesMeas& m, double dt);

  // Introspection for traces, metrics and tests.
  double theta() const { return pll_.theta; }
  double omega() const { return pll_.omega_hat; }
  const Command& active_command() const { return active_; }
  bool limited() const { return limited_; }
  DqSample current_dq() const;
  Phasor current_reference() const;  ///< rms phasor in the local frame

  /// Fundamental current loop: the dq PI pair on the reference error,
  /// returning the trim part of the voltage command in dq (peak-scaled).
  DqSample series_current_control(const DqSample& i_dq, const DqSample& i_ref,
                                  double dt);

  /// Resonant bank acting on the residual (measured minus fundamental)
  /// current; returns the additive instantaneous voltage command.
  double harmonic_block_step(double i_meas, double dt);

 private:
  enum class Mode { Bypass, Current, Voltage, Harmonic };

  double synthesize_fundamental(double vm_d, double vm_q, double theta,
                                double v_dcm);

  int phase_ = 0;
  double omega_nom_ = kTwoPi * 50.0;
  double omega_bank_ = kTwoPi * 50.0;  ///< low-passed frequency for the bank
  SeriesCtlParams prm_;

  SogiPll pll_;
  SogiState i_sogi_;
  PiController pi_d_, pi_q_;
  std::vector<Resonator> bank_;

  Mode mode_ = Mode::Bypass;
  Command active_ = Bypass{};
  double i_ref_d_ = 0.0, i_ref_q_ = 0.0;      // peak-scaled dq reference
  double vm_ff_d_ = 0.0, vm_ff_q_ = 0.0;      // analytic injection feedforward
  double v_inj_rms_ = 0.0, v_inj_phase_ = 0.0;  // open-loop injection
  bool limited_ = false;  ///< fundamental request hit the pre-modulator cap
};

/// Measurements for the shunt front end (currents flow grid -> converter).
struct AfeMeas {
  std::array<double, 3> v_abc{};
  std::array<double, 3> i_abc{};
  double v_dc = 0.0;
};

/**
 * Shunt front-end control: dual-SOGI positive-sequence PLL, decoupled
 * double-synchronous-frame current separation (low-pass cross-feedback),
 * PI pairs for both sequences with the grid-voltage feedforward and
 * cross-coupling cancellation, negative-sequence references pinned to zero,
 * and a dc-link voltage outer loop a decade below the current loop.
 */
class AfeController {
 public:
  void configure(const Scenario& sc);

  /// Lock to the grid's sequence phasors at t = 0 (zero converter current).
  void init_locked(const SequenceSet& v_seq);

  /// One control period; returns the three converter node-voltage commands.
  std::array<double, 3> step(const AfeMeas& m, double dt);

  double theta() const { return theta_; }
  Complex pos_current() const { return ip_filt_; }
  Complex neg_current() const { return in_filt_; }
  double d_current_ref() const { return id_ref_; }

 private:
  AfeParams prm_;
  double omega_nom_ = kTwoPi * 50.0;
  double v_ref_ = 700.0;

  SogiState sogi_a_, sogi_b_;  // on the Clarke pair of the grid voltage
  PiController pll_pi_;
  double theta_ = 0.0;
  double omega_hat_ = kTwoPi * 50.0;

  Complex ip_filt_{0.0, 0.0};  // decoupled sequence currents, low-passed
  Complex in_filt_{0.0, 0.0};
  PiController pi_pd_, pi_pq_, pi_nd_, pi_nq_, pi_v_;
  double id_ref_ = 0.0, iq_ref_ = 0.0;
};

}  // namespace difq
