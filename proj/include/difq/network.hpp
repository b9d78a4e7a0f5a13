#pragma once
/**
 * @file network.hpp
 * @brief Circuit description (sources, line, load, converter and controller
 *        parameters), the shipped study cases, and the steady-state phasor
 *        solutions used both for command resolution and for checking the
 *        time-domain engine.
 */

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "difq/phasor.hpp"

namespace difq {

/// One voltage harmonic riding on a source, phase-referenced to h*theta of
/// the local phase so that order 3 is a zero-sequence set and order 5 a
/// negative-sequence set, as physical distortion is.
struct Harmonic {
  int order = 0;
  double magnitude_pu = 0.0;  ///< relative to the phase fundamental
  double phase_rad = 0.0;
};

/// Stiff three-phase source. Phase a is v(t) = sqrt(2)*V*cos(w t + offset);
/// b and c follow at -120/+120 degrees.
struct GridSegment {
  double v_ll_rms = 400.0;      ///< line-to-line fundamental
  double phase_offset = 0.0;    ///< [rad]
  double freq_hz = 50.0;
  /// Optional per-phase rms overrides (line-to-neutral); NaN = use v_ll/sqrt3.
  std::array<double, 3> per_phase_v_rms{kNoOverride, kNoOverride, kNoOverride};
  std::vector<Harmonic> harmonics;

  static constexpr double kNoOverride = -1.0;
  double phase_rms(int ph) const;          ///< resolved per-phase rms
  double phase_angle(int ph) const;        ///< offset - ph*120deg
  double instantaneous(int ph, double t) const;  ///< fundamental + harmonics
};

struct LineImpedance {
  double r_ohm = 0.0;
  double x_ohm = 0.0;  ///< at the fundamental frequency
  Complex z() const { return {r_ohm, x_ohm}; }
};

struct RlLoad {
  double r_ohm = 0.0;
  double x_ohm = 0.0;  ///< at the fundamental frequency
  Complex z() const { return {r_ohm, x_ohm}; }
};

// ---------------------------------------------------------------------------
// Commands a series module chain can execute. References are defined against
// the local phase voltage angle tracked by each module's PLL.
// ---------------------------------------------------------------------------

struct Bypass {};

/// Track a line-current phasor of i_rms at phase_rad relative to the local
/// phase voltage (0 = unity power factor, -pi/2 = lagging/reactive).
struct RegulateCurrent {
  double i_rms = 0.0;
  double phase_rad = 0.0;
};

/// Open-loop injection of v_rms at phase_rad relative to the local phase
/// voltage (pi = collinear bucking reversed, i.e. boosting the far side).
struct InjectVoltage {
  double v_rms = 0.0;
  double phase_rad = 0.0;
};

/// Shield the source from the load's reactive power: line current is driven
/// in phase with the source voltage while the pre-command active power is
/// preserved. Resolved analytically from the load solution when activated.
struct CompensateQ {};

/// Shield the source from the load's active power: line current is driven to
/// quadrature (lagging) while the pre-command reactive power is preserved.
struct CompensateP {};

/// Null the listed current harmonics with per-order resonant loops; the
/// fundamental is left to flow naturally.
struct BlockHarmonics {
  std::vector<int> orders;
};

using Command = std::variant<Bypass, RegulateCurrent, InjectVoltage,
                             CompensateQ, CompensateP, BlockHarmonics>;

/// Commands switch at fixed times; one entry per phase allows per-phase
/// injection (unbalance duty is inherently per-phase work).
struct ScheduleEntry {
  double t = 0.0;
  std::array<Command, 3> cmd{Bypass{}, Bypass{}, Bypass{}};

  static ScheduleEntry uniform(double t, Command c);
};

// ---------------------------------------------------------------------------
// Converter / controller parameterization
// ---------------------------------------------------------------------------

struct LlcParams {
  double ratio = 700.0 / 48.0;   ///< shared-link volts per module volt
  double efficiency = 1.0;       ///< applied in the direction of flow, (0,1]
  double droop_w_per_v = 2000.0; ///< restoring power per volt of link error
};

struct ModuleParams {
  double v_dc_nom = 48.0;
  double f_sw_hz = 100e3;
  double c_dc_f = 20e-3;
  double v_dc_min = 10.0;  ///< collapse threshold; the run aborts below this
  LlcParams llc;
};

struct SharedLinkParams {
  double v_ref = 700.0;
  double c_f = 3e-3;
};

struct AfeParams {
  double l_h = 5e-3;
  double r_ohm = 0.05;
  double current_bw_hz = 200.0;  ///< inner current loop bandwidth target
  double vdc_bw_hz = 20.0;       ///< outer dc-voltage loop bandwidth target
  double seq_filter_hz = 30.0;   ///< sequence-separation low-pass corner
  double i_limit_a = 40.0;       ///< d/q current reference clamp
  double q_ref_var = 0.0;        ///< shunt reactive set-point
};

struct SeriesCtlParams {
  double kp = 0.1;          ///< current-loop proportional gain [V/A]
  double ki = 1.0;          ///< current-loop integral gain [V/(A*s)]
  double sogi_k = kSqrt2;
  double pll_bw_hz = 20.0;
  double harmonic_kr = 1500.0;  ///< resonant gain of harmonic-null loops
  /// Virtual series resistance on the instantaneous tracking error [ohm].
  /// Vanishes on the reference trajectory; it only damps transients, which
  /// matters on lightly resistive lines whose natural decay is slower than
  /// a command interval.
  double damping_r_ohm = 2.0;
  bool allow_overmod = false;
};

enum class Fidelity { Averaged, Switched };

struct SimConfig {
  double dt = 10e-6;            ///< averaged default; switched runs use 1e-6
  double t_end = 0.6;
  Fidelity fidelity = Fidelity::Averaged;
  int record_decimation = 2;    ///< store every Nth step
  unsigned seed = 0;            ///< reserved; the engine is deterministic
};

enum class Topology { LoadCase, TwoGrid };

/// Complete, serializable description of one study.
struct Scenario {
  std::string name = "scenario";
  Topology topology = Topology::LoadCase;
  GridSegment left;
  std::optional<GridSegment> right;  ///< TwoGrid only
  std::optional<RlLoad> load;        ///< LoadCase only
  LineImpedance line{0.02, 0.01};
  double filter_l_h = 200e-6;        ///< total series filter inductance/phase
  ModuleParams module;
  SharedLinkParams shared_link;
  AfeParams afe;
  SeriesCtlParams control;
  std::vector<ScheduleEntry> schedule;
  SimConfig sim;

  double omega() const { return kTwoPi * left.freq_hz; }
  /// Loop inductance outside the load: line + filter.
  double series_l() const;
  /// Loop impedance outside the load at the fundamental: line + filter.
  Complex series_z() const;
  /// Throws std::invalid_argument with a diagnostic when inconsistent.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Steady-state solutions
// ---------------------------------------------------------------------------

/**
 * Line current with the receiving side taken as the higher-potential
 * reference: i = (v2 - v1 - vm) / z. vm is the module voltage counted as a
 * drop in the direction of this current.
 */
Phasor steady_state_current(const Phasor& v1, const Phasor& v2,
                            const Phasor& vm, Complex z);

/// Module apparent power S = vm * conj(i) with i from steady_state_current.
/// Positive real part = the module absorbs power from the line.
Complex module_apparent_power(const Phasor& vm, const Phasor& v1,
                              const Phasor& v2, Complex z);

struct LoadFlowResult {
  Phasor i;            ///< source -> load direction
  double p_source_w;   ///< three-phase total at the source terminal
  double q_source_var; ///< three-phase total, inductive positive
};

/**
 * Series solution of source -> line -> module -> load, balanced case:
 * i = (v_source - vm) / (z_line + z_load). Powers are S = 3 * V * conj(I)
 * at the source terminal.
 */
LoadFlowResult load_flow(const RlLoad& load, const Phasor& v_source,
                         const LineImpedance& z, const Phasor& vm);

/// Analytic steady-state solution of one phase under a given command.
struct PhasePrediction {
  Phasor i;          ///< line current, left-grid absolute frame
  Phasor v_m;        ///< fundamental injected voltage (drop in current sense)
  Complex s_m;       ///< single-phase complex power absorbed by the module
  bool defined = true;
};

/// Resolve the per-phase steady state a command drives the network to.
/// Shared by the controllers' command resolution, the engine warm start and
/// the analytic cross-checks.
PhasePrediction predict_phase(const Scenario& sc, const Command& cmd, int phase);

/// The shipped studies: 'A'..'F'.
Scenario build_case(char id);
std::vector<char> shipped_case_ids();
/// One-line description of a shipped case.
std::string case_summary(char id);

}  // namespace difq
