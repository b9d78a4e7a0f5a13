#pragma once
/**
 * @file sim.hpp
 * @brief Three-phase time-domain engine: series loop per phase, floating
 *        module links, shunt front end on a shared link, all advanced with
 *        an explicit trapezoidal (Heun) rule and zero-order-held controls.
 *
 * Continuous states:
 *   i_line[3]   series loop current per phase (left terminal -> right)
 *   v_dcm[3]    floating module dc-link voltages
 *   i_afe[2]    shunt front-end current in stationary alpha/beta coordinates
 *               (three-wire connection, so no zero-sequence path exists)
 *   v_shared    shared dc-link voltage behind the front end
 *
 * Controls run on a fixed period of one switching cycle and are held between
 * updates. Averaged fidelity applies duty*v_dcm as the series terminal
 * voltage; switched fidelity applies the unipolar PWM gate pattern, which
 * needs the finer step the scenario fidelity selects.
 */

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "difq/network.hpp"
#include "difq/phasor.hpp"

namespace difq {

/// Raised when the integration detects a non-physical or non-finite state.
/// Carries the simulation time and the offending state's name.
class SimAbort : public std::runtime_error {
 public:
  SimAbort(double t_abort, std::string state, const std::string& detail);
  double t() const { return t_; }
  const std::string& state() const { return state_; }

 private:
  double t_;
  std::string state_;
};

/// Recorded waveforms, decimated by SimConfig::record_decimation.
/// All per-phase arrays are indexed a=0, b=1, c=2.
struct TraceSet {
  double dt_sample = 0.0;  ///< seconds between consecutive samples
  double f_hz = 0.0;       ///< fundamental frequency of the left grid
  std::vector<double> t;
  std::array<std::vector<double>, 3> v_left;   ///< left terminal volts
  std::array<std::vector<double>, 3> v_right;  ///< right terminal volts
  std::array<std::vector<double>, 3> i_line;   ///< series loop amps
  std::array<std::vector<double>, 3> v_m;      ///< module terminal volts
  std::array<std::vector<double>, 3> v_dcm;    ///< module link volts
  std::array<std::vector<double>, 3> p_m;      ///< per-module power, mean over
                                               ///< the preceding sample gap
  std::vector<double> p_src;       ///< three-phase power leaving the left grid
  std::vector<double> q_src;       ///< instantaneous reactive power, left side
  std::vector<double> p_mod;       ///< three-phase power absorbed by modules
  std::vector<double> q_mod;       ///< instantaneous reactive power of modules
  std::vector<double> v_dc_shared; ///< shared link volts

  std::size_t size() const { return t.size(); }
};

/// Trapezoidal energy bookkeeping accumulated from the same derivative
/// evaluations the integrator uses.
struct EnergyReport {
  double delta_stored_j = 0.0;  ///< stored-field change, end minus start
  double source_j = 0.0;        ///< from the left grid (series + shunt paths)
  double right_j = 0.0;         ///< delivered to the right grid (two-grid runs)
  double resistive_j = 0.0;     ///< dissipated in line/load/front-end resistance
  double llc_loss_j = 0.0;      ///< lost in the isolated dc/dc channels
  double residual_rel = 0.0;    ///< |balance error| / max(1 J, sum of |terms|)
  bool ok = false;              ///< residual_rel below 1e-4
};

struct RunResult {
  Scenario scenario;  ///< validated copy the run actually used
  TraceSet trace;
  EnergyReport energy;
  bool any_overmod = false;    ///< any module entered the overmodulation range
  bool any_saturated = false;  ///< any commanded voltage was truncated
};

/// Validate and run a scenario to completion. Throws SimAbort on divergence,
/// std::invalid_argument on a malformed scenario.
RunResult run(const Scenario& sc);

}  // namespace difq
