#pragma once
/**
 * @file metrics.hpp
 * @brief Post-processing of recorded runs: per-interval fundamental phasors,
 *        powers, rms, THD and settling detection, plus the bridge that
 *        compares settled intervals against the analytic steady state.
 */

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "difq/sim.hpp"

namespace difq {

/// Total harmonic distortion of the trailing `cycles` of a record: rms of
/// orders 2..max_order over the fundamental rms. Orders at or above the
/// sampling Nyquist are skipped. Returns 0 when the fundamental is absent.
double thd_of_trace(std::span<const double> samples, double dt, double f_hz,
                    int cycles, int max_order = 40);

/// Fundamental-frame rms phasor of one harmonic order over the trailing
/// `cycles` fundamental periods.
Phasor harmonic_of_trace(std::span<const double> samples, double dt,
                         double f_hz, int order, int cycles);

/// Human-readable command tag for reports ("bypass", "regulate_current", ...).
std::string command_name(const Command& c);

/// One schedule interval's summary. Phasors are rms in the absolute frame
/// (angle 0 = cosine at t = 0), extracted over the trailing window_cycles
/// full fundamental cycles of the interval.
struct IntervalMetrics {
  int index = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  std::array<std::string, 3> command;

  std::array<Phasor, 3> v1;  ///< left-terminal fundamentals
  std::array<Phasor, 3> i;   ///< line-current fundamentals
  std::array<Phasor, 3> vm;  ///< module-voltage fundamentals
  std::array<double, 3> i_rms{};
  std::array<double, 3> thd_i{};
  std::array<double, 3> p_mod_w{};  ///< module average power, trailing window

  double p_src_w = 0.0;    ///< source-side three-phase mean over the window
  double q_src_var = 0.0;

  /// Per-phase time from interval start until the sliding two-cycle current
  /// phasor stays within tolerance of the final one; -1 when never.
  std::array<double, 3> settle_s{-1.0, -1.0, -1.0};
  bool settled = false;  ///< trailing phasor stable (< 1% / < 1 deg drift)
  int window_cycles = 2;
};

struct Metrics {
  double f_hz = 0.0;
  std::vector<IntervalMetrics> intervals;
};

/// Command-schedule boundaries as [start, end) pairs covering (0, t_end].
std::vector<std::pair<double, double>> schedule_intervals(const Scenario& sc);

/// Throws std::invalid_argument when an interval holds less than one
/// fundamental cycle of samples or the sampling grid does not divide the
/// fundamental period.
Metrics compute_metrics(const TraceSet& tr, const Scenario& sc);

struct PhaseComparison {
  PhasePrediction pred;
  Phasor i_meas;   ///< absolute frame, trailing window
  Phasor vm_meas;
  Complex s_meas;  ///< vm_meas * conj(i_meas), single phase
  double i_err_rel = 0.0;
  double s_err_rel = 0.0;
};

struct AnalyticReport {
  int interval_index = 0;
  bool settled = false;
  std::array<PhaseComparison, 3> phase;
  double worst_i_err = 0.0;
  double worst_s_err = 0.0;
};

/**
 * Compare one interval (default: the last) of a run against the analytic
 * steady state its command implies. Current errors are relative to the
 * predicted current, with the uncontrolled (bypass) current as the scale
 * floor for near-zero commands; power errors are relative to the predicted
 * module power floored at 2% of the phase throughput.
 */
AnalyticReport compare_to_analytic(const RunResult& rr, const Metrics& m,
                                   int interval = -1);

}  // namespace difq
