#pragma once
/**
 * @file loss.hpp
 * @brief Magnetic-core loss model, injection-path transfer gain/bandwidth,
 *        conduction-loss lineups and protection sizing arithmetic.
 */

#include <string>
#include <vector>

namespace difq {

/**
 * Two-term steel-core loss model (hysteresis + classical eddy currents):
 *
 *   P = ( eta * B^2 * f  +  pi^2 * t^2 * B^2 * f^2 / (6 * rho) ) * volume
 *
 * eta is the hysteresis material constant, t the lamination sheet thickness
 * [m], rho the electrical resistivity [ohm*m] and volume the core volume
 * [m^3]. Grain-oriented sheet is typically a fraction of a millimetre; the
 * default is 0.27 mm.
 */
struct BertottiParams {
  double eta = 15.0;             ///< hysteresis constant [W*s/(T^2*m^3)]
  double b_peak = 1.5;           ///< peak flux density [T]
  double thickness = 0.27e-3;    ///< lamination thickness [m]
  double resistivity = 0.48e-6;  ///< [ohm*m]
  double volume = 0.129;         ///< core volume [m^3]
};

struct CoreLoss {
  double hysteresis_w = 0.0;
  double eddy_w = 0.0;
  double total() const { return hysteresis_w + eddy_w; }
};

/// Evaluate the core loss at frequency f [Hz]. Throws std::invalid_argument
/// for negative f or non-positive physical parameters.
CoreLoss bertotti_loss(const BertottiParams& p, double f_hz);

/**
 * Power transfer gain of a transformer-coupled injection path:
 *   H(f) = (P_inject - P_core(f)) / P_inject, clamped at 0 once the core
 * swallows everything (clamped flag set). Monotonically non-increasing in f.
 */
struct TransferGain {
  double h = 0.0;
  bool clamped = false;
};
TransferGain transformer_transfer(double p_inject_w, const BertottiParams& p,
                                  double f_hz);

/**
 * Frequency at which the transfer gain crosses its bandwidth threshold,
 * found by bisection to +/-1 Hz. The default threshold is the half-power
 * reading H = 0.5; pass amplitude_reading = true for H = 1/sqrt(2).
 */
struct BandwidthResult {
  double f_hz = 0.0;
  bool converged = false;
};
BandwidthResult bandwidth_3db(double p_inject_w, const BertottiParams& p,
                              bool amplitude_reading = false,
                              double f_max_hz = 1.0e6);

/// How a lineup stage's dissipation is obtained.
enum class LossKind {
  Reference,      ///< fixed value taken from measurement/datasheet [W]
  Conduction,     ///< i_rms^2 * r_ohm
  Semiconductor,  ///< i_rms^2 * r_ohm + f_sw * (e_on + e_off) * i_rms / i_ref
};

/// Which conversion path a stage belongs to.
enum class LossPath {
  Direct,       ///< per-phase direct series injection chain
  Transformer,  ///< conventional transformer-coupled chain
};

struct LossStage {
  std::string name;
  LossPath path = LossPath::Direct;
  LossKind kind = LossKind::Reference;
  double reference_w = 0.0;  ///< LossKind::Reference value
  double r_ohm = 0.0;        ///< conduction resistance
  double f_sw = 0.0;         ///< switching frequency [Hz]
  double e_on = 0.0;         ///< turn-on energy at i_ref [J]
  double e_off = 0.0;        ///< turn-off energy at i_ref [J]
  double i_ref = 1.0;        ///< datasheet current for e_on/e_off [A]
  /// Optional cross-check resistance: when > 0, an i^2*r figure is computed
  /// alongside a Reference stage and flagged if the two disagree by > 10%.
  double check_r_ohm = 0.0;
};

struct LossLineup {
  std::vector<LossStage> stages;
  /// Default lineup of a 100 A / 33 V injection operating point.
  static LossLineup shipped_default();
};

struct LossRow {
  std::string name;
  LossPath path;
  double watts = 0.0;
  double check_watts = -1.0;  ///< -1 when no cross-check was requested
  bool check_disagrees = false;
};

struct LossTable {
  std::vector<LossRow> rows;
  double direct_total_w = 0.0;
  double transformer_total_w = 0.0;
};

/// Evaluate every stage at the given rms current.
LossTable loss_lineup(const LossLineup& lineup, double i_rms);

/// Protection sizing inputs for a feeder the module string sits in.
struct FaultSpec {
  double s_rating_va = 300e3;  ///< feeding transformer rating
  double v_ll_rms = 400.0;     ///< line-to-line voltage
  double u_k = 0.085;          ///< transformer short-circuit voltage [p.u.]
  double clear_time_s = 0.4;   ///< upstream breaker clearing time
};

struct FaultRatings {
  double i_nominal_a = 0.0;  ///< S / (sqrt(3) * V_ll)
  double i_short_a = 0.0;    ///< i_nominal / u_k
  double i2t_a2s = 0.0;      ///< i_short^2 * clear_time
};

FaultRatings fault_ratings(const FaultSpec& spec);

}  // namespace difq
