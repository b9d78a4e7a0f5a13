#pragma once
/**
 * @file envelope.hpp
 * @brief Closed-form coverage limits of a series injection module fed from a
 *        floating dc link, plus boundary sampling for region charts.
 *
 * All voltages are rms phase quantities (line-to-neutral). Callers working
 * with line-to-line figures divide by sqrt(3) at the boundary. Angles cross
 * this API in degrees; internal math is in radians.
 *
 * The linear-modulation injection ceiling is v_dc/sqrt(2); with
 * overmodulation the six-step-style extended value v_dc is used. Both are
 * selectable via the allow_overmod flag. Headroom reserved for harmonic
 * injection can be expressed by simply reducing v_dc in the query before
 * calling; there is no dedicated mechanism.
 */

#include <array>
#include <string>
#include <vector>

#include "difq/phasor.hpp"

namespace difq {

/// Inputs for envelope queries. Unused members may stay at their defaults.
struct EnvelopeQuery {
  double v1_rms = 230.0;    ///< sending-side phase voltage [V rms]
  double v2_rms = 230.0;    ///< receiving-side phase voltage [V rms]
  double v_dc = 48.0;       ///< module dc-link voltage [V]
  double x_line = 0.1;      ///< line reactance [ohm]
  double theta_deg = 0.0;   ///< phase difference between the two sides [deg]
  bool allow_overmod = false;
};

struct Feasibility {
  bool feasible = false;
  double margin_deg = 0.0;  ///< distance to the boundary, >0 inside
  bool saturated = false;   ///< injection ceiling >= v1: criterion always met
};

/// Largest in-phase voltage difference the module can bridge [V rms].
double max_inphase_diff(double v_dc, bool allow_overmod = false);

/**
 * Reactive shielding limit: a load drawing P, Q (source convention, P > 0)
 * can be presented to the source at unity power factor iff
 * atan(Q/P) <= asin(v_m_max / v1). P <= 0 with Q != 0 is infeasible by
 * definition (nothing to align the current with).
 */
Feasibility reactive_comp_feasible(double p_w, double q_var, double v1_rms,
                                   double v_dc, bool allow_overmod = false);

/**
 * Active shielding limit (mostly-reactive loads): feasible iff
 * atan(Q/P) + asin(v_m_max / v1) >= pi/2.
 */
Feasibility active_comp_feasible(double p_w, double q_var, double v1_rms,
                                 double v_dc, bool allow_overmod = false);

/**
 * Largest magnitude difference |v2 - v1| the module can null at a given
 * angular difference dtheta, for a fixed receiving voltage v2 and available
 * injection amplitude v_m (pass max_inphase_diff(v_dc, om) for the ceiling):
 *   dv = | v2 - ( sqrt(v_m^2 - (v2 sin dtheta)^2) + v2 cos dtheta ) |.
 * Throws std::domain_error when |v2 sin dtheta| exceeds v_m (the angular
 * difference alone is unreachable). The positive root is taken, matching the
 * construction whose endpoints reproduce parity_max_phase/global_max_phase.
 */
double delta_v_limit(double v2_rms, double dtheta_deg, double v_m);

/// Largest angle between two equal-magnitude grids the module can bridge
/// [deg]: beta = 2*asin(v_m_max / (2*v1)). Returns 180 once the ceiling
/// exceeds 2*v1 (geometrically unconstrained).
double parity_max_phase(double v1_rms, double v_dc, bool allow_overmod = false);

/// Largest reachable angle regardless of magnitude [deg]:
/// gamma = asin(v_m_max/v1), clamped to 90 once the ceiling exceeds v1.
double global_max_phase(double v1_rms, double v_dc, bool allow_overmod = false);

/// Natural (uncompensated) transfer over a reactance-dominated line,
/// per-phase equivalent products (multiply by 3 for three-phase totals):
///   P = -v1*v2*sin(theta)/x,  Q = (v1^2 - v1*v2*cos(theta))/x.
struct PqPoint {
  double p_w = 0.0;
  double q_var = 0.0;
};
PqPoint uncontrolled_power(double v1_rms, double v2_rms, double theta_deg,
                           double x_line);

/// Power-regulation circle around the natural transfer point: the module can
/// move the per-phase operating point anywhere within radius v1*v_m_max/x.
struct RegulationCircle {
  PqPoint center;
  double radius_va = 0.0;
};
RegulationCircle regulation_circle(const EnvelopeQuery& q);

enum class RegionKind {
  ReactiveComp,   ///< P-Q sector boundary of reactive shielding
  ActiveComp,     ///< P-Q sector boundary of active shielding
  TwoGridLimits,  ///< (dtheta [deg], dv [V]) compensable-difference boundary
  Regulation,     ///< (P [W], Q [var]) regulation circle
};

struct RegionBoundary {
  RegionKind kind;
  bool closed = false;  ///< true when the points trace a closed curve
  std::string x_label;
  std::string y_label;
  std::vector<std::array<double, 2>> points;
};

/**
 * Sample n >= 16 points of the requested boundary. Every returned point
 * satisfies its defining equality to ~1e-9; perturbing it outward leaves the
 * feasible set. TwoGridLimits and Regulation produce closed curves; the
 * shielding sectors are unbounded and return open polylines scaled to the
 * regulation radius.
 */
RegionBoundary sample_region(RegionKind kind, const EnvelopeQuery& q, int n);

}  // namespace difq
