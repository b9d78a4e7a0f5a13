#include "difq/envelope.hpp"

#include <cmath>
#include <stdexcept>

namespace difq {

namespace {

constexpr double kDegPerRad = 180.0 / kPi;

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) {
    throw std::invalid_argument(std::string("envelope: ") + what + " must be > 0");
  }
}

}  // namespace

double max_inphase_diff(double v_dc, bool allow_overmod) {
  require_positive(v_dc, "v_dc");
  return allow_overmod ? v_dc : v_dc / kSqrt2;
}

Feasibility reactive_comp_feasible(double p_w, double q_var, double v1_rms,
                                   double v_dc, bool allow_overmod) {
  require_positive(v1_rms, "v1");
  const double vm = max_inphase_diff(v_dc, allow_overmod);
  const double ratio = vm / v1_rms;
  const bool saturated = ratio >= 1.0;
  const double limit = saturated ? kPi / 2.0 : std::asin(ratio);
  const double angle = std::atan2(std::abs(q_var), p_w);  // [0, pi]
  return {saturated || angle <= limit, (limit - angle) * kDegPerRad, saturated};
}

Feasibility active_comp_feasible(double p_w, double q_var, double v1_rms,
                                 double v_dc, bool allow_overmod) {
  require_positive(v1_rms, "v1");
  const double vm = max_inphase_diff(v_dc, allow_overmod);
  const double ratio = vm / v1_rms;
  const bool saturated = ratio >= 1.0;
  const double limit = saturated ? kPi / 2.0 : std::asin(ratio);
  const double angle = std::atan2(std::abs(q_var), p_w);
  const double margin = angle + limit - kPi / 2.0;
  return {saturated || margin >= 0.0, margin * kDegPerRad, saturated};
}

double delta_v_limit(double v2_rms, double dtheta_deg, double v_m) {
  require_positive(v2_rms, "v2");
  if (v_m < 0.0) throw std::invalid_argument("envelope: v_m must be >= 0");
  const double dtheta = dtheta_deg / kDegPerRad;
  const double s = v2_rms * std::sin(dtheta);
  const double under = v_m * v_m - s * s;
  if (under < 0.0) {
    throw std::domain_error(
        "delta_v_limit: angular difference alone exceeds the injection "
        "ceiling; no magnitude offset is reachable at this angle");
  }
  return std::abs(v2_rms - (std::sqrt(under) + v2_rms * std::cos(dtheta)));
}

double parity_max_phase(double v1_rms, double v_dc, bool allow_overmod) {
  require_positive(v1_rms, "v1");
  const double vm = max_inphase_diff(v_dc, allow_overmod);
  const double r = std::min(vm / (2.0 * v1_rms), 1.0);
  return 2.0 * std::asin(r) * kDegPerRad;
}

double global_max_phase(double v1_rms, double v_dc, bool allow_overmod) {
  require_positive(v1_rms, "v1");
  const double vm = max_inphase_diff(v_dc, allow_overmod);
  const double r = vm / v1_rms;
  return (r >= 1.0 ? kPi / 2.0 : std::asin(r)) * kDegPerRad;
}

PqPoint uncontrolled_power(double v1_rms, double v2_rms, double theta_deg,
                           double x_line) {
  require_positive(v1_rms, "v1");
  require_positive(v2_rms, "v2");
  require_positive(x_line, "x_line");
  const double theta = theta_deg / kDegPerRad;
  PqPoint pq;
  pq.p_w = -v1_rms * v2_rms * std::sin(theta) / x_line;
  pq.q_var = (v1_rms * v1_rms - v1_rms * v2_rms * std::cos(theta)) / x_line;
  return pq;
}

RegulationCircle regulation_circle(const EnvelopeQuery& q) {
  RegulationCircle c;
  c.center = uncontrolled_power(q.v1_rms, q.v2_rms, q.theta_deg, q.x_line);
  c.radius_va = q.v1_rms * max_inphase_diff(q.v_dc, q.allow_overmod) / q.x_line;
  return c;
}

RegionBoundary sample_region(RegionKind kind, const EnvelopeQuery& q, int n) {
  if (n < 16) throw std::invalid_argument("sample_region: need n >= 16");
  require_positive(q.v1_rms, "v1");

  RegionBoundary rb;
  rb.kind = kind;
  rb.points.reserve(static_cast<std::size_t>(n));

  const double vm = max_inphase_diff(q.v_dc, q.allow_overmod);
  // Chart scale for the unbounded sector boundaries: the regulation radius.
  const double s_ref = q.v1_rms * vm / (q.x_line > 0.0 ? q.x_line : 1.0);

  switch (kind) {
    case RegionKind::ReactiveComp: {
      const double lim = global_max_phase(q.v1_rms, q.v_dc, q.allow_overmod) / kDegPerRad;
      for (int i = 0; i < n; ++i) {
        const double s = s_ref * (static_cast<double>(i) / (n - 1));
        rb.points.push_back({s * std::cos(lim), s * std::sin(lim)});
      }
      rb.closed = false;
      rb.x_label = "p_w";
      rb.y_label = "q_var";
      break;
    }
    case RegionKind::ActiveComp: {
      const double lim = global_max_phase(q.v1_rms, q.v_dc, q.allow_overmod) / kDegPerRad;
      const double edge = kPi / 2.0 - lim;
      for (int i = 0; i < n; ++i) {
        const double s = s_ref * (static_cast<double>(i) / (n - 1));
        rb.points.push_back({s * std::cos(edge), s * std::sin(edge)});
      }
      rb.closed = false;
      rb.x_label = "p_w";
      rb.y_label = "q_var";
      break;
    }
    case RegionKind::TwoGridLimits: {
      // Receiving vector = v1 + vm*e^{j psi}; emit (dtheta [deg], dv [V]).
      for (int i = 0; i < n; ++i) {
        const double psi = kTwoPi * static_cast<double>(i) / n;
        const Complex p = Complex{q.v1_rms, 0.0} + std::polar(vm, psi);
        rb.points.push_back({std::arg(p) * kDegPerRad, std::abs(p) - q.v1_rms});
      }
      rb.closed = true;
      rb.x_label = "dtheta_deg";
      rb.y_label = "dv_v";
      break;
    }
    case RegionKind::Regulation: {
      const RegulationCircle c = regulation_circle(q);
      for (int i = 0; i < n; ++i) {
        const double psi = kTwoPi * static_cast<double>(i) / n;
        rb.points.push_back({c.center.p_w + c.radius_va * std::cos(psi),
                             c.center.q_var + c.radius_va * std::sin(psi)});
      }
      rb.closed = true;
      rb.x_label = "p_w";
      rb.y_label = "q_var";
      break;
    }
  }
  return rb;
}

}  // namespace difq
