#include "difq/converters.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace difq {

namespace {
constexpr double kMinLinkVolts = 1e-3;  // divide-by-zero guard only
}

int module_gate_switched(double duty, double t, double f_sw) {
  if (f_sw <= 0.0) throw std::invalid_argument("module_gate_switched: f_sw must be positive");
  if (duty > 1.0) duty = 1.0;
  if (duty < -1.0) duty = -1.0;
  const double period = 1.0 / f_sw;
  double x = std::fmod(t, period) / period;
  if (x < 0.0) x += 1.0;
  // triangle rising 0->1 on the first half period, falling back on the second
  const double tri = x < 0.5 ? 2.0 * x : 2.0 - 2.0 * x;
  const double da = 0.5 + 0.5 * duty;
  const double db = 0.5 - 0.5 * duty;
  const int sa = da > tri ? 1 : 0;
  const int sb = db > tri ? 1 : 0;
  return sa - sb;
}

namespace {
/// Time the triangular carrier spends below `level` between absolute time 0
/// and t. Within one period the triangle sits below level L on (0, L/2) and
/// (1 - L/2, 1), a total fraction L, which gives a closed form per period
/// plus a piecewise term for the fractional remainder.
double tri_time_below(double level, double t, double period) {
  const double cyc = t / period;
  const double n = std::floor(cyc);
  const double x = cyc - n;
  const double half = 0.5 * level;
  return period *
         (n * level + std::min(x, half) + std::max(0.0, x - (1.0 - half)));
}
}  // namespace

double module_gate_mean(double duty, double t0, double t1, double f_sw) {
  if (f_sw <= 0.0)
    throw std::invalid_argument("module_gate_mean: f_sw must be positive");
  if (!(t1 > t0))
    throw std::invalid_argument("module_gate_mean: needs t1 > t0");
  if (duty > 1.0) duty = 1.0;
  if (duty < -1.0) duty = -1.0;
  const double period = 1.0 / f_sw;
  const double da = 0.5 + 0.5 * duty;
  const double db = 0.5 - 0.5 * duty;
  const double on_a =
      tri_time_below(da, t1, period) - tri_time_below(da, t0, period);
  const double on_b =
      tri_time_below(db, t1, period) - tri_time_below(db, t0, period);
  return (on_a - on_b) / (t1 - t0);
}

double module_vdc_derivative(double gate_or_duty, double i_line, double p_llc,
                             double v_dc, double c_dc) {
  if (c_dc <= 0.0) throw std::invalid_argument("module_vdc_derivative: capacitance must be positive");
  const double v = std::max(v_dc, kMinLinkVolts);
  return (gate_or_duty * i_line + p_llc / v) / c_dc;
}

LlcFlows llc_transfer(const LlcParams& llc, double v_shared, double v_module) {
  LlcFlows f;
  f.p_module = llc.droop_w_per_v * (v_shared / llc.ratio - v_module);
  if (f.p_module >= 0.0) {
    f.p_shared = f.p_module / llc.efficiency;
  } else {
    f.p_shared = f.p_module * llc.efficiency;
  }
  return f;
}

double shared_link_derivative(double p_afe, double p_llc_total, double v_dc,
                              double c_f) {
  if (c_f <= 0.0) throw std::invalid_argument("shared_link_derivative: capacitance must be positive");
  const double v = std::max(v_dc, kMinLinkVolts);
  return (p_afe - p_llc_total) / (v * c_f);
}

}  // namespace difq
