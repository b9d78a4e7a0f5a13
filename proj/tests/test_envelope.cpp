#include <doctest.h>

#include <cmath>
#include <complex>
#include <stdexcept>

#include "difq/envelope.hpp"
#include "difq/phasor.hpp"

using namespace difq;

namespace {
constexpr double kDeg = 180.0 / kPi;

// Reference geometry evaluated independently of the library:
// injection ceiling, equal-magnitude bridge angle, unconstrained angle.
double ref_ceiling(double v_dc, bool om) { return om ? v_dc : v_dc / std::sqrt(2.0); }
double ref_parity_deg(double v1, double vm) { return 2.0 * std::asin(vm / (2.0 * v1)) * kDeg; }
double ref_global_deg(double v1, double vm) { return std::asin(vm / v1) * kDeg; }
}  // namespace

TEST_CASE("injection ceiling follows the dc link linearly and jumps by sqrt(2) "
          "when overmodulation is allowed") {
  CHECK(max_inphase_diff(48.0) == doctest::Approx(48.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(max_inphase_diff(48.0) == doctest::Approx(33.9411255).epsilon(1e-7));
  CHECK(max_inphase_diff(48.0, true) == doctest::Approx(48.0).epsilon(1e-12));
  CHECK(max_inphase_diff(96.0) == doctest::Approx(2.0 * max_inphase_diff(48.0)).epsilon(1e-12));
  CHECK_THROWS_AS(max_inphase_diff(0.0), std::invalid_argument);
  CHECK_THROWS_AS(max_inphase_diff(-48.0), std::invalid_argument);
}

TEST_CASE("angle landmarks at 230 V / 48 V match their closed forms") {
  const double vm = ref_ceiling(48.0, false);
  CHECK(parity_max_phase(230.0, 48.0) == doctest::Approx(ref_parity_deg(230.0, vm)).epsilon(1e-12));
  CHECK(parity_max_phase(230.0, 48.0) == doctest::Approx(8.4628).epsilon(2e-5));
  CHECK(global_max_phase(230.0, 48.0) == doctest::Approx(ref_global_deg(230.0, vm)).epsilon(1e-12));
  CHECK(global_max_phase(230.0, 48.0) == doctest::Approx(8.4861).epsilon(2e-5));
  // overmodulation extends the reach to asin(48/230)
  CHECK(global_max_phase(230.0, 48.0, true) == doctest::Approx(12.0459).epsilon(2e-5));
  // equal-magnitude case is always the tighter constraint
  CHECK(parity_max_phase(230.0, 48.0) < global_max_phase(230.0, 48.0));
}

TEST_CASE("angle landmarks grow monotonically with the dc link and clamp at "
          "their geometric caps") {
  double prev_g = 0.0, prev_p = 0.0;
  for (double vdc = 10.0; vdc <= 200.0; vdc += 10.0) {
    const double g = global_max_phase(230.0, vdc);
    const double p = parity_max_phase(230.0, vdc);
    CHECK(g >= prev_g);
    CHECK(p >= prev_p);
    prev_g = g;
    prev_p = p;
  }
  // ceiling >= v1: any angle up to a quarter turn is reachable
  CHECK(global_max_phase(230.0, 400.0) == doctest::Approx(90.0).epsilon(1e-12));
  // ceiling >= 2*v1: the two vectors may even be antiparallel
  CHECK(parity_max_phase(230.0, 700.0) == doctest::Approx(180.0).epsilon(1e-12));
}

TEST_CASE("reactive shielding covers small power-factor angles and refuses "
          "sourcing loads") {
  // limit angle at 230/48 is ~8.49 deg -> tan(limit) ~ 0.149
  const Feasibility ok = reactive_comp_feasible(10e3, 1e3, 230.0, 48.0);
  CHECK(ok.feasible);
  CHECK(!ok.saturated);
  CHECK(ok.margin_deg > 0.0);
  CHECK(ok.margin_deg == doctest::Approx(ref_global_deg(230.0, ref_ceiling(48.0, false)) -
                                         std::atan2(1.0, 10.0) * kDeg)
                             .epsilon(1e-12));

  const Feasibility no = reactive_comp_feasible(10e3, 2e3, 230.0, 48.0);
  CHECK(!no.feasible);
  CHECK(no.margin_deg < 0.0);

  SUBCASE("sign of the reactive part does not matter") {
    CHECK(reactive_comp_feasible(10e3, -1e3, 230.0, 48.0).feasible);
    CHECK(!reactive_comp_feasible(10e3, -2e3, 230.0, 48.0).feasible);
  }
  SUBCASE("pure active loads sit on the axis of the sector") {
    CHECK(reactive_comp_feasible(5e3, 0.0, 230.0, 48.0).feasible);
  }
  SUBCASE("a load that sources power cannot be aligned") {
    CHECK(!reactive_comp_feasible(-10e3, 1e3, 230.0, 48.0).feasible);
    CHECK(!reactive_comp_feasible(0.0, 1e3, 230.0, 48.0).feasible);
  }
  SUBCASE("a ceiling above the phase voltage makes every load coverable") {
    const Feasibility sat = reactive_comp_feasible(10e3, 50e3, 230.0, 400.0);
    CHECK(sat.feasible);
    CHECK(sat.saturated);
  }
}

TEST_CASE("active shielding covers mostly-reactive loads") {
  CHECK(active_comp_feasible(0.0, 5e3, 230.0, 48.0).feasible);
  CHECK(active_comp_feasible(1e3, 10e3, 230.0, 48.0).feasible);
  // equal parts active and reactive is far outside: 45 + 8.49 < 90
  CHECK(!active_comp_feasible(5e3, 5e3, 230.0, 48.0).feasible);
  const Feasibility f = active_comp_feasible(1e3, 10e3, 230.0, 48.0);
  CHECK(f.margin_deg == doctest::Approx(std::atan2(10.0, 1.0) * kDeg +
                                        ref_global_deg(230.0, ref_ceiling(48.0, false)) - 90.0)
                            .epsilon(1e-12));
}

TEST_CASE("compensable magnitude offset: exact endpoints of the reach curve") {
  const double vm = ref_ceiling(48.0, false);
  // zero angular difference: the whole ceiling is available for magnitude
  CHECK(delta_v_limit(230.0, 0.0, vm) == doctest::Approx(vm).epsilon(1e-12));
  // at the equal-magnitude landmark angle the compensable offset vanishes
  const double beta = parity_max_phase(230.0, 48.0);
  CHECK(delta_v_limit(230.0, beta, vm) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  // at the global landmark angle the root just touches zero and the offset
  // equals v2*(1 - cos(gamma))
  const double gamma = global_max_phase(230.0, 48.0);
  CHECK(delta_v_limit(230.0, gamma, vm) ==
        doctest::Approx(230.0 * (1.0 - std::cos(gamma / kDeg))).epsilon(1e-6));
  SUBCASE("beyond the reachable angle the query has no answer") {
    CHECK_THROWS_AS(delta_v_limit(230.0, 10.0, vm), std::domain_error);
    CHECK_THROWS_AS(delta_v_limit(230.0, -10.0, vm), std::domain_error);
  }
  SUBCASE("argument guards") {
    CHECK_THROWS_AS(delta_v_limit(0.0, 1.0, vm), std::invalid_argument);
    CHECK_THROWS_AS(delta_v_limit(230.0, 1.0, -1.0), std::invalid_argument);
  }
}

TEST_CASE("natural transfer over a reactance: hand-computed spot values") {
  // equal angles, 10 V magnitude drop over 0.1 ohm: pure reactive exchange
  const PqPoint a = uncontrolled_power(230.0, 220.0, 0.0, 0.1);
  CHECK(a.p_w == doctest::Approx(0.0).scale(1e3).epsilon(1e-12));
  CHECK(a.q_var == doctest::Approx(23000.0).epsilon(1e-12));
  // a receiving side that lags transfers active power toward it
  const PqPoint b = uncontrolled_power(230.0, 230.0, -5.0, 0.1);
  CHECK(b.p_w == doctest::Approx(230.0 * 230.0 * std::sin(5.0 / kDeg) / 0.1).epsilon(1e-12));
  CHECK(b.p_w > 0.0);
  CHECK(b.q_var == doctest::Approx(230.0 * 230.0 * (1.0 - std::cos(5.0 / kDeg)) / 0.1)
                       .epsilon(1e-12));
  CHECK_THROWS_AS(uncontrolled_power(230.0, 230.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("regulation circle: radius landmark and scaling laws") {
  EnvelopeQuery q;  // defaults: 230/230, 48 V, 0.1 ohm, 0 deg
  const RegulationCircle c = regulation_circle(q);
  CHECK(c.radius_va == doctest::Approx(230.0 * ref_ceiling(48.0, false) / 0.1).epsilon(1e-12));
  CHECK(c.radius_va == doctest::Approx(78064.6).epsilon(1e-6));
  // centered on the natural transfer point
  const PqPoint nat = uncontrolled_power(q.v1_rms, q.v2_rms, q.theta_deg, q.x_line);
  CHECK(c.center.p_w == doctest::Approx(nat.p_w).epsilon(1e-12));
  CHECK(c.center.q_var == doctest::Approx(nat.q_var).epsilon(1e-12));
  SUBCASE("radius scales inversely with the line reactance") {
    EnvelopeQuery q2 = q;
    q2.x_line = 0.2;
    CHECK(regulation_circle(q2).radius_va == doctest::Approx(0.5 * c.radius_va).epsilon(1e-12));
  }
  SUBCASE("overmodulation widens the circle by sqrt(2)") {
    EnvelopeQuery q2 = q;
    q2.allow_overmod = true;
    CHECK(regulation_circle(q2).radius_va ==
          doctest::Approx(std::sqrt(2.0) * c.radius_va).epsilon(1e-12));
  }
}

TEST_CASE("sampled boundaries satisfy their defining equalities and bulge "
          "outward into infeasible territory") {
  EnvelopeQuery q;
  const double vm = ref_ceiling(q.v_dc, false);

  SUBCASE("two-grid reach curve is closed and every point sits on the circle "
          "of radius vm around the sending vector") {
    const RegionBoundary rb = sample_region(RegionKind::TwoGridLimits, q, 720);
    CHECK(rb.closed);
    CHECK(rb.points.size() == 720);
    CHECK(!rb.x_label.empty());
    CHECK(!rb.y_label.empty());
    const std::complex<double> send{q.v1_rms, 0.0};
    double max_angle = 0.0;
    for (const auto& pt : rb.points) {
      const double dth = pt[0] / kDeg, dv = pt[1];
      const std::complex<double> recv = std::polar(q.v1_rms + dv, dth);
      CHECK(std::abs(recv - send) == doctest::Approx(vm).epsilon(1e-9));
      // pushing the point along the outward normal leaves the reachable set:
      // the required injection then exceeds the ceiling
      const std::complex<double> out = send + (recv - send) * 1.01;
      CHECK(std::abs(out - send) > vm);
      max_angle = std::max(max_angle, std::abs(pt[0]));
    }
    // the widest sampled angle approaches the unconstrained landmark ...
    CHECK(max_angle == doctest::Approx(global_max_phase(q.v1_rms, q.v_dc)).epsilon(1e-4));
    CHECK(max_angle <= global_max_phase(q.v1_rms, q.v_dc) + 1e-9);
    // ... and the curve crosses the equal-magnitude axis at the parity angle
    // (located by interpolating the sign change of dv between samples)
    double beta_cross = 0.0;
    for (std::size_t i = 1; i < rb.points.size(); ++i) {
      const double dv0 = rb.points[i - 1][1], dv1 = rb.points[i][1];
      if (dv0 > 0.0 && dv1 <= 0.0) {
        const double f = dv0 / (dv0 - dv1);
        beta_cross = rb.points[i - 1][0] + f * (rb.points[i][0] - rb.points[i - 1][0]);
        break;
      }
    }
    CHECK(std::abs(beta_cross) == doctest::Approx(parity_max_phase(q.v1_rms, q.v_dc)).epsilon(1e-3));
  }

  SUBCASE("regulation boundary is the circle around the natural point") {
    const RegionBoundary rb = sample_region(RegionKind::Regulation, q, 64);
    CHECK(rb.closed);
    const RegulationCircle c = regulation_circle(q);
    for (const auto& pt : rb.points) {
      const double dist = std::hypot(pt[0] - c.center.p_w, pt[1] - c.center.q_var);
      CHECK(dist == doctest::Approx(c.radius_va).epsilon(1e-9));
    }
  }

  SUBCASE("shielding sectors are open rays at the limit angle") {
    const RegionBoundary rr = sample_region(RegionKind::ReactiveComp, q, 16);
    CHECK(!rr.closed);
    const double lim = global_max_phase(q.v1_rms, q.v_dc) / kDeg;
    for (std::size_t i = 1; i < rr.points.size(); ++i) {
      CHECK(std::atan2(rr.points[i][1], rr.points[i][0]) == doctest::Approx(lim).epsilon(1e-9));
      // on the ray the feasibility margin is zero; nudging q upward breaks it
      const Feasibility on = reactive_comp_feasible(rr.points[i][0], rr.points[i][1],
                                                    q.v1_rms, q.v_dc);
      CHECK(std::abs(on.margin_deg) < 1e-7);
      CHECK(!reactive_comp_feasible(rr.points[i][0], rr.points[i][1] * 1.001,
                                    q.v1_rms, q.v_dc)
                 .feasible);
    }
    const RegionBoundary ra = sample_region(RegionKind::ActiveComp, q, 16);
    CHECK(!ra.closed);
    for (std::size_t i = 1; i < ra.points.size(); ++i) {
      const Feasibility on = active_comp_feasible(ra.points[i][0], ra.points[i][1],
                                                  q.v1_rms, q.v_dc);
      CHECK(std::abs(on.margin_deg) < 1e-7);
      // tilting toward the active axis leaves the coverable sector
      CHECK(!active_comp_feasible(ra.points[i][0] * 1.001, ra.points[i][1],
                                  q.v1_rms, q.v_dc)
                 .feasible);
    }
  }

  SUBCASE("too few points are rejected") {
    CHECK_THROWS_AS(sample_region(RegionKind::Regulation, q, 15), std::invalid_argument);
  }
}
