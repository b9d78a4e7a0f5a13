#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "difq/loss.hpp"
#include "difq/phasor.hpp"

using namespace difq;

TEST_CASE("two-term core loss reproduces its hand-evaluated 50 Hz split") {
  const BertottiParams p;  // eta 15, B 1.5 T, t 0.27 mm, rho 0.48 uOhm*m, 129 l
  const CoreLoss c = bertotti_loss(p, 50.0);
  // eta * B^2 * f * V
  CHECK(c.hysteresis_w == doctest::Approx(15.0 * 2.25 * 50.0 * 0.129).epsilon(1e-12));
  CHECK(c.hysteresis_w == doctest::Approx(217.6875).epsilon(1e-9));
  // pi^2 t^2 B^2 f^2 / (6 rho) * V
  const double eddy_ref = kPi * kPi * 0.27e-3 * 0.27e-3 * 2.25 * 2500.0 /
                          (6.0 * 0.48e-6) * 0.129;
  CHECK(c.eddy_w == doctest::Approx(eddy_ref).epsilon(1e-12));
  CHECK(c.eddy_w == doctest::Approx(181.28).epsilon(1e-4));
  CHECK(c.total() == doctest::Approx(c.hysteresis_w + c.eddy_w).epsilon(1e-15));
}

TEST_CASE("hysteresis scales with f and eddy with f^2, exactly") {
  const BertottiParams p;
  const CoreLoss base = bertotti_loss(p, 50.0);
  for (double m : {2.0, 4.0, 8.0, 16.0}) {  // power-of-two factors are exact
    const CoreLoss c = bertotti_loss(p, m * 50.0);
    CHECK(c.hysteresis_w == m * base.hysteresis_w);
    CHECK(c.eddy_w == m * m * base.eddy_w);
  }
  SUBCASE("the eddy/hysteresis ratio depends only on t, rho, eta and f") {
    BertottiParams q = p;
    q.b_peak = 0.7;   // ratio must not move with flux density ...
    q.volume = 3.0;   // ... or core volume
    const CoreLoss c1 = bertotti_loss(p, 137.0);
    const CoreLoss c2 = bertotti_loss(q, 137.0);
    CHECK(c1.eddy_w / c1.hysteresis_w ==
          doctest::Approx(c2.eddy_w / c2.hysteresis_w).epsilon(1e-12));
    const double ratio_ref = kPi * kPi * p.thickness * p.thickness * 137.0 /
                             (6.0 * p.resistivity * p.eta);
    CHECK(c1.eddy_w / c1.hysteresis_w == doctest::Approx(ratio_ref).epsilon(1e-12));
  }
  SUBCASE("zero frequency dissipates nothing") {
    const CoreLoss c = bertotti_loss(p, 0.0);
    CHECK(c.hysteresis_w == 0.0);
    CHECK(c.eddy_w == 0.0);
  }
  SUBCASE("non-physical parameters are rejected") {
    CHECK_THROWS_AS(bertotti_loss(p, -1.0), std::invalid_argument);
    BertottiParams bad = p;
    bad.resistivity = 0.0;
    CHECK_THROWS_AS(bertotti_loss(bad, 50.0), std::invalid_argument);
    bad = p;
    bad.volume = -1.0;
    CHECK_THROWS_AS(bertotti_loss(bad, 50.0), std::invalid_argument);
    bad = p;
    bad.eta = -1.0;
    CHECK_THROWS_AS(bertotti_loss(bad, 50.0), std::invalid_argument);
    bad = p;
    bad.thickness = -1e-3;
    CHECK_THROWS_AS(bertotti_loss(bad, 50.0), std::invalid_argument);
  }
}

TEST_CASE("transfer gain starts at unity, never rises with frequency and "
          "clamps at zero") {
  const BertottiParams p;
  const double pg = 50e3;
  CHECK(transformer_transfer(pg, p, 0.0).h == doctest::Approx(1.0).epsilon(1e-15));
  double prev = 2.0;
  for (double f = 0.0; f <= 2000.0; f += 50.0) {
    const TransferGain g = transformer_transfer(pg, p, f);
    CHECK(g.h <= prev + 1e-15);
    CHECK(g.h >= 0.0);
    prev = g.h;
  }
  SUBCASE("a core that eats more than the injected power reads zero, flagged") {
    const TransferGain g = transformer_transfer(100.0, p, 1000.0);
    CHECK(g.clamped);
    CHECK(g.h == 0.0);
  }
  SUBCASE("definitional half-power point") {
    // choose the injection level so the gain at 1 kHz is exactly 1/2
    const double pg2 = 2.0 * bertotti_loss(p, 1000.0).total();
    CHECK(transformer_transfer(pg2, p, 1000.0).h == doctest::Approx(0.5).epsilon(1e-12));
  }
  CHECK_THROWS_AS(transformer_transfer(0.0, p, 50.0), std::invalid_argument);
  CHECK_THROWS_AS(transformer_transfer(-1.0, p, 50.0), std::invalid_argument);
}

TEST_CASE("bandwidth search lands within one hertz of a constructed "
          "half-power crossing") {
  const BertottiParams p;
  // fixture: gain crosses 0.5 exactly at 1 kHz
  const double pg = 2.0 * bertotti_loss(p, 1000.0).total();
  const BandwidthResult r = bandwidth_3db(pg, p);
  CHECK(r.converged);
  CHECK(std::abs(r.f_hz - 1000.0) <= 1.0);
  CHECK(std::abs(transformer_transfer(pg, p, r.f_hz).h - 0.5) < 1e-3);

  SUBCASE("the amplitude-style threshold crosses earlier") {
    const BandwidthResult ra = bandwidth_3db(pg, p, true);
    CHECK(ra.converged);
    CHECK(ra.f_hz < r.f_hz);
    CHECK(std::abs(transformer_transfer(pg, p, ra.f_hz).h - 1.0 / kSqrt2) < 1e-3);
  }
  SUBCASE("more injected power buys more bandwidth") {
    const BandwidthResult r2 = bandwidth_3db(2.0 * pg, p);
    const BandwidthResult r4 = bandwidth_3db(4.0 * pg, p);
    CHECK(r2.converged);
    CHECK(r4.converged);
    CHECK(r2.f_hz > r.f_hz);
    CHECK(r4.f_hz > r2.f_hz);
  }
  SUBCASE("a crossing outside the search window reports non-convergence") {
    const BandwidthResult rn = bandwidth_3db(1e6, p, false, 100.0);
    CHECK(!rn.converged);
    CHECK(rn.f_hz == 0.0);
  }
}

TEST_CASE("conduction arithmetic: 100 A through 5 mOhm dissipates exactly 50 W") {
  LossLineup l;
  l.stages.push_back({.name = "inductor",
                      .path = LossPath::Direct,
                      .kind = LossKind::Conduction,
                      .r_ohm = 5e-3});
  const LossTable t = loss_lineup(l, 100.0);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0].watts == 50.0);
  CHECK(t.direct_total_w == 50.0);
  CHECK(t.transformer_total_w == 0.0);
  CHECK(t.rows[0].check_watts == -1.0);  // no cross-check requested
  SUBCASE("zero current, zero conduction loss") {
    CHECK(loss_lineup(l, 0.0).direct_total_w == 0.0);
  }
  SUBCASE("negative current is rejected") {
    CHECK_THROWS_AS(loss_lineup(l, -1.0), std::invalid_argument);
  }
}

TEST_CASE("semiconductor stages add switching energy scaled by current") {
  LossLineup l;
  l.stages.push_back({.name = "bridge",
                      .path = LossPath::Direct,
                      .kind = LossKind::Semiconductor,
                      .r_ohm = 10e-3,
                      .f_sw = 10e3,
                      .e_on = 1e-3,
                      .e_off = 2e-3,
                      .i_ref = 50.0});
  const LossTable t = loss_lineup(l, 100.0);
  // 100^2 * 10 mOhm + 10 kHz * 3 mJ * (100/50) = 100 + 60
  CHECK(t.rows[0].watts == doctest::Approx(160.0).epsilon(1e-12));
  SUBCASE("a datasheet current of zero cannot be scaled against") {
    l.stages[0].i_ref = 0.0;
    CHECK_THROWS_AS(loss_lineup(l, 100.0), std::invalid_argument);
  }
}

TEST_CASE("shipped lineup totals at the 100 A operating point") {
  const LossTable t = loss_lineup(LossLineup::shipped_default(), 100.0);
  CHECK(t.direct_total_w == doctest::Approx(209.6).epsilon(1e-9));
  CHECK(t.transformer_total_w == doctest::Approx(246.9).epsilon(1e-9));
  // the direct chain undercuts the transformer chain at this operating point
  CHECK(t.direct_total_w < t.transformer_total_w);

  SUBCASE("the winding stage carries a flagged cross-check: the quoted "
          "effective resistance implies 200 W against the 150.3 W reference") {
    bool found = false;
    for (const auto& row : t.rows) {
      if (row.check_watts >= 0.0) {
        found = true;
        CHECK(row.watts == doctest::Approx(150.3).epsilon(1e-12));
        CHECK(row.check_watts == doctest::Approx(200.0).epsilon(1e-12));
        CHECK(row.check_disagrees);
      }
    }
    CHECK(found);
  }
  SUBCASE("a cross-check within ten percent stays quiet") {
    LossLineup l;
    l.stages.push_back({.name = "winding",
                        .path = LossPath::Transformer,
                        .kind = LossKind::Reference,
                        .reference_w = 195.0,
                        .check_r_ohm = 20e-3});
    const LossTable q = loss_lineup(l, 100.0);
    CHECK(q.rows[0].check_watts == doctest::Approx(200.0).epsilon(1e-12));
    CHECK(!q.rows[0].check_disagrees);
  }
}

TEST_CASE("protection sizing from the feeding transformer nameplate") {
  const FaultSpec spec;  // 300 kVA, 400 V, u_k 8.5 %, 0.4 s
  const FaultRatings r = fault_ratings(spec);
  CHECK(r.i_nominal_a == doctest::Approx(300e3 / (kSqrt3 * 400.0)).epsilon(1e-12));
  CHECK(r.i_nominal_a == doctest::Approx(433.0127).epsilon(1e-7));
  CHECK(r.i_short_a == doctest::Approx(r.i_nominal_a / 0.085).epsilon(1e-12));
  CHECK(r.i_short_a == doctest::Approx(5094.27).epsilon(1e-6));
  CHECK(r.i2t_a2s == doctest::Approx(r.i_short_a * r.i_short_a * 0.4).epsilon(1e-12));
  CHECK(r.i2t_a2s == doctest::Approx(1.0381e7).epsilon(1e-4));
  SUBCASE("a stiff source with u_k = 1 has no fault amplification") {
    FaultSpec s2 = spec;
    s2.u_k = 1.0;
    const FaultRatings r2 = fault_ratings(s2);
    CHECK(r2.i_short_a == doctest::Approx(r2.i_nominal_a).epsilon(1e-15));
  }
  SUBCASE("all inputs must be positive") {
    FaultSpec bad = spec;
    bad.s_rating_va = 0.0;
    CHECK_THROWS_AS(fault_ratings(bad), std::invalid_argument);
    bad = spec;
    bad.v_ll_rms = -400.0;
    CHECK_THROWS_AS(fault_ratings(bad), std::invalid_argument);
    bad = spec;
    bad.u_k = 0.0;
    CHECK_THROWS_AS(fault_ratings(bad), std::invalid_argument);
    bad = spec;
    bad.clear_time_s = 0.0;
    CHECK_THROWS_AS(fault_ratings(bad), std::invalid_argument);
  }
}
