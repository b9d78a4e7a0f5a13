#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "difq/phasor.hpp"

using namespace difq;

namespace {
double deg(double d) { return d * kPi / 180.0; }
}  // namespace

TEST_CASE("wrap_angle lands in (-pi, pi]") {
  CHECK(wrap_angle(0.0) == doctest::Approx(0.0));
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));  // -pi maps to +pi
  CHECK(wrap_angle(3.0 * kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(kTwoPi + 0.25) == doctest::Approx(0.25));
  CHECK(wrap_angle(-kTwoPi - 0.25) == doctest::Approx(-0.25));
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int k = 0; k < 200; ++k) {
    const double a = u(rng);
    const double w = wrap_angle(a);
    CHECK(w > -kPi - 1e-15);
    CHECK(w <= kPi + 1e-15);
    CHECK(std::remainder(a - w, kTwoPi) == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("polar construction and accessors round-trip") {
  const Phasor p = Phasor::from_polar(230.0, deg(30.0));
  CHECK(p.mag() == doctest::Approx(230.0));
  CHECK(p.angle_deg() == doctest::Approx(30.0));
  const Phasor q = Phasor::from_polar_deg(10.0, -120.0);
  CHECK(q.mag() == doctest::Approx(10.0));
  CHECK(q.angle() == doctest::Approx(deg(-120.0)));
  // instantaneous value at electrical angle zero is sqrt(2)*|X|*cos(angle)
  CHECK(p.instantaneous(0.0) ==
        doctest::Approx(kSqrt2 * 230.0 * std::cos(deg(30.0))));
  CHECK(p.instantaneous(kPi / 2 - deg(30.0)) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("phasor multiply and divide follow complex arithmetic") {
  const Phasor a = Phasor::from_polar_deg(4.0, 40.0);
  const Phasor b = Phasor::from_polar_deg(2.0, -15.0);
  const Phasor prod = a * b;
  CHECK(prod.mag() == doctest::Approx(8.0));
  CHECK(prod.angle_deg() == doctest::Approx(25.0));
  const Phasor quot = a / b;
  CHECK(quot.mag() == doctest::Approx(2.0));
  CHECK(quot.angle_deg() == doctest::Approx(55.0));
}

TEST_CASE("balanced set decomposes to a pure positive sequence") {
  const ThreePhaseSet v{Phasor::from_polar_deg(230.0, 0.0),
                        Phasor::from_polar_deg(230.0, -120.0),
                        Phasor::from_polar_deg(230.0, 120.0)};
  const SequenceSet s = sequence_decompose(v);
  CHECK(s.pos.mag() == doctest::Approx(230.0));
  CHECK(s.pos.angle_deg() == doctest::Approx(0.0));
  CHECK(s.neg.mag() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.zero.mag() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("unbalanced magnitudes 245/230/200 give a 225 V positive sequence") {
  // Hand oracle: with phases at 0/-120/+120 deg, rotating b and c back onto a
  // makes the positive component the plain average (245 + 230 + 200)/3 = 225.
  const ThreePhaseSet v{Phasor::from_polar_deg(245.0, 0.0),
                        Phasor::from_polar_deg(230.0, -120.0),
                        Phasor::from_polar_deg(200.0, 120.0)};
  const SequenceSet s = sequence_decompose(v);
  CHECK(s.pos.mag() == doctest::Approx(225.0));
  CHECK(s.pos.angle_deg() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(s.neg.mag() > 0.0);  // magnitude unbalance must show up somewhere
}

TEST_CASE("sequence decomposition round-trips random sets to 1e-9") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> mag(0.0, 400.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int k = 0; k < 100; ++k) {
    const ThreePhaseSet v{Phasor::from_polar(mag(rng), ang(rng)),
                          Phasor::from_polar(mag(rng), ang(rng)),
                          Phasor::from_polar(mag(rng), ang(rng))};
    const ThreePhaseSet r = sequence_compose(sequence_decompose(v));
    const double scale = std::max({v.a.mag(), v.b.mag(), v.c.mag(), 1.0});
    CHECK(std::abs(r.a.re - v.a.re) < 1e-9 * scale);
    CHECK(std::abs(r.a.im - v.a.im) < 1e-9 * scale);
    CHECK(std::abs(r.b.re - v.b.re) < 1e-9 * scale);
    CHECK(std::abs(r.b.im - v.b.im) < 1e-9 * scale);
    CHECK(std::abs(r.c.re - v.c.re) < 1e-9 * scale);
    CHECK(std::abs(r.c.im - v.c.im) < 1e-9 * scale);
  }
}

TEST_CASE("abc_to_dq convention: aligned balanced set lands on d") {
  const double peak = 325.0;
  // theta aligned with the cosine of phase a
  for (double theta : {0.0, 0.7, 2.5, -1.2}) {
    const double a = peak * std::cos(theta);
    const double b = peak * std::cos(theta - deg(120.0));
    const double c = peak * std::cos(theta + deg(120.0));
    const DqSample s = abc_to_dq(a, b, c, theta);
    CHECK(s.d == doctest::Approx(peak).epsilon(1e-12));
    CHECK(s.q == doctest::Approx(0.0).epsilon(1e-12));
  }
  const DqSample z = abc_to_dq(0.0, 0.0, 0.0, 1.0);
  CHECK(z.d == doctest::Approx(0.0));
  CHECK(z.q == doctest::Approx(0.0));
}

TEST_CASE("abc_to_dq with the frame advanced 90 degrees moves d onto -q") {
  // q lags d: a signal that was on d appears at -q when the frame leads it.
  const double peak = 325.0;
  const double sig = 0.3;  // electrical angle of the signal set
  const double a = peak * std::cos(sig);
  const double b = peak * std::cos(sig - deg(120.0));
  const double c = peak * std::cos(sig + deg(120.0));
  const DqSample s = abc_to_dq(a, b, c, sig + kPi / 2);
  CHECK(s.d == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(s.q == doctest::Approx(-peak).epsilon(1e-12));
}

TEST_CASE("dq norm is invariant to the reference angle") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const double al = 100.0 * u(rng), be = 100.0 * u(rng);
    const double t1 = 3.0 * u(rng), t2 = 3.0 * u(rng);
    const DqSample s1 = park(al, be, t1);
    const DqSample s2 = park(al, be, t2);
    CHECK(s1.d * s1.d + s1.q * s1.q ==
          doctest::Approx(s2.d * s2.d + s2.q * s2.q).epsilon(1e-12));
  }
}

TEST_CASE("clarke/park and their inverses round-trip") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-300.0, 300.0);
  for (int k = 0; k < 50; ++k) {
    const double d = u(rng), q = u(rng), theta = u(rng) / 100.0;
    const auto abc = dq_to_abc(d, q, theta);
    // dq_to_abc produces a zero-sequence-free set by construction
    CHECK(abc[0] + abc[1] + abc[2] == doctest::Approx(0.0).epsilon(1e-9));
    const DqSample back = abc_to_dq(abc[0], abc[1], abc[2], theta);
    CHECK(back.d == doctest::Approx(d).epsilon(1e-12));
    CHECK(back.q == doctest::Approx(q).epsilon(1e-12));
    const auto ab = inverse_park(d, q, theta);
    const DqSample p = park(ab[0], ab[1], theta);
    CHECK(p.d == doctest::Approx(d).epsilon(1e-12));
    CHECK(p.q == doctest::Approx(q).epsilon(1e-12));
  }
}

TEST_CASE("abc_to_dq of a balanced set at lock is ripple-free over a cycle") {
  const double peak = 141.4;
  double dmin = 1e300, dmax = -1e300, qmin = 1e300, qmax = -1e300;
  for (int k = 0; k < 2000; ++k) {
    const double th = kTwoPi * k / 2000.0;
    const DqSample s = abc_to_dq(peak * std::cos(th + 0.4),
                                 peak * std::cos(th + 0.4 - deg(120.0)),
                                 peak * std::cos(th + 0.4 + deg(120.0)), th);
    dmin = std::min(dmin, s.d);
    dmax = std::max(dmax, s.d);
    qmin = std::min(qmin, s.q);
    qmax = std::max(qmax, s.q);
  }
  CHECK(dmax - dmin < 1e-9 * peak);
  CHECK(qmax - qmin < 1e-9 * peak);
}

TEST_CASE("single-frequency correlation recovers a pure tone") {
  const double f = 50.0, dt = 1e-4;
  std::vector<double> x;
  for (int k = 0; k < 600; ++k) {
    const double t = k * dt;
    x.push_back(kSqrt2 * 230.0 * std::cos(kTwoPi * f * t));
  }
  const Phasor p = phasor_of_trace(x, dt, f, 2);
  CHECK(p.mag() == doctest::Approx(230.0).epsilon(1e-3));
  CHECK(std::abs(p.angle_deg()) < 0.1);
}

TEST_CASE("single-frequency correlation rejects dc") {
  std::vector<double> x(400, 7.5);
  const Phasor p = phasor_of_trace(x, 1e-4, 50.0, 2);
  CHECK(p.mag() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("a third harmonic does not leak into the fundamental estimate") {
  const double f = 50.0, dt = 1e-4;
  std::vector<double> x;
  for (int k = 0; k < 800; ++k) {
    const double t = k * dt;
    x.push_back(kSqrt2 * 10.0 * std::cos(kTwoPi * f * t + deg(30.0)) +
                kSqrt2 * 1.0 * std::cos(kTwoPi * 3.0 * f * t));
  }
  const Phasor p = phasor_of_trace(x, dt, f, 2);
  CHECK(p.mag() == doctest::Approx(10.0).epsilon(5e-3));
  CHECK(p.angle_deg() == doctest::Approx(30.0).epsilon(5e-3));
}

TEST_CASE("correlation window must hold an integer number of samples") {
  std::vector<double> x(100, 0.0);
  // 1 cycle of 50 Hz at dt=1e-4 is 200 samples > record
  CHECK_THROWS_AS(phasor_of_trace(x, 1e-4, 50.0, 1), std::invalid_argument);
  // grid that does not divide the period: 50 Hz, dt = 3e-4 -> 66.67 samples
  std::vector<double> y(400, 0.0);
  CHECK_THROWS_AS(phasor_of_trace(y, 3e-4, 50.0, 1), std::invalid_argument);
}
