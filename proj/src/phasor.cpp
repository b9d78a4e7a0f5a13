#include "difq/phasor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace difq {

double wrap_angle(double a) {
  a = std::remainder(a, kTwoPi);  // lands in [-pi, pi]
  if (a <= -kPi) a += kTwoPi;
  return a;
}

Phasor Phasor::from_polar(double mag_rms, double angle_rad) {
  return {mag_rms * std::cos(angle_rad), mag_rms * std::sin(angle_rad)};
}

Phasor Phasor::from_polar_deg(double mag_rms, double angle_deg) {
  return from_polar(mag_rms, angle_deg * kPi / 180.0);
}

double Phasor::mag() const { return std::hypot(re, im); }

double Phasor::angle() const {
  double a = std::atan2(im, re);
  if (a <= -kPi) a += kTwoPi;
  return a;
}

double Phasor::angle_deg() const { return angle() * 180.0 / kPi; }

double Phasor::instantaneous(double theta) const {
  return kSqrt2 * (re * std::cos(theta) - im * std::sin(theta));
}

Phasor operator*(const Phasor& a, const Phasor& b) {
  return Phasor(a.c() * b.c());
}

Phasor operator/(const Phasor& a, const Phasor& b) {
  return Phasor(a.c() / b.c());
}

namespace {
const Complex kAlpha = std::polar(1.0, kTwoPi / 3.0);  // 1 at +120 degrees
}

SequenceSet sequence_decompose(const ThreePhaseSet& abc) {
  const Complex a = abc.a.c(), b = abc.b.c(), c = abc.c.c();
  const Complex a2 = kAlpha * kAlpha;
  SequenceSet s;
  s.pos = Phasor((a + kAlpha * b + a2 * c) / 3.0);
  s.neg = Phasor((a + a2 * b + kAlpha * c) / 3.0);
  s.zero = Phasor((a + b + c) / 3.0);
  return s;
}

ThreePhaseSet sequence_compose(const SequenceSet& seq) {
  const Complex p = seq.pos.c(), n = seq.neg.c(), z = seq.zero.c();
  const Complex a2 = kAlpha * kAlpha;
  ThreePhaseSet abc;
  abc.a = Phasor(p + n + z);
  abc.b = Phasor(a2 * p + kAlpha * n + z);
  abc.c = Phasor(kAlpha * p + a2 * n + z);
  return abc;
}

std::array<double, 2> clarke(double a, double b, double c) {
  const double alpha = (2.0 * a - b - c) / 3.0;
  const double beta = (b - c) / kSqrt3;
  return {alpha, beta};
}

DqSample park(double alpha, double beta, double theta) {
  const double ct = std::cos(theta), st = std::sin(theta);
  return {alpha * ct + beta * st, -alpha * st + beta * ct};
}

std::array<double, 2> inverse_park(double d, double q, double theta) {
  const double ct = std::cos(theta), st = std::sin(theta);
  return {d * ct - q * st, d * st + q * ct};
}

DqSample abc_to_dq(double a, double b, double c, double theta) {
  const auto ab = clarke(a, b, c);
  return park(ab[0], ab[1], theta);
}

std::array<double, 3> dq_to_abc(double d, double q, double theta) {
  const auto ab = inverse_park(d, q, theta);
  const double a = ab[0];
  const double b = (-ab[0] + kSqrt3 * ab[1]) / 2.0;
  const double c = (-ab[0] - kSqrt3 * ab[1]) / 2.0;
  return {a, b, c};
}

Phasor phasor_of_trace(std::span<const double> samples, double dt, double f_hz,
                       int cycles) {
  if (!(dt > 0.0)) throw std::invalid_argument("phasor_of_trace: dt must be > 0");
  if (!(f_hz > 0.0)) throw std::invalid_argument("phasor_of_trace: f must be > 0");
  if (cycles < 1) throw std::invalid_argument("phasor_of_trace: need >= 1 cycle");

  const double exact_n = static_cast<double>(cycles) / (f_hz * dt);
  const auto n = static_cast<std::size_t>(std::llround(exact_n));
  if (n < 4 || std::abs(exact_n - static_cast<double>(n)) > 1e-6 * exact_n) {
    throw std::invalid_argument(
        "phasor_of_trace: window of " + std::to_string(cycles) +
        " cycles is not an integer number of samples at dt=" + std::to_string(dt));
  }
  if (samples.size() < n) {
    throw std::invalid_argument("phasor_of_trace: record shorter than window");
  }

  const std::size_t start = samples.size() - n;
  const double w = kTwoPi * f_hz * dt;
  Complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const double ph = w * static_cast<double>(i);
    acc += samples[start + i] * Complex{std::cos(ph), -std::sin(ph)};
  }
  acc *= 2.0 / (static_cast<double>(n) * kSqrt2);
  return Phasor(acc);
}

}  // namespace difq
