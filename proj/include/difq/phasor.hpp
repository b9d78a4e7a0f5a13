#pragma once
/**
 * @file phasor.hpp
 * @brief Complex rms phasors, symmetric components and reference-frame
 *        transforms shared by every other part of the toolkit.
 *
 * Conventions used project-wide:
 *  - Phasor magnitudes are rms, angles in radians canonicalized to (-pi, pi].
 *  - A phasor X with angle phi represents x(t) = sqrt(2)*|X|*cos(w*t + phi).
 *  - Clarke/Park are amplitude invariant; the q axis lags d by 90 degrees,
 *    so a cosine aligned with the rotating angle lands entirely on d.
 *  - Apparent power is S = V * conj(I); an inductive branch yields Q > 0.
 */

#include <array>
#include <complex>
#include <span>

namespace difq {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kSqrt2 = 1.41421356237309504880168872420969808;
inline constexpr double kSqrt3 = 1.73205080756887729352744634150587237;

using Complex = std::complex<double>;

/// Wrap an angle to the canonical interval (-pi, pi].
double wrap_angle(double a);

/// RMS phasor stored in rectangular form.
struct Phasor {
  double re = 0.0;
  double im = 0.0;

  constexpr Phasor() = default;
  constexpr Phasor(double re_, double im_) : re(re_), im(im_) {}
  explicit constexpr Phasor(Complex z) : re(z.real()), im(z.imag()) {}

  static Phasor from_polar(double mag_rms, double angle_rad);
  static Phasor from_polar_deg(double mag_rms, double angle_deg);

  Complex c() const { return {re, im}; }
  double mag() const;
  double angle() const;      ///< canonical (-pi, pi]
  double angle_deg() const;

  /// Instantaneous value sqrt(2)*|X|*cos(theta + angle) at electrical angle theta.
  double instantaneous(double theta) const;

  Phasor operator+(const Phasor& o) const { return {re + o.re, im + o.im}; }
  Phasor operator-(const Phasor& o) const { return {re - o.re, im - o.im}; }
  Phasor operator-() const { return {-re, -im}; }
};

inline Phasor operator*(const Phasor& a, double s) { return {a.re * s, a.im * s}; }
inline Phasor operator*(double s, const Phasor& a) { return a * s; }
Phasor operator*(const Phasor& a, const Phasor& b);
Phasor operator/(const Phasor& a, const Phasor& b);

/// Per-phase phasors of a three phase quantity (a, b, c order).
struct ThreePhaseSet {
  Phasor a, b, c;
};

/// Fortescue symmetric components of a ThreePhaseSet.
struct SequenceSet {
  Phasor pos, neg, zero;
};

/**
 * Fortescue decomposition with alpha = exp(j*2pi/3):
 *   pos  = (a + alpha*b + alpha^2*c) / 3
 *   neg  = (a + alpha^2*b + alpha*c) / 3
 *   zero = (a + b + c) / 3
 */
SequenceSet sequence_decompose(const ThreePhaseSet& abc);

/// Inverse of sequence_decompose (exact up to rounding).
ThreePhaseSet sequence_compose(const SequenceSet& seq);

/// One sample in the rotating frame.
struct DqSample {
  double d = 0.0;
  double q = 0.0;
};

/// Amplitude-invariant Clarke transform; returns {alpha, beta}.
std::array<double, 2> clarke(double a, double b, double c);

/// Rotate a stationary {alpha, beta} pair into the frame at angle theta.
DqSample park(double alpha, double beta, double theta);

/// Inverse rotation; returns {alpha, beta}.
std::array<double, 2> inverse_park(double d, double q, double theta);

/// Clarke + Park in one call. A balanced set of peak A aligned with theta
/// yields d = A, q = 0.
DqSample abc_to_dq(double a, double b, double c, double theta);

/// Inverse of abc_to_dq for a zero-sequence-free set; returns {a, b, c}.
std::array<double, 3> dq_to_abc(double d, double q, double theta);

/**
 * Single-frequency Fourier correlation over the trailing `cycles` periods of
 * a uniformly sampled record.
 *
 * The window length cycles/(f_hz*dt) must land on an integer sample count
 * (within 1e-6 relative), otherwise std::invalid_argument is thrown. The
 * returned angle is referenced to a cosine starting at the first sample of
 * the window; callers comparing channels must extract them over the same
 * window.
 *
 * A pure sqrt(2)*A*cos(2pi f t + phi) input returns mag = A, angle = phi
 * to integration accuracy.
 */
Phasor phasor_of_trace(std::span<const double> samples, double dt, double f_hz,
                       int cycles);

}  // namespace difq
