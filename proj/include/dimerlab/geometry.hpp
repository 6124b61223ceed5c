#pragma once

#include <cmath>
#include <complex>

namespace dimerlab {

using Complex = std::complex<double>;

inline double dot(Complex a, Complex b) { return a.real() * b.real() + a.imag() * b.imag(); }
inline double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

// Signed turning angle from direction a to direction b, in (-pi, pi].
inline double turn_angle(Complex a, Complex b) { return std::atan2(cross(a, b), dot(a, b)); }

inline constexpr double kPi = 3.14159265358979323846;

// Third root of unity tau = exp(2*pi*i/3).
inline Complex tau() { return Complex(-0.5, 0.8660254037844386467637231707529362); }

// Kahan-compensated accumulator for long sums of small terms.
class CompensatedSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

}  // namespace dimerlab
