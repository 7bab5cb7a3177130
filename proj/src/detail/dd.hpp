#pragma once

// Minimal double-double (compensated) arithmetic, used to sum Maclaurin
// series in the mid-range annulus where plain double summation loses up to
// e^{2|xi|} ~ 1e16 to cancellation.  Only the handful of operations the
// series recurrences need: add, multiply, divide by double, complex wrapper.

#include <cmath>
#include <complex>

namespace oslab::detail {

struct DD {
  double hi = 0.0;
  double lo = 0.0;

  DD() = default;
  DD(double h) : hi(h), lo(0.0) {}
  DD(double h, double l) : hi(h), lo(l) {}

  double to_double() const { return hi + lo; }
};

inline DD quick_two_sum(double a, double b) {
  double s = a + b;
  return DD(s, b - (s - a));
}

inline DD two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  return DD(s, (a - (s - bb)) + (b - bb));
}

inline DD two_prod(double a, double b) {
  double p = a * b;
  return DD(p, std::fma(a, b, -p));
}

inline DD operator+(DD a, DD b) {
  DD s = two_sum(a.hi, b.hi);
  s.lo += a.lo + b.lo;
  return quick_two_sum(s.hi, s.lo);
}

inline DD operator-(DD a, DD b) { return a + DD(-b.hi, -b.lo); }

inline DD operator*(DD a, DD b) {
  DD p = two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return quick_two_sum(p.hi, p.lo);
}

inline DD operator/(DD a, double d) {
  double q1 = a.hi / d;
  DD p = two_prod(q1, d);
  double q2 = ((a.hi - p.hi) - p.lo + a.lo) / d;
  return quick_two_sum(q1, q2);
}

struct DDC {
  DD re, im;

  DDC() = default;
  DDC(DD r, DD i) : re(r), im(i) {}
  explicit DDC(std::complex<double> z) : re(z.real()), im(z.imag()) {}

  std::complex<double> to_complex() const {
    return {re.to_double(), im.to_double()};
  }
};

inline DDC operator+(const DDC& a, const DDC& b) {
  return DDC(a.re + b.re, a.im + b.im);
}

inline DDC operator*(const DDC& a, const DDC& b) {
  return DDC(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
}

inline DDC operator-(const DDC& a, const DDC& b) {
  return DDC(a.re - b.re, a.im - b.im);
}

inline DDC operator/(const DDC& a, double d) {
  return DDC(a.re / d, a.im / d);
}

inline DDC operator*(const DDC& a, DD s) {
  return DDC(a.re * s, a.im * s);
}

inline DDC operator*(const DDC& a, double s) {
  return a * DD(s);
}

inline double abs_estimate(const DDC& a) {
  return std::hypot(a.re.hi, a.im.hi);
}

}  // namespace oslab::detail
