#pragma once

// Exponent-scaled complex values.
//
// The layer basis functions behave like exp(±(2/3)(κη)^{3/2}) and overflow
// double precision for |κη| beyond ~150, while every quantity of interest is
// a product/integral in which the exponents nearly cancel.  We therefore carry
// value = s * exp(logf) with a moderate mantissa s and an explicit complex
// exponent logf, and only exponentiate after exponents have been combined.

#include <cmath>
#include <limits>

#include "oslab/types.hpp"

namespace oslab {

struct ScaledC {
  Complex s{0.0, 0.0};   // mantissa, kept with |s| in [1,2) when nonzero
  Complex logf{0.0, 0.0};

  static ScaledC from(Complex v) {
    ScaledC r{v, {0.0, 0.0}};
    r.normalize();
    return r;
  }
  static ScaledC from(Complex s_, Complex logf_) {
    ScaledC r{s_, logf_};
    r.normalize();
    return r;
  }
  static ScaledC zero() { return ScaledC{}; }

  bool is_zero() const { return s == Complex{0.0, 0.0}; }

  void normalize() {
    if (is_zero()) {
      logf = {0.0, 0.0};
      return;
    }
    double m = std::abs(s);
    if (m >= 1.0 && m < 2.0) return;
    s /= m;
    logf += std::log(m);
  }

  // log|value|, -inf for zero.
  double log_abs() const {
    if (is_zero()) return -std::numeric_limits<double>::infinity();
    return logf.real() + std::log(std::abs(s));
  }

  // Exponentiate.  Throws on overflow; silently underflows to zero.
  Complex value() const {
    if (is_zero()) return {0.0, 0.0};
    double e = logf.real() + std::log(std::abs(s));
    if (e > 700.0) throw DomainError("scaled value overflows double range");
    if (e < -745.0) return {0.0, 0.0};
    return s * std::exp(logf);
  }

  friend ScaledC operator*(const ScaledC& a, const ScaledC& b) {
    if (a.is_zero() || b.is_zero()) return zero();
    return from(a.s * b.s, a.logf + b.logf);
  }
  friend ScaledC operator*(const ScaledC& a, Complex c) {
    if (a.is_zero() || c == Complex{0.0, 0.0}) return zero();
    return from(a.s * c, a.logf);
  }
  friend ScaledC operator*(Complex c, const ScaledC& a) { return a * c; }
  friend ScaledC operator*(const ScaledC& a, double c) {
    return a * Complex{c, 0.0};
  }
  friend ScaledC operator/(const ScaledC& a, const ScaledC& b) {
    return from(a.s / b.s, a.logf - b.logf);
  }
  friend ScaledC operator-(const ScaledC& a) {
    ScaledC r = a;
    r.s = -r.s;
    return r;
  }
};

// Sum of scaled values, renormalized on the fly against the largest exponent
// seen so far.  Fold order is the call order, so accumulation is deterministic.
class ScaledAccum {
 public:
  void add(const ScaledC& v) {
    if (v.is_zero()) return;
    double p = v.logf.real();
    Complex folded = v.s * std::exp(Complex{0.0, v.logf.imag()});
    if (empty_) {
      s_ = folded;
      l_ = p;
      empty_ = false;
      return;
    }
    if (p > l_) {
      s_ = s_ * std::exp(l_ - p) + folded;
      l_ = p;
    } else {
      double d = p - l_;
      if (d > -745.0) s_ += folded * std::exp(d);
    }
  }

  ScaledC get() const {
    if (empty_ || s_ == Complex{0.0, 0.0}) return ScaledC::zero();
    return ScaledC::from(s_, Complex{l_, 0.0});
  }

 private:
  bool empty_ = true;
  Complex s_{0.0, 0.0};
  double l_ = 0.0;
};

}  // namespace oslab
