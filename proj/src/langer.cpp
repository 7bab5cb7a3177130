#include "oslab/langer.hpp"

#include <algorithm>
#include <cmath>

#include "oslab/quadrature.hpp"

namespace oslab::langer {
namespace {

// Ninth-order smoothstep: S(0)=0, S(1)=1, first four derivatives vanish at
// both ends.  C^4 regularity keeps the second derivative of the blended map
// (which enters the residual coefficient Err2) continuous with margin.
double smoothstep(double s) {
  return s * s * s * s * s *
         (126.0 + s * (-420.0 + s * (540.0 + s * (-315.0 + s * 70.0))));
}
double smoothstep_d1(double s) {
  double a = s * (1.0 - s);
  return 630.0 * a * a * a * a;
}
double smoothstep_d2(double s) {
  double a = s * (1.0 - s);
  return 2520.0 * a * a * a * (1.0 - 2.0 * s);
}

// |c_i| clamped below by the shift |eps| alpha^{-3/2}; keeps log factors
// finite on the neutral curve, where the analysis runs on the shifted speed.
double ci_floor(const SpectralPoint& pt) {
  return std::max(std::abs(pt.c.imag()),
                  pt.abs_eps * std::pow(pt.alpha, -1.5));
}

}  // namespace

SpectralPoint::SpectralPoint(const profiles::Profile& p, double nu_,
                             double alpha_, Complex c_) {
  if (!(nu_ > 0.0) || !(alpha_ > 0.0)) {
    throw DomainError("SpectralPoint: nu and alpha must be positive");
  }
  profile = &p;
  nu = nu_;
  alpha = alpha_;
  c = c_;
  abs_eps = std::sqrt(nu) / alpha;
  eps = Complex(0.0, -abs_eps);  // nu^{1/2}/(i alpha)
  c_hat = c + Complex(0.0, abs_eps * std::pow(alpha, -1.5));
  Y_c = profiles::critical_point(p, c.real());
  uc1 = p.u(Y_c, 1);
  uc2 = p.u(Y_c, 2);
  uc3 = p.u(Y_c, 3);
  kappa = std::cbrt(uc1 / abs_eps);
}

bool in_admissible_1(double alpha, Complex c, const ProxyConstants& k) {
  double ci = c.imag();
  if (!(ci > 0.0)) return false;
  if (c.real() < ci / k.ci_frac) return false;
  return (alpha + std::abs(c)) * std::abs(std::log(ci)) <= k.log_cap;
}

bool in_admissible_2(const SpectralPoint& pt, const ProxyConstants& k) {
  double cr = pt.c.real();
  double m = std::min(pt.alpha, cr);
  if (!(m > 0.0)) return false;
  double e3 = std::cbrt(pt.abs_eps);
  if (e3 > k.eps_cubert_factor * m) return false;
  double lc = std::abs(std::log(ci_floor(pt)));
  double sum = (pt.alpha + cr) * lc + (pt.alpha * pt.alpha + cr * cr) / e3;
  if (sum > k.log_cap) return false;
  return std::abs(pt.c.imag()) <= k.ci_frac * m;
}

bool in_admissible_3(const SpectralPoint& pt, const ProxyConstants& k) {
  if (!in_admissible_2(pt, k)) return false;
  double r = pt.alpha / pt.c.real();
  return r >= 1.0 / k.ratio_cap && r <= k.ratio_cap;
}

AdmissibilityReport admissibility_report(const SpectralPoint& pt) {
  AdmissibilityReport r;
  double cr = pt.c.real();
  double m = std::min(pt.alpha, cr);
  double e3 = std::cbrt(pt.abs_eps);
  double lc = std::abs(std::log(ci_floor(pt)));
  r.log_product_1 = (pt.alpha + std::abs(pt.c)) * lc;
  r.eps_cubert_ratio = e3 / m;
  r.mixed_sum_2 = (pt.alpha + cr) * lc + (pt.alpha * pt.alpha + cr * cr) / e3;
  r.ci_ratio = std::abs(pt.c.imag()) / m;
  r.alpha_cr_ratio = pt.alpha / cr;
  return r;
}

LangerMap::LangerMap(const SpectralPoint& pt, double M, double delta0)
    : pt_(pt), M_(M), delta0_(delta0) {
  eta_i_ = -(pt_.abs_eps * pt_.alpha * pt_.alpha + pt_.c.imag()) / pt_.uc1;
  blend_h_ = M_ / pt_.kappa;
}

// Outer chart at offset delta = Y - Y_c.  The defining integral is evaluated
// after the substitution Z = Y_c +- tau^2, which turns the square-root
// vanishing of u - c_r at the turning point into a C^infty integrand.
// Derivatives come from the chart's own first-order relation
//     eta (d eta)^2 = p,   p(Y) = (u(Y) - c_r)/u'(Y_c),
// whose differentiated form  d2 eta = (p' - (d eta)^3) / (2 eta d eta)  is
// numerically stable down to |delta| ~ 1e-4; below that a Taylor expansion of
// the chart about the turning point takes over.
void LangerMap::eta_out(double delta, double& v, double& d1, double& d2) const {
  const profiles::Profile& P = *pt_.profile;
  const double Yc = pt_.Y_c;
  const double cr = pt_.c.real();
  const double a = pt_.uc2 / (2.0 * pt_.uc1);
  const double b = pt_.uc3 / (6.0 * pt_.uc1);

  constexpr double kNearDelta = 1e-4;
  if (std::abs(delta) < kNearDelta) {
    double c2 = 0.5 * b - 0.125 * a * a;
    double e3 = 2.0 * c2 / 7.0 - a * a / 100.0;
    v = delta * (1.0 + delta * (0.2 * a + delta * e3));
    d1 = 1.0 + delta * (0.4 * a + 3.0 * e3 * delta);
    d2 = 0.4 * a + 6.0 * e3 * delta;
    return;
  }

  quad::Options opt;
  opt.rel_tol = 1e-13;
  const double sgn = delta > 0.0 ? 1.0 : -1.0;
  const double r = std::sqrt(std::abs(delta));
  auto g = [&](double tau) {
    double p = sgn * (P.u(Yc + sgn * tau * tau) - cr) / pt_.uc1;
    return Complex(2.0 * tau * std::sqrt(std::max(p, 0.0)), 0.0);
  };
  double q = 1.5 * quad::integrate(g, 0.0, r, opt).value.real();
  v = sgn * std::cbrt(q * q);
  double p_end = sgn * (P.u(Yc + delta) - cr) / pt_.uc1;
  d1 = std::sqrt(std::max(p_end, 0.0)) / std::cbrt(q);
  double pp = P.u(Yc + delta, 1) / pt_.uc1;
  d2 = (pp - d1 * d1 * d1) / (2.0 * v * d1);
}

LangerMap::EtaJet LangerMap::eta_jet(double Y) const {
  double delta = Y - pt_.Y_c;
  double t = std::abs(delta) / blend_h_;
  double er, e1, e2;
  if (t <= 1.0) {
    er = delta;
    e1 = 1.0;
    e2 = 0.0;
  } else {
    double ov, o1, o2;
    eta_out(delta, ov, o1, o2);
    if (t < 2.0) {
      double s = t - 1.0;
      double w = 1.0 - smoothstep(s);
      double sgn = delta >= 0.0 ? 1.0 : -1.0;
      double wp = -smoothstep_d1(s) * sgn / blend_h_;
      double wpp = -smoothstep_d2(s) / (blend_h_ * blend_h_);
      er = ov + w * (delta - ov);
      e1 = o1 + wp * (delta - ov) + w * (1.0 - o1);
      e2 = (1.0 - w) * o2 + wpp * (delta - ov) + 2.0 * wp * (1.0 - o1);
    } else {
      er = ov;
      e1 = o1;
      e2 = o2;
    }
  }
  return EtaJet{Complex(er, eta_i_), e1, e2};
}

Complex LangerMap::eta(double Y, int k) const {
  if (k < 0 || k > 2) throw DomainError("LangerMap::eta: order must be 0..2");
  EtaJet j = eta_jet(Y);
  switch (k) {
    case 0:
      return j.eta;
    case 1:
      return Complex(j.d1, 0.0);
    default:
      return Complex(j.d2, 0.0);
  }
}

std::pair<Complex, Complex> LangerMap::err_coeffs(double Y) const {
  Complex etaY = eta(Y, 0);
  double d1 = eta(Y, 1).real();
  double d2 = eta(Y, 2).real();
  Complex umc = Complex(pt_.profile->u(Y), 0.0) - pt_.c;
  Complex err1 =
      pt_.uc1 * etaY * (d1 * d1) - pt_.eps * (pt_.alpha * pt_.alpha) - umc;
  Complex err2 = pt_.eps * d2 / d1;
  return {err1, err2};
}

std::pair<double, double> LangerMap::regions() const {
  double rho2 = (M_ / pt_.kappa) * (M_ / pt_.kappa) - eta_i_ * eta_i_;
  if (!(rho2 > 0.0)) {
    throw DomainError("LangerMap::regions: |kappa eta_i| >= M, inner region empty");
  }
  double rho = std::sqrt(rho2);

  // eta_r is strictly increasing; solve eta_r(Y) = target by safeguarded
  // Newton within a maintained bracket.
  auto solve = [&](double target, double lo, double hi) {
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
      double f = eta(x, 0).real() - target;
      if (f > 0.0) {
        hi = x;
      } else {
        lo = x;
      }
      if (std::abs(f) <= 1e-14 * (1.0 + std::abs(target)) ||
          hi - lo <= 1e-15 * (1.0 + std::abs(x))) {
        break;
      }
      double d = eta(x, 1).real();
      double xn = x - f / d;
      if (!(xn > lo) || !(xn < hi)) xn = 0.5 * (lo + hi);
      x = xn;
    }
    return x;
  };

  double hi = pt_.Y_c + std::max(2.0 * rho, 0.1);
  for (int it = 0; it < 200 && eta(hi, 0).real() < rho; ++it) {
    hi = pt_.Y_c + 2.0 * (hi - pt_.Y_c);
  }
  double y_plus = solve(rho, pt_.Y_c, hi);

  double y_minus = 0.0;
  if (eta(0.0, 0).real() < -rho) {
    y_minus = solve(-rho, 0.0, pt_.Y_c);
  }
  return {y_minus, y_plus};
}

}  // namespace oslab::langer
