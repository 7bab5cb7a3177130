#pragma once

// Critical-layer coordinate map.
//
// Near the critical point Y_c (where u(Y_c) equals the real phase speed) the
// fourth-order stability operator degenerates to an Airy equation in a
// stretched variable.  The map eta(Y) implemented here is the standard Langer
// variable with two modifications:
//
//  * the real part blends the affine inner chart  Y - Y_c  into the outer
//    chart  +-( (3/2) Int_{Y_c}^{Y} ((u-c_r)/u'(Y_c))^{1/2} )^{2/3}  with a
//    C^4 cutoff, so eta is affine through the sublayer and WKB-accurate
//    outside it;
//  * a constant imaginary shift eta_i = -(|eps| a^2 + c_i)/u'(Y_c) absorbs
//    both the imaginary part of the phase speed and the spectral shift, which
//    makes the residual coefficient Err1 vanish exactly at Y_c.
//
// The map induces the partition of [0, inf) into an inner region N (where
// |kappa eta| <= M) and outer regions N-, N+ on either side, which the layer
// solver uses to pick evaluation routes.

#include <complex>
#include <utility>

#include "oslab/profiles.hpp"
#include "oslab/types.hpp"

namespace oslab::langer {

// Thresholds standing in for the strict-inequality smallness conditions that
// define the admissible parameter sets.  The defaults are deliberately loose:
// they accept every (nu, alpha) pair the solvers are exercised on while still
// rejecting points far outside the asymptotic regime.  admissibility_report()
// exposes the raw left-hand sides so the margins can be audited.
struct ProxyConstants {
  double log_cap = 5.0;         // caps (alpha + c_r)|log c_i| style products
  double eps_cubert_factor = 4.0;  // |eps|^{1/3} <= factor * min(alpha, c_r)
  double ci_frac = 0.5;         // |c_i| <= ci_frac * min(alpha, c_r)
  double ratio_cap = 10.0;      // alpha/c_r confined to [1/cap, cap]
};

// One point of the spectral plane together with every derived scale the
// solvers need.  All fields are set by the constructor and never mutated.
struct SpectralPoint {
  const profiles::Profile* profile = nullptr;
  double nu = 0.0;       // viscosity
  double alpha = 0.0;    // wavenumber
  Complex c;             // phase speed
  Complex eps;           // nu^{1/2} / (i alpha); purely imaginary
  double abs_eps = 0.0;  // nu^{1/2} / alpha
  Complex c_hat;         // c + i |eps| alpha^{-3/2}
  double Y_c = 0.0;      // u(Y_c) = Re c
  double uc1 = 0.0;      // u'(Y_c)
  double uc2 = 0.0;      // u''(Y_c)
  double uc3 = 0.0;      // u'''(Y_c)
  double kappa = 0.0;    // |eps|^{-1/3} u'(Y_c)^{1/3}, the sublayer scale

  SpectralPoint() = default;
  // Requires nu > 0, alpha > 0 and 0 < Re c < 1 (so Y_c exists).
  SpectralPoint(const profiles::Profile& p, double nu_, double alpha_,
                Complex c_);
};

// Membership tests for the admissible sets, with "much less than" replaced by
// the configured thresholds.  The first set constrains (alpha, c) only; the
// second and third also involve eps and are evaluated on a SpectralPoint.
// For the logarithmic factors |c_i| is clamped below by |eps| alpha^{-3/2}
// (the imaginary part of the shifted speed), which keeps the products finite
// on the neutral curve itself.
bool in_admissible_1(double alpha, Complex c, const ProxyConstants& k = {});
bool in_admissible_2(const SpectralPoint& pt, const ProxyConstants& k = {});
bool in_admissible_3(const SpectralPoint& pt, const ProxyConstants& k = {});

// Raw left-hand sides of the admissibility inequalities (for logging and for
// tightening the thresholds offline).
struct AdmissibilityReport {
  double log_product_1 = 0.0;   // (alpha + |c|) |log ci_eff|
  double eps_cubert_ratio = 0.0;  // |eps|^{1/3} / min(alpha, c_r)
  double mixed_sum_2 = 0.0;     // (alpha+c_r)|log ci_eff| + (alpha^2+c_r^2)|eps|^{-1/3}
  double ci_ratio = 0.0;        // |c_i| / min(alpha, c_r)
  double alpha_cr_ratio = 0.0;  // alpha / c_r
};
AdmissibilityReport admissibility_report(const SpectralPoint& pt);

class LangerMap {
 public:
  // M sets the inner-region half-width in units of kappa^{-1}; delta0 is the
  // sector half-angle the Airy asymptotics tolerate.
  explicit LangerMap(const SpectralPoint& pt, double M = 1.0,
                     double delta0 = 0.1);

  const SpectralPoint& point() const { return pt_; }
  double M() const { return M_; }
  double delta0() const { return delta0_; }
  double eta_i() const { return eta_i_; }

  // d^k/dY^k of eta(Y) = eta_r(Y) + i eta_i for k = 0, 1, 2.  Derivatives are
  // real (the shift is constant) but returned as Complex for uniformity.
  Complex eta(double Y, int k = 0) const;

  // eta and both derivatives from a single chart evaluation.  The outer chart
  // costs a quadrature per call, so tabulation loops (the layer basis visits
  // every node of a fine mesh) use this instead of three eta() calls.
  struct EtaJet {
    Complex eta;
    double d1 = 0.0;
    double d2 = 0.0;
  };
  EtaJet eta_jet(double Y) const;

  // Residual coefficients of the layer approximation:
  //   Err1 = u'(Y_c) eta (d eta)^2 - eps alpha^2 - (u - c),
  //   Err2 = eps d^2 eta / d eta.
  // Err1 vanishes at Y_c by construction of eta_i; Err2 vanishes wherever the
  // map is affine.
  std::pair<Complex, Complex> err_coeffs(double Y) const;

  // Partition boundaries: |kappa eta| = M at Y- (below Y_c; clipped to 0 when
  // the lower outer region is empty) and at Y+ (above Y_c).  Throws
  // DomainError if |kappa eta_i| >= M, i.e. if the inner region is empty.
  std::pair<double, double> regions() const;

  // Im(kappa eta) is the constant kappa * eta_i; the Airy evaluation routes
  // require |kappa eta_i| < delta0.  Checked by the layer solver.
  double sector_im() const { return pt_.kappa * eta_i_; }

 private:
  // Outer chart value and its first two Y-derivatives at offset delta=Y-Y_c.
  void eta_out(double delta, double& v, double& d1, double& d2) const;

  SpectralPoint pt_;
  double M_ = 1.0;
  double delta0_ = 0.1;
  double eta_i_ = 0.0;
  double blend_h_ = 0.0;  // kappa^{-1} M, the blend length scale
};

}  // namespace oslab::langer
