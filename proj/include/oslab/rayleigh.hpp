#pragma once

// Solvers for the inviscid (Rayleigh) part of the stability problem:
//
//     (u - c) (d^2/dY^2 - a^2) phi - u'' phi = F,     phi(inf) = 0.
//
// The solution path exploits the exact factorization of the a = 0 operator:
// with phi = (u - c) w,
//     (u - c) phi'' - u'' phi = ((u - c)^2 w')',
// so the decaying inverse is the explicit double-tail integral
//     phi = (u - c) Int_Y^inf (u - c)^{-2} Int_Z^inf G dZ' dZ,
// and the full problem is solved by iterating on the a^2 (u - c) phi defect
// (geometric convergence with ratio ~ a^2 / theta^2 for e^{-theta Y} data).
// Everything is tabulated once on a fixed quadrature mesh graded into the
// critical layer, where (u - c)^{-2} varies on the scale |Im c| / u'(Y_c).
//
// Valid for Im c != 0; nearly-neutral speeds must be shifted (the spectral
// shift c_hat = c + i|eps| a^{-3/2} is the usual choice upstream).

#include <functional>
#include <utility>
#include <vector>

#include "oslab/langer.hpp"
#include "oslab/profiles.hpp"
#include "oslab/quadrature.hpp"
#include "oslab/types.hpp"

namespace oslab::rayleigh {

struct Solution {
  quad::Mesh mesh;
  std::vector<Complex> phi, dphi, d2phi;  // tabulated at the mesh nodes
  Complex phi_0, dphi_0;                  // boundary values at Y = 0
  // Weighted sup over nodes of the integrated-form defects
  //   |phi - phi(0) - Int_0^Y dphi|  and  |dphi - dphi(0) - Int_0^Y d2phi|;
  // d2phi itself satisfies the ODE algebraically, so these two numbers bound
  // the equation residual of the tabulated solution.
  double residual_norm = 0.0;
  double theta = 1.0;  // weight rate used for residual_norm

  Complex at(double Y) const { return mesh.interpolate(phi, Y); }
  Complex deriv_at(double Y) const { return mesh.interpolate(dphi, Y); }
  Complex deriv2_at(double Y) const { return mesh.interpolate(d2phi, Y); }
};

struct SolveOptions {
  double theta = 1.0;      // decay rate of the source (for residual weights)
  double rel_tol = 1e-12;  // defect-iteration stopping tolerance
  int max_defect_steps = 60;
  double coarse = 0.25;    // panel width away from the critical layer
  double y_max = 0.0;      // 0 = auto: max(40/eta0, 10/alpha)
  // Skip the a^2 (u - c) phi defect iteration and return the bare double-tail
  // inverse (used by the explicit first-correction path and its cross-check).
  bool zeroth_order_only = false;
  // Extra mesh edges merged into the grid (entries outside (0, y_max) are
  // ignored).  The built-in grading resolves the critical layer but not
  // oscillatory sources; callers feeding viscous-layer data inject the
  // oscillation-resolving edges here.
  std::vector<double> extra_edges;
};

// Explicit decaying quasi-mode
//   2 a e^{aY} (u - c) Int_Y^inf e^{-2aZ} (u(Z) - c)^{-2} dZ
// returning {value, d/dY}.  It obeys Ray[.] = 2 a u' (.) exactly, and its
// boundary value is -c + 2a/u'(Y_c) to leading order, which is what the
// dispersion relation ultimately consumes.  a = 0 gives identically zero.
// Throws DomainError when c is real with 0 < c < 1 (pole on the path).
std::pair<Complex, Complex> ray0(const profiles::Profile& p, double alpha,
                                 Complex c, double Y);

// Decaying solution of the non-homogeneous equation with source F.
Solution solve_nonhomog(const profiles::Profile& p, double alpha, Complex c,
                        const std::function<Complex(double)>& F,
                        const SolveOptions& opt = {});

// Decaying solution of the homogeneous equation, built as the explicit
// quasi-mode plus its first correction (the double-tail inverse of
// -2 a u' phi0) plus a full solve for the remaining a^2-defect.
Solution homog(const profiles::Profile& p, double alpha, Complex c,
               const SolveOptions& opt = {});

// Wrappers picking the speed from a spectral point (plain or shifted).
Solution solve_nonhomog(const langer::SpectralPoint& sp, bool use_c_hat,
                        const std::function<Complex(double)>& F,
                        const SolveOptions& opt = {});
Solution homog(const langer::SpectralPoint& sp, bool use_c_hat,
               const SolveOptions& opt = {});

// Closed-form second-order predictions for the boundary values of the
// homogeneous solution,
//   Im phi(0)  ~ -c_i - a c_r u''(Y_c)/u'(Y_c)^3 * arg(-c),
//   Im phi'(0) ~        a     u''(Y_c)/u'(Y_c)^2 * arg(-c),
// with arg(-c) on the principal branch (in (-pi, -pi/2) for small c_i > 0).
// Requires |c_i| well below min(alpha, c_r); throws DomainError otherwise.
std::pair<double, double> boundary_imag_prediction(const profiles::Profile& p,
                                                   double alpha, Complex c);

// e^{-eta0 Y} envelope rate of 1 - u for the named profile (1 if unknown).
double profile_decay_rate(const profiles::Profile& p);

}  // namespace oslab::rayleigh
