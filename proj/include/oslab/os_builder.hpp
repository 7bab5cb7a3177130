#pragma once

// Solutions of the full stability operator near the neutral curve, assembled
// from the Rayleigh and critical-layer solvers.
//
// With Delta = d^2/dY^2 - alpha^2 and eps = nu^{1/2}/(i alpha), the operator
//
//     OS[phi] = eps Delta^2 phi - (u - c) Delta phi + u'' phi
//
// is inverted by iterating around the shifted-speed Rayleigh operator
// Ray[phi] = (u - c_hat) Delta phi - u'' phi, c_hat = c + i c0.  Each step
// solves Ray[phi^{(j)}] = r_j and writes its curvature as
// g_j = Delta phi^{(j)} = (u'' phi^{(j)} + r_j)/(u - c_hat); the viscous
// defect of the step,
//
//     OS[phi^{(j)}] + r_j = eps d^2 g_j - (i c0 + eps alpha^2) g_j,
//
// is cancelled by a stream-function correction psi^{(j)} obtained from three
// critical-layer solves whose forces split the defect as
//
//     -eps d^2[(1-chi) g_j]          (wall-clean part, d^2G entry point)
//     + (i c0 + eps alpha^2) g_j     (shift coupling, weighted class)
//     - eps d^2[chi g_j]             (layer part, d^2G entry point),
//
// chi cutting off above the layer.  What survives is u'' psi^{(j)}, which
// seeds r_{j+1}, so the partial sums Sigma (phi^{(j)} + psi^{(j)}) solve
// OS[.] = -r_1 up to the last leftover.  Near the neutral curve the
// three-norm bundle of the psi increments contracts like
// O(alpha |log eps|^2) per step.
//
// On this solver sit the two mode constructions the dispersion relation
// consumes: the slow mode grown from the homogeneous Rayleigh solution and
// the fast mode grown from the decaying layer mode, each completed by a
// source-driven solve of its own viscous leftover.
//
// Derivative fields are chained through the governing equations (the
// Rayleigh relation supplies d^2 of its part, the layer equation d^2 of w),
// never by differencing tabulated data.  The residual check runs the other
// way: it differentiates the assembled phi samples spectrally panel by
// panel, so the production fields and the acceptance number come from
// independent routes.

#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "oslab/airy_layer.hpp"
#include "oslab/langer.hpp"
#include "oslab/profiles.hpp"
#include "oslab/quadrature.hpp"
#include "oslab/types.hpp"

namespace oslab::osb {

struct Options {
  // Weight/decay rate eta0 for sources, bundles and norms; 0 picks the
  // profile's own envelope rate.  Must exceed 1.5 alpha, or the alpha-scale
  // tails of the Rayleigh pieces leave the weighted space.
  double theta = 0.0;
  // Iteration truncation: stop when the psi-increment bundle falls below
  // rel_tol times the first bundle, or after max_iterations steps,
  // whichever comes first.
  double rel_tol = 1e-8;
  int max_iterations = 12;
  // Imaginary shift of the Rayleigh speed: c0 = |eps| alpha^{-s}.  s = 3/2
  // balances the layer and wall scales and is the canonical choice; other
  // values in (0, 2) are accepted for experiments.
  double shift_exponent = 1.5;
  // Ceiling on the relative OS residual below which a mode is accepted.
  double residual_accept = 1e-5;
  double coarse = 0.25;  // panel-width ceiling for both sub-solvers
  double y_max = 0.0;    // 0 = auto (the layer extent)
};

// A source with two derivatives.  The iteration divides sources by
// (u - c_hat) and pushes second derivatives into the layer solves, so a bare
// evaluator is not enough; every producer inside the scheme has the
// derivatives at hand anyway.
struct SourceJet {
  std::function<Complex(double)> f, df, d2f;
};

// One step of the iteration: boundary data of both parts, the worst
// sub-solver residuals, and the bundle driving truncation.  j = 0 labels the
// leading term of a mode construction (phi_Ray + psi^{(1)} or psi_a).
struct IterateRecord {
  int j = 0;
  Complex ray0, dray0;  // Rayleigh-part boundary values
  Complex psi0, dpsi0;  // viscous-part boundary values
  double ray_residual = 0.0;
  double airy_residual = 0.0;
  // ||(u-c_hat)^2 d2 psi|| + ||(u-c_hat) d psi|| + ||psi||, weighted sups.
  double bundle = 0.0;
  double ratio = 0.0;  // bundle / previous bundle; 0 for the first step
};

// A solution tabulated with four derivatives on the layer grid, plus the
// per-step ledger.  d2..d4 are equation-chained (see the header comment);
// residual_norm is the independent spectral-differentiation check.
struct OSFields {
  quad::Mesh mesh;
  std::vector<Complex> phi, d1, d2, d3, d4;  // at the mesh nodes
  Complex phi0, dphi0;                       // wall values (Y=0 not a node)
  std::vector<IterateRecord> ledger;
  // Weighted sup of |OS[phi] - f| over the interior nodes of every panel,
  // relative to norm_Y of the fields.  Fourth derivatives here come from a
  // single per-panel differentiation matrix applied to the phi samples; the
  // outermost rows of such a matrix amplify sample rounding two orders of
  // magnitude harder than the middle ones, hence the interior restriction
  // (the residual is smooth on the panel scale, so the sup loss is a few
  // percent at most).
  double residual_norm = 0.0;
  double contraction = 0.0;  // worst bundle ratio observed
  int iterations = 0;
  double theta = 1.0;  // resolved weight rate
  Complex c_hat;       // shifted speed used by the Rayleigh steps
  std::pair<double, double> regions{0.0, 0.0};  // layer band [Y-, Y+]

  Complex at(double Y) const { return mesh.interpolate(phi, Y); }
  Complex deriv_at(double Y) const { return mesh.interpolate(d1, Y); }
};

enum class ModeKind { slow, fast };

// Boundary data of an assembled mode together with the leading-term
// diagnostics and the full fields.  The dispersion layer reads phi0/dphi0;
// everything else exists so a failed point can be audited.
struct ModeBoundaryData {
  Complex phi0, dphi0;
  ModeKind kind = ModeKind::slow;
  double residual_norm = 0.0;  // relative OS residual of the assembled mode
  int iterations = 0;          // steps taken by the leftover solve
  bool accepted = false;       // residual_norm <= Options::residual_accept
  Complex lead0, dlead0;       // phi_Ray (slow) / psi_a (fast) wall pair
  Complex psi1_0, dpsi1_0;     // first viscous correction wall pair
  std::optional<Complex> m0s;  // wall functional of the layer part (slow)
  OSFields fields;
};

// Wall functional of the layer part of the slow construction, with the
// closed-form comparison values: Im is predicted by
// alpha u''(Y_c)/u'(Y_c)^2 * (arg(-c_hat) + pi) to o(alpha), and |Re| stays
// below a moderate multiple of alpha |log eps|.
struct M0sResult {
  Complex value;
  double im_closed_form = 0.0;
  double re_over_alpha_log = 0.0;  // |Re value| / (alpha |log eps|)
};

// Per-point state shared by every solve: the coordinate map, the layer
// tabulation and the resolved options.  Building one is the expensive part;
// all entry points taking a workspace are const and thread-compatible.
//
// Throws DomainError when the profile disagrees with the spectral point,
// when the resolved weight rate does not clear 1.5 alpha, when the shift
// exponent leaves (0, 2), or when c_i <= -c0/2 (the shifted speed must keep
// its imaginary part above c0/2 so the Rayleigh pole stays off the real
// axis).  The admissible-set gates of the underlying solvers fire on entry
// to the solves themselves.
class Workspace {
 public:
  Workspace(const profiles::Profile& p, const langer::SpectralPoint& sp,
            const Options& opt = {});

  const profiles::Profile& profile() const { return *profile_; }
  const langer::SpectralPoint& point() const { return sp_; }
  const Options& options() const { return opt_; }  // theta resolved
  const airy::Layer& layer() const { return layer_; }
  double theta() const { return opt_.theta; }
  Complex c_hat() const { return c_hat_; }
  // i c0 + eps alpha^2, the constant multiplying g in the viscous defect
  // (= -eps (alpha^{-3/2} - alpha^2) for the canonical shift).
  Complex coupling() const { return coupling_; }

 private:
  const profiles::Profile* profile_;
  langer::SpectralPoint sp_;
  Options opt_;
  langer::LangerMap map_;
  airy::Layer layer_;
  Complex c_hat_;
  Complex coupling_;
};

// Decaying solution of OS[phi] = f for a source decaying like e^{-theta Y}.
// Truncates per Options; throws ConvergenceError with the ratio history in
// the message when a bundle ratio reaches 1.
OSFields solve_os_nonhomog(const Workspace& ws, const SourceJet& f);
OSFields solve_os_nonhomog(const langer::SpectralPoint& sp,
                           const profiles::Profile& p, const SourceJet& f,
                           const Options& opt = {});

// Slow mode: homogeneous Rayleigh solution phi_Ray, plus the viscous
// correction psi^{(1)} cancelling its defect (the smooth/singular split of
// u'' phi_Ray/(u - c_hat) routes four layer solves), plus a source-driven
// solve of the leftover -u'' psi^{(1)}.  Boundary values sit at
// -c + O(alpha) with derivative u'(0) + O(alpha |log eps|).
ModeBoundaryData slow_mode(const Workspace& ws);
ModeBoundaryData slow_mode(const langer::SpectralPoint& sp,
                           const profiles::Profile& p,
                           const Options& opt = {});

// Fast mode: decaying layer mode psi_a plus a source-driven solve of
// -u'' psi_a.  When the wall sits below the layer band the first Rayleigh
// step is taken by the explicit double-tail integral (exact for the
// alpha = 0 operator) completed by a full solve of its alpha^2 defect.
// Boundary values stay within O(|eps|^{2/3} |log eps|) of psi_a's.
ModeBoundaryData fast_mode(const Workspace& ws);
ModeBoundaryData fast_mode(const langer::SpectralPoint& sp,
                           const profiles::Profile& p,
                           const Options& opt = {});

// The slow construction's wall functional alone (no solves beyond the
// homogeneous Rayleigh one).  Requires alpha >= 2 |eps|^{1/4}: below that
// the layer part's logarithm is no longer the leading term and the
// closed-form comparison loses meaning.
M0sResult m0s(const Workspace& ws);
M0sResult m0s(const langer::SpectralPoint& sp, const profiles::Profile& p,
              const Options& opt = {});

// Weighted-sup norms of a tabulated solution.  norm_Y stacks
// (u-c_hat)^k-weighted derivatives; norm_X replaces the fourth-derivative
// weight by the blend |eps|^{1/3}|u-c_hat|^3 inside the layer band and
// |eps||u-c_hat| outside it, joined by a smoothstep of width 1/kappa at the
// band edges.  All sups use e^{theta Y} frozen beyond Y = 18/theta.
double norm_X(const OSFields& f, const langer::SpectralPoint& sp,
              const profiles::Profile& p);
double norm_Y(const OSFields& f, const langer::SpectralPoint& sp,
              const profiles::Profile& p);

}  // namespace oslab::osb
