#pragma once

// Airy-type special functions on the complex plane: Ai/Bi with derivatives,
// the rotated-kernel primitives entering the layer basis, the Scorer
// functions Hi/Gi, the running integral of Hi(-t), and the Tietjens function.
//
// Evaluation strategy: Maclaurin series inside |z| <= m_switch (summed in
// compensated double-double arithmetic in the outer annulus, where plain
// summation would lose up to e^{2|xi|} to cancellation), saddle-point
// asymptotics outside, quadrature along decay rays for the primitives at
// moderate argument.  Every tagged result reports which path produced it.

#include "oslab/scaled.hpp"
#include "oslab/types.hpp"

namespace oslab::specfun {

// Default series/asymptotics switch radius for the Airy-type functions.
inline constexpr double kMSwitchDefault = 9.0;

// The primitives switch from quadrature to their tail expansions farther out:
// the tail series reaches only its e^{-|xi|} optimal-truncation floor (not
// e^{-2|xi|}), and degrades further near the negative real axis, so |z| = 14
// is the first radius where the asymptotic route is uniformly ~1e-10.
inline constexpr double kPrimitiveSwitchDefault = 14.0;

// Force a specific evaluation path (tests exercise both sides of a switch
// radius; `automatic` picks by |z|).
enum class Route { automatic, series, asymptotic, quadrature };

// ---- Airy functions ----------------------------------------------------

// k-th derivative of Ai, k in {0,1,2}; the second derivative uses the ODE
// Ai'' = z Ai.  Throws DomainError for non-finite z, |z| > 1e4, or values
// that overflow double range.
TaggedValue airy_ai_tagged(Complex z, int k = 0,
                           double m_switch = kMSwitchDefault);
Complex airy_ai(Complex z, int k = 0, double m_switch = kMSwitchDefault);

// k-th derivative of Bi, k in {0,1}.
TaggedValue airy_bi_tagged(Complex z, int k = 0,
                           double m_switch = kMSwitchDefault);
Complex airy_bi(Complex z, int k = 0, double m_switch = kMSwitchDefault);

// Ai and Ai' in exponent-scaled form; never overflows.  This is what the
// layer basis tabulation consumes.
struct AiryPair {
  ScaledC ai, aip;
  EvalMethod method;
};
AiryPair airy_ai_scaled(Complex z, double m_switch = kMSwitchDefault);

// ---- Primitives of the rotated Airy kernels ----------------------------
//
//   primitive_A(1,z) = -Int_z^inf Ai(e^{i pi/6} s) ds
//   primitive_A(2,z) = -Int_z^inf primitive_A(1,s) ds
//                    =  Int_z^inf (s-z) Ai(e^{i pi/6} s) ds
//   primitive_C(1,z) =  Int_{-inf}^z Ai(e^{i 5pi/6} s) ds
//   primitive_C(2,z) =  Int_{-inf}^z primitive_C(1,s) ds
//                    =  Int_{-inf}^z (z-s) Ai(e^{i 5pi/6} s) ds
//
// Quadrature along the kernel's decay ray for moderate |z| (primary),
// saddle-point forms beyond m_switch.  Preconditions: |Im z| <= 0.25,
// |z| <= 40; the explicit quadrature route additionally needs |z| <= 25
// (double-range headroom) and the explicit asymptotic route |z| >= 8.
TaggedValue primitive_A_tagged(int j, Complex z, Route route = Route::automatic,
                               double m_switch = kPrimitiveSwitchDefault);
Complex primitive_A(int j, Complex z);
TaggedValue primitive_C_tagged(int j, Complex z, Route route = Route::automatic,
                               double m_switch = kPrimitiveSwitchDefault);
Complex primitive_C(int j, Complex z);

// ---- Scorer functions --------------------------------------------------

// Hi(z): series through |z| <= 12, algebraic expansion in the decay sector
// beyond, rotation identities (through Ai/Bi) elsewhere.  Throws DomainError
// where the value would overflow.
TaggedValue scorer_hi_tagged(Complex z, Route route = Route::automatic);
Complex scorer_hi(Complex z);
// dHi/dz, same routing; used by ODE-march checks and integral kernels.
Complex scorer_hi_deriv(Complex z);

// Gi(z) = Bi(z) - Hi(z), via its own series / rotation identity.
TaggedValue scorer_gi_tagged(Complex z);
Complex scorer_gi(Complex z);

// Int_0^z Hi(-t) dt; log-plus-algebraic expansion (optimally truncated) for
// large |z| in |arg z| <= 2 pi/3 - 0.25, series below.
TaggedValue int_hi_tagged(Complex z, Route route = Route::automatic);
Complex int_hi(Complex z);

// ---- Tietjens function -------------------------------------------------
//
// F(z) = [1 - A(2,zeta)/(zeta A(1,zeta))]^{-1} with zeta = -z, z > 0.
Complex tietjens(double z);

// ---- Asymptotic tails (shared with the layer basis) --------------------
//
// tail_int_ai(w)  ~ Int_w^inf Ai        (optimally truncated expansion)
// tail_int2_ai(w) ~ Int_w^inf Int_s^inf Ai  (via the exact identity
//                   J(w) = -Ai'(w) - w I(w))
// Valid for |arg w| <= pi - 0.1, |w| >= 6.  Relative accuracy is the
// e^{-|xi| cos(3 arg(w)/2 mod ...)}-type optimal-truncation floor: ~1e-8 at
// |w| = 9 on the positive axis, ~5e-5 at |w| = 9 near arg = 5 pi/6, and
// better than 1e-9 everywhere once |w| >= 14.
ScaledC tail_int_ai(Complex w);
ScaledC tail_int2_ai(Complex w);

}  // namespace oslab::specfun
