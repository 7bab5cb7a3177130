#include "oslab/specfun.hpp"

#include <cmath>
#include <limits>

#include "detail/dd.hpp"
#include "oslab/quadrature.hpp"

namespace oslab::specfun {

namespace {

using detail::DD;
using detail::DDC;

// Double-double constants.  The Maclaurin recurrences have rational factors,
// so these seeds are the only irrational inputs; they must be accurate well
// beyond double precision because the final linear combinations cancel by
// factors up to e^{2|xi|} ~ 1e15 at the switch radius.
const DD kC1{0x1.6b8c7962715b8p-2, 0x1.7a96d7bb04e65p-56};    // Ai(0)
const DD kC2{0x1.0907f42b70f8bp-2, -0x1.d1459035afde2p-56};   // -Ai'(0)
const DD kInvPi{0x1.45f306dc9c883p-2, -0x1.6b01ec5417056p-56};
const DD kSqrt3{0x1.bb67ae8584caap+0, 0x1.cec95d0b5c1e3p-54};

constexpr double kHalfInvSqrtPi = 0x1.20dd750429b6dp-2;  // 1/(2 sqrt(pi))
constexpr double kEulerGamma = 0x1.2788cfc6fb619p-1;
constexpr double kLog3 = 0x1.193ea7aad030bp+0;

// Plain-double series is safe below this radius; double-double carries the
// series to the asymptotic switch.
constexpr double kPlainSeriesRadius = 3.5;
// The Scorer series stays accurate (in dd) through this radius, which lets
// the algebraic expansion start far enough out to meet its own floor.
constexpr double kScorerSeriesRadius = 12.0;
constexpr double kScorerSectorMargin = 0.25;

constexpr double kTwoPiThirds = 2.0 * kPi / 3.0;

template <class C>
constexpr double series_eps() {
  if constexpr (std::is_same_v<C, DDC>) {
    return 1e-36;
  } else {
    return 1e-19;
  }
}

double mag(const Complex& z) { return std::abs(z); }
double mag(const DDC& z) { return detail::abs_estimate(z); }

void check_finite(Complex z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw DomainError("special function argument is not finite");
}

// ---- Maclaurin machinery ------------------------------------------------
//
// f(z) = sum z^{3k} / prod_{j<=k} (3j)(3j-1)        f'' = z f
// g(z) = sum z^{3k+1} / prod_{j<=k} (3j+1)(3j)      g'' = z g
// Ai = c1 f - c2 g,  Bi = sqrt3 (c1 f + c2 g)
// h(z) = sum_{m>=0} 3^m m! z^{3m+2} / (3m+2)!       h'' = z h + 2  (scaled)
// Hi = (2/3) Bi + h/pi,   Gi = (1/3) Bi - h/pi

template <class C>
struct AirySums {
  C f, g, fp, gp;
};

template <class C>
AirySums<C> airy_fg_sums(Complex zc) {
  C z{zc};
  C z3 = z * z * z;
  C f{Complex{1.0, 0.0}}, tf = f;
  C g = z, tg = z;
  C fp{Complex{0.0, 0.0}};
  C tfp = z * z / 2.0;
  fp = fp + tfp;
  C gp{Complex{1.0, 0.0}}, tgp = gp;
  double peak = 1.0;
  const double eps = series_eps<C>();
  for (int k = 1; k < 600; ++k) {
    tf = tf * z3 / ((3.0 * k) * (3.0 * k - 1.0));
    f = f + tf;
    tg = tg * z3 / ((3.0 * k + 1.0) * (3.0 * k));
    g = g + tg;
    if (k >= 2) {
      tfp = tfp * z3 / ((3.0 * k - 3.0) * (3.0 * k - 1.0));
      fp = fp + tfp;
    }
    tgp = tgp * z3 / ((3.0 * k - 2.0) * (3.0 * k));
    gp = gp + tgp;
    double m = std::max(std::max(mag(tf), mag(tg)), std::max(mag(tfp), mag(tgp)));
    peak = std::max(peak, m);
    if (k >= 4 && m < eps * peak) return {f, g, fp, gp};
  }
  throw ConvergenceError("airy series did not terminate", 0.0);
}

template <class C>
struct ScorerSums {
  C h, hp;
};

// h and h' chains; seeds z^2/2 and z, ratios z^3/((3m+1)(3m+2)) and
// z^3/((3m-1)(3m+1)).
template <class C>
ScorerSums<C> scorer_h_sums(Complex zc) {
  C z{zc};
  C z3 = z * z * z;
  C th = z * z / 2.0, h = th;
  C thp = z, hp = thp;
  double peak = std::max(1.0, std::max(mag(th), mag(thp)));
  const double eps = series_eps<C>();
  for (int m = 1; m < 600; ++m) {
    th = th * z3 / ((3.0 * m + 1.0) * (3.0 * m + 2.0));
    h = h + th;
    thp = thp * z3 / ((3.0 * m - 1.0) * (3.0 * m + 1.0));
    hp = hp + thp;
    double mg = std::max(mag(th), mag(thp));
    peak = std::max(peak, mg);
    if (m >= 4 && mg < eps * peak) return {h, hp};
  }
  throw ConvergenceError("scorer series did not terminate", 0.0);
}

// Integrated chains for Int_0^z Hi(-t) dt: termwise primitives of
// f(-t), g(-t), h(-t).
template <class C>
struct IntHiSums {
  C F, G, H;
};

template <class C>
IntHiSums<C> inthi_sums(Complex zc) {
  C z{zc};
  C z3 = z * z * z;
  C tF = z, F = tF;                      // Int f(-t): seed z
  C tG = z * z / (-2.0), G = tG;         // Int g(-t): seed -z^2/2
  C tH = z3 / 6.0, H = tH;               // Int h(-t): seed z^3/6
  double peak = std::max({1.0, mag(tF), mag(tG), mag(tH)});
  const double eps = series_eps<C>();
  for (int m = 1; m < 600; ++m) {
    // Exact-integer factors: pre-rounding the rational ratio in double costs
    // ~1e-17 per term, which the e^{|xi|} series peak amplifies to ~1e-10.
    tF = tF * z3 * (3.0 * m - 2.0) /
         (-((3.0 * m) * (3.0 * m - 1.0) * (3.0 * m + 1.0)));
    F = F + tF;
    tG = tG * z3 * (3.0 * m - 1.0) /
         (-((3.0 * m + 1.0) * (3.0 * m) * (3.0 * m + 2.0)));
    G = G + tG;
    tH = tH * z3 * (double)m /
         (-((m + 1.0) * (3.0 * m + 2.0) * (3.0 * m + 1.0)));
    H = H + tH;
    double mg = std::max({mag(tF), mag(tG), mag(tH)});
    peak = std::max(peak, mg);
    if (m >= 4 && mg < eps * peak) return {F, G, H};
  }
  throw ConvergenceError("int-hi series did not terminate", 0.0);
}

struct AiryAll {
  Complex ai, aip, bi, bip;
};

AiryAll airy_series_eval(Complex z) {
  if (std::abs(z) <= kPlainSeriesRadius) {
    auto s = airy_fg_sums<Complex>(z);
    double c1 = kC1.to_double(), c2 = kC2.to_double(), r3 = kSqrt3.to_double();
    return {c1 * s.f - c2 * s.g, c1 * s.fp - c2 * s.gp,
            r3 * (c1 * s.f + c2 * s.g), r3 * (c1 * s.fp + c2 * s.gp)};
  }
  auto s = airy_fg_sums<DDC>(z);
  DDC ai = s.f * kC1 - s.g * kC2;
  DDC aip = s.fp * kC1 - s.gp * kC2;
  DDC bi = (s.f * kC1 + s.g * kC2) * kSqrt3;
  DDC bip = (s.fp * kC1 + s.gp * kC2) * kSqrt3;
  return {ai.to_complex(), aip.to_complex(), bi.to_complex(), bip.to_complex()};
}

// ---- Saddle-point expansions -------------------------------------------

struct ScaledPair {
  ScaledC ai, aip;
};

// Ai, Ai' for |arg z| <= 2pi/3 (optimally truncated; relative accuracy
// ~ e^{-2|xi|} * poly, i.e. <= ~4e-15 at |z| = 9).
ScaledPair airy_asym_principal(Complex z) {
  Complex sz = std::sqrt(z);
  Complex xi = (2.0 / 3.0) * z * sz;
  Complex ixi = 1.0 / xi;
  Complex tu{1.0, 0.0}, tv{1.0, 0.0};
  Complex su = tu, sv = tv;
  double last = 1.0;
  for (int k = 1; k < 80; ++k) {
    double fac = (6.0 * k - 5.0) * (6.0 * k - 1.0) / (72.0 * k);
    tu = tu * (-ixi) * fac;
    Complex tvk = tu * (-(6.0 * k + 1.0) / (6.0 * k - 1.0));
    double m = std::abs(tu);
    if (m >= last) break;  // optimal truncation: stop before terms grow
    su += tu;
    sv += tvk;
    last = m;
    if (m < 1e-18) break;
  }
  Complex zq = std::exp(0.25 * std::log(z));  // z^{1/4}, principal
  ScaledC ai = ScaledC::from(kHalfInvSqrtPi / zq * su, -xi);
  ScaledC aip = ScaledC::from(-kHalfInvSqrtPi * zq * sv, -xi);
  return {ai, aip};
}

ScaledPair airy_scaled_impl(Complex z, double m_switch) {
  check_finite(z);
  if (std::abs(z) > 1e4)
    throw DomainError("airy argument beyond supported radius 1e4");
  if (std::abs(z) <= m_switch) {
    AiryAll v = airy_series_eval(z);
    return {ScaledC::from(v.ai), ScaledC::from(v.aip)};
  }
  if (std::abs(std::arg(z)) <= kTwoPiThirds + 1e-12) {
    return airy_asym_principal(z);
  }
  // Connection onto two principal-sector evaluations:
  //   Ai(-x) = e^{ i pi/3} Ai(x e^{ i pi/3}) + e^{-i pi/3} Ai(x e^{-i pi/3})
  //   Ai'(-x) = -[e^{ 2i pi/3} Ai'(x e^{ i pi/3}) +
  //              e^{-2i pi/3} Ai'(x e^{-i pi/3})]
  Complex x = -z;
  Complex r = std::polar(1.0, kPi / 3.0);
  ScaledPair p = airy_asym_principal(x * r);
  ScaledPair q = airy_asym_principal(x * std::conj(r));
  ScaledAccum ai, aip;
  ai.add(p.ai * r);
  ai.add(q.ai * std::conj(r));
  Complex r2 = std::polar(1.0, 2.0 * kPi / 3.0);
  aip.add(p.aip * (-r2));
  aip.add(q.aip * (-std::conj(r2)));
  return {ai.get(), aip.get()};
}

}  // namespace

AiryPair airy_ai_scaled(Complex z, double m_switch) {
  EvalMethod method =
      std::abs(z) <= m_switch ? EvalMethod::series : EvalMethod::asymptotic;
  ScaledPair p = airy_scaled_impl(z, m_switch);
  return {p.ai, p.aip, method};
}

TaggedValue airy_ai_tagged(Complex z, int k, double m_switch) {
  if (k < 0 || k > 2) throw DomainError("airy_ai derivative order must be 0..2");
  AiryPair p = airy_ai_scaled(z, m_switch);
  switch (k) {
    case 0: return {p.ai.value(), p.method};
    case 1: return {p.aip.value(), p.method};
    default: return {(p.ai * z).value(), p.method};  // Ai'' = z Ai
  }
}

Complex airy_ai(Complex z, int k, double m_switch) {
  return airy_ai_tagged(z, k, m_switch).value;
}

TaggedValue airy_bi_tagged(Complex z, int k, double m_switch) {
  if (k < 0 || k > 1) throw DomainError("airy_bi derivative order must be 0..1");
  check_finite(z);
  if (std::abs(z) > 1e4)
    throw DomainError("airy argument beyond supported radius 1e4");
  if (std::abs(z) <= m_switch) {
    AiryAll v = airy_series_eval(z);
    return {k == 0 ? v.bi : v.bip, EvalMethod::series};
  }
  // Bi(z)  = e^{ i pi/6} Ai(z e^{ 2pi i/3}) + e^{-i pi/6} Ai(z e^{-2pi i/3})
  // Bi'(z) = e^{ i 5pi/6} Ai'(z e^{ 2pi i/3}) + e^{-i 5pi/6} Ai'(z e^{-2pi i/3})
  Complex r2 = std::polar(1.0, 2.0 * kPi / 3.0);
  ScaledPair p = airy_scaled_impl(z * r2, m_switch);
  ScaledPair q = airy_scaled_impl(z * std::conj(r2), m_switch);
  ScaledAccum acc;
  if (k == 0) {
    acc.add(p.ai * std::polar(1.0, kPi / 6.0));
    acc.add(q.ai * std::polar(1.0, -kPi / 6.0));
  } else {
    acc.add(p.aip * std::polar(1.0, 5.0 * kPi / 6.0));
    acc.add(q.aip * std::polar(1.0, -5.0 * kPi / 6.0));
  }
  return {acc.get().value(), EvalMethod::asymptotic};
}

Complex airy_bi(Complex z, int k, double m_switch) {
  return airy_bi_tagged(z, k, m_switch).value;
}

// ---- Tails of the Airy primitives --------------------------------------

namespace {

// I(w) = Int_w^inf Ai = (e^{-xi}/(2 sqrt pi)) w^{-3/4} * sum (-1)^k i_k xi^{-k}
// with i_k = u_k + (k - 1/2) i_{k-1}; optimally truncated.
ScaledC tail_int_ai_impl(Complex w) {
  if (std::abs(std::arg(w)) > kPi - 0.1)
    throw DomainError("primitive tail outside |arg w| <= pi - 0.1");
  if (std::abs(w) < 6.0)
    throw DomainError("primitive tail expansion needs |w| >= 6");
  Complex sw = std::sqrt(w);
  Complex xi = (2.0 / 3.0) * w * sw;
  Complex ixi = 1.0 / xi;
  double uk = 1.0;
  Complex pow{1.0, 0.0};
  Complex ik{1.0, 0.0};
  Complex sum = ik;
  double last = 1.0;
  for (int k = 1; k < 80; ++k) {
    uk *= (6.0 * k - 5.0) * (6.0 * k - 1.0) / (72.0 * k);
    ik = uk + (k - 0.5) * ik;
    pow *= -ixi;
    Complex term = ik * pow;
    double m = std::abs(term);
    if (m >= last) break;
    sum += term;
    last = m;
    if (m < 1e-18) break;
  }
  Complex pre = kHalfInvSqrtPi * std::exp(-0.75 * std::log(w));
  return ScaledC::from(pre * sum, -xi);
}

}  // namespace

ScaledC tail_int_ai(Complex w) { return tail_int_ai_impl(w); }

ScaledC tail_int2_ai(Complex w) {
  // Exact: J(w) = Int_w^inf I = -Ai'(w) - w I(w).
  ScaledPair p = airy_scaled_impl(w, kMSwitchDefault);
  ScaledC wi = tail_int_ai_impl(w) * w;
  ScaledAccum acc;
  acc.add(-p.aip);
  acc.add(-wi);
  return acc.get();
}

// ---- Primitives ---------------------------------------------------------

namespace {

struct PrimPair {
  Complex p1, p2;  // Int_0^inf Ai(w0+t) dt, Int_0^inf t Ai(w0+t) dt
};

PrimPair primitive_pair_quad(Complex w0) {
  double re_end =
      std::max({16.0, w0.real() + 2.0, 1.8 * std::abs(w0.imag()) + 8.0});
  double L = re_end - w0.real();
  auto f = [&](double t) { return airy_ai(w0 + t); };
  auto ft = [&](double t) { return t * airy_ai(w0 + t); };
  quad::Options opt;
  opt.rel_tol = 5e-13;
  opt.max_panels = 3000;
  Complex i1 = quad::integrate(f, 0.0, L, opt).value;
  Complex i2 = quad::integrate(ft, 0.0, L, opt).value;
  Complex wl = w0 + L;
  Complex tail1 = tail_int_ai(wl).value();
  Complex tail2 = tail_int2_ai(wl).value();
  return {i1 + tail1, i2 + tail2 + L * tail1};
}

PrimPair primitive_pair_asym(Complex w0) {
  return {tail_int_ai(w0).value(), tail_int2_ai(w0).value()};
}

TaggedValue primitive_impl(int j, Complex z, Route route, double m_switch,
                           double ray_angle, Complex out1, Complex out2) {
  if (j != 1 && j != 2) throw DomainError("primitive order must be 1 or 2");
  check_finite(z);
  if (std::abs(z.imag()) > 0.25)
    throw DomainError("primitive argument outside |Im z| <= 0.25");
  if (std::abs(z) > 40.0)
    throw DomainError("primitive argument beyond supported radius 40");
  bool use_asym = false;
  switch (route) {
    case Route::automatic: use_asym = std::abs(z) >= m_switch; break;
    case Route::asymptotic: use_asym = true; break;
    case Route::quadrature:
    case Route::series: use_asym = false; break;
  }
  Complex w0 = std::polar(1.0, ray_angle) * z;
  if (use_asym && std::abs(z) < 8.0)
    throw DomainError("asymptotic primitive route needs |z| >= 8");
  if (!use_asym && std::abs(z) > 25.0)
    throw DomainError("quadrature primitive route needs |z| <= 25");
  PrimPair p = use_asym ? primitive_pair_asym(w0) : primitive_pair_quad(w0);
  Complex v = (j == 1) ? out1 * p.p1 : out2 * p.p2;
  return {v, use_asym ? EvalMethod::asymptotic : EvalMethod::quadrature};
}

}  // namespace

TaggedValue primitive_A_tagged(int j, Complex z, Route route, double m_switch) {
  // A(1,z) = -e^{-i pi/6} P1(e^{i pi/6} z),  A(2,z) = e^{-i pi/3} P2(...)
  return primitive_impl(j, z, route, m_switch, kPi / 6.0,
                        -std::polar(1.0, -kPi / 6.0),
                        std::polar(1.0, -kPi / 3.0));
}

Complex primitive_A(int j, Complex z) {
  return primitive_A_tagged(j, z).value;
}

TaggedValue primitive_C_tagged(int j, Complex z, Route route, double m_switch) {
  // C(1,z) = -e^{-i 5pi/6} P1(e^{i 5pi/6} z),  C(2,z) = e^{i pi/3} P2(...)
  return primitive_impl(j, z, route, m_switch, 5.0 * kPi / 6.0,
                        -std::polar(1.0, -5.0 * kPi / 6.0),
                        std::polar(1.0, kPi / 3.0));
}

Complex primitive_C(int j, Complex z) {
  return primitive_C_tagged(j, z).value;
}

// ---- Scorer functions ---------------------------------------------------

namespace {

struct HiBoth {
  Complex hi, hip;
};

HiBoth scorer_series_eval(Complex z) {
  if (std::abs(z) <= 3.0) {
    auto a = airy_fg_sums<Complex>(z);
    auto s = scorer_h_sums<Complex>(z);
    double c1 = kC1.to_double(), c2 = kC2.to_double(), r3 = kSqrt3.to_double();
    double ip = kInvPi.to_double();
    Complex bi = r3 * (c1 * a.f + c2 * a.g);
    Complex bip = r3 * (c1 * a.fp + c2 * a.gp);
    return {(2.0 / 3.0) * bi + ip * s.h, (2.0 / 3.0) * bip + ip * s.hp};
  }
  auto a = airy_fg_sums<DDC>(z);
  auto s = scorer_h_sums<DDC>(z);
  DDC bi = (a.f * kC1 + a.g * kC2) * kSqrt3;
  DDC bip = (a.fp * kC1 + a.gp * kC2) * kSqrt3;
  DDC hi = bi / 1.5 + s.h * kInvPi;
  DDC hip = bip / 1.5 + s.hp * kInvPi;
  return {hi.to_complex(), hip.to_complex()};
}

// Algebraic expansion Hi(z) ~ -(1/(pi z)) sum (3k)!/(k! (3 z^3)^k), valid in
// |arg(-z)| <= 2pi/3 - margin; optimally truncated, floor ~2e-12 at |z|=12.
HiBoth scorer_alg_eval(Complex z) {
  Complex iz3 = 1.0 / (3.0 * z * z * z);
  Complex term{1.0, 0.0};
  Complex s = term, sp = term;  // sp sums (3k+1) * term
  double last = 1.0;
  for (int k = 1; k < 80; ++k) {
    term *= (3.0 * k) * (3.0 * k - 1.0) * (3.0 * k - 2.0) / k * iz3;
    double m = std::abs(term);
    if (m >= last) break;
    s += term;
    sp += (3.0 * k + 1.0) * term;
    last = m;
    if (m < 1e-18) break;
  }
  double ip = kInvPi.to_double();
  return {-ip / z * s, ip / (z * z) * sp};
}

bool alg_sector_ok(Complex z) {
  return std::abs(std::arg(-z)) <= kTwoPiThirds - kScorerSectorMargin;
}

HiBoth scorer_hi_both(Complex z, Route route, EvalMethod* method) {
  check_finite(z);
  if (std::abs(z) > 1e4)
    throw DomainError("scorer argument beyond supported radius 1e4");
  bool series;
  switch (route) {
    case Route::automatic: series = std::abs(z) <= kScorerSeriesRadius; break;
    case Route::series: series = true; break;
    default: series = false; break;
  }
  if (series) {
    if (std::abs(z) > 15.0)
      throw DomainError("scorer series route needs |z| <= 15");
    *method = EvalMethod::series;
    return scorer_series_eval(z);
  }
  *method = EvalMethod::asymptotic;
  if (std::abs(z) < 10.0)
    throw DomainError("scorer asymptotic route needs |z| >= 10");
  if (alg_sector_ok(z)) return scorer_alg_eval(z);
  // Rotate into the algebraic sector:
  //   Hi(z) = Bi(z) + i Ai(z) - e^{ i pi/3} Hi(z e^{-2pi i/3})
  //   Hi(z) = Bi(z) - i Ai(z) - e^{-i pi/3} Hi(z e^{ 2pi i/3})
  Complex r2 = std::polar(1.0, 2.0 * kPi / 3.0);
  Complex zm = z * std::conj(r2), zp = z * r2;
  Complex zr;
  double sgn;
  if (std::abs(std::arg(-zm)) <= std::abs(std::arg(-zp))) {
    zr = zm;
    sgn = 1.0;
  } else {
    zr = zp;
    sgn = -1.0;
  }
  if (!alg_sector_ok(zr))
    throw DomainError("scorer argument has no algebraic-sector rotation");
  HiBoth rot = scorer_alg_eval(zr);
  Complex ai = airy_ai(z), aip = airy_ai(z, 1);
  Complex bi = airy_bi(z), bip = airy_bi(z, 1);
  Complex ph = std::polar(1.0, sgn * kPi / 3.0);
  Complex i{0.0, 1.0};
  // d/dz of the rotation identity multiplies the inner Hi' by the rotation.
  Complex inner_rot = (sgn > 0) ? std::conj(r2) : r2;
  Complex hi = bi + sgn * i * ai - ph * rot.hi;
  Complex hip = bip + sgn * i * aip - ph * inner_rot * rot.hip;
  return {hi, hip};
}

}  // namespace

TaggedValue scorer_hi_tagged(Complex z, Route route) {
  EvalMethod m;
  HiBoth v = scorer_hi_both(z, route, &m);
  return {v.hi, m};
}

Complex scorer_hi(Complex z) { return scorer_hi_tagged(z).value; }

Complex scorer_hi_deriv(Complex z) {
  EvalMethod m;
  return scorer_hi_both(z, Route::automatic, &m).hip;
}

TaggedValue scorer_gi_tagged(Complex z) {
  check_finite(z);
  if (std::abs(z) <= kScorerSeriesRadius) {
    // Gi = (1/3) Bi - h/pi  (series identity; no Hi subtraction needed)
    if (std::abs(z) <= 3.0) {
      auto a = airy_fg_sums<Complex>(z);
      auto s = scorer_h_sums<Complex>(z);
      double c1 = kC1.to_double(), c2 = kC2.to_double(),
             r3 = kSqrt3.to_double();
      Complex bi = r3 * (c1 * a.f + c2 * a.g);
      return {bi / 3.0 - kInvPi.to_double() * s.h, EvalMethod::series};
    }
    auto a = airy_fg_sums<DDC>(z);
    auto s = scorer_h_sums<DDC>(z);
    DDC bi = (a.f * kC1 + a.g * kC2) * kSqrt3;
    DDC gi = bi / 3.0 - s.h * kInvPi;
    return {gi.to_complex(), EvalMethod::series};
  }
  // Gi(z) = e^{i pi/3} Hi(z e^{-2pi i/3}) - i Ai(z)
  Complex r2 = std::polar(1.0, -2.0 * kPi / 3.0);
  Complex hi = scorer_hi(z * r2);
  return {std::polar(1.0, kPi / 3.0) * hi - Complex{0.0, 1.0} * airy_ai(z),
          EvalMethod::asymptotic};
}

Complex scorer_gi(Complex z) { return scorer_gi_tagged(z).value; }

TaggedValue int_hi_tagged(Complex z, Route route) {
  check_finite(z);
  bool series;
  switch (route) {
    case Route::automatic: series = std::abs(z) <= kScorerSeriesRadius; break;
    case Route::series: series = true; break;
    default: series = false; break;
  }
  if (series) {
    if (std::abs(z) > 15.0)
      throw DomainError("int_hi series route needs |z| <= 15");
    if (std::abs(z) <= 3.0) {
      auto s = inthi_sums<Complex>(z);
      double c1 = kC1.to_double(), c2 = kC2.to_double(),
             r3 = kSqrt3.to_double();
      Complex v = (2.0 / 3.0) * r3 * (c1 * s.F + c2 * s.G) +
                  kInvPi.to_double() * s.H;
      return {v, EvalMethod::series};
    }
    auto s = inthi_sums<DDC>(z);
    DDC bi_part = (s.F * kC1 + s.G * kC2) * kSqrt3;
    DDC v = bi_part / 1.5 + s.H * kInvPi;
    return {v.to_complex(), EvalMethod::series};
  }
  if (std::abs(z) < 10.0)
    throw DomainError("int_hi asymptotic route needs |z| >= 10");
  if (std::abs(std::arg(z)) > kTwoPiThirds - kScorerSectorMargin)
    throw DomainError("int_hi asymptotic route outside its sector");
  // (1/pi) log z + (2 gamma + log 3)/(3 pi)
  //   + (1/pi) sum_{k>=1} (-1)^{k-1} (3k-1)!/(k! (3 z^3)^k), optimally cut.
  Complex iz3 = 1.0 / (3.0 * z * z * z);
  Complex term = 2.0 * iz3;  // k=1: (3k-1)!/k! = 2
  Complex sum = term;
  double last = std::abs(term);
  for (int k = 2; k < 80; ++k) {
    term *= -(3.0 * k - 1.0) * (3.0 * k - 2.0) * (3.0 * k - 3.0) / k * iz3;
    double m = std::abs(term);
    if (m >= last) break;
    sum += term;
    last = m;
    if (m < 1e-18) break;
  }
  double ip = kInvPi.to_double();
  Complex v = ip * std::log(z) + (2.0 * kEulerGamma + kLog3) * ip / 3.0 +
              ip * sum;
  return {v, EvalMethod::asymptotic};
}

Complex int_hi(Complex z) { return int_hi_tagged(z).value; }

Complex tietjens(double z) {
  if (!(z > 0.0) || z > 40.0)
    throw DomainError("tietjens argument must lie in (0, 40]");
  Complex zeta{-z, 0.0};
  Complex a1 = primitive_A(1, zeta);
  Complex a2 = primitive_A(2, zeta);
  return 1.0 / (1.0 - a2 / (zeta * a1));
}

}  // namespace oslab::specfun
