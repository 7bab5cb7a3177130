#include "oslab/os_builder.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <sstream>
#include <utility>

#include "oslab/rayleigh.hpp"

namespace oslab::osb {

namespace {

constexpr int kN = quad::Mesh::kNodesPerPanel;

// ---------------------------------------------------------------------------
// Panel differentiation matrices for the residual check.  Assembled once in
// long double (so the entries are exact to ~1e-19) and applied in a single
// pass per derivative order: chaining first-derivative applications would
// let the intermediate rounding grow like the fourth power of the row norm
// instead of entering once.

struct DiffMats {
  std::array<std::array<double, kN>, kN> d2{}, d4{};
};

const DiffMats& diff_mats() {
  static const DiffMats mats = [] {
    long double x[kN], bw[kN], m1[kN][kN], m2[kN][kN], m4[kN][kN];
    auto xs = quad::k15_nodes();
    for (int i = 0; i < kN; ++i) x[i] = static_cast<long double>(xs[i]);
    for (int i = 0; i < kN; ++i) {
      long double w = 1.0L;
      for (int j = 0; j < kN; ++j)
        if (j != i) w *= (x[i] - x[j]);
      bw[i] = 1.0L / w;
    }
    for (int i = 0; i < kN; ++i) {
      long double diag = 0.0L;
      for (int j = 0; j < kN; ++j)
        if (j != i) {
          m1[i][j] = (bw[j] / bw[i]) / (x[i] - x[j]);
          diag -= m1[i][j];
        }
      m1[i][i] = diag;
    }
    auto matmul = [](long double a[kN][kN], long double b[kN][kN],
                     long double c[kN][kN]) {
      for (int i = 0; i < kN; ++i)
        for (int j = 0; j < kN; ++j) {
          long double s = 0.0L;
          for (int k = 0; k < kN; ++k) s += a[i][k] * b[k][j];
          c[i][j] = s;
        }
    };
    matmul(m1, m1, m2);
    matmul(m2, m2, m4);
    DiffMats d;
    for (int i = 0; i < kN; ++i)
      for (int j = 0; j < kN; ++j) {
        d.d2[i][j] = static_cast<double>(m2[i][j]);
        d.d4[i][j] = static_cast<double>(m4[i][j]);
      }
    return d;
  }();
  return mats;
}

void spectral_derivs(const quad::Mesh& mesh, const std::vector<Complex>& v,
                     std::vector<Complex>& d2, std::vector<Complex>& d4) {
  const auto& dm = diff_mats();
  int np = mesh.panels();
  d2.assign(v.size(), Complex{});
  d4.assign(v.size(), Complex{});
  for (int p = 0; p < np; ++p) {
    double half = 0.5 * (mesh.edges()[p + 1] - mesh.edges()[p]);
    double s2 = 1.0 / (half * half), s4 = s2 * s2;
    for (int i = 0; i < kN; ++i) {
      Complex a2{}, a4{};
      for (int j = 0; j < kN; ++j) {
        a2 += dm.d2[i][j] * v[p * kN + j];
        a4 += dm.d4[i][j] * v[p * kN + j];
      }
      d2[p * kN + i] = a2 * s2;
      d4[p * kN + i] = a4 * s4;
    }
  }
}

// ---------------------------------------------------------------------------
// Small scalar helpers.

double weight_at(double theta, double Y) {
  return std::exp(theta * std::min(Y, 18.0 / theta));
}

// Quintic smoothstep: 0 below 0, 1 above 1, C^2 at both ends.
double sstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

// Cutoff chi == 1 on [0,1/2], 0 on [1,inf), quintic in between; value and
// two derivatives.
struct ChiJet {
  double v = 0.0, d1 = 0.0, d2 = 0.0;
};

ChiJet chi_jet(double Y) {
  if (Y <= 0.5) return {1.0, 0.0, 0.0};
  if (Y >= 1.0) return {0.0, 0.0, 0.0};
  double t = 2.0 * (Y - 0.5);
  double s = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
  double s1 = 30.0 * t * t * (t - 1.0) * (t - 1.0);
  double s2 = 60.0 * t * (2.0 * t - 1.0) * (t - 1.0);
  return {1.0 - s, -2.0 * s1, -4.0 * s2};
}

struct UJet {
  double u, u1, u2, u3, u4;
};

UJet ujet(const profiles::Profile& p, double Y) {
  return {p.u(Y), p.u(Y, 1), p.u(Y, 2), p.u(Y, 3), p.u(Y, 4)};
}

SourceJet negate(const SourceJet& s) {
  return {[f = s.f](double Y) { return -f(Y); },
          [f = s.df](double Y) { return -f(Y); },
          [f = s.d2f](double Y) { return -f(Y); }};
}

// ---------------------------------------------------------------------------
// Samplers over the pieces of one iteration step.

// Viscous part: the summed layer solutions of one step.  Evaluates to zero
// beyond the tabulated range (the solutions decay at least like the forcing
// weight there, and the interpolant is meaningless outside its last panel).
struct PsiParts {
  std::vector<airy::LayerSolution> parts;
  double hi = 0.0;
  Complex psi0{}, dpsi0{};
  double worst_residual = 0.0;
  double worst_contraction = 0.0;

  void add(airy::LayerSolution&& s) {
    psi0 += s.psi_0;
    dpsi0 += s.dpsi_0;
    worst_residual = std::max(worst_residual, s.residual_norm);
    worst_contraction = std::max(worst_contraction, s.contraction);
    parts.push_back(std::move(s));
  }
  Complex psi(double Y) const {
    if (Y >= hi) return {};
    Complex a{};
    for (const auto& s : parts) a += s.psi_at(Y);
    return a;
  }
  Complex dpsi(double Y) const {
    if (Y >= hi) return {};
    Complex a{};
    for (const auto& s : parts) a += s.dpsi_at(Y);
    return a;
  }
  Complex w(double Y) const {
    if (Y >= hi) return {};
    Complex a{};
    for (const auto& s : parts) a += s.w_at(Y);
    return a;
  }
};

// Rayleigh part: one solution, or the explicit zeroth-order integral plus
// the full solve of its alpha^2 defect.
struct RayParts {
  rayleigh::Solution a;
  std::optional<rayleigh::Solution> b;
  double worst_residual = 0.0;

  Complex phi0() const { return a.phi_0 + (b ? b->phi_0 : Complex{}); }
  Complex dphi0() const { return a.dphi_0 + (b ? b->dphi_0 : Complex{}); }
  Complex phi(double Y) const { return a.at(Y) + (b ? b->at(Y) : Complex{}); }
  Complex dphi(double Y) const {
    return a.deriv_at(Y) + (b ? b->deriv_at(Y) : Complex{});
  }
};

// Curvature jet of a Rayleigh step: g = (u'' phi + r)/(u - c_hat) equals
// Delta phi exactly (it is the equation the step solved), and its
// derivatives follow by the quotient rule with phi'' = alpha^2 phi + g.
SourceJet make_g_jet(const Workspace& ws, std::shared_ptr<RayParts> ray,
                     SourceJet r) {
  const profiles::Profile* p = &ws.profile();
  Complex ch = ws.c_hat();
  double a2 = ws.point().alpha * ws.point().alpha;
  auto common = [p, ch, a2, ray, r](double Y, int order) {
    UJet u = ujet(*p, Y);
    Complex umc = u.u - ch;
    Complex pv = ray->phi(Y);
    Complex nv = u.u2 * pv + r.f(Y);
    Complex g = nv / umc;
    if (order == 0) return g;
    Complex p1 = ray->dphi(Y);
    Complex n1 = u.u3 * pv + u.u2 * p1 + r.df(Y);
    Complex g1 = (n1 - g * u.u1) / umc;
    if (order == 1) return g1;
    Complex p2 = a2 * pv + g;
    Complex n2 = u.u4 * pv + 2.0 * u.u3 * p1 + u.u2 * p2 + r.d2f(Y);
    return (n2 - 2.0 * g1 * u.u1 - g * u.u2) / umc;
  };
  return {[common](double Y) { return common(Y, 0); },
          [common](double Y) { return common(Y, 1); },
          [common](double Y) { return common(Y, 2); }};
}

// Viscous leftover of a step, as the next source: r = u'' Psi with
// Psi = psi^{(j)}, using d2 Psi = w + alpha^2 Psi from the layer equations.
SourceJet leftover_source(const Workspace& ws, std::shared_ptr<PsiParts> ps,
                          double sign) {
  const profiles::Profile* p = &ws.profile();
  double a2 = ws.point().alpha * ws.point().alpha;
  return {[p, ps, sign](double Y) { return sign * p->u(Y, 2) * ps->psi(Y); },
          [p, ps, sign](double Y) {
            return sign *
                   (p->u(Y, 3) * ps->psi(Y) + p->u(Y, 2) * ps->dpsi(Y));
          },
          [p, ps, sign, a2](double Y) {
            Complex psv = ps->psi(Y), ds = ps->dpsi(Y);
            return sign * (p->u(Y, 4) * psv + 2.0 * p->u(Y, 3) * ds +
                           p->u(Y, 2) * (ps->w(Y) + a2 * psv));
          }};
}

// The three layer solves cancelling the viscous defect of one g.
PsiParts viscous_triple(const Workspace& ws, const SourceJet& g) {
  Complex eps = ws.point().eps;
  Complex cpl = ws.coupling();
  PsiParts out;
  out.hi = ws.layer().mesh().hi();
  auto G1 = [eps, g](double Y) {
    return -eps * (1.0 - chi_jet(Y).v) * g.f(Y);
  };
  auto dG1 = [eps, g](double Y) {
    ChiJet ch = chi_jet(Y);
    return -eps * ((1.0 - ch.v) * g.df(Y) - ch.d1 * g.f(Y));
  };
  auto d2G1 = [eps, g](double Y) {
    ChiJet ch = chi_jet(Y);
    return -eps * ((1.0 - ch.v) * g.d2f(Y) - 2.0 * ch.d1 * g.df(Y) -
                   ch.d2 * g.f(Y));
  };
  out.add(ws.layer().solve_d2(G1, dG1, d2G1));

  auto F2 = [cpl, g](double Y) { return cpl * g.f(Y); };
  out.add(ws.layer().solve(F2, airy::ForceClass::weighted));

  auto G3 = [eps, g](double Y) { return -eps * chi_jet(Y).v * g.f(Y); };
  auto dG3 = [eps, g](double Y) {
    ChiJet ch = chi_jet(Y);
    return -eps * (ch.v * g.df(Y) + ch.d1 * g.f(Y));
  };
  auto d2G3 = [eps, g](double Y) {
    ChiJet ch = chi_jet(Y);
    return -eps * (ch.v * g.d2f(Y) + 2.0 * ch.d1 * g.df(Y) + ch.d2 * g.f(Y));
  };
  out.add(ws.layer().solve_d2(G3, dG3, d2G3));
  return out;
}

// Weighted three-norm bundle of a viscous increment, on the layer nodes.
double psi_bundle(const Workspace& ws, const PsiParts& ps) {
  const auto& mesh = ws.layer().mesh();
  const auto& Y = mesh.node_coords();
  const auto& prof = ws.profile();
  Complex ch = ws.c_hat();
  double a2 = ws.point().alpha * ws.point().alpha;
  double th = ws.theta();
  double b2 = 0.0, b1 = 0.0, b0 = 0.0;
  int n = mesh.nodes();
  for (int k = 0; k < n; ++k) {
    Complex psv{}, dsv{}, wv{};
    for (const auto& s : ps.parts) {
      psv += s.psi[k];
      dsv += s.dpsi[k];
      wv += s.w[k];
    }
    double wt = weight_at(th, Y[k]);
    double m = std::abs(prof.u(Y[k]) - ch);
    b2 = std::max(b2, wt * m * m * std::abs(wv + a2 * psv));
    b1 = std::max(b1, wt * m * std::abs(dsv));
    b0 = std::max(b0, wt * std::abs(psv));
  }
  return b2 + b1 + b0;
}

// ---------------------------------------------------------------------------
// Field accumulation on the layer grid.

struct Accum {
  std::vector<Complex> phi, d1, d2, d3, d4;
  Complex phi0{}, dphi0{};

  explicit Accum(int n)
      : phi(n), d1(n), d2(n), d3(n), d4(n) {}

  // Rayleigh piece: d2 = alpha^2 phi + g and the chain continues with the
  // g-jet derivatives.
  void add_ray(const Workspace& ws, const RayParts& rp, const SourceJet& g) {
    const auto& Y = ws.layer().mesh().node_coords();
    double a2 = ws.point().alpha * ws.point().alpha;
    for (std::size_t k = 0; k < Y.size(); ++k) {
      Complex pv = rp.phi(Y[k]), p1 = rp.dphi(Y[k]);
      Complex gv = g.f(Y[k]), g1 = g.df(Y[k]), g2 = g.d2f(Y[k]);
      Complex p2 = a2 * pv + gv;
      phi[k] += pv;
      d1[k] += p1;
      d2[k] += p2;
      d3[k] += a2 * p1 + g1;
      d4[k] += a2 * p2 + g2;
    }
    phi0 += rp.phi0();
    dphi0 += rp.dphi0();
  }

  // Viscous piece: d2 psi = w + alpha^2 psi, and d2 w from the layer
  // equation eps (d2 - alpha^2) w - (u - c) w = F with the step's total
  // force F = -eps g'' + (i c0 + eps alpha^2) g (null for a homogeneous
  // layer mode).
  void add_psi(const Workspace& ws, const PsiParts& ps, const SourceJet* g) {
    const auto& Y = ws.layer().mesh().node_coords();
    const auto& prof = ws.profile();
    const auto& pt = ws.point();
    double a2 = pt.alpha * pt.alpha;
    Complex cpl = ws.coupling();
    for (std::size_t k = 0; k < Y.size(); ++k) {
      Complex psv{}, dsv{}, wv{}, dwv{};
      for (const auto& s : ps.parts) {
        psv += s.psi[k];
        dsv += s.dpsi[k];
        wv += s.w[k];
        dwv += s.dw[k];
      }
      Complex fv{};
      if (g) fv = -pt.eps * g->d2f(Y[k]) + cpl * g->f(Y[k]);
      Complex d2w =
          a2 * wv + ((prof.u(Y[k]) - pt.c) * wv + fv) / pt.eps;
      Complex p2 = wv + a2 * psv;
      phi[k] += psv;
      d1[k] += dsv;
      d2[k] += p2;
      d3[k] += dwv + a2 * dsv;
      d4[k] += d2w + a2 * p2;
    }
    phi0 += ps.psi0;
    dphi0 += ps.dpsi0;
  }
};

// ---------------------------------------------------------------------------
// The iteration driver.

struct IterationOut {
  Accum acc;
  std::vector<IterateRecord> ledger;
  double contraction = 0.0;
  int iterations = 0;
};

RayParts rayleigh_step(const Workspace& ws, const SourceJet& r,
                       bool explicit_first) {
  const auto& pt = ws.point();
  rayleigh::SolveOptions ro;
  ro.theta = ws.theta();
  ro.coarse = ws.options().coarse;
  RayParts out;
  if (!explicit_first) {
    out.a = rayleigh::solve_nonhomog(ws.profile(), pt.alpha, ws.c_hat(), r.f,
                                     ro);
    out.worst_residual = out.a.residual_norm;
    return out;
  }
  // Explicit two-part step: the bare double-tail integral inverts the
  // alpha = 0 operator against r exactly; a full solve then absorbs its
  // alpha^2 (u - c_hat) defect, so the pair solves the complete equation.
  rayleigh::SolveOptions r0 = ro;
  r0.zeroth_order_only = true;
  out.a =
      rayleigh::solve_nonhomog(ws.profile(), pt.alpha, ws.c_hat(), r.f, r0);
  const profiles::Profile* p = &ws.profile();
  Complex ch = ws.c_hat();
  double a2 = pt.alpha * pt.alpha;
  // Keep a handle on the zeroth part for the defect source: copying the
  // solution into the closure keeps the step self-contained.
  auto base = std::make_shared<rayleigh::Solution>(out.a);
  auto defect = [p, ch, a2, base](double Y) {
    return a2 * (p->u(Y) - ch) * base->at(Y);
  };
  out.b = rayleigh::solve_nonhomog(ws.profile(), pt.alpha, ws.c_hat(), defect,
                                   ro);
  out.worst_residual = std::max(out.a.residual_norm, out.b->residual_norm);
  return out;
}

IterationOut run_iteration(const Workspace& ws, const SourceJet& f,
                           bool explicit_first) {
  const auto& opt = ws.options();
  IterationOut out{Accum(ws.layer().mesh().nodes()), {}, 0.0, 0};
  SourceJet r = negate(f);
  double first_bundle = 0.0, prev_bundle = 0.0;
  std::vector<double> ratios;
  for (int j = 1; j <= opt.max_iterations; ++j) {
    auto ray = std::make_shared<RayParts>(
        rayleigh_step(ws, r, explicit_first && j == 1));
    SourceJet g = make_g_jet(ws, ray, r);
    auto ps = std::make_shared<PsiParts>(viscous_triple(ws, g));
    double bundle = psi_bundle(ws, *ps);

    IterateRecord rec;
    rec.j = j;
    rec.ray0 = ray->phi0();
    rec.dray0 = ray->dphi0();
    rec.psi0 = ps->psi0;
    rec.dpsi0 = ps->dpsi0;
    rec.ray_residual = ray->worst_residual;
    rec.airy_residual = ps->worst_residual;
    rec.bundle = bundle;
    rec.ratio = (j > 1 && prev_bundle > 0.0) ? bundle / prev_bundle : 0.0;
    out.ledger.push_back(rec);

    out.acc.add_ray(ws, *ray, g);
    out.acc.add_psi(ws, *ps, &g);
    out.iterations = j;

    if (j == 1) {
      first_bundle = bundle;
      if (bundle == 0.0) break;
    } else {
      ratios.push_back(rec.ratio);
      out.contraction = std::max(out.contraction, rec.ratio);
      if (rec.ratio >= 1.0) {
        std::ostringstream msg;
        msg << "os: viscous-increment bundles stopped contracting (ratios:";
        for (double q : ratios) msg << ' ' << q;
        msg << ")";
        throw ConvergenceError(msg.str(), rec.ratio);
      }
      if (bundle <= opt.rel_tol * first_bundle) break;
    }
    r = leftover_source(ws, ps, 1.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Residual check (spectral route) and field finalization.

double relative_os_residual(const Workspace& ws, const OSFields& o,
                            const SourceJet* f) {
  const auto& mesh = o.mesh;
  const auto& Y = mesh.node_coords();
  const auto& prof = ws.profile();
  const auto& pt = ws.point();
  double a2 = pt.alpha * pt.alpha;
  std::vector<Complex> s2, s4;
  spectral_derivs(mesh, o.phi, s2, s4);
  double num = 0.0;
  for (int p = 0; p < mesh.panels(); ++p) {
    for (int i = 2; i < kN - 2; ++i) {
      int k = p * kN + i;
      Complex lap = s2[k] - a2 * o.phi[k];
      Complex bil = s4[k] - 2.0 * a2 * s2[k] + a2 * a2 * o.phi[k];
      Complex R = pt.eps * bil - (prof.u(Y[k]) - pt.c) * lap +
                  prof.u(Y[k], 2) * o.phi[k];
      if (f) R -= f->f(Y[k]);
      num = std::max(num, weight_at(o.theta, Y[k]) * std::abs(R));
    }
  }
  double den = norm_Y(o, pt, prof);
  return den > 0.0 ? num / den : num;
}

OSFields finish_fields(const Workspace& ws, IterationOut&& it,
                       const SourceJet* f) {
  OSFields o;
  o.mesh = ws.layer().mesh();
  o.phi = std::move(it.acc.phi);
  o.d1 = std::move(it.acc.d1);
  o.d2 = std::move(it.acc.d2);
  o.d3 = std::move(it.acc.d3);
  o.d4 = std::move(it.acc.d4);
  o.phi0 = it.acc.phi0;
  o.dphi0 = it.acc.dphi0;
  o.ledger = std::move(it.ledger);
  o.contraction = it.contraction;
  o.iterations = it.iterations;
  o.theta = ws.theta();
  o.c_hat = ws.c_hat();
  o.regions = ws.layer().regions();
  o.residual_norm = relative_os_residual(ws, o, f);
  return o;
}

// ---------------------------------------------------------------------------
// Slow-mode ingredients.

// Smooth part of u'' phi_Ray / (u - c_hat): with s0 = 1/(1 - c_hat), the
// multiple s0 (u - c_hat) e^{-alpha Y} matches phi_Ray's tail, so the
// quotient of the remainder keeps the profile's decay rate while this part
// is an explicit entire expression.
SourceJet smooth_h1(const Workspace& ws) {
  const profiles::Profile* p = &ws.profile();
  double al = ws.point().alpha;
  Complex s0 = 1.0 / (1.0 - ws.c_hat());
  return {[p, al, s0](double Y) {
            return s0 * p->u(Y, 2) * std::exp(-al * Y);
          },
          [p, al, s0](double Y) {
            return s0 * (p->u(Y, 3) - al * p->u(Y, 2)) * std::exp(-al * Y);
          },
          [p, al, s0](double Y) {
            return s0 *
                   (p->u(Y, 4) - 2.0 * al * p->u(Y, 3) +
                    al * al * p->u(Y, 2)) *
                   std::exp(-al * Y);
          }};
}

// g_R = u'' phi_Ray/(u - c_hat) for the homogeneous Rayleigh solution
// (its r is zero).
SourceJet make_gR_jet(const Workspace& ws,
                      std::shared_ptr<rayleigh::Solution> pr) {
  auto ray = std::make_shared<RayParts>();
  ray->a = *pr;
  SourceJet zero{[](double) { return Complex{}; },
                 [](double) { return Complex{}; },
                 [](double) { return Complex{}; }};
  return make_g_jet(ws, ray, zero);
}

SourceJet jet_difference(const SourceJet& a, const SourceJet& b) {
  return {[fa = a.f, fb = b.f](double Y) { return fa(Y) - fb(Y); },
          [fa = a.df, fb = b.df](double Y) { return fa(Y) - fb(Y); },
          [fa = a.d2f, fb = b.d2f](double Y) { return fa(Y) - fb(Y); }};
}

// The four layer solves cancelling the slow mode's viscous defect: the
// smooth part goes through the good class in one piece, the singular part
// through the same triple as the iteration.  The chi-localized solve's wall
// functional is the quantity m0s() exposes.
PsiParts viscous_slow(const Workspace& ws, const SourceJet& gR,
                      const SourceJet& h1, Complex* m0_out) {
  Complex eps = ws.point().eps;
  Complex cpl = ws.coupling();
  SourceJet h2 = jet_difference(gR, h1);

  PsiParts out;
  out.hi = ws.layer().mesh().hi();
  auto F1 = [eps, cpl, h1](double Y) {
    return -eps * h1.d2f(Y) + cpl * h1.f(Y);
  };
  out.add(ws.layer().solve(F1, airy::ForceClass::good));

  PsiParts triple = viscous_triple(ws, h2);
  if (m0_out && triple.parts.back().m0) *m0_out = *triple.parts.back().m0;
  for (auto& s : triple.parts) out.add(std::move(s));
  return out;
}

ChiJet h2_gate_check(const Workspace& ws) {
  // alpha >= 2 |eps|^{1/4}: below this the layer logarithm no longer leads.
  double al = ws.point().alpha;
  double gate = 2.0 * std::pow(ws.point().abs_eps, 0.25);
  if (al < gate)
    throw DomainError(
        "os: wall functional needs alpha >= 2 |eps|^{1/4}; the layer "
        "logarithm is subleading below that scale");
  return {};
}

double m0s_im_closed_form(const Workspace& ws) {
  const auto& pt = ws.point();
  double arg = std::arg(-ws.c_hat());
  return pt.alpha * pt.uc2 / (pt.uc1 * pt.uc1) * (arg + kPi);
}

}  // namespace

// ---------------------------------------------------------------------------
// Workspace.

Workspace::Workspace(const profiles::Profile& p,
                     const langer::SpectralPoint& sp, const Options& opt)
    : profile_(&p),
      sp_(sp),
      opt_(opt),
      map_((check_inputs(p, sp, opt_), sp_)),
      layer_(map_, layer_options(opt_)),
      c_hat_(resolve_c_hat(sp_, opt_)),
      coupling_(Complex{0.0, c_hat_.imag() - sp_.c.imag()} +
                sp_.eps * sp_.alpha * sp_.alpha) {}

const langer::SpectralPoint& Workspace::check_inputs(
    const profiles::Profile& p, const langer::SpectralPoint& sp,
    Options& opt) {
  if (sp.profile != &p)
    throw DomainError("os: spectral point was built from a different profile");
  if (opt.shift_exponent <= 0.0 || opt.shift_exponent >= 2.0)
    throw DomainError("os: shift exponent must lie in (0, 2)");
  if (opt.theta == 0.0) opt.theta = rayleigh::profile_decay_rate(p);
  if (opt.theta <= 1.5 * sp.alpha)
    throw DomainError(
        "os: weight rate must exceed 1.5 alpha, or the Rayleigh tails "
        "escape the weighted space");
  double c0 = sp.abs_eps * std::pow(sp.alpha, -opt.shift_exponent);
  if (sp.c.imag() <= -0.5 * c0)
    throw DomainError(
        "os: c_i below -c0/2, the shifted speed would cross the real axis");
  return sp;
}

airy::SolveOptions Workspace::layer_options(const Options& opt) {
  airy::SolveOptions o;
  o.theta = opt.theta;
  o.coarse = opt.coarse;
  o.y_max = opt.y_max;
  return o;
}

Complex Workspace::resolve_c_hat(const langer::SpectralPoint& sp,
                                 const Options& opt) {
  if (opt.shift_exponent == 1.5) return sp.c_hat;
  return sp.c + Complex{0.0, sp.abs_eps *
                                  std::pow(sp.alpha, -opt.shift_exponent)};
}

// ---------------------------------------------------------------------------
// Public entry points.

OSFields solve_os_nonhomog(const Workspace& ws, const SourceJet& f) {
  IterationOut it = run_iteration(ws, f, false);
  return finish_fields(ws, std::move(it), &f);
}

OSFields solve_os_nonhomog(const langer::SpectralPoint& sp,
                           const profiles::Profile& p, const SourceJet& f,
                           const Options& opt) {
  Workspace ws(p, sp, opt);
  return solve_os_nonhomog(ws, f);
}

ModeBoundaryData slow_mode(const Workspace& ws) {
  rayleigh::SolveOptions ro;
  ro.theta = ws.theta();
  ro.coarse = ws.options().coarse;
  auto pr = std::make_shared<rayleigh::Solution>(
      rayleigh::homog(ws.profile(), ws.point().alpha, ws.c_hat(), ro));
  SourceJet gR = make_gR_jet(ws, pr);
  SourceJet h1 = smooth_h1(ws);

  Complex m0{};
  auto ps = std::make_shared<PsiParts>(viscous_slow(ws, gR, h1, &m0));
  double lead_bundle = psi_bundle(ws, *ps);

  SourceJet f = leftover_source(ws, ps, -1.0);
  IterationOut it = run_iteration(ws, f, false);

  // Fold the leading parts into the accumulated fields and ledger.
  RayParts lead;
  lead.a = *pr;
  lead.worst_residual = pr->residual_norm;
  it.acc.add_ray(ws, lead, gR);
  it.acc.add_psi(ws, *ps, &gR);
  IterateRecord rec;
  rec.j = 0;
  rec.ray0 = pr->phi_0;
  rec.dray0 = pr->dphi_0;
  rec.psi0 = ps->psi0;
  rec.dpsi0 = ps->dpsi0;
  rec.ray_residual = pr->residual_norm;
  rec.airy_residual = ps->worst_residual;
  rec.bundle = lead_bundle;
  it.ledger.insert(it.ledger.begin(), rec);

  ModeBoundaryData m;
  m.kind = ModeKind::slow;
  m.lead0 = pr->phi_0;
  m.dlead0 = pr->dphi_0;
  m.psi1_0 = ps->psi0;
  m.dpsi1_0 = ps->dpsi0;
  m.m0s = m0;
  m.iterations = it.iterations;
  m.fields = finish_fields(ws, std::move(it), nullptr);
  m.phi0 = m.fields.phi0;
  m.dphi0 = m.fields.dphi0;
  m.residual_norm = m.fields.residual_norm;
  m.accepted = m.residual_norm <= ws.options().residual_accept;
  return m;
}

ModeBoundaryData slow_mode(const langer::SpectralPoint& sp,
                           const profiles::Profile& p, const Options& opt) {
  Workspace ws(p, sp, opt);
  return slow_mode(ws);
}

ModeBoundaryData fast_mode(const Workspace& ws) {
  auto pa = std::make_shared<PsiParts>();
  pa->hi = ws.layer().mesh().hi();
  pa->add(ws.layer().homog_mode());

  SourceJet f = leftover_source(ws, pa, -1.0);
  bool wall_below_layer = ws.layer().regions().first > 0.0;
  IterationOut it = run_iteration(ws, f, wall_below_layer);

  it.acc.add_psi(ws, *pa, nullptr);
  IterateRecord rec;
  rec.j = 0;
  rec.psi0 = pa->psi0;
  rec.dpsi0 = pa->dpsi0;
  rec.airy_residual = pa->worst_residual;
  rec.bundle = psi_bundle(ws, *pa);
  it.ledger.insert(it.ledger.begin(), rec);

  ModeBoundaryData m;
  m.kind = ModeKind::fast;
  m.lead0 = pa->psi0;
  m.dlead0 = pa->dpsi0;
  if (it.ledger.size() > 1) {
    m.psi1_0 = it.ledger[1].psi0;
    m.dpsi1_0 = it.ledger[1].dpsi0;
  }
  m.iterations = it.iterations;
  m.fields = finish_fields(ws, std::move(it), nullptr);
  m.phi0 = m.fields.phi0;
  m.dphi0 = m.fields.dphi0;
  m.residual_norm = m.fields.residual_norm;
  m.accepted = m.residual_norm <= ws.options().residual_accept;
  return m;
}

ModeBoundaryData fast_mode(const langer::SpectralPoint& sp,
                           const profiles::Profile& p, const Options& opt) {
  Workspace ws(p, sp, opt);
  return fast_mode(ws);
}

M0sResult m0s(const Workspace& ws) {
  h2_gate_check(ws);
  rayleigh::SolveOptions ro;
  ro.theta = ws.theta();
  ro.coarse = ws.options().coarse;
  auto pr = std::make_shared<rayleigh::Solution>(
      rayleigh::homog(ws.profile(), ws.point().alpha, ws.c_hat(), ro));
  SourceJet h2 = jet_difference(make_gR_jet(ws, pr), smooth_h1(ws));
  Complex eps = ws.point().eps;
  auto G3 = [eps, h2](double Y) { return -eps * chi_jet(Y).v * h2.f(Y); };
  M0sResult r;
  r.value = ws.layer().m0_functional(G3);
  r.im_closed_form = m0s_im_closed_form(ws);
  double logeps = std::abs(std::log(ws.point().abs_eps));
  r.re_over_alpha_log =
      std::abs(r.value.real()) / (ws.point().alpha * logeps);
  return r;
}

M0sResult m0s(const langer::SpectralPoint& sp, const profiles::Profile& p,
              const Options& opt) {
  Workspace ws(p, sp, opt);
  return m0s(ws);
}

// ---------------------------------------------------------------------------
// Norms.

namespace {

struct NormTerms {
  double t4 = 0.0, t3 = 0.0, t2 = 0.0, t1 = 0.0, t0 = 0.0;
};

template <typename W4>
NormTerms weighted_terms(const OSFields& f, const profiles::Profile& p,
                         W4&& w4) {
  const auto& Y = f.mesh.node_coords();
  NormTerms n;
  for (std::size_t k = 0; k < Y.size(); ++k) {
    double wt = weight_at(f.theta, Y[k]);
    double m = std::abs(p.u(Y[k]) - f.c_hat);
    n.t4 = std::max(n.t4, wt * w4(Y[k], m) * std::abs(f.d4[k]));
    n.t3 = std::max(n.t3, wt * m * m * std::abs(f.d3[k]));
    n.t2 = std::max(n.t2, wt * m * std::abs(f.d2[k]));
    n.t1 = std::max(n.t1, wt * std::abs(f.d1[k]));
    n.t0 = std::max(n.t0, wt * std::abs(f.phi[k]));
  }
  return n;
}

}  // namespace

double norm_Y(const OSFields& f, const langer::SpectralPoint& sp,
              const profiles::Profile& p) {
  (void)sp;
  NormTerms n =
      weighted_terms(f, p, [](double, double m) { return m * m * m; });
  return n.t4 + n.t3 + n.t2 + n.t1 + n.t0;
}

double norm_X(const OSFields& f, const langer::SpectralPoint& sp,
              const profiles::Profile& p) {
  // Fourth-derivative weight: |eps|^{1/3}|u-c_hat|^3 inside the layer band,
  // |eps||u-c_hat| outside, blended over a width 1/kappa at the edges.
  double e13 = std::pow(sp.abs_eps, 1.0 / 3.0);
  double b = 1.0 / sp.kappa;
  double lo = f.regions.first, hi = f.regions.second;
  auto w4 = [&](double Y, double m) {
    double up = lo > 0.0 ? sstep((Y - (lo - b)) / b) : 1.0;
    double dn = 1.0 - sstep((Y - hi) / b);
    double chiN = up * dn;
    return e13 * m * m * m * chiN + sp.abs_eps * m * (1.0 - chiN);
  };
  const auto& Y = f.mesh.node_coords();
  double t4 = 0.0, t3 = 0.0, t2 = 0.0, t1 = 0.0, t0 = 0.0;
  double e23 = e13 * e13;
  for (std::size_t k = 0; k < Y.size(); ++k) {
    double wt = weight_at(f.theta, Y[k]);
    double m = std::abs(p.u(Y[k]) - f.c_hat);
    t4 = std::max(t4, wt * w4(Y[k], m) * std::abs(f.d4[k]));
    t3 = std::max(t3, wt * m * std::abs(f.d3[k]));
    t2 = std::max(t2, wt * m * m * std::abs(f.d2[k]));
    t1 = std::max(t1, wt * m * std::abs(f.d1[k]));
    t0 = std::max(t0, wt * std::abs(f.phi[k]));
  }
  return t4 + e23 * t3 + t2 + t1 + t0;
}

}  // namespace oslab::osb
