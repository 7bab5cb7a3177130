#include "oslab/rayleigh.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace oslab::rayleigh {

namespace {

using profiles::Profile;

constexpr double kGrowth = 1.4;

// Critical-layer geometry for speeds with 0 < Re c < 1; Yc < 0 means the
// real part of c is outside the range of u and no layer refinement is needed.
struct Layer {
  double Yc = -1.0;
  double uc1 = 0.0;
  double width = 0.0;  // |Im c| / u'(Yc), the scale on which (u-c)^{-2} varies
};

Layer locate_layer(const Profile& p, Complex c) {
  Layer L;
  if (c.real() > 0.0 && c.real() < 1.0) {
    L.Yc = profiles::critical_point(p, c.real());
    L.uc1 = p.u(L.Yc, 1);
    L.width = std::abs(c.imag()) / L.uc1;
  }
  return L;
}

void require_off_axis(Complex c) {
  if (c.imag() == 0.0 && c.real() > 0.0 && c.real() < 1.0) {
    throw DomainError(
        "rayleigh: c is real and inside the range of u, so (u - c)^{-2} is "
        "singular on the path; use the shifted speed c_hat instead");
  }
}

double auto_y_max(const Profile& p, double alpha, const SolveOptions& opt) {
  if (opt.y_max > 0.0) return opt.y_max;
  double eta0 = profile_decay_rate(p);
  double a = std::max(alpha, 0.05);  // keep the domain bounded for tiny alpha
  return std::max(40.0 / eta0, 10.0 / a);
}

// Panels sized 'coarse' through the shear region, graded into the critical
// layer down to half its width, and widening toward y_max where everything
// varies on the slow e^{-alpha Y} scale only.
quad::Mesh build_mesh(double alpha, const Layer& L, double y_max,
                      const SolveOptions& opt) {
  std::vector<double> edges{0.0, y_max};
  double mid = std::min(y_max, std::max(15.0, L.Yc > 0.0 ? 2.0 * L.Yc + 2.0 : 0.0));
  if (L.Yc > 0.0 && L.Yc < mid) {
    double wc = std::clamp(L.width / 2.0, 2e-5, opt.coarse);
    edges.push_back(L.Yc);
    quad::fill_graded(0.0, L.Yc, 0.0, wc, opt.coarse, kGrowth, edges);
    quad::fill_graded(L.Yc, mid, wc, 0.0, opt.coarse, kGrowth, edges);
  } else {
    quad::fill_graded(0.0, mid, 0.0, 0.0, opt.coarse, kGrowth, edges);
  }
  if (mid < y_max) {
    double far = std::clamp(0.5 / std::max(alpha, 0.05), opt.coarse, 10.0);
    edges.push_back(mid);
    quad::fill_graded(mid, y_max, opt.coarse, 0.0, far, kGrowth, edges);
  }
  for (double e : opt.extra_edges)
    if (std::isfinite(e) && e > 0.0 && e < y_max) edges.push_back(e);
  return quad::Mesh(quad::canonical_edges(std::move(edges)));
}

struct NodeData {
  std::vector<double> u1, u2;
  std::vector<Complex> umc, inv2;  // u - c and (u - c)^{-2}
  double u_0 = 0.0, u1_0 = 0.0;    // wall values
};

NodeData tabulate(const Profile& p, const quad::Mesh& mesh, Complex c) {
  const auto& Y = mesh.node_coords();
  NodeData t;
  t.u1.reserve(Y.size());
  t.u2.reserve(Y.size());
  t.umc.reserve(Y.size());
  t.inv2.reserve(Y.size());
  for (double y : Y) {
    Complex d = p.u(y) - c;
    t.u1.push_back(p.u(y, 1));
    t.u2.push_back(p.u(y, 2));
    t.umc.push_back(d);
    t.inv2.push_back(1.0 / (d * d));
  }
  t.u_0 = p.u(0.0);
  t.u1_0 = p.u(0.0, 1);
  return t;
}

struct DApply {
  std::vector<Complex> phi, dphi;
  Complex phi_0, dphi_0;
};

// Double-tail inverse of the alpha = 0 operator:
//   phi = (u - c) Int_Y^ymax+ (u - c)^{-2} Int_Z^ymax+ G,
// with both tails beyond y_max closed by an e^{-rate Y} model fitted at the
// last node (exact when G has settled onto a single exponential out there,
// negligible when it has already decayed to nothing).
DApply apply_double_tail(const quad::Mesh& mesh, const NodeData& t, Complex c,
                         std::span<const Complex> G, double rate) {
  const auto& Y = mesh.node_coords();
  int n = mesh.nodes();
  std::vector<Complex> I1 = mesh.suffix_integral(G);
  Complex i1_tail = 0.0, i2_tail = 0.0;
  Complex invc2 = 1.0 / ((1.0 - c) * (1.0 - c));
  if (rate > 0.0) {
    Complex g_end = G[n - 1] * std::exp(-rate * (mesh.hi() - Y[n - 1]));
    i1_tail = g_end / rate;
    i2_tail = invc2 * g_end / (rate * rate);
  }
  std::vector<Complex> g2(n);
  for (int i = 0; i < n; ++i) {
    I1[i] += i1_tail;
    g2[i] = t.inv2[i] * I1[i];
  }
  std::vector<Complex> I2 = mesh.suffix_integral(g2);
  DApply r;
  r.phi.resize(n);
  r.dphi.resize(n);
  for (int i = 0; i < n; ++i) {
    I2[i] += i2_tail;
    r.phi[i] = t.umc[i] * I2[i];
    r.dphi[i] = t.u1[i] * I2[i] - I1[i] / t.umc[i];
  }
  Complex I1_0 = mesh.integrate(G) + i1_tail;
  Complex I2_0 = mesh.integrate(g2) + i2_tail;
  Complex umc_0 = t.u_0 - c;
  r.phi_0 = umc_0 * I2_0;
  r.dphi_0 = t.u1_0 * I2_0 - I1_0 / umc_0;
  return r;
}

// Weighted sup of the *local* integrated-form defects: on each panel, how
// much the increment of phi (dphi) differs from the integral of dphi (d2phi)
// across it.  Local increments keep the measure an equation residual; a
// cumulative formulation would carry any one-time quadrature slip downstream
// forever and the weight would amplify it exponentially.  The e^{theta Y}
// weight is frozen beyond Y = 18/theta so the far-field roundoff floor stays
// below the quadrature error this is meant to measure.
double integrated_residual(const quad::Mesh& mesh, std::span<const Complex> phi,
                           std::span<const Complex> dphi,
                           std::span<const Complex> d2phi, Complex phi_0,
                           Complex dphi_0, double theta) {
  const auto& Y = mesh.node_coords();
  auto P1 = mesh.prefix_integral(dphi);
  auto P2 = mesh.prefix_integral(d2phi);
  double cap = 18.0 / std::max(theta, 1e-3);
  auto weight = [&](double y) { return std::exp(theta * std::min(y, cap)); };
  double r = std::max(weight(Y[0]) * std::abs(phi[0] - phi_0 - P1[0]),
                      weight(Y[0]) * std::abs(dphi[0] - dphi_0 - P2[0]));
  constexpr int k = quad::Mesh::kNodesPerPanel;
  for (int i = k; i < mesh.nodes(); i += k) {
    double w = weight(Y[i]);
    Complex d1 = (phi[i] - phi[i - k]) - (P1[i] - P1[i - k]);
    Complex d2 = (dphi[i] - dphi[i - k]) - (P2[i] - P2[i - k]);
    r = std::max({r, w * std::abs(d1), w * std::abs(d2)});
  }
  return r;
}

// Core solver on a prebuilt mesh with the source already tabulated.
Solution solve_tab(const quad::Mesh& mesh, const NodeData& t, double alpha,
                   Complex c, std::vector<Complex> F, const SolveOptions& opt) {
  int n = mesh.nodes();
  DApply cur = apply_double_tail(mesh, t, c, F, opt.theta);
  double a2 = alpha * alpha;
  if (a2 > 0.0 && !opt.zeroth_order_only) {
    std::vector<Complex> G(n);
    bool converged = false;
    double diff = 0.0;
    for (int step = 0; step < opt.max_defect_steps; ++step) {
      for (int i = 0; i < n; ++i) G[i] = F[i] + a2 * t.umc[i] * cur.phi[i];
      DApply next = apply_double_tail(mesh, t, c, G, opt.theta);
      diff = 0.0;
      double norm = 0.0;
      for (int i = 0; i < n; ++i) {
        diff = std::max(diff, std::abs(next.phi[i] - cur.phi[i]));
        norm = std::max(norm, std::abs(next.phi[i]));
      }
      cur = std::move(next);
      if (diff <= opt.rel_tol * std::max(norm, 1e-300)) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw ConvergenceError(
          "rayleigh: wavenumber-defect iteration stalled (alpha too large "
          "for the contraction, or the source decays slower than theta)",
          diff);
    }
  }
  Solution s;
  s.mesh = mesh;
  s.theta = opt.theta;
  s.phi = std::move(cur.phi);
  s.dphi = std::move(cur.dphi);
  s.phi_0 = cur.phi_0;
  s.dphi_0 = cur.dphi_0;
  s.d2phi.resize(n);
  for (int i = 0; i < n; ++i) {
    Complex curvature = (t.u2[i] * s.phi[i] + F[i]) / t.umc[i];
    s.d2phi[i] = opt.zeroth_order_only ? curvature : a2 * s.phi[i] + curvature;
  }
  s.residual_norm = integrated_residual(mesh, s.phi, s.dphi, s.d2phi, s.phi_0,
                                        s.dphi_0, opt.theta);
  return s;
}

}  // namespace

double profile_decay_rate(const profiles::Profile& p) {
  if (p.name() == "tanh") return 2.0;
  return 1.0;  // exp and (conservatively) blasius
}

std::pair<Complex, Complex> ray0(const Profile& p, double alpha, Complex c,
                                 double Y) {
  if (alpha == 0.0) return {Complex{0.0, 0.0}, Complex{0.0, 0.0}};
  if (alpha < 0.0 || Y < 0.0) {
    throw DomainError("ray0: need alpha >= 0 and Y >= 0");
  }
  require_off_axis(c);
  Layer L = locate_layer(p, c);
  double eta0 = profile_decay_rate(p);
  double y_big = std::max({40.0 / eta0, 10.0 / alpha, Y + 1.0});
  auto f = [&](double Z) {
    Complex d = p.u(Z) - c;
    return std::exp(-2.0 * alpha * Z) / (d * d);
  };
  quad::Options qo;
  qo.rel_tol = 1e-12;
  if (L.Yc > Y && L.Yc < y_big) qo.breakpoints = {L.Yc};
  if (L.width > 0.0) qo.min_width = std::max(L.width / 4.0, 1e-8);
  Complex invc2 = 1.0 / ((1.0 - c) * (1.0 - c));
  Complex T = quad::integrate(f, Y, y_big, qo).value +
              invc2 * std::exp(-2.0 * alpha * y_big) / (2.0 * alpha);
  Complex umc = p.u(Y) - c;
  Complex value = 2.0 * alpha * std::exp(alpha * Y) * umc * T;
  Complex deriv = (alpha + p.u(Y, 1) / umc) * value -
                  2.0 * alpha * std::exp(-alpha * Y) / umc;
  return {value, deriv};
}

Solution solve_nonhomog(const Profile& p, double alpha, Complex c,
                        const std::function<Complex(double)>& F,
                        const SolveOptions& opt) {
  if (alpha < 0.0) throw DomainError("rayleigh: need alpha >= 0");
  require_off_axis(c);
  Layer L = locate_layer(p, c);
  quad::Mesh mesh = build_mesh(alpha, L, auto_y_max(p, alpha, opt), opt);
  NodeData t = tabulate(p, mesh, c);
  std::vector<Complex> Ftab(mesh.nodes());
  const auto& Y = mesh.node_coords();
  for (int i = 0; i < mesh.nodes(); ++i) Ftab[i] = F(Y[i]);
  return solve_tab(mesh, t, alpha, c, std::move(Ftab), opt);
}

Solution homog(const Profile& p, double alpha, Complex c,
               const SolveOptions& opt) {
  if (alpha <= 0.0) {
    throw DomainError("rayleigh::homog: need alpha > 0 (alpha = 0 collapses "
                      "the decaying mode to zero)");
  }
  require_off_axis(c);
  Layer L = locate_layer(p, c);
  double y_max = auto_y_max(p, alpha, opt);
  quad::Mesh mesh = build_mesh(alpha, L, y_max, opt);
  NodeData t = tabulate(p, mesh, c);
  const auto& Y = mesh.node_coords();
  int n = mesh.nodes();
  double eta0 = profile_decay_rate(p);

  // Explicit quasi-mode: phi0 = 2a e^{aY} (u - c) T with T the e^{-2aZ}
  // weighted tail integral, closed beyond y_max where u is flat.
  std::vector<Complex> tInt(n);
  for (int i = 0; i < n; ++i) {
    tInt[i] = std::exp(-2.0 * alpha * Y[i]) * t.inv2[i];
  }
  std::vector<Complex> Ts = mesh.suffix_integral(tInt);
  Complex invc2 = 1.0 / ((1.0 - c) * (1.0 - c));
  Complex t_tail = invc2 * std::exp(-2.0 * alpha * y_max) / (2.0 * alpha);
  std::vector<Complex> phi0(n), dphi0(n), d2phi0(n);
  for (int i = 0; i < n; ++i) {
    Complex val = 2.0 * alpha * std::exp(alpha * Y[i]) * t.umc[i] * (Ts[i] + t_tail);
    phi0[i] = val;
    dphi0[i] = (alpha + t.u1[i] / t.umc[i]) * val -
               2.0 * alpha * std::exp(-alpha * Y[i]) / t.umc[i];
    d2phi0[i] = alpha * alpha * val +
                (t.u2[i] + 2.0 * alpha * t.u1[i]) * val / t.umc[i];
  }
  Complex T_0 = mesh.integrate(tInt) + t_tail;
  Complex umc_0 = t.u_0 - c;
  Complex phi0_0 = 2.0 * alpha * umc_0 * T_0;
  Complex dphi0_0 =
      (alpha + t.u1_0 / umc_0) * phi0_0 - 2.0 * alpha / umc_0;

  // First correction: the double-tail inverse applied to -2a u' phi0
  // (satisfies the alpha = 0 equation with that source exactly).
  std::vector<Complex> G1(n);
  for (int i = 0; i < n; ++i) G1[i] = -2.0 * alpha * t.u1[i] * phi0[i];
  DApply D1 = apply_double_tail(mesh, t, c, G1, eta0 + alpha);
  std::vector<Complex> d2phi1(n);
  for (int i = 0; i < n; ++i) {
    d2phi1[i] = (t.u2[i] * D1.phi[i] + G1[i]) / t.umc[i];
  }

  // Remaining defect: Ray[phi2] = a^2 (u - c) phi1, solved in full.
  SolveOptions o2 = opt;
  o2.theta = eta0 + alpha;
  std::vector<Complex> F2(n);
  for (int i = 0; i < n; ++i) {
    F2[i] = alpha * alpha * t.umc[i] * D1.phi[i];
  }
  Solution s2 = solve_tab(mesh, t, alpha, c, std::move(F2), o2);

  Solution s;
  s.mesh = mesh;
  s.theta = opt.theta;
  s.phi.resize(n);
  s.dphi.resize(n);
  s.d2phi.resize(n);
  for (int i = 0; i < n; ++i) {
    s.phi[i] = phi0[i] + D1.phi[i] + s2.phi[i];
    s.dphi[i] = dphi0[i] + D1.dphi[i] + s2.dphi[i];
    s.d2phi[i] = d2phi0[i] + d2phi1[i] + s2.d2phi[i];
  }
  s.phi_0 = phi0_0 + D1.phi_0 + s2.phi_0;
  s.dphi_0 = dphi0_0 + D1.dphi_0 + s2.dphi_0;
  s.residual_norm = integrated_residual(mesh, s.phi, s.dphi, s.d2phi, s.phi_0,
                                        s.dphi_0, opt.theta);
  return s;
}

Solution solve_nonhomog(const langer::SpectralPoint& sp, bool use_c_hat,
                        const std::function<Complex(double)>& F,
                        const SolveOptions& opt) {
  return solve_nonhomog(*sp.profile, sp.alpha, use_c_hat ? sp.c_hat : sp.c, F,
                        opt);
}

Solution homog(const langer::SpectralPoint& sp, bool use_c_hat,
               const SolveOptions& opt) {
  return homog(*sp.profile, sp.alpha, use_c_hat ? sp.c_hat : sp.c, opt);
}

std::pair<double, double> boundary_imag_prediction(const Profile& p,
                                                   double alpha, Complex c) {
  double cr = c.real(), ci = c.imag();
  if (alpha <= 0.0 || cr <= 0.0 || cr >= 1.0) {
    throw DomainError(
        "boundary_imag_prediction: need alpha > 0 and 0 < Re c < 1");
  }
  if (ci < 0.0 || ci > 0.5 * std::min(alpha, cr)) {
    throw DomainError(
        "boundary_imag_prediction: expansion requires 0 <= Im c well below "
        "min(alpha, Re c)");
  }
  // Principal branch; the ci -> 0+ limit is arg(-c) = -pi.
  double arg_mc = ci == 0.0 ? -kPi : std::arg(-c);
  double Yc = profiles::critical_point(p, cr);
  double uc1 = p.u(Yc, 1);
  double uc2 = p.u(Yc, 2);
  double im_phi = -ci - alpha * cr * uc2 / (uc1 * uc1 * uc1) * arg_mc;
  double im_dphi = alpha * uc2 / (uc1 * uc1) * arg_mc;
  return {im_phi, im_dphi};
}

}  // namespace oslab::rayleigh
