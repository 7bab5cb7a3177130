#include "oslab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oslab::quad {

namespace {

// QUADPACK dqk15 constants, rearranged to ascending node order.
constexpr int kN = Mesh::kNodesPerPanel;

constexpr double kXgkHalf[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
constexpr double kWgkHalf[8] = {
    0.0229353220105292, 0.0630920926299786, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278};
constexpr double kWgHalf[4] = {0.1294849661688697, 0.2797053914892767,
                               0.3818300505051189, 0.4179591836734694};

struct Rule {
  double x[kN];
  double wk[kN];
  double wg[kN];  // zero at pure-Kronrod nodes
};

const Rule& rule() {
  static const Rule r = [] {
    Rule t{};
    for (int i = 0; i < 7; ++i) {
      t.x[i] = -kXgkHalf[i];
      t.x[14 - i] = kXgkHalf[i];
      t.wk[i] = t.wk[14 - i] = kWgkHalf[i];
    }
    t.x[7] = 0.0;
    t.wk[7] = kWgkHalf[7];
    for (int i = 0; i < kN; ++i) t.wg[i] = 0.0;
    // Gauss-7 nodes sit at the odd ascending indices 1,3,...,13.
    t.wg[1] = t.wg[13] = kWgHalf[0];
    t.wg[3] = t.wg[11] = kWgHalf[1];
    t.wg[5] = t.wg[9] = kWgHalf[2];
    t.wg[7] = kWgHalf[3];
    return t;
  }();
  return r;
}

// Gauss-Legendre rule generated by Newton iteration; exact through degree
// 2n-1, used only at start-up to integrate the degree-14 nodal polynomials.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int k = 1; k <= n; ++k) {
    double xi = std::cos(kPi * (k - 0.25) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = xi;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2.0 * j - 1.0) * xi * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
      double dx = p1 / dp;
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = xi;
    for (int j = 2; j <= n; ++j) {
      double p2 = ((2.0 * j - 1.0) * xi * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
    x[k - 1] = -xi;  // ascending
    w[k - 1] = 2.0 / ((1.0 - xi * xi) * dp * dp);
  }
}

struct RefTables {
  double bw[kN];       // barycentric weights of the K15 nodes
  double P[kN][kN];    // P[i][j] = integral of ell_j over [x_i, 1]
};

double lagrange_eval(const RefTables& t, int j, double s) {
  const Rule& r = rule();
  for (int m = 0; m < kN; ++m)
    if (std::abs(s - r.x[m]) < 1e-14) return m == j ? 1.0 : 0.0;
  double num = t.bw[j] / (s - r.x[j]);
  double den = 0.0;
  for (int m = 0; m < kN; ++m) den += t.bw[m] / (s - r.x[m]);
  return num / den;
}

const RefTables& ref_tables() {
  static const RefTables tables = [] {
    RefTables t{};
    const Rule& r = rule();
    for (int j = 0; j < kN; ++j) {
      double p = 1.0;
      for (int m = 0; m < kN; ++m)
        if (m != j) p *= r.x[j] - r.x[m];
      t.bw[j] = 1.0 / p;
    }
    std::vector<double> gx, gw;
    gauss_legendre(20, gx, gw);
    for (int i = 0; i < kN; ++i) {
      double a = r.x[i], half = 0.5 * (1.0 - a), mid = 0.5 * (1.0 + a);
      for (int j = 0; j < kN; ++j) {
        double acc = 0.0;
        for (size_t q = 0; q < gx.size(); ++q)
          acc += gw[q] * lagrange_eval(t, j, mid + half * gx[q]);
        t.P[i][j] = half * acc;
      }
    }
    return t;
  }();
  return tables;
}

struct Panel {
  double a, b;
  Complex k15;
  double err;
  bool frozen = false;
};

Panel eval_panel(const std::function<Complex(double)>& f, double a, double b) {
  const Rule& r = rule();
  double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  Complex k{0.0, 0.0}, g{0.0, 0.0};
  for (int i = 0; i < kN; ++i) {
    Complex v = f(mid + half * r.x[i]);
    k += r.wk[i] * v;
    if (r.wg[i] != 0.0) g += r.wg[i] * v;
  }
  k *= half;
  g *= half;
  return Panel{a, b, k, std::abs(k - g), false};
}

}  // namespace

std::span<const double> k15_nodes() { return {rule().x, kN}; }
std::span<const double> k15_weights() { return {rule().wk, kN}; }

Outcome integrate(const std::function<Complex(double)>& f, double a, double b,
                  const Options& opt) {
  Outcome out;
  if (a == b) return out;
  if (a > b) {
    Outcome o = integrate(f, b, a, opt);
    o.value = -o.value;
    return o;
  }
  std::vector<double> edges{a};
  std::vector<double> brk = opt.breakpoints;
  std::sort(brk.begin(), brk.end());
  for (double p : brk)
    if (p > a && p < b && p > edges.back()) edges.push_back(p);
  edges.push_back(b);

  std::vector<Panel> panels;
  for (size_t i = 0; i + 1 < edges.size(); ++i)
    panels.push_back(eval_panel(f, edges[i], edges[i + 1]));

  while (true) {
    Complex total{0.0, 0.0};
    double toterr = 0.0;
    int worst = -1;
    double worst_err = -1.0;
    for (size_t i = 0; i < panels.size(); ++i) {
      total += panels[i].k15;
      toterr += panels[i].err;
      if (!panels[i].frozen && panels[i].err > worst_err) {
        worst_err = panels[i].err;
        worst = static_cast<int>(i);
      }
    }
    double goal = std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
    if (toterr <= goal || worst < 0 ||
        static_cast<int>(panels.size()) >= opt.max_panels) {
      out.value = total;
      out.error = toterr;
      out.panels = static_cast<int>(panels.size());
      return out;
    }
    Panel& p = panels[worst];
    double w = p.b - p.a;
    if (0.5 * w < opt.min_width) {
      p.frozen = true;
      out.floor_hit = true;
      continue;
    }
    double m = 0.5 * (p.a + p.b);
    Panel right = eval_panel(f, m, p.b);
    p = eval_panel(f, p.a, m);
    panels.insert(panels.begin() + worst + 1, right);
  }
}

Mesh::Mesh(std::vector<double> edges) : edges_(std::move(edges)) {
  const Rule& r = rule();
  nodes_.reserve(static_cast<size_t>(kN) * (edges_.size() - 1));
  for (size_t p = 0; p + 1 < edges_.size(); ++p) {
    double half = 0.5 * (edges_[p + 1] - edges_[p]);
    double mid = 0.5 * (edges_[p + 1] + edges_[p]);
    for (int i = 0; i < kN; ++i) nodes_.push_back(mid + half * r.x[i]);
  }
}

int Mesh::panel_of(double y) const {
  auto it = std::upper_bound(edges_.begin(), edges_.end(), y);
  int p = static_cast<int>(it - edges_.begin()) - 1;
  return std::clamp(p, 0, panels() - 1);
}

Complex Mesh::integrate(std::span<const Complex> v) const {
  const Rule& r = rule();
  Complex total{0.0, 0.0};
  for (int p = 0; p < panels(); ++p) {
    double half = 0.5 * (edges_[p + 1] - edges_[p]);
    Complex acc{0.0, 0.0};
    for (int i = 0; i < kN; ++i) acc += r.wk[i] * v[p * kN + i];
    total += half * acc;
  }
  return total;
}

std::vector<Complex> Mesh::suffix_integral(std::span<const Complex> v) const {
  const Rule& r = rule();
  const RefTables& t = ref_tables();
  int np = panels();
  std::vector<Complex> panel_int(np);
  for (int p = 0; p < np; ++p) {
    double half = 0.5 * (edges_[p + 1] - edges_[p]);
    Complex acc{0.0, 0.0};
    for (int i = 0; i < kN; ++i) acc += r.wk[i] * v[p * kN + i];
    panel_int[p] = half * acc;
  }
  std::vector<Complex> tail(np + 1, Complex{0.0, 0.0});
  for (int p = np - 1; p >= 0; --p) tail[p] = tail[p + 1] + panel_int[p];
  std::vector<Complex> out(nodes());
  for (int p = 0; p < np; ++p) {
    double half = 0.5 * (edges_[p + 1] - edges_[p]);
    for (int i = 0; i < kN; ++i) {
      Complex acc{0.0, 0.0};
      for (int j = 0; j < kN; ++j) acc += t.P[i][j] * v[p * kN + j];
      out[p * kN + i] = half * acc + tail[p + 1];
    }
  }
  return out;
}

std::vector<Complex> Mesh::prefix_integral(std::span<const Complex> v) const {
  std::vector<Complex> out = suffix_integral(v);
  Complex total = out.empty() ? Complex{0.0, 0.0}
                              : integrate(v);
  for (auto& s : out) s = total - s;
  return out;
}

ScaledC Mesh::integrate_scaled(std::span<const ScaledC> v) const {
  const Rule& r = rule();
  ScaledAccum acc;
  for (int p = 0; p < panels(); ++p) {
    double half = 0.5 * (edges_[p + 1] - edges_[p]);
    for (int i = 0; i < kN; ++i) acc.add(v[p * kN + i] * (half * r.wk[i]));
  }
  return acc.get();
}

std::vector<ScaledC> Mesh::suffix_integral_scaled(
    std::span<const ScaledC> v) const {
  const Rule& r = rule();
  const RefTables& t = ref_tables();
  int np = panels();
  std::vector<ScaledC> panel_int(np);
  for (int p = 0; p < np; ++p) {
    double half = 0.5 * (edges_[p + 1] - edges_[p]);
    ScaledAccum acc;
    for (int i = 0; i < kN; ++i) acc.add(v[p * kN + i] * (half * r.wk[i]));
    panel_int[p] = acc.get();
  }
  std::vector<ScaledC> tail(np + 1, ScaledC::zero());
  for (int p = np - 1; p >= 0; --p) {
    ScaledAccum acc;
    acc.add(tail[p + 1]);
    acc.add(panel_int[p]);
    tail[p] = acc.get();
  }
  std::vector<ScaledC> out(nodes());
  for (int p = 0; p < np; ++p) {
    double half = 0.5 * (edges_[p + 1] - edges_[p]);
    for (int i = 0; i < kN; ++i) {
      ScaledAccum acc;
      for (int j = 0; j < kN; ++j)
        acc.add(v[p * kN + j] * (half * t.P[i][j]));
      acc.add(tail[p + 1]);
      out[p * kN + i] = acc.get();
    }
  }
  return out;
}

std::vector<ScaledC> Mesh::prefix_integral_scaled(
    std::span<const ScaledC> v) const {
  const Rule& r = rule();
  const RefTables& t = ref_tables();
  int np = panels();
  std::vector<ScaledC> panel_int(np);
  for (int p = 0; p < np; ++p) {
    double half = 0.5 * (edges_[p + 1] - edges_[p]);
    ScaledAccum acc;
    for (int i = 0; i < kN; ++i) acc.add(v[p * kN + i] * (half * r.wk[i]));
    panel_int[p] = acc.get();
  }
  std::vector<ScaledC> head(np + 1, ScaledC::zero());
  for (int p = 0; p < np; ++p) {
    ScaledAccum acc;
    acc.add(head[p]);
    acc.add(panel_int[p]);
    head[p + 1] = acc.get();
  }
  std::vector<ScaledC> out(nodes());
  for (int p = 0; p < np; ++p) {
    double half = 0.5 * (edges_[p + 1] - edges_[p]);
    for (int i = 0; i < kN; ++i) {
      // integral over [panel start, node i] = panel integral - [node i, end]
      ScaledAccum acc;
      for (int j = 0; j < kN; ++j)
        acc.add(v[p * kN + j] * (half * (r.wk[j] - t.P[i][j])));
      acc.add(head[p]);
      out[p * kN + i] = acc.get();
    }
  }
  return out;
}

Complex Mesh::interpolate(std::span<const Complex> v, double y) const {
  const Rule& r = rule();
  const RefTables& t = ref_tables();
  int p = panel_of(y);
  double half = 0.5 * (edges_[p + 1] - edges_[p]);
  double mid = 0.5 * (edges_[p + 1] + edges_[p]);
  double s = (y - mid) / half;
  for (int m = 0; m < kN; ++m)
    if (std::abs(s - r.x[m]) < 1e-14) return v[p * kN + m];
  Complex num{0.0, 0.0};
  double den = 0.0;
  for (int m = 0; m < kN; ++m) {
    double c = t.bw[m] / (s - r.x[m]);
    num += c * v[p * kN + m];
    den += c;
  }
  return num / den;
}

void fill_graded(double a, double b, double wa, double wb, double coarse,
                 double growth, std::vector<double>& edges) {
  double span = b - a;
  if (span <= 0.0) return;
  double wl = wa > 0.0 ? std::min(wa, coarse) : coarse;
  double wr = wb > 0.0 ? std::min(wb, coarse) : coarse;
  if (span <= 1.25 * std::min(wl, wr)) return;

  std::vector<double> pts;
  double pos = a, w = wl;
  while (wa > 0.0 && pos + w < b && w < coarse) {
    pos += w;
    pts.push_back(pos);
    w *= growth;
  }
  double lmax = pos;
  pos = b;
  w = wr;
  while (wb > 0.0 && pos - w > lmax && w < coarse) {
    pos -= w;
    pts.push_back(pos);
    w *= growth;
  }
  std::sort(pts.begin(), pts.end());
  // Fill any remaining gap (including the whole of (a,b) when no grading was
  // requested) with uniform panels no wider than coarse.
  std::vector<double> walls{a};
  walls.insert(walls.end(), pts.begin(), pts.end());
  walls.push_back(b);
  for (size_t i = 0; i + 1 < walls.size(); ++i) {
    double g = walls[i + 1] - walls[i];
    if (g > 1.5 * coarse) {
      int n = static_cast<int>(std::ceil(g / coarse));
      for (int k = 1; k < n; ++k) pts.push_back(walls[i] + g * k / n);
    }
  }
  std::sort(pts.begin(), pts.end());
  edges.insert(edges.end(), pts.begin(), pts.end());
}

std::vector<double> canonical_edges(std::vector<double> raw) {
  std::sort(raw.begin(), raw.end());
  std::vector<double> out;
  double span = raw.empty() ? 0.0 : raw.back() - raw.front();
  double tol = std::max(1e-13, 1e-10 * span);
  for (double e : raw) {
    if (out.empty() || e - out.back() > tol) out.push_back(e);
  }
  return out;
}

}  // namespace oslab::quad
