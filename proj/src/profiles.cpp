#include "oslab/profiles.hpp"

#include <cmath>
#include <vector>

#include "oslab/types.hpp"

namespace oslab::profiles {

namespace {

class ExpProfile final : public Profile {
 public:
  double u(double Y, int k) const override {
    double e = std::exp(-Y);
    switch (k) {
      case 0: return 1.0 - e;
      case 1: return e;
      case 2: return -e;
      case 3: return e;
      case 4: return -e;
      default: throw DomainError("profile derivative order must be 0..4");
    }
  }
  double y_max() const override { return 30.0; }
  const std::string& name() const override {
    static const std::string n = "exp";
    return n;
  }
};

class TanhProfile final : public Profile {
 public:
  double u(double Y, int k) const override {
    double t = std::tanh(Y);
    double s2 = 1.0 - t * t;  // sech^2
    switch (k) {
      case 0: return t;
      case 1: return s2;
      case 2: return -2.0 * t * s2;
      case 3: return s2 * (6.0 * t * t - 2.0);
      case 4: return 8.0 * t * s2 * (2.0 - 3.0 * t * t);
      default: throw DomainError("profile derivative order must be 0..4");
    }
  }
  double y_max() const override { return 16.0; }
  const std::string& name() const override {
    static const std::string n = "tanh";
    return n;
  }
};

// Flat-plate layer: one fixed-step RK4 pass at construction (h = 5e-4 out to
// Y = 25), nodes kept for quintic Hermite interpolation of u = f'.  The wall
// shear f''(0) is found by a secant iteration on f'(25) = 1.
class BlasiusProfile final : public Profile {
 public:
  BlasiusProfile() {
    double lo = 0.3, hi = 0.4;
    double flo = shoot(lo, nullptr), fhi = shoot(hi, nullptr);
    for (int it = 0; it < 60; ++it) {
      double mid = hi - fhi * (hi - lo) / (fhi - flo);
      if (!(mid > 0.2 && mid < 0.5)) mid = 0.5 * (lo + hi);
      double fm = shoot(mid, nullptr);
      lo = hi;
      flo = fhi;
      hi = mid;
      fhi = fm;
      if (std::abs(fm) < 1e-14) break;
    }
    wall_shear_ = hi;
    nodes_.reserve(kSteps + 1);
    shoot(wall_shear_, &nodes_);
  }

  double u(double Y, int k) const override {
    if (k < 0 || k > 4) throw DomainError("profile derivative order must be 0..4");
    if (Y >= kYEnd) {
      return k == 0 ? 1.0 : 0.0;  // 1 - u ~ e^{-Y^2/4} is below roundoff here
    }
    if (Y < 0.0) {
      // Taylor extension through the wall: u = a Y - a^2 Y^4 / 48 + ...
      double a = wall_shear_;
      switch (k) {
        case 0: return a * Y - a * a * Y * Y * Y * Y / 48.0;
        case 1: return a - a * a * Y * Y * Y / 12.0;
        case 2: return -a * a * Y * Y / 4.0;
        case 3: return -a * a * Y / 2.0;
        case 4: return -a * a / 2.0;
      }
    }
    int i = static_cast<int>(Y / kH);
    if (i >= kSteps) i = kSteps - 1;
    double t = (Y - i * kH) / kH;
    if (k >= 3) {
      // Third and fourth interpolant derivatives lose orders; use the ODE
      // relations (with f''' = -f f''/2 and f'' = u')
      //   u'''  = -(1/2) u u' + (1/4) f^2 u',
      //   u'''' = -(1/2)(u'^2 + u u'') + (1/2) f u u' + (1/4) f^2 u''
      // built from the lower interpolated pieces and the tabulated f.
      double uu = u(Y, 0), up = u(Y, 1);
      double f = interp_f(i, t);
      if (k == 3) return -0.5 * uu * up + 0.25 * f * f * up;
      double upp = u(Y, 2);
      return -0.5 * (up * up + uu * upp) + 0.5 * f * uu * up +
             0.25 * f * f * upp;
    }
    const Node& L = nodes_[i];
    const Node& R = nodes_[i + 1];
    // Quintic Hermite on u = f' from (u, u', u'') at both step ends; u' = f''
    // and u'' = f''' = -f f''/2 are carried by the nodes.
    double uL = L.fp, dL = L.fpp * kH, sL = fppp(L) * kH * kH;
    double uR = R.fp, dR = R.fpp * kH, sR = fppp(R) * kH * kH;
    double h00, h10, h20, h01, h11, h21;
    quintic_weights(t, k, h00, h10, h20, h01, h11, h21);
    double scale = 1.0;
    for (int j = 0; j < k; ++j) scale /= kH;
    double val =
        h00 * uL + h10 * dL + h20 * sL + h01 * uR + h11 * dR + h21 * sR;
    return val * scale;
  }

  double y_max() const override { return 12.0; }
  const std::string& name() const override {
    static const std::string n = "blasius";
    return n;
  }

  double wall_shear() const { return wall_shear_; }

 private:
  struct Node {
    double f, fp, fpp;
  };

  static constexpr double kYEnd = 25.0;
  static constexpr double kH = 5e-4;
  static constexpr int kSteps = 50000;

  static double fppp(const Node& n) { return -0.5 * n.f * n.fpp; }

  double interp_f(int i, double t) const {
    // Cubic Hermite for f itself (only consumed by the u''' relation).
    const Node& L = nodes_[i];
    const Node& R = nodes_[i + 1];
    double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * L.f + (t3 - 2 * t2 + t) * kH * L.fp +
           (-2 * t3 + 3 * t2) * R.f + (t3 - t2) * kH * R.fp;
  }

  static void quintic_weights(double t, int k, double& h00, double& h10,
                              double& h20, double& h01, double& h11,
                              double& h21) {
    // Basis with value/slope/curvature matching at t = 0, 1.
    double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    switch (k) {
      case 0:
        h00 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
        h10 = t - 6 * t3 + 8 * t4 - 3 * t5;
        h20 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
        h01 = 10 * t3 - 15 * t4 + 6 * t5;
        h11 = -4 * t3 + 7 * t4 - 3 * t5;
        h21 = 0.5 * t3 - t4 + 0.5 * t5;
        break;
      case 1:
        h00 = -30 * t2 + 60 * t3 - 30 * t4;
        h10 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
        h20 = t - 4.5 * t2 + 6 * t3 - 2.5 * t4;
        h01 = 30 * t2 - 60 * t3 + 30 * t4;
        h11 = -12 * t2 + 28 * t3 - 15 * t4;
        h21 = 1.5 * t2 - 4 * t3 + 2.5 * t4;
        break;
      default:  // k == 2 (k >= 3 handled by the ODE relations)
        h00 = -60 * t + 180 * t2 - 120 * t3;
        h10 = -36 * t + 96 * t2 - 60 * t3;
        h20 = 1 - 9 * t + 18 * t2 - 10 * t3;
        h01 = 60 * t - 180 * t2 + 120 * t3;
        h11 = -24 * t + 84 * t2 - 60 * t3;
        h21 = 3 * t - 12 * t2 + 10 * t3;
        break;
    }
  }

  // RK4 on (f, f', f'') with f''(0) = s; returns f'(end) - 1.  Fills nodes
  // when requested.
  static double shoot(double s, std::vector<Node>* out) {
    Node y{0.0, 0.0, s};
    if (out) {
      out->clear();
      out->push_back(y);
    }
    auto rhs = [](const Node& n) {
      return Node{n.fp, n.fpp, -0.5 * n.f * n.fpp};
    };
    auto axpy = [](const Node& n, double a, const Node& d) {
      return Node{n.f + a * d.f, n.fp + a * d.fp, n.fpp + a * d.fpp};
    };
    for (int i = 0; i < kSteps; ++i) {
      Node k1 = rhs(y);
      Node k2 = rhs(axpy(y, 0.5 * kH, k1));
      Node k3 = rhs(axpy(y, 0.5 * kH, k2));
      Node k4 = rhs(axpy(y, kH, k3));
      y.f += kH / 6.0 * (k1.f + 2 * k2.f + 2 * k3.f + k4.f);
      y.fp += kH / 6.0 * (k1.fp + 2 * k2.fp + 2 * k3.fp + k4.fp);
      y.fpp += kH / 6.0 * (k1.fpp + 2 * k2.fpp + 2 * k3.fpp + k4.fpp);
      if (out) out->push_back(y);
    }
    return y.fp - 1.0;
  }

  double wall_shear_ = 0.0;
  std::vector<Node> nodes_;
};

}  // namespace

std::unique_ptr<Profile> make_profile(const std::string& name) {
  if (name == "exp") return std::make_unique<ExpProfile>();
  if (name == "tanh") return std::make_unique<TanhProfile>();
  if (name == "blasius") return std::make_unique<BlasiusProfile>();
  throw DomainError("unknown profile: " + name);
}

double critical_point(const Profile& p, double c_r) {
  if (!(c_r > 0.0) || !(c_r < 1.0))
    throw DomainError("critical_point needs 0 < c_r < 1");
  double lo = 0.0, hi = p.y_max();
  double Y = c_r / p.u(0.0, 1);  // first-order guess from the wall slope
  for (int it = 0; it < 100; ++it) {
    double r = p.u(Y) - c_r;
    if (std::abs(r) <= 1e-13) return Y;
    (r > 0.0 ? hi : lo) = Y;
    double up = p.u(Y, 1);
    double step = r / up;
    double Yn = Y - step;
    if (!(Yn > lo && Yn < hi)) Yn = 0.5 * (lo + hi);  // safeguard: bisect
    Y = Yn;
  }
  throw ConvergenceError("critical_point did not converge",
                         std::abs(p.u(Y) - c_r));
}

}  // namespace oslab::profiles
