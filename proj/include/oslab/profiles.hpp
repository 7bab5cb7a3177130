#pragma once

// Base-flow velocity profiles u(Y) on the half line: u(0) = 0, u' > 0,
// u -> 1 as Y -> infinity, with derivatives through third order.  These are
// the only inputs the stability solvers take from the flow itself.

#include <memory>
#include <string>

namespace oslab::profiles {

class Profile {
 public:
  virtual ~Profile() = default;

  // k-th derivative of u at Y, k in 0..4.  Y may dip slightly below zero
  // (solvers probing near the wall); profiles extend smoothly there.
  virtual double u(double Y, int k = 0) const = 0;

  // Truncation point beyond which 1 - u is below roundoff for the solvers'
  // purposes; meshes and tail corrections use this.
  virtual double y_max() const = 0;

  virtual const std::string& name() const = 0;
};

// Available profiles:
//   "exp"     : u = 1 - e^{-Y}            (closed form)
//   "tanh"    : u = tanh(Y)               (closed form)
//   "blasius" : flat-plate boundary layer, u = f'(Y) with
//               f''' + (1/2) f f'' = 0, f(0) = f'(0) = 0, f'(inf) = 1,
//               integrated once at construction and interpolated.
// Throws DomainError for unknown names.
std::unique_ptr<Profile> make_profile(const std::string& name);

// Height where u(Y_c) = c_r, for 0 < c_r < 1; safeguarded Newton, converged
// to |u(Y_c) - c_r| <= 1e-13.
double critical_point(const Profile& p, double c_r);

}  // namespace oslab::profiles
