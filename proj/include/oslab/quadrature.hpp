#pragma once

// Deterministic complex-valued quadrature.
//
// Two layers:
//  * an adaptive Gauss-Kronrod (G7/K15) integrator for one-off integrals
//    (special-function primitives along rays, far-field tails), with forced
//    breakpoints and a minimum panel width so the critical layer cannot be
//    subdivided into oblivion;
//  * a fixed Mesh of K15 panels on which the solvers tabulate integrands once
//    and then apply panel weights, prefix/suffix sums, and within-panel
//    partial integrals.  Partial integrals use the exact antiderivatives of
//    the degree-14 nodal interpolant, so every integral of mesh data is the
//    integral of one globally defined piecewise polynomial - reproducible
//    bit-for-bit and free of directional bias.
//
// Scaled variants accept exponent-scaled values (see scaled.hpp) so that
// integrals of exponentially graded integrands never leave double range.

#include <functional>
#include <span>
#include <vector>

#include "oslab/scaled.hpp"
#include "oslab/types.hpp"

namespace oslab::quad {

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  double min_width = 0.0;
  int max_panels = 4000;
  std::vector<double> breakpoints;  // forced internal edges, any order
};

struct Outcome {
  Complex value{0.0, 0.0};
  double error = 0.0;   // sum of panel |K15-G7| estimates
  int panels = 0;
  bool floor_hit = false;  // some panel wanted to split below min_width
};

Outcome integrate(const std::function<Complex(double)>& f, double a, double b,
                  const Options& opt = {});

// Kronrod-15 reference nodes/weights on [-1,1], ascending.
std::span<const double> k15_nodes();
std::span<const double> k15_weights();

class Mesh {
 public:
  static constexpr int kNodesPerPanel = 15;

  Mesh() = default;
  explicit Mesh(std::vector<double> edges);

  int panels() const { return static_cast<int>(edges_.size()) - 1; }
  int nodes() const { return kNodesPerPanel * panels(); }
  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& node_coords() const { return nodes_; }
  double lo() const { return edges_.front(); }
  double hi() const { return edges_.back(); }

  // Panel index whose closed interval contains y (clamped at the ends).
  int panel_of(double y) const;

  Complex integrate(std::span<const Complex> v) const;
  // S[k] = integral from node k to the right end of the mesh.
  std::vector<Complex> suffix_integral(std::span<const Complex> v) const;
  // S[k] = integral from the left end of the mesh to node k.
  std::vector<Complex> prefix_integral(std::span<const Complex> v) const;

  ScaledC integrate_scaled(std::span<const ScaledC> v) const;
  std::vector<ScaledC> suffix_integral_scaled(std::span<const ScaledC> v) const;
  std::vector<ScaledC> prefix_integral_scaled(std::span<const ScaledC> v) const;

  // Value at arbitrary y of the nodal interpolant of v (barycentric within
  // the containing panel).  Used for output sampling, not inside solvers.
  Complex interpolate(std::span<const Complex> v, double y) const;

 private:
  std::vector<double> edges_;
  std::vector<double> nodes_;  // all panel nodes, ascending
};

// Append edges filling (a,b): widths grow geometrically from wa at the left
// and wb at the right (factor `growth`), capped at `coarse`; the middle is
// covered uniformly.  Endpoints a,b are *not* appended.  Inputs wa,wb may be
// zero meaning "no local refinement on that side".
void fill_graded(double a, double b, double wa, double wb, double coarse,
                 double growth, std::vector<double>& edges);

// Sorted unique edge list from a raw collection (tolerance-deduplicated).
std::vector<double> canonical_edges(std::vector<double> raw);

}  // namespace oslab::quad
