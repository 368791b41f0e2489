#pragma once
#include "hartree/core.hpp"

#include <vector>

// Bubble placement on a circle in the (x1,x2)-plane, pairwise interaction
// sums, the angular sector decomposition, and the smooth cutoff localizing
// the ansatz to a solid torus around the concentration set.

namespace hartree::geom {

struct Placement {
  int m = 1;
  double r_bar = 1.0;
  std::vector<double> x_bar_pp; // common tail coordinates, in R^{N-2}
  std::vector<Vec> centers;     // z_j in R^N
  int N() const { return 2 + static_cast<int>(x_bar_pp.size()); }
};

// z_j = (r cos(2(j-1)pi/m), r sin(2(j-1)pi/m), x'') for j = 1..m.
// The set is invariant under rotation by 2pi/m and under x2 -> -x2.
Placement place_bubbles(int N, int m, double r_bar,
                        const std::vector<double> &x_bar_pp);

// sum_{j=2}^m |z_1 - z_j|^{-exponent}
//   = (2 r_bar)^{-exponent} sum_{j=2}^m sin^{-exponent}((j-1) pi / m)
double interaction_sum(int m, double r_bar, double exponent);

// Index of the sector Omega_j = { <x'/|x'|, z_j'/|z_j'|> >= cos(pi/m) }
// containing x. Ties go to the smaller index; points with x' = 0 go to j = 1
// by convention.
int sector_index(const Vec &x, const Placement &pl);

//==============================================================================

struct CutoffSpec {
  std::vector<double> center; // (r0, x0'') in R^{N-1}
  double delta = 0.1;
};

// Validates center/delta; requires 2*delta < r0 so the transition shell stays
// away from the x' = 0 axis, where the tube distance is not smooth.
CutoffSpec make_cutoff(std::vector<double> center, double delta);

// sigma(x) = |(r, x'') - (r0, x0'')| with r = |(x1, x2)|
double tube_distance(const CutoffSpec &c, const Vec &x);

struct CutoffValue {
  double value = 0;
  Vec grad;             // gradient in R^N
  double laplacian = 0; // full N-dimensional Laplacian
};

// Quintic plateau: 1 for sigma <= delta, 0 for sigma >= 2 delta, and
// q(t) = 1 - (6t^5 - 15t^4 + 10t^3), t = (sigma - delta)/delta, between;
// C^2 across both seams. Derivatives use |grad sigma| = 1 and
// Delta sigma = (N-2)/sigma + (r - r0)/(r sigma).
CutoffValue cutoff_eval(const CutoffSpec &c, const Vec &x);

} // namespace hartree::geom
