#pragma once
#include "hartree/core.hpp"
#include "hartree/geometry.hpp"

#include <vector>

// Bubble profile U_{z,lambda}(x) = c (lambda/(1+lambda^2|x-z|^2))^{(N-2)/2},
// its x- and parameter-derivatives, and the m-bubble ansatz with optional
// cutoff: Z = xi * sum_j U_{z_j,lambda} (raw ansatz Z* without the cutoff).

namespace hartree::bubbles {

struct Bubble {
  Vec z;
  double lambda = 1.0;
};

// With nu = (N-2)/2 and D = 1 + lambda^2 s^2, s = |x-z|:
//   U        = c lambda^nu D^{-nu}
//   dU/ds    = -2 nu c lambda^{nu+2} s D^{-(nu+1)}
//   dU/dlam  = nu c lambda^{nu-1} (1 - lambda^2 s^2) D^{-(nu+1)}
//   Delta U  = -N(N-2) c^{1-p} U^p,  p = (N+2)/(N-2)
double bubble_eval(const ProblemParams &p, double c, const Bubble &b,
                   const Vec &x);
Vec bubble_grad(const ProblemParams &p, double c, const Bubble &b,
                const Vec &x);
double bubble_laplacian(const ProblemParams &p, double c, const Bubble &b,
                        const Vec &x);

struct BubblePartials {
  double d_lambda = 0;
  Vec d_center; // dU/dz_k = -(grad U)_k
};
BubblePartials bubble_partials(const ProblemParams &p, double c,
                               const Bubble &b, const Vec &x);

// Radial-profile forms in s = |x-z| (used by the 1-D and two-center engines).
double profile(const ProblemParams &p, double c, double lambda, double s);
double profile_ds(const ProblemParams &p, double c, double lambda, double s);
double profile_dlambda(const ProblemParams &p, double c, double lambda,
                       double s);
// d/ds of profile_dlambda = -2 c nu lambda^{nu+1} s D^{-(nu+2)}
//                           ((nu+2) - nu lambda^2 s^2)
double profile_dlambda_ds(const ProblemParams &p, double c, double lambda,
                          double s);

//==============================================================================

struct Ansatz {
  ProblemParams p;
  double c = 0; // bubble coefficient (scalable for negative-control hooks)
  geom::Placement placement;
  double lambda = 1.0;
  geom::CutoffSpec cutoff;
  bool use_cutoff = false;
};

// Builds placement from (m, r_bar, x_bar_pp) and the cutoff from
// (center, delta); c from the sharp constants of p.
Ansatz make_ansatz(const ProblemParams &p, const AnsatzConfig &cfg,
                   const std::vector<double> &cutoff_center, bool use_cutoff);

double ansatz_eval(const Ansatz &a, const Vec &x);
Vec ansatz_grad(const Ansatz &a, const Vec &x);
// Delta(xi u) = xi Delta u + 2 grad xi . grad u + u Delta xi
double ansatz_laplacian(const Ansatz &a, const Vec &x);

struct AnsatzPartials {
  double d_lambda = 0;
  double d_rbar = 0;               // all centers move radially together
  std::vector<double> d_xpp;       // common tail translation, N-2 entries
};
AnsatzPartials ansatz_partials(const Ansatz &a, const Vec &x);

// Raw-ansatz value Z* = sum_j U_j regardless of a.use_cutoff.
double raw_eval(const Ansatz &a, const Vec &x);
// d(Z*)/dlambda
double raw_dlambda(const Ansatz &a, const Vec &x);

} // namespace hartree::bubbles
