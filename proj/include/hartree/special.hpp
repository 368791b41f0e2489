#pragma once
#include "hartree/core.hpp"

// Closed-form constants: Gamma/Beta, the sharp constant of the diagonal
// Hardy-Littlewood-Sobolev inequality, the Sobolev constant and its
// Hartree-type analogue, the convolution identity constant I(s), and the
// normalization that makes the Talenti profile solve the nonlocal equation.

namespace hartree::special {

double gamma_fn(double x);  // x > 0
double log_gamma(double x); // x > 0
double beta_fn(double a, double b);

// C(N, alpha) = pi^{alpha/2} Gamma(N/2-alpha/2)/Gamma(N-alpha/2)
//             * (Gamma(N/2)/Gamma(N))^{-1+alpha/N},   0 < alpha < N
double hls_constant(int N, double alpha);

// S: the Rayleigh quotient |grad W|_2^2 / |W|_{2^*}^2 of the extremal
// W = (1+|x|^2)^{-(N-2)/2}, computed by radial quadrature (the Beta-function
// closed form is checked against it in the tests)
double sobolev_constant(int N);

// S_{H,L} = S / C(N, alpha)^{1/two_star_alpha}
double hartree_sobolev_constant(int N, double alpha);

// I(s) = pi^{N/2} Gamma(N/2-s)/Gamma(N-s) for 0 < s < N/2; the constant in
//   ( |.|^{-2s} * (1+|y|^2)^{-(N-s)} )(x) = I(s) (1+|x|^2)^{-s}
double riesz_identity_constant(int N, double s);

// c(N, alpha) with U = c (lambda/(1+lambda^2|x-z|^2))^{(N-2)/2}:
//   c = S^{(N-alpha)(2-N)/(4(N-alpha+2))} C^{(2-N)/(2(N-alpha+2))}
//       [N(N-2)]^{(N-2)/4}
// Consistency: c^{2(two_star_alpha - 1)} I(alpha/2) = N(N-2), which is what
// -Delta U = (|.|^{-alpha} * U^{two_star_alpha}) U^{two_star_alpha - 1} needs.
double bubble_coefficient(int N, double alpha);

struct SharpConstants {
  double C_hls = 0;       // C(N, alpha)
  double S_sobolev = 0;   // S
  double S_hartree = 0;   // S_{H,L}
  double c_bubble = 0;    // c(N, alpha)
  double I_half_alpha = 0; // I(alpha/2)
};
SharpConstants sharp_constants(const ProblemParams &p);

} // namespace hartree::special
