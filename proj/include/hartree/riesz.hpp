#pragma once
#include "hartree/bubbles.hpp"
#include "hartree/quadrature.hpp"
#include "hartree/special.hpp"

#include <functional>
#include <vector>

// Riesz potentials |.|^{-alpha} * f. For bubble powers the convolution is
// closed-form:
//   (|.|^{-alpha} * U_{z,lam}^{2*_alpha})(x)
//     = I(alpha/2) c^{2*_alpha} (lam/(1+lam^2|x-z|^2))^{alpha/2},
// a consequence of the identity behind riesz_identity_constant. Everything
// else is integrated numerically with the kernel singularity absorbed into
// the sampling density.

namespace hartree::riesz {

// Closed form above. `alternative` substitutes the HLS constant for
// c^{2*_alpha} (the other reading of the overloaded constant symbol), kept
// only so the comparison report can show it fails the numeric oracle.
double bubble_closed(const ProblemParams &p, const special::SharpConstants &sc,
                     const bubbles::Bubble &b, const Vec &x,
                     bool alternative = false);

// Radial factor: bubble_closed as a function of s = |x-z|.
double bubble_closed_radial(const ProblemParams &p,
                            const special::SharpConstants &sc, double lambda,
                            double s, bool alternative = false);

// Numeric (|.|^{-alpha} * f)(x). decay declares |f(y)| ~ |y|^{-decay} at
// infinity; integrability of the tail needs decay + alpha > N. peaks list
// extra sampling mass where f concentrates (bubble centers and scales).
IntegralResult numeric(const std::function<double(const Vec &)> &f, int N,
                       double alpha, double decay, const Vec &x,
                       const std::vector<quad::MixtureComponent> &peaks,
                       const QuadratureSpec &spec);

enum class AnsatzConv {
  closed_star,   // |.|^{-alpha} * (sum_j U_j^P), exact
  numeric_cutoff // |.|^{-alpha} * (Z^P) for the configured ansatz, numeric
                 // with the closed star sum as control variate
};

IntegralResult ansatz_conv(const bubbles::Ansatz &a, const Vec &x,
                           AnsatzConv mode, const QuadratureSpec &spec);

} // namespace hartree::riesz
