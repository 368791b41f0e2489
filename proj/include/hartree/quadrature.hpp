#pragma once
#include "hartree/core.hpp"

#include <functional>
#include <vector>

// Integration engines.
//
//  * radial_integral     : |S^{N-1}| ∫_0^∞ g(r) r^{N-1} dr, adaptive
//                           Gauss-Kronrod 7/15 after the compactifying
//                           substitution r = tan(theta).
//  * two_center_integral : ∫_{R^N} F(|x-z1|, |x-z2|) dx reduced exactly to a
//                           2-D integral in bipolar-type coordinates and done
//                           with an adaptive 2-D Gauss-Kronrod rule.
//  * qmc_integral        : plain quasi-Monte-Carlo mean over a ball.
//  * mixture_integral    : importance-sampled QMC over R^N with a mixture of
//                           radial components (power-law core + Pareto tail),
//                           able to absorb a |y-c|^{-kappa} kernel singularity
//                           into the sampling density.
//  * tube_integral       : QMC over the solid torus D_rho x S^1, the domain
//                           of the local identities, with optional extra
//                           bubble-centered components.
//
// All QMC engines use a Halton sequence with Cranley-Patterson shifts; the
// spread of the shift replicates provides est_error. Summation is chunked with
// a fixed tree shape so results are byte-identical for any thread count.

namespace hartree::quad {

double sphere_area(int N);            // |S^{N-1}|
double ball_volume(int N, double R);

IntegralResult adaptive_gk(const std::function<double(double)> &f, double a,
                           double b, double rel_tol, double abs_tol,
                           long max_panels);

IntegralResult radial_integral(const std::function<double(double)> &g,
                               const ProblemParams &p,
                               const QuadratureSpec &spec);

IntegralResult two_center_integral(const std::function<double(double, double)> &F,
                                   const Vec &z1, const Vec &z2,
                                   const ProblemParams &p,
                                   const QuadratureSpec &spec);

IntegralResult qmc_integral(const std::function<double(const Vec &)> &F,
                            const Vec &center, double radius,
                            const QuadratureSpec &spec);

// Raw QMC driver: estimates the mean of sample_value(u) for u uniform on the
// dims-dimensional unit cube (Halton points, Cranley-Patterson shifts).
// value = mean over shift replicates; est_error = standard error of the
// replicate means + tail_bound + a roundoff floor. Deterministic for a fixed
// spec regardless of the thread count. shift_means, when given, receives the
// per-replicate means (for correlation-aware error estimates downstream).
IntegralResult qmc_mean(int dims, const QuadratureSpec &spec,
                        const std::function<double(const double *)> &sample_value,
                        double tail_bound = 0.0,
                        std::vector<double> *shift_means = nullptr);

// n independent N(0,1) draws from consecutive (0,1) pairs, normalized to a
// unit vector. Consumes n + (n mod 2) coordinates of u.
void unit_direction(const double *u, int n, double *dir);

// One radial component of the importance mixture. Density along the radius:
// a power-law core on [0, scale] absorbing dist^{-kernel_pow} (kernel_pow = 0
// for smooth integrands), then a 1/rho^2 Pareto tail out to radius.
struct MixtureComponent {
  Vec center;
  double scale = 1.0;
  double kernel_pow = 0.0;
  double radius = 60.0;
};

// Radial pdf of one component at distance rho from its center (density of the
// sampled radius, before division by the sphere measure).
double component_radial_pdf(const MixtureComponent &c, int N, double rho);
// Inverse-CDF sample of the component's radius from u in (0,1).
double component_sample_radius(const MixtureComponent &c, int N, double u);
// Full mixture density at a point (equal component weights).
double mixture_density(const std::vector<MixtureComponent> &comps, int N,
                       const Vec &y);
// Draw a point: u[0] picks the component, u[1] the radius, u[2..] the
// direction (N + (N mod 2) coordinates).
Vec mixture_sample(const std::vector<MixtureComponent> &comps, int N,
                   const double *u);

IntegralResult mixture_integral(const std::function<double(const Vec &)> &F,
                                const std::vector<MixtureComponent> &comps,
                                int N, const QuadratureSpec &spec,
                                double tail_bound = 0.0,
                                std::vector<double> *shift_means = nullptr);

// Integral over D_rho = {x : |(|x'|, x'') - w0| <= rho}, w0 in R^{N-1} given
// as (r0, x0''). extra components add bubble-scale sampling mass inside the
// tube; their truncation radii are clipped to keep every sample in D_rho
// handled by the indicator (F is only evaluated inside).
IntegralResult tube_integral(const std::function<double(const Vec &)> &F,
                             const std::vector<double> &w0, double rho,
                             const ProblemParams &p, const QuadratureSpec &spec,
                             const std::vector<MixtureComponent> &extra = {});

// int_{D_rho} int_{R^N} F(x, y) |x-y|^{-kernel_pow} dy dx. x is sampled as in
// tube_integral; y = x + w with the kernel singularity absorbed into the w
// density and extra w mass of width peak_scale at each of the given peaks.
IntegralResult
tube_pair_integral(const std::function<double(const Vec &, const Vec &)> &F,
                   const std::vector<double> &w0, double rho,
                   double kernel_pow, const std::vector<Vec> &peaks,
                   double peak_scale, const ProblemParams &p,
                   const QuadratureSpec &spec,
                   const std::vector<MixtureComponent> &extra = {});

} // namespace hartree::quad
