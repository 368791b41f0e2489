#include "hartree/bubbles.hpp"

#include "hartree/special.hpp"

#include <cmath>

namespace hartree::bubbles {

namespace {
constexpr double kPi = 3.141592653589793238462643383279503;
}

double profile(const ProblemParams &p, double c, double lambda, double s) {
  const double D = 1.0 + lambda * lambda * s * s;
  return c * std::pow(lambda / D, p.nu());
}

double profile_ds(const ProblemParams &p, double c, double lambda, double s) {
  const double nu = p.nu();
  const double D = 1.0 + lambda * lambda * s * s;
  return -2.0 * nu * c * std::pow(lambda, nu + 2.0) * s *
         std::pow(D, -(nu + 1.0));
}

double profile_dlambda(const ProblemParams &p, double c, double lambda,
                       double s) {
  const double nu = p.nu();
  const double ls2 = lambda * lambda * s * s;
  const double D = 1.0 + ls2;
  return nu * c * std::pow(lambda, nu - 1.0) * (1.0 - ls2) *
         std::pow(D, -(nu + 1.0));
}

double profile_dlambda_ds(const ProblemParams &p, double c, double lambda,
                          double s) {
  const double nu = p.nu();
  const double ls2 = lambda * lambda * s * s;
  const double D = 1.0 + ls2;
  return -2.0 * c * nu * std::pow(lambda, nu + 1.0) * s *
         std::pow(D, -(nu + 2.0)) * ((nu + 2.0) - nu * ls2);
}

double bubble_eval(const ProblemParams &p, double c, const Bubble &b,
                   const Vec &x) {
  return profile(p, c, b.lambda, dist(x, b.z));
}

Vec bubble_grad(const ProblemParams &p, double c, const Bubble &b,
                const Vec &x) {
  // grad U = dU/ds (x-z)/s = -2 nu c lambda^{nu+2} (x-z) D^{-(nu+1)}
  const double nu = p.nu();
  const Vec w = x - b.z;
  const double D = 1.0 + b.lambda * b.lambda * norm2(w);
  const double f = -2.0 * nu * c * std::pow(b.lambda, nu + 2.0) *
                   std::pow(D, -(nu + 1.0));
  return f * w;
}

double bubble_laplacian(const ProblemParams &p, double c, const Bubble &b,
                        const Vec &x) {
  const int N = p.N;
  const double pp = (N + 2.0) / (N - 2.0);
  const double u = bubble_eval(p, c, b, x);
  return -N * (N - 2.0) * std::pow(c, 1.0 - pp) * std::pow(u, pp);
}

BubblePartials bubble_partials(const ProblemParams &p, double c,
                               const Bubble &b, const Vec &x) {
  BubblePartials out;
  out.d_lambda = profile_dlambda(p, c, b.lambda, dist(x, b.z));
  out.d_center = -1.0 * bubble_grad(p, c, b, x);
  return out;
}

//==============================================================================

Ansatz make_ansatz(const ProblemParams &p, const AnsatzConfig &cfg,
                   const std::vector<double> &cutoff_center, bool use_cutoff) {
  Ansatz a;
  a.p = p;
  a.c = special::bubble_coefficient(p.N, p.alpha);
  a.placement = geom::place_bubbles(p.N, cfg.m, cfg.r_bar, cfg.x_bar_pp);
  a.lambda = cfg.lambda;
  a.cutoff = geom::make_cutoff(cutoff_center, cfg.delta);
  a.use_cutoff = use_cutoff;
  return a;
}

double raw_eval(const Ansatz &a, const Vec &x) {
  KahanSum s;
  for (const auto &z : a.placement.centers)
    s.add(profile(a.p, a.c, a.lambda, dist(x, z)));
  return s.total();
}

double raw_dlambda(const Ansatz &a, const Vec &x) {
  KahanSum s;
  for (const auto &z : a.placement.centers)
    s.add(profile_dlambda(a.p, a.c, a.lambda, dist(x, z)));
  return s.total();
}

double ansatz_eval(const Ansatz &a, const Vec &x) {
  const double zs = raw_eval(a, x);
  if (!a.use_cutoff)
    return zs;
  const double xi = cutoff_eval(a.cutoff, x).value;
  return xi == 0.0 ? 0.0 : xi * zs;
}

Vec ansatz_grad(const Ansatz &a, const Vec &x) {
  const int N = a.p.N;
  Vec g(N);
  for (const auto &z : a.placement.centers) {
    Bubble b{z, a.lambda};
    g += bubble_grad(a.p, a.c, b, x);
  }
  if (!a.use_cutoff)
    return g;
  const geom::CutoffValue cv = geom::cutoff_eval(a.cutoff, x);
  if (cv.value == 0.0 && norm2(cv.grad) == 0.0)
    return Vec(N);
  // grad(xi u) = xi grad u + u grad xi
  const double u = raw_eval(a, x);
  Vec out = cv.value * g;
  out += u * cv.grad;
  return out;
}

double ansatz_laplacian(const Ansatz &a, const Vec &x) {
  KahanSum lap;
  for (const auto &z : a.placement.centers) {
    Bubble b{z, a.lambda};
    lap.add(bubble_laplacian(a.p, a.c, b, x));
  }
  if (!a.use_cutoff)
    return lap.total();
  const geom::CutoffValue cv = geom::cutoff_eval(a.cutoff, x);
  if (cv.value == 0.0 && cv.laplacian == 0.0 && norm2(cv.grad) == 0.0)
    return 0.0;
  Vec g(a.p.N);
  for (const auto &z : a.placement.centers) {
    Bubble b{z, a.lambda};
    g += bubble_grad(a.p, a.c, b, x);
  }
  const double u = raw_eval(a, x);
  return cv.value * lap.total() + 2.0 * dot(cv.grad, g) + u * cv.laplacian;
}

AnsatzPartials ansatz_partials(const Ansatz &a, const Vec &x) {
  const int N = a.p.N;
  AnsatzPartials out;
  out.d_xpp.assign(static_cast<std::size_t>(N - 2), 0.0);
  KahanSum dl, dr;
  std::vector<KahanSum> dx(static_cast<std::size_t>(N - 2));
  const int m = a.placement.m;
  for (int j = 1; j <= m; ++j) {
    const Vec &z = a.placement.centers[static_cast<std::size_t>(j - 1)];
    Bubble b{z, a.lambda};
    dl.add(profile_dlambda(a.p, a.c, a.lambda, dist(x, z)));
    const Vec g = bubble_grad(a.p, a.c, b, x);
    // dz_j/dr_bar = (cos phi_j, sin phi_j, 0''), dU_j/dr_bar = -grad U_j . that
    const double phi = 2.0 * kPi * (j - 1) / m;
    dr.add(-(g[0] * std::cos(phi) + g[1] * std::sin(phi)));
    for (int k = 0; k < N - 2; ++k)
      dx[static_cast<std::size_t>(k)].add(-g[2 + k]);
  }
  out.d_lambda = dl.total();
  out.d_rbar = dr.total();
  for (int k = 0; k < N - 2; ++k)
    out.d_xpp[static_cast<std::size_t>(k)] =
        dx[static_cast<std::size_t>(k)].total();
  if (a.use_cutoff) {
    // the cutoff is centered at the potential's point, not the ansatz
    // parameters, so it just multiplies every partial
    const double xi = geom::cutoff_eval(a.cutoff, x).value;
    out.d_lambda *= xi;
    out.d_rbar *= xi;
    for (auto &v : out.d_xpp)
      v *= xi;
  }
  return out;
}

} // namespace hartree::bubbles
