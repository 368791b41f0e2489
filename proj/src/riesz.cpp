#include "hartree/riesz.hpp"

#include <cmath>
#include <cstdlib>

namespace hartree::riesz {

//==============================================================================

double bubble_closed_radial(const ProblemParams &p,
                            const special::SharpConstants &sc, double lambda,
                            double s, bool alternative) {
  const double base = alternative ? sc.C_hls : sc.c_bubble;
  const double D = 1.0 + lambda * lambda * s * s;
  return sc.I_half_alpha * std::pow(base, p.two_star_alpha) *
         std::pow(lambda / D, 0.5 * p.alpha);
}

double bubble_closed(const ProblemParams &p, const special::SharpConstants &sc,
                     const bubbles::Bubble &b, const Vec &x, bool alternative) {
  return bubble_closed_radial(p, sc, b.lambda, dist(x, b.z), alternative);
}

//==============================================================================

IntegralResult numeric(const std::function<double(const Vec &)> &f, int N,
                       double alpha, double decay, const Vec &x,
                       const std::vector<quad::MixtureComponent> &peaks,
                       const QuadratureSpec &spec) {
  if (N < 3 || N > kMaxDim)
    fail("DimensionTooSmall", "riesz::numeric needs 3 <= N <= 12");
  if (!(alpha > 0.0) || !(alpha < N))
    fail("AlphaOutOfRange", "riesz kernel exponent must lie in (0, N)");
  if (!(decay + alpha > N))
    fail("QuadratureFailure",
         "tail not integrable: need decay + alpha > N for the Riesz tail");

  const double R = spec.domain_radius;

  // Tail bound: |f(y)| <= C |y|^{-decay} outside radius R with C estimated
  // from samples of f on the sphere |y| = R. For |y| >= R >= 2|x| the kernel
  // obeys |x-y|^{-alpha} <= 2^alpha |y|^{-alpha}, so
  //   tail <= C 2^alpha |S^{N-1}| R^{N-decay-alpha} / (decay+alpha-N).
  double fmax = 0.0;
  {
    Vec probe(N);
    for (int k = 0; k < std::min(N, 4); ++k) {
      for (int sgn : {-1, 1}) {
        for (int i = 0; i < N; ++i) probe[i] = 0.0;
        probe[k] = sgn * R;
        fmax = std::max(fmax, std::abs(f(probe)));
      }
    }
    const double diag = R / std::sqrt(double(N));
    for (int i = 0; i < N; ++i) probe[i] = diag;
    fmax = std::max(fmax, std::abs(f(probe)));
  }
  const double tail = 2.0 * std::pow(2.0, alpha) * fmax * quad::sphere_area(N) *
                      std::pow(R, double(N) - alpha) / (decay + alpha - N);

  std::vector<quad::MixtureComponent> comps;
  quad::MixtureComponent at_x;
  at_x.center = x;
  at_x.scale = 1.0;
  at_x.kernel_pow = alpha;
  at_x.radius = R;
  comps.push_back(at_x);
  for (auto c : peaks) {
    c.radius = R;
    comps.push_back(c);
  }

  auto F = [&](const Vec &y) {
    const double d = dist(y, x);
    if (d < 1e-150) return 0.0; // measure-zero point; density guard matches
    return f(y) * std::pow(d, -alpha);
  };
  return quad::mixture_integral(F, comps, N, spec, tail);
}

//==============================================================================

IntegralResult ansatz_conv(const bubbles::Ansatz &a, const Vec &x,
                           AnsatzConv mode, const QuadratureSpec &spec) {
  const special::SharpConstants sc = special::sharp_constants(a.p);

  double star = 0.0, star_abs = 0.0;
  for (const auto &z : a.placement.centers) {
    const double g = bubble_closed_radial(a.p, sc, a.lambda, dist(x, z));
    star += g;
    star_abs += std::abs(g);
  }

  if (mode == AnsatzConv::closed_star) {
    IntegralResult r;
    r.value = star;
    r.est_error = 1e-14 * star_abs;
    r.scheme = Scheme::radial_1d;
    r.nodes_used = 0;
    return r;
  }

  // numeric_cutoff: convolve the configured ansatz power Z^P, using the sum
  // of single-bubble closed forms as control variate. The residual
  //   Z^P - sum_j U_j^P
  // carries the cutoff truncation and the cross terms; both decay at least
  // as fast as a single bubble power, so decay = (N-2) P is safe.
  const int N = a.p.N;
  const double P = a.p.two_star_alpha;
  const double decay = (N - 2) * P;

  std::vector<quad::MixtureComponent> peaks;
  for (const auto &z : a.placement.centers) {
    quad::MixtureComponent c;
    c.center = z;
    c.scale = 1.0 / a.lambda;
    peaks.push_back(c);
  }
  if (a.placement.m >= 2) {
    // broad component covering the ring of centers and the cutoff shoulder
    quad::MixtureComponent c;
    c.center = Vec(N);
    for (int i = 2; i < N; ++i) c.center[i] = a.placement.x_bar_pp[i - 2];
    c.scale = std::max(1.0, 2.0 * a.placement.r_bar);
    peaks.push_back(c);
  }

  auto delta_pow = [&](const Vec &y) {
    const double z = bubbles::ansatz_eval(a, y);
    double sum = 0.0;
    for (const auto &zc : a.placement.centers)
      sum += std::pow(bubbles::profile(a.p, a.c, a.lambda, dist(y, zc)), P);
    return std::pow(z, P) - sum;
  };

  IntegralResult r = numeric(delta_pow, N, a.p.alpha, decay, x, peaks, spec);
  r.value += star;
  r.est_error += 1e-14 * star_abs;
  return r;
}

} // namespace hartree::riesz
