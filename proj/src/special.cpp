#include "hartree/special.hpp"

#include "hartree/quadrature.hpp"

#include <cmath>

namespace hartree::special {

namespace {

constexpr double kPi = 3.141592653589793238462643383279503;

// Lanczos approximation, g = 7, 9 terms. Relative error below 1e-14 on the
// positive real axis once the x < 0.5 reflection is applied.
const double kLanczos[9] = {0.99999999999980993,  676.5203681218851,
                            -1259.1392167224028,  771.32342877765313,
                            -176.61502916214059,  12.507343278686905,
                            -0.13857109526572012, 9.9843695780195716e-6,
                            1.5056327351493116e-7};

double lanczos_series(double x) {
  // x >= 0.5; series argument is x - 1
  double a = kLanczos[0];
  const double t = x - 1.0;
  for (int i = 1; i < 9; ++i)
    a += kLanczos[i] / (t + i);
  return a;
}

} // namespace

double gamma_fn(double x) {
  if (!(x > 0))
    fail("NonPositiveArgument", "gamma_fn needs x > 0, got " +
                                    std::to_string(x));
  if (x < 0.5) {
    // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    return kPi / (std::sin(kPi * x) * gamma_fn(1.0 - x));
  }
  const double t = x - 1.0;
  const double z = t + 7.5; // g + 1/2
  return std::sqrt(2.0 * kPi) * std::pow(z, t + 0.5) * std::exp(-z) *
         lanczos_series(x);
}

double log_gamma(double x) {
  if (!(x > 0))
    fail("NonPositiveArgument", "log_gamma needs x > 0, got " +
                                    std::to_string(x));
  if (x < 0.5)
    return std::log(kPi / std::sin(kPi * x)) - log_gamma(1.0 - x);
  const double t = x - 1.0;
  const double z = t + 7.5;
  return 0.5 * std::log(2.0 * kPi) + (t + 0.5) * std::log(z) - z +
         std::log(lanczos_series(x));
}

double beta_fn(double a, double b) {
  if (!(a > 0) || !(b > 0))
    fail("NonPositiveArgument", "beta_fn needs a, b > 0");
  return std::exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b));
}

//==============================================================================

double hls_constant(int N, double alpha) {
  if (N < 1)
    fail("DimensionTooSmall", "hls_constant needs N >= 1");
  if (!(alpha > 0) || !(alpha < N))
    fail("AlphaOutOfRange", "hls_constant needs 0 < alpha < N");
  const double half = 0.5 * N;
  return std::pow(kPi, 0.5 * alpha) *
         (gamma_fn(half - 0.5 * alpha) / gamma_fn(N - 0.5 * alpha)) *
         std::pow(gamma_fn(half) / gamma_fn(static_cast<double>(N)),
                  -1.0 + alpha / N);
}

// Rayleigh quotient |grad W|_2^2 / |W|_{2^*}^2 at W = (1+r^2)^{-(N-2)/2},
// both integrals radial: |grad W|^2 = (N-2)^2 r^2 (1+r^2)^{-N} and
// W^{2^*} = (1+r^2)^{-N}. Computed by quadrature rather than transcribed.
double sobolev_constant(int N) {
  if (N < 3)
    fail("DimensionTooSmall", "sobolev_constant needs N >= 3");
  ProblemParams pr;
  pr.N = N; // local record for the radial engine; no alpha involved
  const QuadratureSpec qs = QuadratureSpec::radial(1e-12);
  const double num =
      quad::radial_integral(
          [N](double r) {
            return (N - 2.0) * (N - 2.0) * r * r * std::pow(1.0 + r * r, -N);
          },
          pr, qs)
          .value;
  const double den_int =
      quad::radial_integral(
          [N](double r) { return std::pow(1.0 + r * r, -N); }, pr, qs)
          .value;
  return num / std::pow(den_int, (N - 2.0) / N);
}

double hartree_sobolev_constant(int N, double alpha) {
  const double ts = (2.0 * N - alpha) / (N - 2);
  return sobolev_constant(N) / std::pow(hls_constant(N, alpha), 1.0 / ts);
}

double riesz_identity_constant(int N, double s) {
  if (N < 1)
    fail("DimensionTooSmall", "riesz_identity_constant needs N >= 1");
  if (!(s > 0) || !(s < 0.5 * N))
    fail("SOutOfRange", "riesz_identity_constant needs 0 < s < N/2, got s = " +
                            std::to_string(s));
  return std::pow(kPi, 0.5 * N) * gamma_fn(0.5 * N - s) /
         gamma_fn(static_cast<double>(N) - s);
}

double bubble_coefficient(int N, double alpha) {
  if (N < 3)
    fail("DimensionTooSmall", "bubble_coefficient needs N >= 3");
  if (!(alpha > 0) || !(alpha < N))
    fail("AlphaOutOfRange", "bubble_coefficient needs 0 < alpha < N");
  const double S = sobolev_constant(N);
  const double C = hls_constant(N, alpha);
  const double denom = N - alpha + 2.0;
  return std::pow(S, (N - alpha) * (2.0 - N) / (4.0 * denom)) *
         std::pow(C, (2.0 - N) / (2.0 * denom)) *
         std::pow(static_cast<double>(N) * (N - 2), 0.25 * (N - 2));
}

SharpConstants sharp_constants(const ProblemParams &p) {
  SharpConstants s;
  s.C_hls = hls_constant(p.N, p.alpha);
  s.S_sobolev = sobolev_constant(p.N);
  s.S_hartree = hartree_sobolev_constant(p.N, p.alpha);
  s.c_bubble = bubble_coefficient(p.N, p.alpha);
  s.I_half_alpha = riesz_identity_constant(p.N, 0.5 * p.alpha);
  return s;
}

} // namespace hartree::special
