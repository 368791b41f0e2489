#include "doctest.h"

#include "hartree/riesz.hpp"

#include <cmath>
#include <string>
#include <vector>

using namespace hartree;
using namespace hartree::riesz;

namespace {
template <class F> std::string thrown_code(F &&f) {
  try {
    f();
  } catch (const Error &e) {
    return e.code();
  }
  return {};
}

QuadratureSpec small_qmc(long nodes = 1L << 13, std::uint64_t seed = 12345) {
  QuadratureSpec q = QuadratureSpec::qmc(nodes, seed, 60.0);
  q.shifts = 6;
  return q;
}
} // namespace

//==============================================================================

TEST_CASE("convolution identity for the standard profile") {
  // (|.|^{-2s} * (1+|y|^2)^{-(N-s)})(x) = I(s)(1+|x|^2)^{-s}, N=6, s=2
  const int N = 6;
  const double s = 2.0, alpha = 2.0 * s;
  const double I = special::riesz_identity_constant(N, s);

  auto f = [N, s](const Vec &y) {
    return std::pow(1.0 + norm2(y), -(N - s));
  };
  quad::MixtureComponent origin;
  origin.center = Vec(N);
  origin.scale = 1.0;

  for (double r : {0.0, 1.0, 2.0}) {
    Vec x(N);
    x[0] = r;
    const auto got =
        numeric(f, N, alpha, 2.0 * (N - s), x, {origin}, small_qmc());
    const double expect = I * std::pow(1.0 + r * r, -s);
    CAPTURE(r);
    CAPTURE(got.value);
    CAPTURE(got.est_error);
    CHECK(std::abs(got.value - expect) <=
          std::max(3.0 * got.est_error, 5e-3 * expect));
  }
}

//==============================================================================

TEST_CASE("bubble convolution: closed form vs numeric") {
  const auto p = make_problem(6, 4.0);
  const auto sc = special::sharp_constants(p);
  bubbles::Bubble b;
  b.z = Vec(6);
  b.lambda = 1.0;

  // at the center the closed form reduces to c^{2(P-1)} I = N(N-2) = 24
  CHECK(bubble_closed(p, sc, b, b.z) == doctest::Approx(24.0).epsilon(1e-9));

  const double P = p.two_star_alpha;
  auto upow = [&](const Vec &y) {
    return std::pow(bubbles::bubble_eval(p, sc.c_bubble, b, y), P);
  };
  quad::MixtureComponent peak;
  peak.center = b.z;
  peak.scale = 1.0 / b.lambda;
  const double decay = (p.N - 2.0) * P;

  for (double r : {0.0, 2.0}) {
    Vec x(6);
    x[1] = r;
    const auto got =
        numeric(upow, p.N, p.alpha, decay, x, {peak}, small_qmc());
    const double expect = bubble_closed(p, sc, b, x);
    CAPTURE(r);
    CHECK(std::abs(got.value - expect) <=
          std::max(3.0 * got.est_error, 5e-3 * expect));
  }

  // the alternative constant reading fails the numeric oracle badly
  {
    Vec x(6);
    x[1] = 2.0;
    const auto got =
        numeric(upow, p.N, p.alpha, decay, x, {peak}, small_qmc());
    const double alt = bubble_closed(p, sc, b, x, true);
    CHECK(std::abs(alt - got.value) > 0.05 * std::abs(got.value));
  }

  // radial form agrees with the point form
  Vec x(6);
  x[2] = 0.7;
  CHECK(bubble_closed_radial(p, sc, b.lambda, 0.7) ==
        doctest::Approx(bubble_closed(p, sc, b, x)).epsilon(1e-14));
}

TEST_CASE("bubble convolution scales correctly in lambda") {
  // conv(x) = I c^P (lam/(1+lam^2 s^2))^{alpha/2}
  const auto p = make_problem(5, 3.5);
  const auto sc = special::sharp_constants(p);
  const double lam = 3.0, srad = 0.4;
  const double D = 1.0 + lam * lam * srad * srad;
  const double expect = sc.I_half_alpha *
                        std::pow(sc.c_bubble, p.two_star_alpha) *
                        std::pow(lam / D, 0.5 * p.alpha);
  CHECK(bubble_closed_radial(p, sc, lam, srad) ==
        doctest::Approx(expect).epsilon(1e-13));
}

//==============================================================================

TEST_CASE("ansatz convolution modes") {
  const auto p = make_problem(6, 4.0);
  const auto cfg1 = make_ansatz_config(p, 1, 1.0, {0, 0, 0, 0}, 2.0);
  const bubbles::Ansatz raw1 =
      bubbles::make_ansatz(p, cfg1, {1.0, 0.0, 0.0, 0.0, 0.0}, false);

  Vec x(6);
  x[0] = 1.0;
  x[1] = 0.2;

  const auto star = ansatz_conv(raw1, x, AnsatzConv::closed_star, small_qmc());
  const auto sc = special::sharp_constants(p);
  CHECK(star.value ==
        doctest::Approx(bubble_closed_radial(
                            p, sc, 2.0, dist(x, raw1.placement.centers[0])))
            .epsilon(1e-13));

  // for the raw single bubble the numeric residual Z^P - U^P vanishes
  // pointwise, so the numeric mode reproduces the closed star exactly
  const auto num1 =
      ansatz_conv(raw1, x, AnsatzConv::numeric_cutoff, small_qmc(1L << 10));
  CHECK(num1.value == doctest::Approx(star.value).epsilon(1e-10));

  // cutoff ansatz with two bubbles: the cutoff only removes mass from the
  // positive integrand, and two sampling layouts agree on how much
  const auto cfg2 = make_ansatz_config(p, 2, 1.0, {0, 0, 0, 0}, 8.0);
  const bubbles::Ansatz cut2 =
      bubbles::make_ansatz(p, cfg2, {1.0, 0.0, 0.0, 0.0, 0.0}, true);
  const auto star2 =
      ansatz_conv(cut2, x, AnsatzConv::closed_star, small_qmc());
  const auto num2a =
      ansatz_conv(cut2, x, AnsatzConv::numeric_cutoff, small_qmc());
  const auto num2b = ansatz_conv(cut2, x, AnsatzConv::numeric_cutoff,
                                 small_qmc(1L << 13, 31337));
  CHECK(num2a.value > 0.0);
  CHECK(num2a.value < star2.value);
  CHECK(std::abs(num2a.value - num2b.value) <=
        3.0 * (num2a.est_error + num2b.est_error) + 1e-6 * num2a.value);

  // at larger scale the truncated tail shrinks (30% of the star sum at
  // lambda = 8 down to a few percent at lambda = 40, roughly 1/lambda^2)
  const auto cfg3 = make_ansatz_config(p, 2, 1.0, {0, 0, 0, 0}, 40.0);
  const bubbles::Ansatz cut3 =
      bubbles::make_ansatz(p, cfg3, {1.0, 0.0, 0.0, 0.0, 0.0}, true);
  const auto star3 =
      ansatz_conv(cut3, x, AnsatzConv::closed_star, small_qmc());
  const auto num3 =
      ansatz_conv(cut3, x, AnsatzConv::numeric_cutoff, small_qmc());
  CHECK(num3.value < star3.value);
  CHECK(std::abs(num3.value - star3.value) <=
        0.05 * star3.value + 3.0 * num3.est_error);
}

//==============================================================================

TEST_CASE("riesz numeric gates") {
  auto f = [](const Vec &) { return 0.0; };
  const Vec x(6);
  CHECK(thrown_code([&] {
          numeric(f, 6, 6.0, 8.0, x, {}, small_qmc());
        }) == "AlphaOutOfRange");
  CHECK(thrown_code([&] {
          numeric(f, 2, 1.0, 8.0, Vec(2), {}, small_qmc());
        }) == "DimensionTooSmall");
  // tail integrability needs decay + alpha > N
  CHECK(thrown_code([&] {
          numeric(f, 6, 4.0, 1.5, x, {}, small_qmc());
        }) == "QuadratureFailure");
}
