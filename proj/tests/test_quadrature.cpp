#include "doctest.h"

#include "hartree/quadrature.hpp"

#include <cmath>
#include <string>
#include <vector>

using namespace hartree;
using namespace hartree::quad;

namespace {
template <class F> std::string thrown_code(F &&f) {
  try {
    f();
  } catch (const Error &e) {
    return e.code();
  }
  return {};
}
constexpr double kPi = 3.141592653589793238462643383279503;

QuadratureSpec small_qmc(long nodes = 1L << 13, int shifts = 6) {
  QuadratureSpec q = QuadratureSpec::qmc(nodes, 12345, 60.0);
  q.shifts = shifts;
  return q;
}

// |observed - exact| within max(3 est, rel floor)
void check_close(const IntegralResult &r, double exact, double rel_floor) {
  CAPTURE(r.value);
  CAPTURE(r.est_error);
  CAPTURE(exact);
  CHECK(std::abs(r.value - exact) <=
        std::max(3.0 * r.est_error, rel_floor * std::abs(exact)));
}
} // namespace

//==============================================================================

TEST_CASE("sphere areas and ball volumes") {
  // |S^5| = pi^3, |S^4| = 8 pi^2 / 3
  CHECK(sphere_area(6) == doctest::Approx(kPi * kPi * kPi).epsilon(1e-14));
  CHECK(sphere_area(5) ==
        doctest::Approx(8.0 * kPi * kPi / 3.0).epsilon(1e-14));
  CHECK(sphere_area(2) == doctest::Approx(2.0 * kPi).epsilon(1e-14));
  // vol B^6_R = pi^3 R^6/6, vol B^5_R = 8 pi^2 R^5/15
  CHECK(ball_volume(6, 2.0) ==
        doctest::Approx(kPi * kPi * kPi * 64.0 / 6.0).epsilon(1e-14));
  CHECK(ball_volume(5, 1.0) ==
        doctest::Approx(8.0 * kPi * kPi / 15.0).epsilon(1e-14));
}

TEST_CASE("adaptive 1-D panels") {
  const auto r = adaptive_gk([](double x) { return x * x; }, 0.0, 1.0, 1e-12,
                             0.0, 4096);
  CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  const auto s =
      adaptive_gk([](double x) { return std::sin(x); }, 0.0, kPi, 1e-12, 0.0,
                  4096);
  CHECK(s.value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(thrown_code([] {
          adaptive_gk([](double) { return std::nan(""); }, 0.0, 1.0, 1e-8,
                      0.0, 64);
        }) == "QuadratureFailure");
}

TEST_CASE("radial engine: gaussian mass in N dimensions") {
  const QuadratureSpec rs = QuadratureSpec::radial(1e-12);
  const auto p6 = make_problem(6, 4.0);
  const auto g6 = radial_integral([](double r) { return std::exp(-r * r); },
                                  p6, rs);
  CHECK(g6.value == doctest::Approx(kPi * kPi * kPi).epsilon(1e-11));

  const auto p5 = make_problem(5, 3.5);
  const auto g5 = radial_integral([](double r) { return std::exp(-r * r); },
                                  p5, rs);
  CHECK(g5.value == doctest::Approx(std::pow(kPi, 2.5)).epsilon(1e-11));
}

//==============================================================================

TEST_CASE("two-center engine: gaussian product") {
  // int exp(-|x-z1|^2 - |x-z2|^2) dx = (pi/2)^{N/2} exp(-d^2/2)
  const auto p = make_problem(6, 4.0);
  Vec z1(6), z2(6);
  z1[0] = -0.75;
  z2[0] = 0.75; // d = 1.5
  const auto r = two_center_integral(
      [](double s1, double s2) { return std::exp(-s1 * s1 - s2 * s2); }, z1,
      z2, p, QuadratureSpec::two_center(1e-10));
  const double exact = std::pow(0.5 * kPi, 3.0) * std::exp(-1.125);
  CHECK(r.value == doctest::Approx(exact).epsilon(1e-8));

  CHECK(thrown_code([&] {
          two_center_integral(
              [](double, double) { return 1.0; }, z1, z1, p,
              QuadratureSpec::two_center());
        }) == "CoincidentCenters");
}

//==============================================================================

TEST_CASE("qmc ball engine: compact polynomial") {
  // int_{B_3} (1 - r^2/9)^3 dx in R^6 = pi^3 3^6 / 120
  const auto p = make_problem(6, 4.0);
  (void)p;
  const Vec c(6);
  const auto r = qmc_integral(
      [](const Vec &x) {
        const double t = norm2(x) / 9.0;
        return t >= 1.0 ? 0.0 : std::pow(1.0 - t, 3);
      },
      c, 3.0, small_qmc(1L << 14));
  const double exact = kPi * kPi * kPi * 729.0 / 120.0;
  check_close(r, exact, 2e-3);
}

TEST_CASE("qmc driver: cube means and determinism") {
  const QuadratureSpec q = small_qmc(1L << 12);
  const auto m0 = qmc_mean(2, q, [](const double *u) { return u[0]; });
  CHECK(m0.value == doctest::Approx(0.5).epsilon(1e-4));
  const auto m01 =
      qmc_mean(2, q, [](const double *u) { return u[0] * u[1]; });
  CHECK(m01.value == doctest::Approx(0.25).epsilon(1e-3));

  // byte determinism: same spec twice, and across thread caps
  auto run = [&] {
    return qmc_mean(3, q, [](const double *u) {
             return std::exp(-u[0]) * std::cos(u[1] + u[2]);
           })
        .value;
  };
  const double a = run();
  const double b = run();
  CHECK(a == b);
  set_thread_cap(1);
  const double c1 = run();
  set_thread_cap(4);
  const double c4 = run();
  set_thread_cap(0);
  CHECK(c1 == a);
  CHECK(c4 == a);
}

TEST_CASE("unit_direction is normalized and deterministic") {
  const double u[6] = {0.137, 0.522, 0.891, 0.274, 0.66, 0.05};
  double d1[5], d2[5];
  unit_direction(u, 5, d1);
  unit_direction(u, 5, d2);
  double n2 = 0;
  for (int i = 0; i < 5; ++i) {
    n2 += d1[i] * d1[i];
    CHECK(d1[i] == d2[i]);
  }
  CHECK(n2 == doctest::Approx(1.0).epsilon(1e-12));
}

//==============================================================================

TEST_CASE("mixture engine absorbs a kernel singularity") {
  // int_{R^6} |x|^{-4} exp(-|x|^2) dx = pi^3/2
  MixtureComponent c;
  c.center = Vec(6);
  c.scale = 1.0;
  c.kernel_pow = 4.0;
  c.radius = 60.0;
  const auto r = mixture_integral(
      [](const Vec &y) {
        const double d = norm(y);
        if (d < 1e-150)
          return 0.0;
        return std::pow(d, -4.0) * std::exp(-d * d);
      },
      {c}, 6, small_qmc(1L << 14));
  check_close(r, 0.5 * kPi * kPi * kPi, 5e-3);

  CHECK(thrown_code([&] {
          mixture_integral([](const Vec &) { return 0.0; }, {}, 6,
                           small_qmc());
        }) == "QuadratureFailure");
  MixtureComponent bad = c;
  bad.kernel_pow = 6.0;
  CHECK(thrown_code([&] {
          mixture_integral([](const Vec &) { return 0.0; }, {bad}, 6,
                           small_qmc());
        }) == "ExponentOutOfRange");
}

//==============================================================================

TEST_CASE("tube engine: solid torus volume") {
  // D_rho = {|(r, x'') - (r0, x0'')| <= rho}: volume 2 pi r0 vol_{N-1}(rho)
  const auto p = make_problem(6, 4.0);
  const std::vector<double> w0 = {1.0, 0.0, 0.0, 0.0, 0.0};
  const double rho = 0.35;
  const auto r = tube_integral([](const Vec &) { return 1.0; }, w0, rho, p,
                               small_qmc(1L << 14));
  const double exact = 2.0 * kPi * 1.0 * ball_volume(5, rho);
  check_close(r, exact, 2e-3);

  // an extra bubble-centered component changes the density, not the value
  MixtureComponent extra;
  extra.center = Vec(6);
  extra.center[0] = 1.0; // embedding of w0 at angle 0
  extra.scale = 0.05;
  const auto r2 = tube_integral([](const Vec &) { return 1.0; }, w0, rho, p,
                                small_qmc(1L << 14), {extra});
  check_close(r2, exact, 5e-3);

  CHECK(thrown_code([&] {
          tube_integral([](const Vec &) { return 1.0; },
                        {1.0, 0.0, 0.0, 0.0}, rho, p, small_qmc());
        }) == "BadCenterDimension");
  CHECK(thrown_code([&] {
          tube_integral([](const Vec &) { return 1.0; }, w0, 1.5, p,
                        small_qmc());
        }) == "RhoOutOfRange");
}

TEST_CASE("tube pair engine: separable gaussian kernel") {
  // F(x,y) = exp(-|x-y|^2): the y-integral is pi^3/2 for every x, so the
  // double integral is vol(D_rho) pi^3/2
  const auto p = make_problem(6, 4.0);
  const std::vector<double> w0 = {1.0, 0.0, 0.0, 0.0, 0.0};
  const double rho = 0.3;
  Vec peak(6);
  peak[0] = 1.0;
  const auto r = tube_pair_integral(
      [](const Vec &x, const Vec &y) { return std::exp(-dist(x, y) * dist(x, y)); },
      w0, rho, 4.0, {peak}, 0.25, p, small_qmc(1L << 14));
  const double exact =
      2.0 * kPi * ball_volume(5, rho) * 0.5 * kPi * kPi * kPi;
  check_close(r, exact, 8e-3);

  CHECK(thrown_code([&] {
          tube_pair_integral(
              [](const Vec &, const Vec &) { return 1.0; }, w0, rho, 6.0, {},
              0.25, p, small_qmc());
        }) == "ExponentOutOfRange");
  CHECK(thrown_code([&] {
          tube_pair_integral(
              [](const Vec &, const Vec &) { return 1.0; },
              {1.0, 0.0, 0.0, 0.0}, rho, 4.0, {}, 0.25, p, small_qmc());
        }) == "BadCenterDimension");
}
