#include "doctest.h"

#include "hartree/bubbles.hpp"
#include "hartree/special.hpp"

#include <cmath>
#include <vector>

using namespace hartree;
using namespace hartree::bubbles;

namespace {

Vec point6(double a, double b, double c, double d, double e, double f) {
  Vec x(6);
  x[0] = a;
  x[1] = b;
  x[2] = c;
  x[3] = d;
  x[4] = e;
  x[5] = f;
  return x;
}

} // namespace

//==============================================================================

TEST_CASE("bubble profile: pointwise equation") {
  const auto p = make_problem(6, 4.0);
  const auto sc = special::sharp_constants(p);
  Bubble b;
  b.z = point6(0.3, -0.2, 0.0, 0.5, 0.0, 0.1);
  b.lambda = 2.5;

  // Delta U = -N(N-2) c^{1-p} U^p with p = (N+2)/(N-2) = 2
  const double pcrit = (p.N + 2.0) / (p.N - 2.0);
  for (const Vec &x :
       {point6(0, 0, 0, 0, 0, 0), point6(1, 1, 0, 0, 0, 0),
        point6(0.3, -0.2, 0, 0.5, 0, 0.1), point6(-2, 0.4, 1, 0, 3, 0)}) {
    const double u = bubble_eval(p, sc.c_bubble, b, x);
    const double lap = bubble_laplacian(p, sc.c_bubble, b, x);
    const double rhs = -p.N * (p.N - 2.0) *
                       std::pow(sc.c_bubble, 1.0 - pcrit) *
                       std::pow(u, pcrit);
    CHECK(lap == doctest::Approx(rhs).epsilon(1e-12));
  }

  // scale normalization: U(z) = c lambda^{(N-2)/2}
  CHECK(bubble_eval(p, sc.c_bubble, b, b.z) ==
        doctest::Approx(sc.c_bubble * std::pow(b.lambda, 2.0)).epsilon(1e-14));
}

TEST_CASE("bubble derivatives vs finite differences") {
  const auto p = make_problem(6, 4.0);
  const double c = 2.0; // any coefficient; derivatives are linear in c
  Bubble b;
  b.z = point6(0.1, 0.0, -0.3, 0.0, 0.2, 0.0);
  b.lambda = 1.7;
  const Vec x = point6(0.7, -0.4, 0.1, 0.3, 0.0, -0.2);
  const double h = 1e-6;

  const Vec g = bubble_grad(p, c, b, x);
  double lap_fd = 0;
  for (int i = 0; i < 6; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double up = bubble_eval(p, c, b, xp);
    const double um = bubble_eval(p, c, b, xm);
    CHECK(g[i] == doctest::Approx((up - um) / (2 * h)).epsilon(1e-7));
    lap_fd += (up + um - 2 * bubble_eval(p, c, b, x)) / (h * h);
  }
  CHECK(bubble_laplacian(p, c, b, x) ==
        doctest::Approx(lap_fd).epsilon(1e-3));

  const BubblePartials bp = bubble_partials(p, c, b, x);
  {
    Bubble bp1 = b, bm1 = b;
    bp1.lambda += h;
    bm1.lambda -= h;
    const double d_fd =
        (bubble_eval(p, c, bp1, x) - bubble_eval(p, c, bm1, x)) / (2 * h);
    CHECK(bp.d_lambda == doctest::Approx(d_fd).epsilon(1e-7));
  }
  // moving the center is minus the x-gradient
  for (int i = 0; i < 6; ++i)
    CHECK(bp.d_center[i] == doctest::Approx(-g[i]).epsilon(1e-13));

  // scale-derivative bound |dU/dlambda| <= (nu/lambda) U
  for (const Vec &y :
       {x, point6(0, 0, 0, 0, 0, 0), point6(3, 1, 0, -2, 0, 5)}) {
    const double u = bubble_eval(p, c, b, y);
    const double dl = bubble_partials(p, c, b, y).d_lambda;
    CHECK(std::abs(dl) <= (p.nu() / b.lambda) * u * (1.0 + 1e-12));
  }
}

TEST_CASE("radial profile forms match the point evaluations") {
  const auto p = make_problem(5, 3.5);
  const double c = 1.3, lambda = 2.2;
  Bubble b;
  b.z = Vec(5);
  b.lambda = lambda;
  const double h = 1e-6;
  for (double s : {0.0, 0.2, 1.0, 4.0}) {
    Vec x(5);
    x[1] = s;
    CHECK(profile(p, c, lambda, s) ==
          doctest::Approx(bubble_eval(p, c, b, x)).epsilon(1e-14));
    if (s > 0) {
      const double ds_fd =
          (profile(p, c, lambda, s + h) - profile(p, c, lambda, s - h)) /
          (2 * h);
      CHECK(profile_ds(p, c, lambda, s) ==
            doctest::Approx(ds_fd).epsilon(1e-7));
    }
    const double dl_fd =
        (profile(p, c, lambda + h, s) - profile(p, c, lambda - h, s)) /
        (2 * h);
    CHECK(profile_dlambda(p, c, lambda, s) ==
          doctest::Approx(dl_fd).epsilon(1e-7));
    const double dls_fd = (profile_dlambda(p, c, lambda, s + h) -
                           profile_dlambda(p, c, lambda, s - h)) /
                          (2 * h);
    CHECK(profile_dlambda_ds(p, c, lambda, s) ==
          doctest::Approx(dls_fd).epsilon(1e-6).scale(1.0));
  }
}

//==============================================================================

TEST_CASE("ansatz: cutoff composition and derivatives") {
  const auto p = make_problem(6, 4.0);
  const auto cfg = make_ansatz_config(p, 3, 1.0, {0, 0, 0, 0}, 6.0);
  const Ansatz a = make_ansatz(p, cfg, {1.0, 0.0, 0.0, 0.0, 0.0}, true);
  REQUIRE(a.placement.centers.size() == 3);
  CHECK(a.use_cutoff);
  CHECK(a.c == doctest::Approx(2.1550454655019987).epsilon(1e-10));

  // at a bubble center the cutoff is 1, so Z = sum of bubbles there
  const Vec z1 = a.placement.centers[0];
  CHECK(ansatz_eval(a, z1) == doctest::Approx(raw_eval(a, z1)).epsilon(1e-14));

  // far outside the tube the ansatz vanishes but the raw sum does not
  Vec far(6);
  far[0] = 3.0;
  far[2] = 2.0;
  CHECK(ansatz_eval(a, far) == 0.0);
  CHECK(raw_eval(a, far) > 0.0);

  // gradient and laplacian vs finite differences inside the transition shell
  Vec x(6);
  x[0] = 1.15;
  x[1] = 0.05;
  x[3] = 0.04;
  const double h = 1e-5;
  const Vec g = ansatz_grad(a, x);
  double lap_fd = 0;
  const double u0 = ansatz_eval(a, x);
  for (int i = 0; i < 6; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double up = ansatz_eval(a, xp);
    const double um = ansatz_eval(a, xm);
    CHECK(g[i] ==
          doctest::Approx((up - um) / (2 * h)).epsilon(1e-5).scale(1e-3));
    lap_fd += (up + um - 2 * u0) / (h * h);
  }
  CHECK(ansatz_laplacian(a, x) ==
        doctest::Approx(lap_fd).epsilon(1e-3).scale(1e-3));
}

TEST_CASE("ansatz parameter derivatives") {
  const auto p = make_problem(6, 4.0);
  const auto cfg = make_ansatz_config(p, 2, 1.0, {0.1, 0, 0, 0}, 4.0);
  const Ansatz a = make_ansatz(p, cfg, {1.0, 0.1, 0.0, 0.0, 0.0}, false);
  Vec x(6);
  x[0] = 0.8;
  x[1] = 0.3;
  x[2] = 0.2;
  const double h = 1e-6;

  const AnsatzPartials ap = ansatz_partials(a, x);

  // lambda derivative (raw ansatz: equals raw_dlambda)
  {
    Ansatz ap1 = a, am1 = a;
    ap1.lambda += h;
    am1.lambda -= h;
    const double fd =
        (ansatz_eval(ap1, x) - ansatz_eval(am1, x)) / (2 * h);
    CHECK(ap.d_lambda == doctest::Approx(fd).epsilon(1e-6));
    CHECK(ap.d_lambda == doctest::Approx(raw_dlambda(a, x)).epsilon(1e-13));
  }
  // ring radius derivative: all centers move radially together
  {
    auto build = [&](double rb) {
      const auto cfg2 = make_ansatz_config(p, 2, rb, {0.1, 0, 0, 0}, 4.0);
      return make_ansatz(p, cfg2, {1.0, 0.1, 0.0, 0.0, 0.0}, false);
    };
    const double fd =
        (ansatz_eval(build(1.0 + h), x) - ansatz_eval(build(1.0 - h), x)) /
        (2 * h);
    CHECK(ap.d_rbar == doctest::Approx(fd).epsilon(1e-6));
  }
  // common tail translation
  REQUIRE(ap.d_xpp.size() == 4);
  for (int k = 0; k < 4; ++k) {
    auto build = [&](double delta) {
      std::vector<double> xpp = {0.1, 0, 0, 0};
      xpp[static_cast<std::size_t>(k)] += delta;
      const auto cfg2 = make_ansatz_config(p, 2, 1.0, xpp, 4.0);
      return make_ansatz(p, cfg2, {1.0, 0.1, 0.0, 0.0, 0.0}, false);
    };
    const double fd =
        (ansatz_eval(build(h), x) - ansatz_eval(build(-h), x)) / (2 * h);
    CHECK(ap.d_xpp[static_cast<std::size_t>(k)] ==
          doctest::Approx(fd).epsilon(1e-5).scale(1e-2));
  }
}
