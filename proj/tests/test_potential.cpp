#include "doctest.h"

#include "hartree/potential.hpp"

#include <cmath>
#include <string>
#include <vector>

using namespace hartree;
using namespace hartree::pot;

namespace {
template <class F> std::string thrown_code(F &&f) {
  try {
    f();
  } catch (const Error &e) {
    return e.code();
  }
  return {};
}

// x in R^6 with |x'| = r on the first axis and given tail
Vec embed(double r, const std::vector<double> &xpp) {
  Vec x(2 + static_cast<int>(xpp.size()));
  x[0] = r;
  for (std::size_t k = 0; k < xpp.size(); ++k)
    x[2 + static_cast<int>(k)] = xpp[k];
  return x;
}
} // namespace

//==============================================================================

TEST_CASE("quadratic cap, transition, plateau") {
  const PotentialModel K =
      make_quadratic_model(6, 1.0, {0, 0, 0, 0}, 0.1, 0.5);
  CHECK(K.floor == doctest::Approx(1.0 - 0.1 * 0.25).epsilon(1e-15));
  CHECK(!K.is_one());
  CHECK(K.center_w().size() == 5);
  CHECK(K.center_w()[0] == 1.0);

  // max at the circle: K = 1 exactly on r = r0, x'' = x0''
  Vec on(6);
  on[0] = std::sqrt(0.5);
  on[1] = std::sqrt(0.5);
  CHECK(potential_value(K, on) == doctest::Approx(1.0).epsilon(1e-14));

  // pure quadratic branch: K = 1 - a s^2 for s <= rho_t
  CHECK(potential_value(K, embed(1.3, {0, 0, 0, 0})) ==
        doctest::Approx(1.0 - 0.1 * 0.09).epsilon(1e-13));
  CHECK(potential_value(K, embed(1.0, {0.2, 0, 0, 0})) ==
        doctest::Approx(1.0 - 0.1 * 0.04).epsilon(1e-13));

  // plateau: s >= 2 rho_t
  CHECK(potential_value(K, embed(2.5, {0, 0, 0, 0})) ==
        doctest::Approx(K.floor).epsilon(1e-14));
  CHECK(potential_value(K, embed(1.0, {3, 0, 0, 0})) ==
        doctest::Approx(K.floor).epsilon(1e-14));

  // seams are continuous
  for (double s : {0.5, 1.0}) {
    const double in = potential_value(K, embed(1.0 + s - 1e-9, {0, 0, 0, 0}));
    const double out = potential_value(K, embed(1.0 + s + 1e-9, {0, 0, 0, 0}));
    CHECK(std::abs(in - out) < 1e-7);
  }

  // strict maximum and positivity (the transition undershoots the floor a
  // little but must stay positive)
  double lo = 2.0;
  for (double s = 0.0; s <= 1.4; s += 0.01) {
    const double v = potential_value(K, embed(1.0 + s, {0, 0, 0, 0}));
    if (s > 0.01)
      CHECK(v < 1.0);
    CHECK(v > 0.0);
    lo = std::min(lo, v);
  }
  CHECK(lo < K.floor * (1 + 1e-12)); // the dip exists
  CHECK(lo > 0.5);
}

TEST_CASE("cancellation-free 1 - K") {
  const PotentialModel K =
      make_quadratic_model(6, 1.0, {0, 0, 0, 0}, 0.1, 0.5);
  // at s = 1e-9 the direct subtraction rounds to zero; the dedicated form
  // returns a s^2 = 1e-19 exactly
  const Vec x = embed(1.0 + 1e-9, {0, 0, 0, 0});
  CHECK(one_minus_value(K, x) ==
        doctest::Approx(1e-19).epsilon(1e-6).scale(0.0));
  // consistency with 1 - value where that is well-conditioned
  const Vec y = embed(1.35, {0.1, 0, 0, 0});
  CHECK(one_minus_value(K, y) ==
        doctest::Approx(1.0 - potential_value(K, y)).epsilon(1e-10));
  const PotentialModel one = make_constant_one(6, 1.0, {0, 0, 0, 0});
  CHECK(one.is_one());
  CHECK(one_minus_value(one, y) == 0.0);
  CHECK(potential_value(one, y) == 1.0);
}

//==============================================================================

TEST_CASE("potential derivatives vs finite differences") {
  const PotentialModel K =
      make_quadratic_model(6, 1.2, {0.1, -0.2, 0, 0.3}, 0.08, 0.6);
  const double h = 1e-6;

  // probe the cap, the transition, and the full-x gradient
  for (const std::vector<double> &w :
       {std::vector<double>{1.4, 0.2, -0.2, 0.1, 0.3},
        std::vector<double>{1.9, 0.1, -0.4, 0.0, 0.5},
        std::vector<double>{1.2, 0.1, -0.2, 0.0, 0.3}}) {
    const std::vector<double> g = grad_w(K, w);
    const std::vector<double> H = hessian_w(K, w);
    for (int i = 0; i < 5; ++i) {
      std::vector<double> wp = w, wm = w;
      wp[static_cast<std::size_t>(i)] += h;
      wm[static_cast<std::size_t>(i)] -= h;
      CHECK(g[static_cast<std::size_t>(i)] ==
            doctest::Approx((value_w(K, wp) - value_w(K, wm)) / (2 * h))
                .epsilon(1e-5)
                .scale(1e-4));
      // hessian row i against the gradient difference quotient
      const std::vector<double> gp = grad_w(K, wp);
      const std::vector<double> gm = grad_w(K, wm);
      for (int j = 0; j < 5; ++j)
        CHECK(H[static_cast<std::size_t>(i * 5 + j)] ==
              doctest::Approx((gp[static_cast<std::size_t>(j)] -
                               gm[static_cast<std::size_t>(j)]) /
                              (2 * h))
                  .epsilon(1e-4)
                  .scale(1e-3));
    }
  }

  // full-x gradient through r = |(x1,x2)|
  Vec x(6);
  x[0] = 0.9;
  x[1] = 0.7;
  x[2] = 0.15;
  x[5] = 0.35;
  const Vec gx = potential_grad_x(K, x);
  for (int i = 0; i < 6; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    CHECK(gx[i] == doctest::Approx((potential_value(K, xp) -
                                    potential_value(K, xm)) /
                                   (2 * h))
                       .epsilon(1e-5)
                       .scale(1e-4));
  }

  // flat partial laplacian on the cap equals -2 a (N-1)
  const PotentialValue pv = potential_eval(K, embed(1.3, {0.1, -0.2, 0, 0.3}));
  CHECK(pv.partial_laplacian ==
        doctest::Approx(-2.0 * 0.08 * 5.0).epsilon(1e-10));
}

//==============================================================================

TEST_CASE("hessian structure at the center and degree sign") {
  const PotentialModel K =
      make_quadratic_model(6, 1.0, {0, 0, 0, 0}, 0.1, 0.5);
  const std::vector<double> H = hessian_w(K, K.center_w());
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const double want = (i == j) ? -0.2 : 0.0;
      CHECK(H[static_cast<std::size_t>(i * 5 + j)] ==
            doctest::Approx(want).epsilon(1e-6).scale(1e-6));
    }
  // det(-2a I) in odd dimension N-1 = 5 is negative
  CHECK(degree_sign(K) == -1);
  const PotentialModel K5 = make_quadratic_model(5, 1.0, {0, 0, 0}, 0.1, 0.5);
  CHECK(degree_sign(K5) == 1);
}

TEST_CASE("model gates and default curvature") {
  CHECK(default_curvature(6) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(default_curvature(5) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(thrown_code([] {
          make_quadratic_model(6, 1.0, {0, 0, 0, 0}, 0.0, 0.5);
        }) == "NonPositiveArgument");
  CHECK(thrown_code([] {
          make_quadratic_model(6, 1.0, {0, 0, 0, 0}, 0.1, 0.0);
        }) == "NonPositiveArgument");
  CHECK(thrown_code([] {
          make_quadratic_model(6, 1.0, {0, 0, 0, 0}, 4.1, 0.5);
        }) == "CurvatureTooLarge");
  CHECK(thrown_code([] {
          make_quadratic_model(6, -1.0, {0, 0, 0, 0}, 0.1, 0.5);
        }) == "NonPositiveArgument");
  CHECK(thrown_code([] {
          make_quadratic_model(6, 1.0, {0, 0}, 0.1, 0.5);
        }) == "BadCenterDimension");
}

//==============================================================================

TEST_CASE("structural assumption verification") {
  const PotentialModel K =
      make_quadratic_model(6, 1.0, {0, 0, 0, 0}, 0.1, 0.5);
  const auto good = verify_assumptions(
      [&](const std::vector<double> &w) { return value_w(K, w); },
      K.center_w(), 0.01);
  CHECK(good.critical_point);
  CHECK(good.negative_laplacian);
  CHECK(good.positive_on_ball);
  CHECK(good.all());
  CHECK(good.laplacian == doctest::Approx(-1.0).epsilon(1e-4));

  // a shifted probe center is not a critical point
  std::vector<double> off = K.center_w();
  off[0] += 0.2;
  const auto bad = verify_assumptions(
      [&](const std::vector<double> &w) { return value_w(K, w); }, off, 0.01);
  CHECK(!bad.critical_point);
  CHECK(!bad.all());
}
