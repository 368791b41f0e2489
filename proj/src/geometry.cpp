#include "hartree/geometry.hpp"

#include <cmath>

namespace hartree::geom {

namespace {
constexpr double kPi = 3.141592653589793238462643383279503;
}

Placement place_bubbles(int N, int m, double r_bar,
                        const std::vector<double> &x_bar_pp) {
  if (N < 3 || N > kMaxDim)
    fail("DimensionTooSmall", "place_bubbles needs 3 <= N <= " +
                                  std::to_string(kMaxDim));
  if (m < 1)
    fail("MTooSmall", "place_bubbles needs m >= 1");
  if (!(r_bar > 0))
    fail("NonPositiveArgument", "place_bubbles needs r_bar > 0");
  if (static_cast<int>(x_bar_pp.size()) != N - 2)
    fail("BadCenterDimension", "x_bar_pp must have N-2 = " +
                                   std::to_string(N - 2) + " entries");
  Placement pl;
  pl.m = m;
  pl.r_bar = r_bar;
  pl.x_bar_pp = x_bar_pp;
  pl.centers.reserve(static_cast<std::size_t>(m));
  for (int j = 1; j <= m; ++j) {
    const double phi = 2.0 * kPi * (j - 1) / m;
    Vec z(N);
    z[0] = r_bar * std::cos(phi);
    z[1] = r_bar * std::sin(phi);
    for (int k = 0; k < N - 2; ++k)
      z[2 + k] = x_bar_pp[static_cast<std::size_t>(k)];
    pl.centers.push_back(z);
  }
  return pl;
}

double interaction_sum(int m, double r_bar, double exponent) {
  if (m < 2)
    fail("MTooSmall", "interaction_sum needs m >= 2");
  if (!(exponent > 0))
    fail("ExponentOutOfRange", "interaction_sum needs exponent > 0");
  if (!(r_bar > 0))
    fail("NonPositiveArgument", "interaction_sum needs r_bar > 0");
  // |z_1 - z_j| = 2 r_bar sin((j-1) pi / m)
  KahanSum s;
  for (int j = 2; j <= m; ++j)
    s.add(std::pow(std::sin((j - 1) * kPi / m), -exponent));
  return std::pow(2.0 * r_bar, -exponent) * s.total();
}

int sector_index(const Vec &x, const Placement &pl) {
  const double r = std::hypot(x[0], x[1]);
  if (r == 0.0)
    return 1; // on-axis convention
  const double theta = std::atan2(x[1], x[0]);
  int best = 1;
  double best_d = 0;
  for (int j = 1; j <= pl.m; ++j) {
    const double phi = 2.0 * kPi * (j - 1) / pl.m;
    double d = std::fabs(theta - phi);
    d = std::fmod(d, 2.0 * kPi);
    if (d > kPi)
      d = 2.0 * kPi - d;
    if (j == 1 || d < best_d) { // strict <: ties stay with the smaller j
      best = j;
      best_d = d;
    }
  }
  return best;
}

//==============================================================================

CutoffSpec make_cutoff(std::vector<double> center, double delta) {
  if (center.empty())
    fail("BadCenterDimension", "cutoff center (r0, x0'') must be nonempty");
  if (!(center[0] > 0))
    fail("NonPositiveArgument", "cutoff needs r0 > 0");
  if (!(delta > 0))
    fail("NonPositiveArgument", "cutoff needs delta > 0");
  if (!(2.0 * delta < center[0]))
    fail("RhoOutOfRange",
         "cutoff support 2*delta must stay below r0 = " +
             std::to_string(center[0]) + " (transition must avoid the axis)");
  CutoffSpec c;
  c.center = std::move(center);
  c.delta = delta;
  return c;
}

double tube_distance(const CutoffSpec &c, const Vec &x) {
  const double r = std::hypot(x[0], x[1]);
  double dd = (r - c.center[0]) * (r - c.center[0]);
  for (std::size_t k = 1; k < c.center.size(); ++k) {
    const double t = x[static_cast<int>(k) + 1] - c.center[k];
    dd += t * t;
  }
  return std::sqrt(dd);
}

CutoffValue cutoff_eval(const CutoffSpec &c, const Vec &x) {
  const int N = x.dim();
  CutoffValue out;
  out.grad = Vec(N);
  const double sigma = tube_distance(c, x);
  const double delta = c.delta;
  if (sigma >= 2.0 * delta)
    return out; // value 0, derivatives 0
  if (sigma <= delta) {
    out.value = 1.0;
    return out;
  }
  const double t = (sigma - delta) / delta;
  const double q = 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
  const double qp = -30.0 * t * t * (t - 1.0) * (t - 1.0);
  const double qpp = -60.0 * t * (t - 1.0) * (2.0 * t - 1.0);

  const double r = std::hypot(x[0], x[1]);
  // grad sigma: ((r-r0)/sigma * x'/r, (x''-x0'')/sigma); |grad sigma| = 1
  const double dr = (r - c.center[0]) / sigma;
  out.grad[0] = dr * x[0] / r;
  out.grad[1] = dr * x[1] / r;
  for (std::size_t k = 1; k < c.center.size(); ++k)
    out.grad[static_cast<int>(k) + 1] =
        (x[static_cast<int>(k) + 1] - c.center[k]) / sigma;
  const double lap_sigma = (N - 2) / sigma + (r - c.center[0]) / (r * sigma);

  out.value = q;
  out.grad *= qp / delta;
  out.laplacian = qpp / (delta * delta) + (qp / delta) * lap_sigma;
  return out;
}

} // namespace hartree::geom
