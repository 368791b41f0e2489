#include "hartree/potential.hpp"

#include <algorithm>
#include <cmath>

namespace hartree::pot {

namespace {

double smoothq(double t) { // 1 -> 0 on [0,1], C^2 at both ends
  return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}
double smoothq_d(double t) { return -30.0 * t * t * (t - 1.0) * (t - 1.0); }
double smoothq_dd(double t) {
  return -60.0 * t * (t - 1.0) * (2.0 * t - 1.0);
}

// Radial profile f(s) and derivatives.
struct Radial {
  double f, fp, fpp;
};

Radial radial_profile(const PotentialModel &K, double s) {
  Radial r{1.0, 0.0, 0.0};
  if (K.is_one())
    return r;
  const double a = K.a, rt = K.rho_t;
  if (s <= rt) {
    r.f = 1.0 - a * s * s;
    r.fp = -2.0 * a * s;
    r.fpp = -2.0 * a;
    return r;
  }
  if (s >= 2.0 * rt) {
    r.f = K.floor;
    r.fp = 0.0;
    r.fpp = 0.0;
    return r;
  }
  const double t = (s - rt) / rt;
  const double q = smoothq(t), qp = smoothq_d(t), qpp = smoothq_dd(t);
  const double g = rt * rt - s * s; // cap minus floor, continued
  r.f = K.floor + a * g * q;
  r.fp = a * (-2.0 * s * q + g * qp / rt);
  r.fpp = a * (-2.0 * q - 4.0 * s * qp / rt + g * qpp / (rt * rt));
  return r;
}

double tube_s(const PotentialModel &K, const Vec &x) {
  const double r = std::hypot(x[0], x[1]);
  double dd = (r - K.r0) * (r - K.r0);
  for (std::size_t k = 0; k < K.x0_pp.size(); ++k) {
    const double t = x[static_cast<int>(k) + 2] - K.x0_pp[k];
    dd += t * t;
  }
  return std::sqrt(dd);
}

double flat_s(const PotentialModel &K, const std::vector<double> &w) {
  double dd = (w[0] - K.r0) * (w[0] - K.r0);
  for (std::size_t k = 0; k < K.x0_pp.size(); ++k) {
    const double t = w[k + 1] - K.x0_pp[k];
    dd += t * t;
  }
  return std::sqrt(dd);
}

} // namespace

double default_curvature(int N) { return 0.5 / (N - 1); }

PotentialModel make_quadratic_model(int N, double r0,
                                    std::vector<double> x0_pp, double a,
                                    double rho_t) {
  if (N < 3 || N > kMaxDim)
    fail("DimensionTooSmall", "potential model needs 3 <= N <= " +
                                  std::to_string(kMaxDim));
  if (!(r0 > 0))
    fail("NonPositiveArgument", "potential model needs r0 > 0");
  if (static_cast<int>(x0_pp.size()) != N - 2)
    fail("BadCenterDimension", "x0_pp must have N-2 entries");
  if (!(a > 0))
    fail("NonPositiveArgument", "quadratic model needs a > 0");
  if (!(rho_t > 0))
    fail("NonPositiveArgument", "quadratic model needs rho_t > 0");
  if (!(a * rho_t * rho_t < 1.0))
    fail("CurvatureTooLarge", "need a*rho_t^2 < 1, got " +
                                  std::to_string(a * rho_t * rho_t));
  PotentialModel K;
  K.N = N;
  K.r0 = r0;
  K.x0_pp = std::move(x0_pp);
  K.a = a;
  K.rho_t = rho_t;
  K.floor = 1.0 - a * rho_t * rho_t;

  // the transition dips below the floor before leveling; insist it stays
  // positive (sampled minimum over the shell, then a local refinement)
  double smin = 1.0, fmin = 1.0;
  for (int i = 0; i <= 2000; ++i) {
    const double s = rho_t * (1.0 + i / 2000.0);
    const double f = radial_profile(K, s).f;
    if (f < fmin) {
      fmin = f;
      smin = s;
    }
  }
  for (double h = rho_t / 2000.0; h > 1e-14 * rho_t; h /= 2) {
    const double fl = radial_profile(K, std::max(rho_t, smin - h)).f;
    const double fr = radial_profile(K, std::min(2 * rho_t, smin + h)).f;
    if (fl < fmin) {
      fmin = fl;
      smin = std::max(rho_t, smin - h);
    } else if (fr < fmin) {
      fmin = fr;
      smin = std::min(2 * rho_t, smin + h);
    }
  }
  if (!(fmin > 0))
    fail("CurvatureTooLarge",
         "transition undershoots zero (min K = " + std::to_string(fmin) +
             "); reduce a*rho_t^2");
  return K;
}

PotentialModel make_constant_one(int N, double r0, std::vector<double> x0_pp) {
  if (N < 3 || N > kMaxDim)
    fail("DimensionTooSmall", "potential model needs 3 <= N <= " +
                                  std::to_string(kMaxDim));
  if (static_cast<int>(x0_pp.size()) != N - 2)
    fail("BadCenterDimension", "x0_pp must have N-2 entries");
  PotentialModel K;
  K.N = N;
  K.r0 = r0;
  K.x0_pp = std::move(x0_pp);
  K.a = 0.0;
  K.rho_t = 1.0;
  K.floor = 1.0;
  return K;
}

double potential_value(const PotentialModel &K, const Vec &x) {
  if (K.is_one())
    return 1.0;
  return radial_profile(K, tube_s(K, x)).f;
}

double one_minus_value(const PotentialModel &K, const Vec &x) {
  if (K.is_one())
    return 0.0;
  const double s = tube_s(K, x);
  const double a = K.a, rt = K.rho_t;
  if (s <= rt)
    return a * s * s;
  if (s >= 2.0 * rt)
    return a * rt * rt;
  const double t = (s - rt) / rt;
  const double q = smoothq(t);
  return a * (rt * rt * (1.0 - q) + s * s * q);
}

PotentialValue potential_eval(const PotentialModel &K, const Vec &x) {
  const int N = K.N;
  PotentialValue out;
  out.grad_xpp.assign(static_cast<std::size_t>(N - 2), 0.0);
  if (K.is_one()) {
    out.value = 1.0;
    return out;
  }
  const double s = tube_s(K, x);
  const Radial rp = radial_profile(K, s);
  out.value = rp.f;
  if (s < 1e-12 * K.rho_t) {
    out.partial_laplacian = (N - 1) * rp.fpp; // limit f'' + (N-2) f'/s
    return out;
  }
  const double r = std::hypot(x[0], x[1]);
  out.grad_r = rp.fp * (r - K.r0) / s;
  for (std::size_t k = 0; k < K.x0_pp.size(); ++k)
    out.grad_xpp[k] = rp.fp * (x[static_cast<int>(k) + 2] - K.x0_pp[k]) / s;
  out.partial_laplacian = rp.fpp + (N - 2) * rp.fp / s;
  return out;
}

Vec potential_grad_x(const PotentialModel &K, const Vec &x) {
  const int N = x.dim();
  Vec g(N);
  if (K.is_one())
    return g;
  const PotentialValue pv = potential_eval(K, x);
  const double r = std::hypot(x[0], x[1]);
  if (r > 0) {
    g[0] = pv.grad_r * x[0] / r;
    g[1] = pv.grad_r * x[1] / r;
  }
  for (std::size_t k = 0; k < pv.grad_xpp.size(); ++k)
    g[static_cast<int>(k) + 2] = pv.grad_xpp[k];
  return g;
}

double value_w(const PotentialModel &K, const std::vector<double> &w) {
  if (K.is_one())
    return 1.0;
  return radial_profile(K, flat_s(K, w)).f;
}

std::vector<double> grad_w(const PotentialModel &K,
                           const std::vector<double> &w) {
  const std::size_t n = w.size();
  std::vector<double> g(n, 0.0);
  if (K.is_one())
    return g;
  const double s = flat_s(K, w);
  if (s < 1e-14)
    return g;
  const double fp = radial_profile(K, s).fp;
  const std::vector<double> w0 = K.center_w();
  for (std::size_t i = 0; i < n; ++i)
    g[i] = fp * (w[i] - w0[i]) / s;
  return g;
}

std::vector<double> hessian_w(const PotentialModel &K,
                              const std::vector<double> &w) {
  const std::size_t n = w.size();
  std::vector<double> H(n * n, 0.0);
  if (K.is_one())
    return H;
  const double s = flat_s(K, w);
  const Radial rp = radial_profile(K, s);
  const std::vector<double> w0 = K.center_w();
  if (s < 1e-14) {
    for (std::size_t i = 0; i < n; ++i)
      H[i * n + i] = rp.fpp;
    return H;
  }
  // H = f'' e e^T + (f'/s)(I - e e^T), e = (w - w0)/s
  for (std::size_t i = 0; i < n; ++i) {
    const double ei = (w[i] - w0[i]) / s;
    for (std::size_t j = 0; j < n; ++j) {
      const double ej = (w[j] - w0[j]) / s;
      H[i * n + j] = rp.fpp * ei * ej + rp.fp / s * ((i == j ? 1.0 : 0.0) - ei * ej);
    }
  }
  return H;
}

int degree_sign(const PotentialModel &K) {
  const int n = K.N - 1;
  std::vector<double> H = hessian_w(K, K.center_w());
  // determinant sign by Gaussian elimination with partial pivoting
  int sign = 1;
  double scale = 0;
  for (int i = 0; i < n * n; ++i)
    scale = std::max(scale, std::fabs(H[static_cast<std::size_t>(i)]));
  if (scale == 0)
    fail("DegenerateHessian", "Hessian of K vanishes at the critical point");
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int rr = col + 1; rr < n; ++rr)
      if (std::fabs(H[static_cast<std::size_t>(rr * n + col)]) >
          std::fabs(H[static_cast<std::size_t>(piv * n + col)]))
        piv = rr;
    const double p = H[static_cast<std::size_t>(piv * n + col)];
    if (std::fabs(p) < 1e-12 * scale)
      fail("DegenerateHessian", "Hessian of K is singular at the critical point");
    if (piv != col) {
      for (int cc = 0; cc < n; ++cc)
        std::swap(H[static_cast<std::size_t>(piv * n + cc)],
                  H[static_cast<std::size_t>(col * n + cc)]);
      sign = -sign;
    }
    if (p < 0)
      sign = -sign;
    for (int rr = col + 1; rr < n; ++rr) {
      const double fmul = H[static_cast<std::size_t>(rr * n + col)] / p;
      for (int cc = col; cc < n; ++cc)
        H[static_cast<std::size_t>(rr * n + cc)] -=
            fmul * H[static_cast<std::size_t>(col * n + cc)];
    }
  }
  return sign;
}

AssumptionReport
verify_assumptions(const std::function<double(const std::vector<double> &)> &K,
                   const std::vector<double> &w0, double delta) {
  AssumptionReport rep;
  const std::size_t n = w0.size();
  const double h = 1e-5 * std::max(1.0, std::fabs(w0[0]));

  double g2 = 0, lap = 0;
  const double f0 = K(w0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> wp = w0, wm = w0;
    wp[i] += h;
    wm[i] -= h;
    const double fp = K(wp), fm = K(wm);
    const double gi = (fp - fm) / (2 * h);
    g2 += gi * gi;
    lap += (fp - 2 * f0 + fm) / (h * h);
  }
  rep.grad_norm = std::sqrt(g2);
  rep.laplacian = lap;
  rep.critical_point = rep.grad_norm < 1e-6;
  rep.negative_laplacian = lap < -1e-8;

  // positivity on the 10*delta ball: deterministic shell sampling (offsets
  // stay inside the ball; golden-ratio angles spread the directions)
  double mn = f0;
  const int n_sh = 8, n_dir = 64;
  for (int sh = 1; sh <= n_sh; ++sh) {
    const double rad = 10.0 * delta * sh / n_sh;
    for (int d = 0; d < n_dir; ++d) {
      std::vector<double> w = w0;
      for (std::size_t i = 0; i < n; ++i) {
        const double ang = 2.0 * 3.141592653589793 *
                           std::fmod(0.618033988749895 * (d + 1) * (i + 1), 1.0);
        w[i] += rad * std::cos(ang) / std::sqrt(static_cast<double>(n));
      }
      mn = std::min(mn, K(w));
    }
  }
  rep.min_on_ball = mn;
  rep.positive_on_ball = mn > 0;
  return rep;
}

} // namespace hartree::pot
