#include "hartree/reduction.hpp"
#include "hartree/riesz.hpp"
#include "hartree/special.hpp"

#include <algorithm>
#include <cmath>

namespace hartree::reduction {

namespace {

// sign(v) |v|^q
double spow(double v, double q) {
  if (v == 0.0)
    return 0.0;
  return v >= 0 ? std::pow(v, q) : -std::pow(-v, q);
}

std::uint64_t sub_seed(const QuadratureSpec &spec, int piece) {
  return spec.seed +
         0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(piece + 1);
}

QuadratureSpec piece_spec(const QuadratureSpec &spec, int piece) {
  QuadratureSpec s = spec;
  s.seed = sub_seed(spec, piece);
  return s;
}

double l2(const std::vector<double> &v) {
  double s = 0;
  for (double x : v)
    s += x * x;
  return std::sqrt(s);
}

// Gaussian elimination with partial pivoting for the tiny Newton systems.
std::vector<double> solve_linear(std::vector<double> A, std::vector<double> b,
                                 int n) {
  double scale = 0;
  for (double x : A)
    scale = std::max(scale, std::abs(x));
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(A[static_cast<std::size_t>(r * n + col)]) >
          std::abs(A[static_cast<std::size_t>(piv * n + col)]))
        piv = r;
    const double pval = A[static_cast<std::size_t>(piv * n + col)];
    if (std::abs(pval) <= 1e-14 * std::max(scale, 1e-300))
      fail("DegenerateHessian", "pivot vanished in the Newton linear solve");
    if (piv != col) {
      for (int c = col; c < n; ++c)
        std::swap(A[static_cast<std::size_t>(piv * n + c)],
                  A[static_cast<std::size_t>(col * n + c)]);
      std::swap(b[static_cast<std::size_t>(piv)],
                b[static_cast<std::size_t>(col)]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = A[static_cast<std::size_t>(r * n + col)] /
                       A[static_cast<std::size_t>(col * n + col)];
      if (f == 0.0)
        continue;
      for (int c = col; c < n; ++c)
        A[static_cast<std::size_t>(r * n + c)] -=
            f * A[static_cast<std::size_t>(col * n + c)];
      b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
    }
  }
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[static_cast<std::size_t>(r)];
    for (int c = r + 1; c < n; ++c)
      s -= A[static_cast<std::size_t>(r * n + c)] * x[static_cast<std::size_t>(c)];
    x[static_cast<std::size_t>(r)] = s / A[static_cast<std::size_t>(r * n + r)];
  }
  return x;
}

// splitmix64 stream for the deterministic sample designs.
struct Rng {
  std::uint64_t s;
  explicit Rng(std::uint64_t seed) : s(seed) {}
  double next() {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z = z ^ (z >> 31);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }
};

Vec rand_dir(Rng &rng, int N) {
  for (;;) {
    Vec v(N);
    double n2 = 0;
    for (int i = 0; i < N; ++i) {
      const double u1 = std::max(rng.next(), 1e-300);
      const double u2 = rng.next();
      v[i] = std::sqrt(-2.0 * std::log(u1)) *
             std::cos(2.0 * 3.141592653589793238462643383279503 * u2);
      n2 += v[i] * v[i];
    }
    if (n2 > 1e-12)
      return (1.0 / std::sqrt(n2)) * v;
  }
}

Vec to_vec(const std::vector<double> &v) {
  Vec x(static_cast<int>(v.size()));
  for (int i = 0; i < x.dim(); ++i)
    x[i] = v[static_cast<std::size_t>(i)];
  return x;
}

} // namespace

//==============================================================================
// Fields

double BubbleField::value(const Vec &x) const {
  return bubbles::ansatz_eval(a_, x);
}
Vec BubbleField::gradient(const Vec &x) const {
  return bubbles::ansatz_grad(a_, x);
}
double BubbleField::laplacian(const Vec &x) const {
  return bubbles::ansatz_laplacian(a_, x);
}

double GaussianBump::value(const Vec &x) const {
  return amp_ * std::exp(-0.5 * norm2(x - x0_) / (width_ * width_));
}
Vec GaussianBump::gradient(const Vec &x) const {
  const double v = value(x);
  return (-v / (width_ * width_)) * (x - x0_);
}
double GaussianBump::laplacian(const Vec &x) const {
  const double w2 = width_ * width_;
  return value(x) * (norm2(x - x0_) / (w2 * w2) - x.dim() / w2);
}

double SumField::value(const Vec &x) const {
  double s = 0;
  for (const Field *f : parts_)
    s += f->value(x);
  return s;
}
Vec SumField::gradient(const Vec &x) const {
  Vec g(x.dim());
  for (const Field *f : parts_)
    g += f->gradient(x);
  return g;
}
double SumField::laplacian(const Vec &x) const {
  double s = 0;
  for (const Field *f : parts_)
    s += f->laplacian(x);
  return s;
}

double FdField::value(const Vec &x) const { return f_(x); }
Vec FdField::gradient(const Vec &x) const {
  Vec g(x.dim());
  Vec xp = x, xm = x;
  for (int i = 0; i < x.dim(); ++i) {
    xp[i] = x[i] + h_;
    xm[i] = x[i] - h_;
    g[i] = (f_(xp) - f_(xm)) / (2.0 * h_);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return g;
}
double FdField::laplacian(const Vec &x) const {
  const double f0 = f_(x);
  double s = 0;
  Vec xp = x, xm = x;
  for (int i = 0; i < x.dim(); ++i) {
    xp[i] = x[i] + h_;
    xm[i] = x[i] - h_;
    s += f_(xp) - 2.0 * f0 + f_(xm);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return s / (h_ * h_);
}

//==============================================================================
// Pohozaev residuals

namespace {

Residual pohozaev_residual(const Field &u, const pot::PotentialModel &K,
                           double rho, const bubbles::Ansatz &ref,
                           ConvStrategy strategy, const QuadratureSpec &spec,
                           const std::function<double(const Vec &)> &test) {
  const ProblemParams &p = ref.p;
  const int N = p.N;
  const double lam = ref.lambda;
  const double delta = ref.cutoff.delta;
  if (!(rho > 2.0 * delta) || !(rho < 5.0 * delta))
    fail("RhoOutOfRange", "tube radius must lie in (2 delta, 5 delta)");
  const double P = p.two_star_alpha;
  const special::SharpConstants sc = special::sharp_constants(p);
  const std::vector<double> w0 = K.center_w();

  std::vector<quad::MixtureComponent> extra;
  for (const Vec &z : ref.placement.centers) {
    quad::MixtureComponent c;
    c.center = z;
    c.scale = 1.0 / lam;
    c.radius = spec.domain_radius;
    extra.push_back(c);
  }

  // g0 = |.|^{-alpha} * sum_j U_j^P, closed form
  auto g0 = [&](const Vec &x) {
    double s = 0;
    for (const Vec &z : ref.placement.centers)
      s += riesz::bubble_closed_radial(p, sc, lam, dist(x, z));
    return s;
  };

  // [-Delta u - g0 u^{P-1}] T, and its magnitude for the roundoff floor
  auto f_a = [&](const Vec &x) {
    const double t = test(x);
    if (t == 0.0)
      return 0.0;
    return (-u.laplacian(x) - g0(x) * spow(u.value(x), P - 1.0)) * t;
  };
  auto f_a_mag = [&](const Vec &x) {
    return (std::abs(u.laplacian(x)) +
            g0(x) * std::pow(std::abs(u.value(x)), P - 1.0)) *
           std::abs(test(x));
  };
  const IntegralResult ta =
      quad::tube_integral(f_a, w0, rho, p, piece_spec(spec, 1), extra);
  const IntegralResult ta_mag =
      quad::tube_integral(f_a_mag, w0, rho, p, piece_spec(spec, 1), extra);

  double value = ta.value;
  double est = ta.est_error + 1e-15 * std::abs(ta_mag.value);

  // (1 - K) g0 u^{P-1} T, evaluated with the exact 1-K accessor
  if (!K.is_one()) {
    auto f_k = [&](const Vec &x) {
      const double om = pot::one_minus_value(K, x);
      if (om == 0.0)
        return 0.0;
      return om * g0(x) * spow(u.value(x), P - 1.0) * test(x);
    };
    const IntegralResult tk =
        quad::tube_integral(f_k, w0, rho, p, piece_spec(spec, 3), extra);
    value += tk.value;
    est += tk.est_error;
  }

  // -K(x) u^{P-1}(x) T(x) int k(x-y) [K|u|^P - sum_j U_j^P](y) dy
  if (strategy == ConvStrategy::closed_plus_delta) {
    auto delta_ref = [&](const Vec &y) {
      double s = pot::potential_value(K, y) *
                 std::pow(std::abs(u.value(y)), P);
      for (const Vec &z : ref.placement.centers)
        s -= std::pow(bubbles::profile(p, ref.c, lam, dist(y, z)), P);
      return s;
    };
    auto f_pair = [&](const Vec &x, const Vec &y) {
      const double t = test(x);
      if (t == 0.0)
        return 0.0;
      return pot::potential_value(K, x) * spow(u.value(x), P - 1.0) * t *
             delta_ref(y);
    };
    std::vector<Vec> peaks = ref.placement.centers;
    const IntegralResult tb1 = quad::tube_pair_integral(
        f_pair, w0, rho, p.alpha, peaks, 1.0 / lam, p, piece_spec(spec, 2),
        extra);

    // Truncation of the y integral beyond |y - x| = R: bound the remainder by
    // (tube integral of the outer magnitude) x (kernel tail of delta_ref,
    // probed at radius R and assumed to keep its bubble-power decay).
    auto f_out_mag = [&](const Vec &x) {
      return pot::potential_value(K, x) *
             std::pow(std::abs(u.value(x)), P - 1.0) * std::abs(test(x));
    };
    const IntegralResult out_mag =
        quad::tube_integral(f_out_mag, w0, rho, p, piece_spec(spec, 4), extra);
    Vec xc(N);
    xc[0] = w0[0];
    for (int i = 1; i < N - 1; ++i)
      xc[i + 1] = w0[static_cast<std::size_t>(i)];
    const double R = spec.domain_radius;
    double fmax = 0;
    for (int k = 0; k < std::min(N, 4) + 1; ++k) {
      Vec e(N);
      if (k < std::min(N, 4))
        e[k] = 1.0;
      else
        for (int i = 0; i < N; ++i)
          e[i] = 1.0 / std::sqrt(static_cast<double>(N));
      fmax = std::max(fmax, std::abs(delta_ref(xc + R * e)));
      fmax = std::max(fmax, std::abs(delta_ref(xc - R * e)));
    }
    const double decay = (N - 2) * P;
    const double tail_w = 2.0 * std::pow(2.0, p.alpha) * fmax *
                          quad::sphere_area(N) *
                          std::pow(R, N - p.alpha) / (decay + p.alpha - N);

    value -= tb1.value;
    est += tb1.est_error + std::abs(out_mag.value) * tail_w;
  }

  return {value, est};
}

} // namespace

Residual pohozaev_dilation_residual(const Field &u,
                                    const pot::PotentialModel &K, double rho,
                                    const bubbles::Ansatz &ref,
                                    ConvStrategy strategy,
                                    const QuadratureSpec &spec) {
  auto test = [&u](const Vec &x) { return dot(x, u.gradient(x)); };
  return pohozaev_residual(u, K, rho, ref, strategy, spec, test);
}

Residual pohozaev_translation_residual(const Field &u,
                                       const pot::PotentialModel &K,
                                       double rho, int i,
                                       const bubbles::Ansatz &ref,
                                       ConvStrategy strategy,
                                       const QuadratureSpec &spec) {
  if (i < 3 || i > ref.p.N)
    fail("DimensionTooSmall",
         "translation test direction must be a coordinate index in 3..N");
  auto test = [&u, i](const Vec &x) { return u.gradient(x)[i - 1]; };
  return pohozaev_residual(u, K, rho, ref, strategy, spec, test);
}

//==============================================================================
// Reduced system

double balance_root(double A1, double A3, const ProblemParams &p) {
  if (!(A1 > 0) || !(A3 > 0))
    fail("NonPositiveCoefficient",
         "balance equation needs A1 > 0 and A3 > 0");
  const double ratio = A3 / A1;
  if (p.N == 5)
    return ratio;
  if (p.N == 6)
    return std::sqrt(ratio);
  return std::pow(ratio, 1.0 / (p.N - 4));
}

double coefficient_a3(const ProblemParams &p, double A2, int m, double r_bar) {
  if (m < 2)
    fail("MTooSmall", "interaction coefficient is undefined for m < 2; the "
                      "reduced scale balance needs m >= 2");
  const double B = geom::interaction_sum(m, r_bar, p.N - 2);
  return A2 * B / std::pow(static_cast<double>(m), p.N - 2);
}

ReducedSolution solve_reduced(const pot::PotentialModel &K, int m,
                              const energy::ExpansionFit &fit,
                              const ProblemParams &p, double tol, double L0,
                              double L1, double theta) {
  if (m < 1)
    fail("MTooSmall", "bubble count must be >= 1");
  const int n = p.N - 1;
  const std::vector<double> w0 = K.center_w();
  std::vector<double> w = w0;
  std::vector<double> g = pot::grad_w(K, w);
  double gn = l2(g);
  int it = 0;
  while (gn > tol) {
    if (++it > 40)
      fail("NewtonDiverged", "no convergence in 40 Newton iterations");
    const std::vector<double> H = pot::hessian_w(K, w);
    const std::vector<double> step = solve_linear(H, g, n);
    double s = 1.0;
    bool accepted = false;
    for (int h = 0; h <= 40; ++h) {
      std::vector<double> trial = w;
      for (int i = 0; i < n; ++i)
        trial[static_cast<std::size_t>(i)] -=
            s * step[static_cast<std::size_t>(i)];
      std::vector<double> gt = pot::grad_w(K, trial);
      const double gtn = l2(gt);
      if (gtn < gn) {
        w = std::move(trial);
        g = std::move(gt);
        gn = gtn;
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted)
      fail("NewtonDiverged", "step damping failed to reduce the gradient");
  }

  const double t = balance_root(fit.A1, fit.A3, p);
  if (!(t >= L0) || !(t <= L1))
    fail("RootOutsideWindow", "balance root t = " + std::to_string(t) +
                                  " outside [" + std::to_string(L0) + ", " +
                                  std::to_string(L1) + "]");

  double mpow;
  if (p.N == 6)
    mpow = static_cast<double>(m) * m;
  else if (p.N == 5)
    mpow = static_cast<double>(m) * m * m;
  else
    mpow = std::pow(static_cast<double>(m),
                    static_cast<double>(p.N - 2) / (p.N - 4));
  const double lambda_m = t * mpow;

  ReducedSolution sol;
  sol.r_bar_m = w[0];
  sol.x_bar_pp_m.assign(w.begin() + 1, w.end());
  sol.t_m = t;
  sol.lambda_m = lambda_m;
  sol.grad_k_residual = gn;
  sol.balance_residual =
      std::abs(-fit.A1 / (t * t * t) + fit.A3 / std::pow(t, p.N - 1));
  sol.in_window = true;
  double prox2 = 0;
  for (int i = 0; i < n; ++i) {
    const double d =
        w[static_cast<std::size_t>(i)] - w0[static_cast<std::size_t>(i)];
    prox2 += d * d;
  }
  sol.proximity = std::sqrt(prox2);
  sol.proximity_bound = std::pow(lambda_m, -(1.0 - theta));
  sol.proximity_ok = sol.proximity <= sol.proximity_bound;
  sol.degree_sign = pot::degree_sign(K);
  return sol;
}

//==============================================================================
// Weighted norms

WeightedNormSpec make_norm_spec(const ProblemParams &p,
                                const geom::Placement &pl, double lambda,
                                int target_points, std::uint64_t seed) {
  if (!(lambda > 0))
    fail("NonPositiveArgument", "norm spec needs lambda > 0");
  if (pl.N() != p.N)
    fail("BadCenterDimension", "placement dimension does not match N");
  static const double kShellT[] = {0.125, 0.25, 0.375, 0.5, 0.625, 0.75,
                                   1.0,   1.5,  2.0,   3.0, 4.0,   6.0,
                                   8.0,   12.0, 16.0};
  const int n_shell = static_cast<int>(sizeof(kShellT) / sizeof(kShellT[0]));
  static const double kFar[] = {2.0, 5.0, 10.0, 25.0, 60.0};
  const int n_far = static_cast<int>(sizeof(kFar) / sizeof(kFar[0]));
  const int m = pl.m;
  const int ndir = std::max(
      4, (target_points - m) / (n_shell * m + n_far));

  Rng rng(seed ^ 0xd1b54a32d192ed03ULL);
  WeightedNormSpec spec;
  spec.tau = p.tau;
  spec.placement = pl;
  spec.lambda = lambda;
  for (const Vec &z : pl.centers)
    spec.sample_points.push_back(z);
  const double far_scale = std::max(1.0, pl.r_bar);
  for (int d = 0; d < ndir; ++d) {
    for (const Vec &z : pl.centers)
      for (int s = 0; s < n_shell; ++s) {
        const Vec dir = rand_dir(rng, p.N);
        spec.sample_points.push_back(z + (kShellT[s] / lambda) * dir);
      }
    for (int s = 0; s < n_far; ++s) {
      const Vec dir = rand_dir(rng, p.N);
      spec.sample_points.push_back((kFar[s] * far_scale) * dir);
    }
  }
  return spec;
}

namespace {

double norm_impl(const std::function<double(const Vec &)> &u,
                 const WeightedNormSpec &spec, double half_power) {
  if (spec.sample_points.empty())
    fail("EmptySampleSet", "weighted norm needs a nonempty sample design");
  if (spec.placement.centers.empty())
    fail("EmptySampleSet", "weighted norm needs at least one center");
  const double ex = half_power + spec.tau;
  const double pref = std::pow(spec.lambda, -half_power);
  double best = 0;
  for (const Vec &x : spec.sample_points) {
    double den = 0;
    for (const Vec &z : spec.placement.centers)
      den += std::pow(1.0 + spec.lambda * dist(x, z), -ex);
    const double r = pref * std::abs(u(x)) / den;
    best = std::max(best, r);
  }
  return best;
}

} // namespace

double weighted_norm_star(const std::function<double(const Vec &)> &u,
                          const WeightedNormSpec &spec) {
  const int N = spec.placement.N();
  return norm_impl(u, spec, 0.5 * (N - 2));
}

double weighted_norm_starstar(const std::function<double(const Vec &)> &u,
                              const WeightedNormSpec &spec) {
  const int N = spec.placement.N();
  return norm_impl(u, spec, 0.5 * (N + 2));
}

//==============================================================================
// Decay estimate checks

LemmaReport lemma_check(Lemma which, const LemmaParams &lp, long sample_budget,
                        const QuadratureSpec &spec) {
  if (sample_budget < 2)
    fail("EmptySampleSet", "lemma check needs a sample budget of at least 2");
  const int N = lp.N;
  if (N < 3 || N > kMaxDim)
    fail(N < 3 ? "DimensionTooSmall" : "DimensionTooLarge",
         "lemma check supports 3 <= N <= 12");

  QuadratureSpec rspec = spec;
  rspec.scheme = Scheme::qmc_nd;
  rspec.nodes = std::max(4096L, spec.nodes / 16);
  rspec.shifts = 4;

  Rng rng(spec.seed ^ 0xd1b54a32d192ed03ULL);
  double worst = 0, worst_half = 0;
  Vec witness(N);
  const long half = sample_budget / 2;

  // Per-sample ratio LHS / (RHS with C = 1); anchors and shell radii cycle
  // through fixed ladders so every budget prefix covers the whole design.
  std::function<double(long, Vec &)> ratio_at;

  if (which == Lemma::B1) {
    if (!(lp.a >= 1.0) || !(lp.b >= 1.0))
      fail("ExponentOutOfRange", "B1 needs exponents a, b >= 1");
    if (!(lp.delta > 0) || !(lp.delta <= std::min(lp.a, lp.b)))
      fail("ExponentOutOfRange", "B1 needs 0 < d <= min(a, b)");
    Vec zj(N), zk(N);
    if (!lp.z_j.empty() || !lp.z_k.empty()) {
      if (static_cast<int>(lp.z_j.size()) != N ||
          static_cast<int>(lp.z_k.size()) != N)
        fail("BadCenterDimension", "B1 centers must have size N");
      zj = to_vec(lp.z_j);
      zk = to_vec(lp.z_k);
    } else {
      zj[0] = -1.0;
      zk[0] = 1.0;
    }
    const double dz = dist(zj, zk);
    if (dz < 1e-12)
      fail("CoincidentCenters", "B1 needs distinct centers");
    static const double kR[] = {0,   0.25, 0.5, 1.0, 2.0,
                                4.0, 8.0,  16.0, 32.0, 64.0};
    const double scale = std::max(1.0, 0.5 * dz);
    ratio_at = [=, &rng](long idx, Vec &x) {
      const int anchor = static_cast<int>(idx % 3);
      const double r = kR[(idx / 3) % 10] * scale;
      Vec base = anchor == 0 ? zj : (anchor == 1 ? zk : 0.5 * (zj + zk));
      x = base + r * rand_dir(rng, N);
      const double sj = dist(x, zj), sk = dist(x, zk);
      const double lhs =
          std::pow(1.0 + sj, -lp.a) * std::pow(1.0 + sk, -lp.b);
      const double e = lp.a + lp.b - lp.delta;
      const double rhs =
          std::pow(dz, -lp.delta) *
          (std::pow(1.0 + sj, -e) + std::pow(1.0 + sk, -e));
      return lhs / rhs;
    };
  } else if (which == Lemma::B3) {
    if (!(lp.delta > 0) || !(lp.delta < N - 2))
      fail("ExponentOutOfRange", "B3 needs 0 < d < N-2");
    const double dd = lp.delta;
    auto f = [dd](const Vec &y) {
      return std::pow(1.0 + norm(y), -(2.0 + dd));
    };
    quad::MixtureComponent peak;
    peak.center = Vec(N);
    peak.scale = 1.0;
    peak.radius = spec.domain_radius;
    static const double kR[] = {0,   0.25, 0.5,  1.0,  2.0,  4.0,
                                8.0, 16.0, 32.0, 64.0, 128.0, 256.0};
    ratio_at = [=, &rng](long idx, Vec &x) {
      const double r = kR[idx % 12];
      x = r * rand_dir(rng, N);
      QuadratureSpec ps = rspec;
      ps.seed = rspec.seed + 0x9e3779b97f4a7c15ULL *
                                 static_cast<std::uint64_t>(idx + 1);
      const IntegralResult lhs = riesz::numeric(
          f, N, static_cast<double>(N - 2), 2.0 + dd, x, {peak}, ps);
      return lhs.value * std::pow(1.0 + norm(x), dd);
    };
  } else {
    if (N <= 5)
      fail("DimensionTooSmall", "B4 needs N > 5");
    if (!(lp.eta > 0))
      fail("ExponentOutOfRange", "B4 needs eta > 0");
    if (!(lp.alpha > 0) || !(lp.alpha < N))
      fail("AlphaOutOfRange", "B4 needs 0 < alpha < N");
    if (!(lp.lambda > 0))
      fail("NonPositiveArgument", "B4 needs lambda > 0");
    Vec zi(N);
    if (!lp.z_i.empty()) {
      if (static_cast<int>(lp.z_i.size()) != N)
        fail("BadCenterDimension", "B4 center must have size N");
      zi = to_vec(lp.z_i);
    }
    const double al = lp.alpha, lam = lp.lambda;
    const double decay = 0.5 * (3 * N + 2) - al + lp.eta;
    const double amp = std::pow(lam, N - 0.5 * al);
    auto g = [=](const Vec &y) {
      return amp * std::pow(1.0 + lam * dist(y, zi), -decay);
    };
    quad::MixtureComponent peak;
    peak.center = zi;
    peak.scale = 1.0 / lam;
    peak.radius = spec.domain_radius;
    const double rhs_pow = std::min(al, 0.5 * (N + 2));
    static const double kT[] = {0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
    ratio_at = [=, &rng](long idx, Vec &x) {
      // alternate bubble-scale shells (t/lambda) and O(1) shells
      double r;
      if (idx % 2 == 0)
        r = kT[(idx / 2) % 8] / lam;
      else
        r = kT[4 + (idx / 2) % 4] / 8.0;
      x = zi + r * rand_dir(rng, N);
      QuadratureSpec ps = rspec;
      ps.seed = rspec.seed + 0x9e3779b97f4a7c15ULL *
                                 static_cast<std::uint64_t>(idx + 1);
      const IntegralResult lhs =
          riesz::numeric(g, N, al, decay, x, {peak}, ps);
      const double rhs =
          std::pow(lam, 0.5 * al) *
          std::pow(1.0 + lam * dist(x, zi), -rhs_pow);
      return lhs.value / rhs;
    };
  }

  for (long idx = 0; idx < sample_budget; ++idx) {
    Vec x(N);
    const double r = ratio_at(idx, x);
    if (!std::isfinite(r))
      return {false, r, x, worst_half};
    if (r > worst) {
      worst = r;
      witness = x;
    }
    if (idx + 1 == half)
      worst_half = worst;
  }

  LemmaReport rep;
  rep.worst_ratio = worst;
  rep.witness = witness;
  rep.half_budget_ratio = worst_half;
  rep.holds = worst_half > 0 && worst <= 1.1 * worst_half;
  return rep;
}

} // namespace hartree::reduction
