#include "hartree/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>

namespace hartree::quad {

namespace {

constexpr double kPi = 3.141592653589793238462643383279503;

//==============================================================================
// Gauss-Kronrod 7/15 pair (QUADPACK dqk15 abscissae/weights).

const double kXgk[8] = {0.991455371120812639206854697526329,
                        0.949107912342758524526189684047851,
                        0.864864423359769072789712788640926,
                        0.741531185599394439863864773280788,
                        0.586087235467691130294144838258730,
                        0.405845151377397166906606412076961,
                        0.207784955007898467600689403773245,
                        0.0};
const double kWgk[8] = {0.022935322010529224963732008058970,
                        0.063092092629978553290700663189204,
                        0.104790010322250183839876322541518,
                        0.140653259715525918745189590510238,
                        0.169004726639267902826583426598550,
                        0.190350578064785409913256402421014,
                        0.204432940075298892414161999234649,
                        0.209482141084727828012999174891714};
const double kWg[4] = {0.129484966168869693270611432679082,
                       0.279705391489276667901467771423780,
                       0.381830050505118944950369775488975,
                       0.417959183673469387755102040816327};

struct GkEstimate {
  double val = 0, err = 0;
};

GkEstimate gk15(const std::function<double(double)> &f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double resk = kWgk[7] * fc, resg = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double f1 = f(c - h * kXgk[j]);
    const double f2 = f(c + h * kXgk[j]);
    resk += kWgk[j] * (f1 + f2);
    if (j % 2 == 1)
      resg += kWg[(j - 1) / 2] * (f1 + f2);
  }
  GkEstimate r;
  r.val = resk * h;
  r.err = std::abs((resk - resg) * h);
  if (!std::isfinite(r.val))
    fail("QuadratureFailure", "integrand produced a non-finite value");
  return r;
}

struct Panel1 {
  double a, b, val, err;
  long id;
};
struct WorsePanel1 {
  bool operator()(const Panel1 &x, const Panel1 &y) const {
    if (x.err != y.err)
      return x.err < y.err; // max-heap on error
    return x.id > y.id;     // deterministic tie-break
  }
};

} // namespace

IntegralResult adaptive_gk(const std::function<double(double)> &f, double a,
                           double b, double rel_tol, double abs_tol,
                           long max_panels) {
  std::priority_queue<Panel1, std::vector<Panel1>, WorsePanel1> heap;
  long next_id = 0;
  GkEstimate whole = gk15(f, a, b);
  heap.push({a, b, whole.val, whole.err, next_id++});
  double total_val = whole.val, total_err = whole.err;

  while (total_err > std::max(abs_tol, rel_tol * std::abs(total_val)) &&
         static_cast<long>(heap.size()) < max_panels) {
    Panel1 worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b)
      break; // interval at floating-point resolution
    GkEstimate left = gk15(f, worst.a, mid);
    GkEstimate right = gk15(f, mid, worst.b);
    total_val += left.val + right.val - worst.val;
    total_err += left.err + right.err - worst.err;
    heap.push({worst.a, mid, left.val, left.err, next_id++});
    heap.push({mid, worst.b, right.val, right.err, next_id++});
  }

  // Deterministic final pass: re-sum panels ordered by left endpoint.
  std::vector<Panel1> panels;
  panels.reserve(heap.size());
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(),
            [](const Panel1 &x, const Panel1 &y) { return x.a < y.a; });
  KahanSum sv, se;
  for (const auto &pan : panels) {
    sv.add(pan.val);
    se.add(pan.err);
  }
  IntegralResult res;
  res.value = sv.total();
  res.est_error = se.total();
  res.nodes_used = 15 * static_cast<long>(panels.size());
  res.scheme = Scheme::radial_1d;
  if (res.est_error > std::max(abs_tol, rel_tol * std::abs(res.value)))
    fail("QuadratureFailure",
         "adaptive rule did not reach tolerance: est_error = " +
             std::to_string(res.est_error) + " on value " +
             std::to_string(res.value));
  return res;
}

//==============================================================================

double sphere_area(int N) {
  return 2.0 * std::pow(kPi, 0.5 * N) / std::tgamma(0.5 * N);
}

double ball_volume(int N, double R) {
  return std::pow(kPi, 0.5 * N) / std::tgamma(0.5 * N + 1.0) * std::pow(R, N);
}

IntegralResult radial_integral(const std::function<double(double)> &g,
                               const ProblemParams &p,
                               const QuadratureSpec &spec) {
  const double area = sphere_area(p.N);
  const int N = p.N;
  // r = tan(theta): dr = (1 + r^2) dtheta, r^{N-1} weight absorbed here.
  auto f = [&](double theta) {
    const double co = std::cos(theta);
    if (co < 1e-154)
      return 0.0;
    const double r = std::tan(theta);
    const double w = std::pow(r, N - 1) * (1.0 + r * r);
    const double gv = g(r);
    return gv == 0.0 ? 0.0 : gv * w;
  };
  IntegralResult res =
      adaptive_gk(f, 0.0, 0.5 * kPi, spec.rel_tol, spec.abs_tol, spec.nodes);
  res.value *= area;
  res.est_error *= area;
  res.scheme = Scheme::radial_1d;
  return res;
}

//==============================================================================
// Two-center reduction. For F(s,t) with s = |x-z1|, t = |x-z2|, d = |z1-z2|,
// write p = s+t, q = s-t. The admissible region is p >= d, |q| <= d and
//   ∫ F dx = (w_{N-2}/d) ∫∫ F(s,t) · s t · h^{N-3} ds dt,   h^2 = (p^2-d^2)(d^2-q^2)/(4d^2),
// where h is the distance to the axis. Substituting p = d sec(chi),
// q = d sin(phi) compactifies the strip and removes the h = 0 edge
// non-smoothness: h = (d/2) tan(chi) cos(phi),
//   ∫ F dx = (w_{N-2} d / 2) ∫_0^{pi/2} ∫_{-pi/2}^{pi/2}
//            F(s,t) s t h^{N-3} sec(chi) tan(chi) cos(phi) dphi dchi.

namespace {

struct Panel2 {
  double ax, bx, ay, by, val, err;
  long id;
};
struct WorsePanel2 {
  bool operator()(const Panel2 &x, const Panel2 &y) const {
    if (x.err != y.err)
      return x.err < y.err;
    return x.id > y.id;
  }
};

GkEstimate gk15_tensor(const std::function<double(double, double)> &f,
                       const Panel2 &pan) {
  const double cx = 0.5 * (pan.ax + pan.bx), hx = 0.5 * (pan.bx - pan.ax);
  const double cy = 0.5 * (pan.ay + pan.by), hy = 0.5 * (pan.by - pan.ay);
  // 15 symmetric abscissae and both weight sets, center at index 7.
  double xs[15], wk[15], wg[15];
  for (int j = 0; j < 7; ++j) {
    xs[j] = -kXgk[j];
    xs[14 - j] = kXgk[j];
    wk[j] = wk[14 - j] = kWgk[j];
    const bool gauss = (j % 2 == 1);
    wg[j] = wg[14 - j] = gauss ? kWg[(j - 1) / 2] : 0.0;
  }
  xs[7] = 0.0;
  wk[7] = kWgk[7];
  wg[7] = kWg[3];

  double fv[15][15];
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 15; ++j)
      fv[i][j] = f(cx + hx * xs[i], cy + hy * xs[j]);

  double resk = 0, resg = 0;
  for (int i = 0; i < 15; ++i) {
    double rowk = 0, rowg = 0;
    for (int j = 0; j < 15; ++j) {
      rowk += wk[j] * fv[i][j];
      rowg += wg[j] * fv[i][j];
    }
    resk += wk[i] * rowk;
    resg += wg[i] * rowg;
  }
  GkEstimate r;
  r.val = resk * hx * hy;
  r.err = std::abs((resk - resg) * hx * hy);
  if (!std::isfinite(r.val))
    fail("QuadratureFailure", "2-D integrand produced a non-finite value");
  return r;
}

IntegralResult adaptive_gk_2d(const std::function<double(double, double)> &f,
                              double ax, double bx, double ay, double by,
                              double rel_tol, double abs_tol, long max_panels) {
  std::priority_queue<Panel2, std::vector<Panel2>, WorsePanel2> heap;
  long next_id = 0;
  Panel2 p0{ax, bx, ay, by, 0, 0, next_id++};
  GkEstimate whole = gk15_tensor(f, p0);
  p0.val = whole.val;
  p0.err = whole.err;
  heap.push(p0);
  double total_val = whole.val, total_err = whole.err;
  const double wx0 = bx - ax, wy0 = by - ay;

  while (total_err > std::max(abs_tol, rel_tol * std::abs(total_val)) &&
         static_cast<long>(heap.size()) < max_panels) {
    Panel2 worst = heap.top();
    heap.pop();
    const bool split_x =
        (worst.bx - worst.ax) / wx0 >= (worst.by - worst.ay) / wy0;
    Panel2 a = worst, b = worst;
    if (split_x) {
      const double mid = 0.5 * (worst.ax + worst.bx);
      if (mid <= worst.ax || mid >= worst.bx)
        break;
      a.bx = mid;
      b.ax = mid;
    } else {
      const double mid = 0.5 * (worst.ay + worst.by);
      if (mid <= worst.ay || mid >= worst.by)
        break;
      a.by = mid;
      b.ay = mid;
    }
    GkEstimate ea = gk15_tensor(f, a);
    GkEstimate eb = gk15_tensor(f, b);
    a.val = ea.val;
    a.err = ea.err;
    a.id = next_id++;
    b.val = eb.val;
    b.err = eb.err;
    b.id = next_id++;
    total_val += ea.val + eb.val - worst.val;
    total_err += ea.err + eb.err - worst.err;
    heap.push(a);
    heap.push(b);
  }

  std::vector<Panel2> panels;
  panels.reserve(heap.size());
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(), [](const Panel2 &x, const Panel2 &y) {
    if (x.ax != y.ax)
      return x.ax < y.ax;
    return x.ay < y.ay;
  });
  KahanSum sv, se;
  for (const auto &pan : panels) {
    sv.add(pan.val);
    se.add(pan.err);
  }
  IntegralResult res;
  res.value = sv.total();
  res.est_error = se.total();
  res.nodes_used = 225 * static_cast<long>(panels.size());
  res.scheme = Scheme::two_center_2d;
  if (res.est_error > std::max(abs_tol, rel_tol * std::abs(res.value)))
    fail("QuadratureFailure",
         "2-D adaptive rule did not reach tolerance: est_error = " +
             std::to_string(res.est_error));
  return res;
}

} // namespace

IntegralResult two_center_integral(const std::function<double(double, double)> &F,
                                   const Vec &z1, const Vec &z2,
                                   const ProblemParams &p,
                                   const QuadratureSpec &spec) {
  const double d = dist(z1, z2);
  if (!(d > 1e-14))
    fail("CoincidentCenters", "two-center reduction needs z1 != z2");
  const int N = p.N;
  const double pref = sphere_area(N - 1) * d / 2.0;

  auto integrand = [&](double chi, double phi) {
    const double cchi = std::cos(chi);
    if (cchi < 1e-12)
      return 0.0; // s,t ~ d/cchi huge; decaying F makes the limit 0
    const double pp = d / cchi;
    const double qq = d * std::sin(phi);
    const double s = 0.5 * (pp + qq);
    const double t = 0.5 * (pp - qq);
    const double h = 0.5 * d * std::tan(chi) * std::cos(phi);
    const double fv = F(s, t);
    if (fv == 0.0)
      return 0.0;
    return fv * s * t * std::pow(h, N - 3) * (1.0 / cchi) * std::tan(chi) *
           std::cos(phi);
  };

  IntegralResult res = adaptive_gk_2d(integrand, 0.0, 0.5 * kPi, -0.5 * kPi,
                                      0.5 * kPi, spec.rel_tol, spec.abs_tol,
                                      spec.nodes);
  res.value *= pref;
  res.est_error *= pref;
  return res;
}

//==============================================================================
// Quasi-Monte-Carlo machinery: Halton points with Cranley-Patterson shifts.

namespace {

const int kPrimes[32] = {2,   3,   5,   7,   11,  13,  17,  19,
                         23,  29,  31,  37,  41,  43,  47,  53,
                         59,  61,  67,  71,  73,  79,  83,  89,
                         97,  101, 103, 107, 109, 113, 127, 131};

double radical_inverse(std::uint64_t i, int base) {
  double f = 1.0, r = 0.0;
  while (i) {
    f /= base;
    r += f * static_cast<double>(i % static_cast<std::uint64_t>(base));
    i /= static_cast<std::uint64_t>(base);
  }
  return r;
}

std::uint64_t splitmix64(std::uint64_t &state) {
  state += 0x9E3779B97f4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double unit_clamp(double u) {
  const double eps = 0x1p-53;
  return std::min(std::max(u, eps), 1.0 - eps);
}

} // namespace

// N standard Gaussians from consecutive (0,1) pairs via Box-Muller; then the
// normalized vector is uniform on S^{N-1}.
void unit_direction(const double *u, int N, double *dir) {
  int k = 0;
  for (int pair = 0; k < N; ++pair) {
    const double u1 = unit_clamp(u[2 * pair]);
    const double u2 = u[2 * pair + 1];
    const double rho = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * kPi * u2;
    dir[k++] = rho * std::cos(ang);
    if (k < N)
      dir[k++] = rho * std::sin(ang);
  }
  double nn = 0;
  for (int i = 0; i < N; ++i)
    nn += dir[i] * dir[i];
  nn = std::sqrt(nn);
  if (nn < 1e-300) {
    dir[0] = 1.0;
    for (int i = 1; i < N; ++i)
      dir[i] = 0.0;
    return;
  }
  for (int i = 0; i < N; ++i)
    dir[i] /= nn;
}

IntegralResult
qmc_mean(int dims, const QuadratureSpec &spec,
         const std::function<double(const double *)> &sample_value,
         double tail_bound, std::vector<double> *shift_means) {
  if (dims > 32)
    fail("DimensionTooLarge", "QMC driver supports at most 32 dimensions");
  const long n = std::max<long>(spec.nodes, 64);
  const int shifts = std::max(spec.shifts, 2);
  std::vector<double> shift(static_cast<std::size_t>(shifts) * dims);
  std::uint64_t state = spec.seed ^ 0x517cc1b727220a95ULL;
  for (auto &s : shift)
    s = static_cast<double>(splitmix64(state) >> 11) * 0x1p-53;

  const int kChunks = 64;
  std::vector<double> chunk_sum(static_cast<std::size_t>(shifts) * kChunks);
  std::vector<double> chunk_abs(static_cast<std::size_t>(shifts) * kChunks);

  parallel_chunks(shifts * kChunks, [&](int task) {
    const int sh = task / kChunks, ch = task % kChunks;
    const long lo = n * ch / kChunks, hi = n * (ch + 1) / kChunks;
    KahanSum ks, ka;
    double u[32];
    for (long i = lo; i < hi; ++i) {
      for (int d = 0; d < dims; ++d) {
        double v = radical_inverse(static_cast<std::uint64_t>(i) + 1,
                                   kPrimes[d]) +
                   shift[static_cast<std::size_t>(sh) * dims + d];
        v -= std::floor(v);
        u[d] = v;
      }
      const double val = sample_value(u);
      ks.add(val);
      ka.add(std::abs(val));
    }
    chunk_sum[static_cast<std::size_t>(task)] = ks.total();
    chunk_abs[static_cast<std::size_t>(task)] = ka.total();
  });

  std::vector<double> means(static_cast<std::size_t>(shifts));
  double abs_mean = 0;
  for (int sh = 0; sh < shifts; ++sh) {
    KahanSum ks, ka;
    for (int ch = 0; ch < kChunks; ++ch) {
      ks.add(chunk_sum[static_cast<std::size_t>(sh) * kChunks + ch]);
      ka.add(chunk_abs[static_cast<std::size_t>(sh) * kChunks + ch]);
    }
    means[static_cast<std::size_t>(sh)] = ks.total() / static_cast<double>(n);
    abs_mean += ka.total() / static_cast<double>(n);
  }
  abs_mean /= shifts;

  KahanSum km;
  for (double m : means)
    km.add(m);
  const double mean = km.total() / shifts;
  double var = 0;
  for (double m : means)
    var += (m - mean) * (m - mean);
  var /= (shifts - 1);

  if (shift_means)
    *shift_means = means;

  IntegralResult res;
  res.value = mean;
  res.est_error = std::sqrt(var / shifts) + tail_bound + 4e-16 * abs_mean;
  res.nodes_used = n * shifts;
  res.scheme = Scheme::qmc_nd;
  if (!std::isfinite(res.value))
    fail("QuadratureFailure", "QMC sample produced a non-finite value");
  return res;
}

IntegralResult qmc_integral(const std::function<double(const Vec &)> &F,
                            const Vec &center, double radius,
                            const QuadratureSpec &spec) {
  const int N = center.dim();
  const int gdims = N + (N % 2);
  const double vol = ball_volume(N, radius);
  auto sample = [&](const double *u) {
    const double rho = radius * std::pow(u[0], 1.0 / N);
    double dir[kMaxDim];
    unit_direction(u + 1, N, dir);
    Vec y = center;
    for (int i = 0; i < N; ++i)
      y[i] += rho * dir[i];
    return vol * F(y);
  };
  return qmc_mean(1 + gdims, spec, sample, 0.0);
}

//==============================================================================

// Radial density of one mixture component evaluated at distance rho from its
// center; returns the probability density of the sampled radius (not yet
// divided by the sphere measure).
double component_radial_pdf(const MixtureComponent &c, int N, double rho) {
  const double ell = std::min(c.scale, c.radius);
  const double pw = static_cast<double>(N) - c.kernel_pow;
  const bool has_tail = c.scale < c.radius;
  const double wcore = has_tail ? 0.5 : 1.0;
  if (rho <= ell)
    return wcore * pw * std::pow(rho, pw - 1.0) / std::pow(ell, pw);
  if (has_tail && rho <= c.radius) {
    const double z = 1.0 / ell - 1.0 / c.radius;
    return 0.5 / (rho * rho * z);
  }
  return 0.0;
}

double component_sample_radius(const MixtureComponent &c, int N, double u) {
  const double ell = std::min(c.scale, c.radius);
  const double pw = static_cast<double>(N) - c.kernel_pow;
  const bool has_tail = c.scale < c.radius;
  if (!has_tail)
    return ell * std::pow(unit_clamp(u), 1.0 / pw);
  if (u < 0.5)
    return ell * std::pow(unit_clamp(2.0 * u), 1.0 / pw);
  const double v = unit_clamp(2.0 * u - 1.0);
  const double z = 1.0 / ell - 1.0 / c.radius;
  return 1.0 / (1.0 / ell - v * z);
}

double mixture_density(const std::vector<MixtureComponent> &comps, int N,
                       const Vec &y) {
  const double area = sphere_area(N);
  double q = 0;
  for (const auto &c : comps) {
    const double rho = dist(y, c.center);
    if (rho < 1e-300)
      return 1e300; // core density diverges at a component center
    const double pr = component_radial_pdf(c, N, rho);
    if (pr > 0)
      q += pr / (area * std::pow(rho, N - 1));
  }
  return q / static_cast<double>(comps.size());
}

Vec mixture_sample(const std::vector<MixtureComponent> &comps, int N,
                   const double *u) {
  const int K = static_cast<int>(comps.size());
  const int k = std::min(K - 1, static_cast<int>(u[0] * K));
  const MixtureComponent &c = comps[static_cast<std::size_t>(k)];
  const double rho = component_sample_radius(c, N, u[1]);
  double dir[kMaxDim];
  unit_direction(u + 2, N, dir);
  Vec y = c.center;
  for (int i = 0; i < N; ++i)
    y[i] += rho * dir[i];
  return y;
}

IntegralResult mixture_integral(const std::function<double(const Vec &)> &F,
                                const std::vector<MixtureComponent> &comps,
                                int N, const QuadratureSpec &spec,
                                double tail_bound, std::vector<double> *shift_means) {
  if (comps.empty())
    fail("QuadratureFailure", "mixture_integral needs at least one component");
  for (const auto &c : comps)
    if (!(c.kernel_pow < N))
      fail("ExponentOutOfRange", "kernel power must be < N");
  const int gdims = N + (N % 2);
  auto sample = [&](const double *u) {
    const Vec y = mixture_sample(comps, N, u);
    const double fv = F(y);
    if (fv == 0.0)
      return 0.0;
    return fv / mixture_density(comps, N, y);
  };
  return qmc_mean(2 + gdims, spec, sample, tail_bound, shift_means);
}

//==============================================================================

IntegralResult tube_integral(const std::function<double(const Vec &)> &F,
                             const std::vector<double> &w0, double rho,
                             const ProblemParams &p, const QuadratureSpec &spec,
                             const std::vector<MixtureComponent> &extra) {
  const int N = p.N;
  if (static_cast<int>(w0.size()) != N - 1)
    fail("BadCenterDimension", "tube center must live in R^{N-1}");
  const double r0 = w0[0];
  if (!(rho > 0) || !(rho < r0))
    fail("RhoOutOfRange",
         "tube radius must satisfy 0 < rho < r0 so the tube avoids the axis");
  const int Nm1 = N - 1;
  const double vol_w = ball_volume(Nm1, rho);
  const double area = sphere_area(N);
  const int K = 1 + static_cast<int>(extra.size());
  const int gdims = N + (N % 2); // enough Gaussians for both branch kinds

  auto in_tube = [&](const Vec &x) {
    const double r = std::hypot(x[0], x[1]);
    double dd = (r - w0[0]) * (r - w0[0]);
    for (int i = 1; i < Nm1; ++i) {
      const double t = x[i + 1] - w0[static_cast<std::size_t>(i)];
      dd += t * t;
    }
    return dd <= rho * rho;
  };

  auto density = [&](const Vec &x) {
    double q = 0;
    const double r = std::hypot(x[0], x[1]);
    // tube component: uniform in (w, theta), Jacobian dx = r dr dtheta dx''
    if (in_tube(x) && r > 1e-300)
      q += 1.0 / (vol_w * 2.0 * kPi * r);
    for (const auto &c : extra) {
      const double d = dist(x, c.center);
      if (d < 1e-300)
        return 1e300;
      const double pr = component_radial_pdf(c, N, d);
      if (pr > 0)
        q += pr / (area * std::pow(d, N - 1));
    }
    return q / K;
  };

  auto sample = [&](const double *u) {
    const int k = std::min(K - 1, static_cast<int>(u[0] * K));
    Vec x(N);
    if (k == 0) {
      // w uniform in the (N-1)-ball around w0, theta uniform on the circle
      const double rw = rho * std::pow(unit_clamp(u[1]), 1.0 / Nm1);
      double dir[kMaxDim];
      unit_direction(u + 3, Nm1, dir);
      double w[kMaxDim];
      for (int i = 0; i < Nm1; ++i)
        w[i] = w0[static_cast<std::size_t>(i)] + rw * dir[i];
      if (w[0] <= 0)
        return 0.0; // cannot happen for rho < r0, kept as a guard
      const double theta = 2.0 * kPi * u[2];
      x[0] = w[0] * std::cos(theta);
      x[1] = w[0] * std::sin(theta);
      for (int i = 1; i < Nm1; ++i)
        x[i + 1] = w[i];
    } else {
      const MixtureComponent &c = extra[static_cast<std::size_t>(k - 1)];
      const double d = component_sample_radius(c, N, u[1]);
      double dir[kMaxDim];
      unit_direction(u + 3, N, dir);
      x = c.center;
      for (int i = 0; i < N; ++i)
        x[i] += d * dir[i];
      if (!in_tube(x))
        return 0.0;
    }
    const double fv = F(x);
    if (fv == 0.0)
      return 0.0;
    return fv / density(x);
  };

  return qmc_mean(3 + gdims, spec, sample, 0.0);
}

//==============================================================================

IntegralResult
tube_pair_integral(const std::function<double(const Vec &, const Vec &)> &F,
                   const std::vector<double> &w0, double rho,
                   double kernel_pow, const std::vector<Vec> &peaks,
                   double peak_scale, const ProblemParams &p,
                   const QuadratureSpec &spec,
                   const std::vector<MixtureComponent> &extra) {
  const int N = p.N;
  if (static_cast<int>(w0.size()) != N - 1)
    fail("BadCenterDimension", "tube center must live in R^{N-1}");
  const double r0 = w0[0];
  if (!(rho > 0) || !(rho < r0))
    fail("RhoOutOfRange",
         "tube radius must satisfy 0 < rho < r0 so the tube avoids the axis");
  if (!(kernel_pow < N))
    fail("ExponentOutOfRange", "kernel power must be < N");
  const int Nm1 = N - 1;
  const double vol_w = ball_volume(Nm1, rho);
  const double area = sphere_area(N);
  const int K = 1 + static_cast<int>(extra.size());
  const int gdims = N + (N % 2);

  auto in_tube = [&](const Vec &x) {
    const double r = std::hypot(x[0], x[1]);
    double dd = (r - w0[0]) * (r - w0[0]);
    for (int i = 1; i < Nm1; ++i) {
      const double t = x[i + 1] - w0[static_cast<std::size_t>(i)];
      dd += t * t;
    }
    return dd <= rho * rho;
  };

  auto density_x = [&](const Vec &x) {
    double q = 0;
    const double r = std::hypot(x[0], x[1]);
    if (in_tube(x) && r > 1e-300)
      q += 1.0 / (vol_w * 2.0 * kPi * r);
    for (const auto &c : extra) {
      const double d = dist(x, c.center);
      if (d < 1e-300)
        return 1e300;
      const double pr = component_radial_pdf(c, N, d);
      if (pr > 0)
        q += pr / (area * std::pow(d, N - 1));
    }
    return q / K;
  };

  auto sample = [&](const double *u) {
    const int k = std::min(K - 1, static_cast<int>(u[0] * K));
    Vec x(N);
    if (k == 0) {
      const double rw = rho * std::pow(unit_clamp(u[1]), 1.0 / Nm1);
      double dir[kMaxDim];
      unit_direction(u + 3, Nm1, dir);
      double w[kMaxDim];
      for (int i = 0; i < Nm1; ++i)
        w[i] = w0[static_cast<std::size_t>(i)] + rw * dir[i];
      if (w[0] <= 0)
        return 0.0;
      const double theta = 2.0 * kPi * u[2];
      x[0] = w[0] * std::cos(theta);
      x[1] = w[0] * std::sin(theta);
      for (int i = 1; i < Nm1; ++i)
        x[i + 1] = w[i];
    } else {
      const MixtureComponent &c = extra[static_cast<std::size_t>(k - 1)];
      const double d = component_sample_radius(c, N, u[1]);
      double dir[kMaxDim];
      unit_direction(u + 3, N, dir);
      x = c.center;
      for (int i = 0; i < N; ++i)
        x[i] += d * dir[i];
      if (!in_tube(x))
        return 0.0;
    }
    const double qx = density_x(x);
    if (!(qx > 0) || qx >= 1e300)
      return 0.0;

    std::vector<MixtureComponent> wc;
    wc.reserve(1 + peaks.size());
    MixtureComponent k0;
    k0.center = Vec(N);
    k0.scale = peak_scale;
    k0.kernel_pow = kernel_pow;
    k0.radius = spec.domain_radius;
    wc.push_back(k0);
    for (const auto &z : peaks) {
      MixtureComponent c;
      c.center = z - x;
      c.scale = peak_scale;
      c.radius = spec.domain_radius;
      wc.push_back(c);
    }
    const double *uw = u + 3 + gdims;
    const Vec w = mixture_sample(wc, N, uw);
    const double qw = mixture_density(wc, N, w);
    if (!(qw > 0) || qw >= 1e300)
      return 0.0;
    const double wn = norm(w);
    if (wn < 1e-150)
      return 0.0;
    const double fv = F(x, x + w);
    if (fv == 0.0)
      return 0.0;
    return fv * std::pow(wn, -kernel_pow) / (qx * qw);
  };

  return qmc_mean(5 + 2 * gdims, spec, sample, 0.0);
}

} // namespace hartree::quad
